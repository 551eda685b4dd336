// Command-line front end for the spectra band-selection pipeline:
// synthetic datasets, dissimilarity matrices, zone energies, feature
// groups, classifier training, pairwise CV suites, and trend fits.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dimsel/dataset.hpp"
#include "dimsel/energy_select.hpp"
#include "dimsel/experiment.hpp"
#include "dimsel/neuralnet.hpp"
#include "dimsel/seeding.hpp"
#include "dimsel/text.hpp"
#include "dimsel/window_stats.hpp"

namespace fs = std::filesystem;
using namespace dimsel;

namespace {

struct GlobalOpts {
  std::string data;
  std::string out_dir = ".";
  std::string zones_spec;
  std::string echo = "auto";
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string mode = "paper";
  bool include_z1 = true;
};

ZoneConfig parse_zones(const std::string& spec) {
  ZoneConfig zc;
  if (spec.empty()) return zc;
  const auto parts = split(spec, ',');
  long z1 = 0, z2 = 0;
  if (parts.size() != 2 || !(std::istringstream(std::string(parts[0])) >> z1) ||
      !(std::istringstream(std::string(parts[1])) >> z2)) {
    throw CLI::ValidationError("--zones", "expected z1_end,z2_end");
  }
  zc.z1_end = z1;
  zc.z2_end = z2;
  return zc;
}

std::vector<int> parse_int_list(const std::string& spec, const char* flag) {
  std::vector<int> out;
  for (const auto tok : split(spec, ',')) {
    int v = 0;
    if (!(std::istringstream(std::string(tok)) >> v)) {
      throw CLI::ValidationError(flag, "expected a comma-separated integer list");
    }
    out.push_back(v);
  }
  return out;
}

std::pair<ClassCode, ClassCode> parse_pair(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 2) throw DataError("pair '" + spec + "' must be 'a:b'");
  return {ClassCode(parts[0]), ClassCode(parts[1])};
}

Dataset load_for(const GlobalOpts& g) {
  if (g.data.empty()) throw DataError("dataset not provided: use --data FILE");
  if (g.echo == "set") return load_dataset(g.data, EchoTime::kShort);
  if (g.echo == "let") return load_dataset(g.data, EchoTime::kLong);
  return load_dataset(g.data);
}

std::ofstream open_out(const GlobalOpts& g, const std::string& name,
                       std::ios::openmode mode = std::ios::out) {
  fs::create_directories(g.out_dir);
  const fs::path p = fs::path(g.out_dir) / name;
  std::ofstream out(p, mode);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  std::cout << "wrote " << p.string() << '\n';
  return out;
}

void echo_zones(const ZoneConfig& zc) {
  std::cout << "zones: z1_end=" << zc.z1_end << " z2_end=" << zc.z2_end << '\n';
}

// ----- synth ---------------------------------------------------------------

struct SynthOpts {
  std::string classes = "20,20";
  std::string labels;
  std::string sep_band;
  long m = 512;
  double band_amp = 1.0;
  double band_width = 0.0;  // 0 = band/6
  double noise = 0.0;
  std::string output = "dataset.csv";
};

int cmd_synth(const GlobalOpts& g, const SynthOpts& o) {
  const std::vector<int> counts = parse_int_list(o.classes, "--classes");
  std::vector<std::string> labels;
  if (!o.labels.empty()) {
    for (const auto tok : split(o.labels, ',')) labels.emplace_back(tok);
  } else {
    for (std::size_t i = 0; i < counts.size(); ++i) labels.push_back(ClassCode::atomic_codes()[i]);
  }
  if (labels.size() != counts.size()) {
    throw CLI::ValidationError("--labels", "label count must match class count");
  }

  SynthSpec spec;
  spec.m = o.m;
  spec.noise_sigma = o.noise;
  spec.seed = g.seed;
  spec.echo_time = g.echo == "let" ? EchoTime::kLong : EchoTime::kShort;

  double band_lo = 0, band_hi = 0;
  if (!o.sep_band.empty()) {
    const auto parts = split(o.sep_band, ':');
    if (parts.size() != 2 || !parse_double(parts[0], band_lo) || !parse_double(parts[1], band_hi) ||
        band_lo >= band_hi) {
      throw CLI::ValidationError("--sep-band", "expected lo:hi with lo < hi");
    }
    if (band_lo < 0 || band_hi > static_cast<double>(o.m)) {
      throw CLI::ValidationError("--sep-band", "band outside signal");
    }
  }

  // Shared line shapes so spectra look alike; only the band peak separates.
  const std::vector<GaussianPeak> baseline = {
      {0.30 * static_cast<double>(o.m), static_cast<double>(o.m) / 64.0, 1.0},
      {0.62 * static_cast<double>(o.m), static_cast<double>(o.m) / 40.0, 0.7},
  };
  for (std::size_t c = 0; c < counts.size(); ++c) {
    SynthClass sc;
    sc.label = labels[c];
    sc.count = counts[c];
    sc.peaks = baseline;
    if (!o.sep_band.empty() && c > 0) {
      const double width = o.band_width > 0 ? o.band_width : (band_hi - band_lo) / 6.0;
      sc.peaks.push_back({0.5 * (band_lo + band_hi), width, o.band_amp * static_cast<double>(c)});
    }
    spec.classes.push_back(std::move(sc));
  }

  const Dataset ds = synthesize(spec);
  write_dataset(ds, fs::path(o.output));
  std::cout << "wrote " << o.output << " (" << ds.size() << " spectra, m=" << ds.length()
            << ")\n";
  for (const auto& [label, count] : ds.class_counts()) {
    std::cout << "  " << label << ": " << count << '\n';
  }
  return 0;
}

// ----- dim / energy / select ------------------------------------------------

int cmd_dim(const GlobalOpts& g, const std::string& pair_spec) {
  const Dataset ds = load_for(g);
  const auto [a, b] = parse_pair(pair_spec);
  const BinaryDataset bin = select_binary(ds, a, b);
  const ZoneConfig zc = parse_zones(g.zones_spec);
  echo_zones(zc);

  const DissimilarityIndexMatrix dim = build_dim(bin, g.jobs);
  {
    auto csv = open_out(g, "dim.csv");
    write_dim_csv(dim, csv);
  }
  {
    auto pgm = open_out(g, "dim.pgm", std::ios::out | std::ios::binary);
    write_dim_pgm(dim, pgm);
  }
  try {
    const EnergyReport rep = energy_ratios(dim.width_row(1), zc);
    std::cout << "e1=" << format_double(rep.e1) << " e2=" << format_double(rep.e2)
              << " e3=" << format_double(rep.e3) << " r1=" << format_double(rep.r1)
              << " r2=" << format_double(rep.r2) << '\n';
  } catch (const NumericError& e) {
    std::cout << "zone energies unavailable: " << e.what() << '\n';
  }
  return 0;
}

int cmd_energy(const GlobalOpts& g, const std::string& pair_spec) {
  const Dataset ds = load_for(g);
  const auto [a, b] = parse_pair(pair_spec);
  const BinaryDataset bin = select_binary(ds, a, b);
  const ZoneConfig zc = parse_zones(g.zones_spec);
  echo_zones(zc);

  const Eigen::VectorXd lambdas = sweep_windows(bin, 1);
  const EnergyReport rep = energy_ratios(lambdas, zc);
  auto out = open_out(g, "energy.json");
  write_energy_json(rep, out);
  write_energy_json(rep, std::cout);
  return 0;
}

int cmd_select(const GlobalOpts& g, const std::string& pair_spec,
               const std::string& percents_spec) {
  const Dataset ds = load_for(g);
  const auto [a, b] = parse_pair(pair_spec);
  const BinaryDataset bin = select_binary(ds, a, b);
  const ZoneConfig zc = parse_zones(g.zones_spec);
  echo_zones(zc);

  const Eigen::VectorXd lambdas = sweep_windows(bin, 1);
  const auto groups = cumulative_groups(lambdas, zc, parse_int_list(percents_spec, "--percents"),
                                        g.include_z1);
  auto out = open_out(g, "groups.csv");
  write_groups_csv(groups, out);
  write_groups_csv(groups, std::cout);
  return 0;
}

// ----- train ----------------------------------------------------------------

int cmd_train(const GlobalOpts& g, const std::string& pair_spec, int percent,
              Eigen::Index n_hidden, int max_epochs) {
  const Dataset ds = load_for(g);
  const auto [a, b] = parse_pair(pair_spec);
  const BinaryDataset bin = select_binary(ds, a, b);
  const ZoneConfig zc = parse_zones(g.zones_spec);
  echo_zones(zc);

  const Eigen::VectorXd lambdas = sweep_windows(bin, 1);
  const auto groups = cumulative_groups(lambdas, zc, {percent}, g.include_z1);
  const std::vector<Eigen::Index>& idx = groups.front().indices;

  Eigen::MatrixXd x(bin.size(), static_cast<Eigen::Index>(idx.size()));
  for (Eigen::Index r = 0; r < bin.size(); ++r) {
    for (std::size_t c = 0; c < idx.size(); ++c) {
      x(r, static_cast<Eigen::Index>(c)) = bin.x(r, idx[c]);
    }
  }
  const FeatureScaler scaler = FeatureScaler::fit(x);

  NetworkConfig ncfg;
  ncfg.n_inputs = static_cast<Eigen::Index>(idx.size());
  ncfg.n_hidden = n_hidden;
  ncfg.max_epochs = max_epochs;
  ncfg.seed = derive_seed(g.seed, {fnv1a64(pair_spec), static_cast<std::uint64_t>(percent)});
  const TrainResult result = train(ncfg, scaler.transform(x), bin.targets);

  Eigen::Index correct = 0;
  const Eigen::VectorXd outv = forward_batch(result.state, scaler.transform(x));
  for (Eigen::Index i = 0; i < outv.size(); ++i) {
    if ((outv[i] < 0 ? -1.0 : 1.0) == bin.targets[i]) ++correct;
  }
  auto out = open_out(g, "model.txt");
  save_model(result.state, ncfg.seed, out);
  std::cout << "trained " << pair_spec << " on " << idx.size() << " variables ("
            << result.trace.size() << " accepted steps), training accuracy "
            << format_double(100.0 * static_cast<double>(correct) /
                             static_cast<double>(bin.size()))
            << "%\n";
  return 0;
}

// ----- suite / trend ---------------------------------------------------------

int cmd_suite(const GlobalOpts& g, const std::string& pairs_spec, bool all_pairs,
              const std::string& percents_spec, Eigen::Index n_hidden, int max_epochs) {
  const Dataset ds = load_for(g);
  SuiteConfig cfg;
  cfg.percents = parse_int_list(percents_spec, "--percents");
  cfg.zones = parse_zones(g.zones_spec);
  cfg.seed = g.seed;
  cfg.mode = g.mode == "nested" ? SelectionMode::kNested : SelectionMode::kPaper;
  cfg.include_z1 = g.include_z1;
  cfg.jobs = g.jobs;
  cfg.n_hidden = n_hidden;
  cfg.max_epochs = max_epochs;
  echo_zones(cfg.zones);

  std::vector<std::pair<ClassCode, ClassCode>> pairs;
  if (all_pairs) {
    std::vector<std::string> present;
    for (const auto& [label, count] : ds.class_counts()) {
      if (count >= cfg.folds) present.push_back(label);
    }
    for (std::size_t i = 0; i < present.size(); ++i) {
      for (std::size_t j = i + 1; j < present.size(); ++j) {
        pairs.emplace_back(ClassCode(present[i]), ClassCode(present[j]));
      }
    }
    if (pairs.size() < 1) throw DataError("fewer than 2 classes with >= 5 members");
  } else {
    for (const auto tok : pairs_spec.empty()
             ? std::vector<std::string_view>{}
             : split(pairs_spec, ',')) {
      pairs.push_back(parse_pair(std::string(tok)));
    }
    if (pairs.empty()) throw DataError("no pairs requested: use --pairs or --all-pairs");
  }

  const auto rows = run_pairwise_suite(ds, pairs, cfg);

  std::optional<TrendFit> trend;
  try {
    trend = trend_fit(rows);
  } catch (const DataError&) {
    // fewer than 6 rows or non-positive ratios: report without a trend
  }

  {
    auto csv = open_out(g, "suite.csv");
    write_suite_csv(rows, csv);
  }
  {
    auto json = open_out(g, "suite.json");
    write_suite_json(rows, trend, json);
  }
  write_suite_csv(rows, std::cout);
  if (trend) {
    std::cout << "trend coefficients:";
    for (int d = 0; d < 5; ++d) std::cout << ' ' << format_double(trend->coefficients[d]);
    std::cout << "\nspearman " << format_double(trend->spearman) << '\n';
  }
  return 0;
}

int cmd_trend(const std::string& suite_csv) {
  std::ifstream in(suite_csv);
  if (!in) throw DataError("cannot open '" + suite_csv + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty suite file");
  std::vector<double> ratios, means;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() < 3) throw DataError("malformed suite row '" + line + "'");
    double ratio = 0, mean = 0;
    if (!parse_double(fields[1], ratio) || !parse_double(fields[2], mean)) {
      throw DataError("malformed suite row '" + line + "'");
    }
    ratios.push_back(ratio);
    means.push_back(mean);
  }
  const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(ratios.data(),
                                                              static_cast<Eigen::Index>(ratios.size()));
  const Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(means.data(),
                                                              static_cast<Eigen::Index>(means.size()));
  const TrendFit fit = trend_fit(r, m);
  std::cout << "coefficients:";
  for (int d = 0; d < 5; ++d) std::cout << ' ' << format_double(fit.coefficients[d]);
  std::cout << "\nspearman " << format_double(fit.spearman) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-window band selection and classification for 1-D spectra"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "Master seed; all task seeds derive from it");
  app.add_option("--zones", g.zones_spec, "Zone boundaries z1_end,z2_end (default 120,400)");
  app.add_option("--jobs", g.jobs, "Worker threads for independent tasks");
  app.add_option("--out", g.out_dir, "Output directory (default .)");
  app.add_option("--mode", g.mode, "Feature selection mode: paper | nested")
      ->check(CLI::IsMember({"paper", "nested"}));
  app.add_option("--include-z1", g.include_z1, "Allow Z1 variables in the ranking");
  app.add_option("--data", g.data, "Dataset CSV path");
  app.add_option("--echo", g.echo, "Echo time tag: set | let | auto (from file name)")
      ->check(CLI::IsMember({"set", "let", "auto"}));

  SynthOpts so;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled dataset CSV");
  synth->add_option("--classes", so.classes, "Per-class spectrum counts, e.g. 20,20");
  synth->add_option("--labels", so.labels, "Class labels (defaults: a2,a3,ab,...)");
  synth->add_option("--m", so.m, "Samples per spectrum (default 512)");
  synth->add_option("--sep-band", so.sep_band, "Separating band lo:hi (omit for identical classes)");
  synth->add_option("--band-amp", so.band_amp, "Band peak amplitude step per class");
  synth->add_option("--band-width", so.band_width, "Band peak width (default band/6)");
  synth->add_option("--noise", so.noise, "Gaussian noise sigma");
  synth->add_option("-o,--output", so.output, "Output CSV path");

  std::string pair_spec, percents_spec = "1,2,3,4,5,6,7,8,9,10", pairs_spec, suite_csv;
  bool all_pairs = false;
  int percent = 10;
  Eigen::Index n_hidden = 20;
  int max_epochs = 150;

  auto* dim = app.add_subcommand("dim", "Dissimilarity matrix CSV + PGM heatmap for one pair");
  dim->add_option("--pair", pair_spec, "Class pair a:b (composites G1/G2 allowed)")->required();

  auto* energy = app.add_subcommand("energy", "Zone energies and ratios for one pair");
  energy->add_option("--pair", pair_spec, "Class pair a:b")->required();

  auto* select = app.add_subcommand("select", "Cumulative-energy feature groups for one pair");
  select->add_option("--pair", pair_spec, "Class pair a:b")->required();
  select->add_option("--percents", percents_spec, "Energy percentages, e.g. 1,2,...,10");

  auto* train_cmd = app.add_subcommand("train", "Train one classifier on a feature group");
  train_cmd->add_option("--pair", pair_spec, "Class pair a:b")->required();
  train_cmd->add_option("--percent", percent, "Feature group energy percentage");
  train_cmd->add_option("--hidden", n_hidden, "Hidden units (default 20)");
  train_cmd->add_option("--max-epochs", max_epochs, "Epoch cap (default 150)");

  auto* suite = app.add_subcommand("suite", "Pairwise CV suite with reports and trend fit");
  suite->add_option("--pairs", pairs_spec, "Comma-separated pairs, e.g. gl:me,a2:a3");
  suite->add_flag("--all-pairs", all_pairs, "Run every class pair with enough members");
  suite->add_option("--percents", percents_spec, "Energy percentages to sweep");
  suite->add_option("--hidden", n_hidden, "Hidden units (default 20)");
  suite->add_option("--max-epochs", max_epochs, "Epoch cap (default 150)");

  auto* trend = app.add_subcommand("trend", "Fit the ratio-vs-accuracy trend from a suite CSV");
  trend->add_option("--suite", suite_csv, "suite.csv produced by the suite command")->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(g, so);
    if (dim->parsed()) return cmd_dim(g, pair_spec);
    if (energy->parsed()) return cmd_energy(g, pair_spec);
    if (select->parsed()) return cmd_select(g, pair_spec, percents_spec);
    if (train_cmd->parsed()) return cmd_train(g, pair_spec, percent, n_hidden, max_epochs);
    if (suite->parsed()) return cmd_suite(g, pairs_spec, all_pairs, percents_spec, n_hidden,
                                          max_epochs);
    if (trend->parsed()) return cmd_trend(suite_csv);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // normalize usage failures to exit 1
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
