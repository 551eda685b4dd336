#include "dimsel/experiment.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <ostream>
#include <random>
#include <thread>

#include "dimsel/seeding.hpp"
#include "dimsel/text.hpp"
#include "dimsel/window_stats.hpp"

namespace dimsel {

CVResult make_cv_result(int percent, Eigen::Index n_vars, Eigen::VectorXd fold_accuracies) {
  CVResult cv;
  cv.percent = percent;
  cv.n_vars = n_vars;
  cv.mean = fold_accuracies.mean();
  const Eigen::Index k = fold_accuracies.size();
  cv.stdev = k > 1 ? std::sqrt((fold_accuracies.array() - cv.mean).square().sum() /
                               static_cast<double>(k - 1))
                   : 0.0;
  cv.fold_accuracies = std::move(fold_accuracies);
  return cv;
}

std::vector<std::vector<Eigen::Index>> stratified_kfold(const std::vector<int>& strata,
                                                        int k, std::uint64_t seed) {
  if (k < 2) throw DataError("need at least 2 folds");
  std::map<int, std::vector<Eigen::Index>> by_class;
  for (std::size_t i = 0; i < strata.size(); ++i) {
    by_class[strata[i]].push_back(static_cast<Eigen::Index>(i));
  }
  for (const auto& [label, members] : by_class) {
    if (members.size() < static_cast<std::size_t>(k)) {
      throw DataError("class " + std::to_string(label) + " has " +
                      std::to_string(members.size()) + " members, fewer than k=" +
                      std::to_string(k));
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
  for (auto& [label, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < members.size(); ++j) {
      folds[j % static_cast<std::size_t>(k)].push_back(members[j]);
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

std::vector<std::vector<Eigen::Index>> stratified_kfold(const BinaryDataset& ds, int k,
                                                        std::uint64_t seed) {
  std::vector<int> strata(static_cast<std::size_t>(ds.size()));
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    strata[static_cast<std::size_t>(i)] = ds.targets[i] < 0 ? 0 : 1;
  }
  return stratified_kfold(strata, k, seed);
}

namespace {

Eigen::MatrixXd take_rows_cols(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows,
                               const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x(rows[r], cols[c]);
    }
  }
  return out;
}

BinaryDataset subset_rows(const BinaryDataset& ds, const std::vector<Eigen::Index>& rows) {
  BinaryDataset out;
  out.class_a = ds.class_a;
  out.class_b = ds.class_b;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), ds.x.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.x.row(static_cast<Eigen::Index>(r)) = ds.x.row(rows[r]);
    out.targets[static_cast<Eigen::Index>(r)] = ds.targets[rows[r]];
    out.ids.push_back(ds.ids[static_cast<std::size_t>(rows[r])]);
  }
  return out;
}

double fold_accuracy(const NetworkState& net, const FeatureScaler& scaler,
                     const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test) {
  const Eigen::VectorXd out = forward_batch(net, scaler.transform(x_test));
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double pred = out[i] < 0.0 ? -1.0 : +1.0;
    if (pred == y_test[i]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(out.size());
}

}  // namespace

ExperimentRow run_pair(const Dataset& ds, const ClassCode& a, const ClassCode& b,
                       const SuiteConfig& cfg) {
  const BinaryDataset bin = select_binary(ds, a, b);
  cfg.zones.validate(bin.length());

  // The 10% group always participates: it defines the row's ratio.
  std::vector<int> percents = cfg.percents;
  if (std::find(percents.begin(), percents.end(), 10) == percents.end()) {
    percents.push_back(10);
  }
  std::sort(percents.begin(), percents.end());
  percents.erase(std::unique(percents.begin(), percents.end()), percents.end());

  const std::uint64_t pair_tag = fnv1a64(a.str() + ":" + b.str());
  const auto folds =
      stratified_kfold(bin, cfg.folds, derive_seed(cfg.seed, {pair_tag, 0xF01Du}));

  const Eigen::VectorXd lambdas = sweep_windows(bin, 1);
  const std::vector<FeatureGroup> groups =
      cumulative_groups(lambdas, cfg.zones, percents, cfg.include_z1);

  ExperimentRow row;
  row.class_a = a.str();
  row.class_b = b.str();

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const int percent = groups[gi].percent;
    if (percent == 10) row.ratio_e10_e3 = groups[gi].group_energy_ratio;

    Eigen::VectorXd accs(cfg.folds);
    for (int f = 0; f < cfg.folds; ++f) {
      std::vector<Eigen::Index> train_rows;
      for (int g = 0; g < cfg.folds; ++g) {
        if (g == f) continue;
        train_rows.insert(train_rows.end(), folds[static_cast<std::size_t>(g)].begin(),
                          folds[static_cast<std::size_t>(g)].end());
      }
      std::sort(train_rows.begin(), train_rows.end());
      const std::vector<Eigen::Index>& test_rows = folds[static_cast<std::size_t>(f)];

      const std::vector<Eigen::Index>* indices = &groups[gi].indices;
      std::vector<Eigen::Index> nested_indices;
      if (cfg.mode == SelectionMode::kNested) {
        // Selection redone from the training folds only.
        const BinaryDataset train_bin = subset_rows(bin, train_rows);
        const Eigen::VectorXd lam_f = sweep_windows(train_bin, 1);
        const auto fold_groups =
            cumulative_groups(lam_f, cfg.zones, {percent}, cfg.include_z1);
        nested_indices = fold_groups.front().indices;
        indices = &nested_indices;
      }

      const Eigen::MatrixXd x_train = take_rows_cols(bin.x, train_rows, *indices);
      const Eigen::MatrixXd x_test = take_rows_cols(bin.x, test_rows, *indices);
      Eigen::VectorXd y_train(static_cast<Eigen::Index>(train_rows.size()));
      for (std::size_t r = 0; r < train_rows.size(); ++r) {
        y_train[static_cast<Eigen::Index>(r)] = bin.targets[train_rows[r]];
      }
      Eigen::VectorXd y_test(static_cast<Eigen::Index>(test_rows.size()));
      for (std::size_t r = 0; r < test_rows.size(); ++r) {
        y_test[static_cast<Eigen::Index>(r)] = bin.targets[test_rows[r]];
      }

      const FeatureScaler scaler = FeatureScaler::fit(x_train);
      NetworkConfig ncfg;
      ncfg.n_inputs = static_cast<Eigen::Index>(indices->size());
      ncfg.n_hidden = cfg.n_hidden;
      ncfg.max_epochs = cfg.max_epochs;
      ncfg.seed = derive_seed(cfg.seed, {pair_tag, static_cast<std::uint64_t>(percent),
                                         static_cast<std::uint64_t>(f)});
      const TrainResult tr = train(ncfg, scaler.transform(x_train), y_train);
      accs[f] = fold_accuracy(tr.state, scaler, x_test, y_test);
    }

    row.all.push_back(
        make_cv_result(percent, static_cast<Eigen::Index>(groups[gi].indices.size()),
                       std::move(accs)));
  }

  for (const CVResult& cv : row.all) {
    if (cv.percent == 10) row.at_10 = cv;
  }
  row.best = row.all.front();
  for (const CVResult& cv : row.all) {
    if (cv.mean > row.best.mean) row.best = cv;
  }
  row.best_percent = row.best.percent;
  return row;
}

std::vector<ExperimentRow> run_pairwise_suite(
    const Dataset& ds, const std::vector<std::pair<ClassCode, ClassCode>>& pairs,
    const SuiteConfig& cfg) {
  std::vector<ExperimentRow> rows(pairs.size());

  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(pairs.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      rows[i] = run_pair(ds, pairs[i].first, pairs[i].second, cfg);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= pairs.size()) return;
        try {
          rows[i] = run_pair(ds, pairs[i].first, pairs[i].second, cfg);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::sort(rows.begin(), rows.end(), [](const ExperimentRow& r1, const ExperimentRow& r2) {
    if (r1.ratio_e10_e3 != r2.ratio_e10_e3) return r1.ratio_e10_e3 < r2.ratio_e10_e3;
    const std::string n1 = r1.class_a + ":" + r1.class_b;
    const std::string n2 = r2.class_a + ":" + r2.class_b;
    return n1 < n2;
  });
  return rows;
}

namespace {

Eigen::VectorXd average_ranks(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });

  Eigen::VectorXd ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && v[order[static_cast<std::size_t>(j + 1)]] ==
                            v[order[static_cast<std::size_t>(i)]]) {
      ++j;
    }
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (Eigen::Index t = i; t <= j; ++t) ranks[order[static_cast<std::size_t>(t)]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_rank_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("rank correlation needs two equal-length samples");
  }
  const Eigen::VectorXd ra = average_ranks(a);
  const Eigen::VectorXd rb = average_ranks(b);
  const Eigen::VectorXd da = ra.array() - ra.mean();
  const Eigen::VectorXd db = rb.array() - rb.mean();
  const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  if (denom == 0) return 0.0;  // a constant sequence carries no rank signal
  return da.dot(db) / denom;
}

TrendFit trend_fit(const Eigen::VectorXd& ratios, const Eigen::VectorXd& accuracies) {
  if (ratios.size() != accuracies.size()) {
    throw std::invalid_argument("ratio/accuracy length mismatch");
  }
  if (ratios.size() < 6) throw DataError("trend fit needs at least 6 points");
  if ((ratios.array() <= 0).any()) throw DataError("trend fit needs positive ratios");

  const Eigen::VectorXd u = ratios.array().log();
  Eigen::MatrixXd design(u.size(), 5);
  design.col(0).setOnes();
  for (int d = 1; d <= 4; ++d) {
    design.col(d) = design.col(d - 1).array() * u.array();
  }
  TrendFit fit;
  fit.coefficients = design.colPivHouseholderQr().solve(accuracies);
  fit.spearman = spearman_rank_correlation(ratios, accuracies);
  return fit;
}

TrendFit trend_fit(const std::vector<ExperimentRow>& rows) {
  Eigen::VectorXd ratios(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd accs(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ratios[static_cast<Eigen::Index>(i)] = rows[i].ratio_e10_e3;
    accs[static_cast<Eigen::Index>(i)] = rows[i].at_10.mean;
  }
  return trend_fit(ratios, accs);
}

void write_suite_csv(const std::vector<ExperimentRow>& rows, std::ostream& os) {
  os << "pair,ratio_e10_e3,mean_at_10,std_at_10,best_mean,best_std,best_percent,"
        "n_vars_at_10\n";
  for (const ExperimentRow& r : rows) {
    os << r.class_a << ':' << r.class_b << ',' << format_double(r.ratio_e10_e3) << ','
       << format_double(r.at_10.mean) << ',' << format_double(r.at_10.stdev) << ','
       << format_double(r.best.mean) << ',' << format_double(r.best.stdev) << ','
       << r.best_percent << ',' << r.at_10.n_vars << '\n';
  }
}

void write_suite_json(const std::vector<ExperimentRow>& rows,
                      const std::optional<TrendFit>& trend, std::ostream& os) {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const ExperimentRow& r : rows) {
    nlohmann::json jr;
    jr["pair"] = r.class_a + ":" + r.class_b;
    jr["ratio_e10_e3"] = r.ratio_e10_e3;
    jr["best_percent"] = r.best_percent;
    jr["results"] = nlohmann::json::array();
    for (const CVResult& cv : r.all) {
      nlohmann::json jc;
      jc["percent"] = cv.percent;
      jc["n_vars"] = cv.n_vars;
      jc["mean"] = cv.mean;
      jc["stdev"] = cv.stdev;
      jc["folds"] = std::vector<double>(cv.fold_accuracies.data(),
                                        cv.fold_accuracies.data() + cv.fold_accuracies.size());
      jr["results"].push_back(jc);
    }
    j["rows"].push_back(jr);
  }
  if (trend) {
    j["trend"] = {
        {"coefficients", std::vector<double>(trend->coefficients.data(),
                                             trend->coefficients.data() + 5)},
        {"spearman", trend->spearman},
    };
  }
  os << j.dump(2) << '\n';
}

}  // namespace dimsel
