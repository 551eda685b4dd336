#include "dimsel/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <unordered_set>

#include "dimsel/text.hpp"

namespace dimsel {

namespace {

const std::vector<std::string> kAtomicCodes = {
    "a2", "a3", "ab", "gl", "hb", "ly", "me", "mm",
    "no", "oa", "od", "pi", "pn", "ra", "sc"};

}  // namespace

std::string_view to_string(EchoTime et) {
  return et == EchoTime::kShort ? "set" : "let";
}

const std::vector<std::string>& ClassCode::atomic_codes() { return kAtomicCodes; }

bool ClassCode::is_atomic(std::string_view code) {
  return std::find(kAtomicCodes.begin(), kAtomicCodes.end(), code) != kAtomicCodes.end();
}

ClassCode::ClassCode(std::string_view code) : code_(code) {
  if (code == "G1") {
    members_ = {"a2", "oa", "od"};
  } else if (code == "G2") {
    members_ = {"gl", "me"};
  } else if (is_atomic(code)) {
    members_ = {code_};
  } else {
    throw DataError("unknown class code '" + code_ + "'");
  }
}

Dataset::Dataset(std::vector<Spectrum> spectra) : spectra_(std::move(spectra)) {
  if (spectra_.empty()) return;
  m_ = spectra_.front().intensities.size();
  std::unordered_set<std::string> seen;
  for (const Spectrum& s : spectra_) {
    if (s.intensities.size() != m_) {
      throw DataError("spectrum '" + s.id + "' has length " +
                      std::to_string(s.intensities.size()) + ", expected " +
                      std::to_string(m_));
    }
    if (!s.intensities.allFinite()) {
      throw DataError("spectrum '" + s.id + "' contains a non-finite value");
    }
    if (!ClassCode::is_atomic(s.label)) {
      throw DataError("spectrum '" + s.id + "' has non-atomic label '" + s.label + "'");
    }
    if (!seen.insert(s.id).second) {
      throw DataError("duplicate spectrum id '" + s.id + "'");
    }
  }
}

std::map<std::string, Eigen::Index> Dataset::class_counts() const {
  std::map<std::string, Eigen::Index> counts;
  for (const Spectrum& s : spectra_) ++counts[s.label];
  return counts;
}

Eigen::MatrixXd BinaryDataset::side(double target) const {
  const Eigen::Index n = (targets.array() == target).count();
  Eigen::MatrixXd out(n, x.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    if (targets[i] == target) out.row(r++) = x.row(i);
  }
  return out;
}

BinaryDataset select_binary(const Dataset& ds, const ClassCode& a, const ClassCode& b) {
  if (a == b) {
    throw DataError("identical classes '" + a.str() + "' vs '" + b.str() + "'");
  }
  for (const std::string& ma : a.members()) {
    for (const std::string& mb : b.members()) {
      if (ma == mb) {
        throw DataError("overlapping class expansions '" + a.str() + "' and '" +
                        b.str() + "' share '" + ma + "'");
      }
    }
  }

  auto in = [](const std::vector<std::string>& members, const std::string& label) {
    return std::find(members.begin(), members.end(), label) != members.end();
  };

  std::vector<Eigen::Index> rows;
  std::vector<double> targets;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    if (in(a.members(), ds[i].label)) {
      rows.push_back(i);
      targets.push_back(-1.0);
    } else if (in(b.members(), ds[i].label)) {
      rows.push_back(i);
      targets.push_back(+1.0);
    }
  }

  BinaryDataset bin;
  bin.class_a = a.str();
  bin.class_b = b.str();
  bin.x.resize(static_cast<Eigen::Index>(rows.size()), ds.length());
  bin.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    bin.x.row(static_cast<Eigen::Index>(r)) = ds[rows[r]].intensities;
    bin.targets[static_cast<Eigen::Index>(r)] = targets[r];
    bin.ids.push_back(ds[rows[r]].id);
  }
  if ((bin.targets.array() == -1.0).count() == 0) {
    throw DataError("no spectra for class '" + a.str() + "'");
  }
  if ((bin.targets.array() == +1.0).count() == 0) {
    throw DataError("no spectra for class '" + b.str() + "'");
  }
  return bin;
}

Dataset synthesize(const SynthSpec& spec) {
  if (spec.m <= 0) throw DataError("signal length must be positive");
  if (spec.noise_sigma < 0) throw DataError("noise sigma must be non-negative");
  for (const SynthClass& c : spec.classes) {
    if (c.count <= 0) throw DataError("class '" + c.label + "' has non-positive count");
    for (const GaussianPeak& p : c.peaks) {
      if (p.center < 0 || p.center >= static_cast<double>(spec.m)) {
        throw DataError("peak center " + format_double(p.center) +
                        " outside signal [0, " + std::to_string(spec.m) + ")");
      }
      if (p.width <= 0) throw DataError("peak width must be positive");
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<Spectrum> spectra;
  for (const SynthClass& c : spec.classes) {
    // Deterministic peak sum, shared by every member of the class.
    Eigen::VectorXd base = Eigen::VectorXd::Zero(spec.m);
    for (const GaussianPeak& p : c.peaks) {
      for (Eigen::Index t = 0; t < spec.m; ++t) {
        const double d = static_cast<double>(t) - p.center;
        base[t] += p.amplitude * std::exp(-d * d / (2.0 * p.width * p.width));
      }
    }
    for (Eigen::Index i = 0; i < c.count; ++i) {
      Spectrum s;
      s.id = c.label + "_" + std::to_string(i);
      s.label = c.label;
      s.echo_time = spec.echo_time;
      s.intensities = base;
      if (spec.noise_sigma > 0) {
        for (Eigen::Index t = 0; t < spec.m; ++t) {
          s.intensities[t] += spec.noise_sigma * noise(rng);
        }
      }
      spectra.push_back(std::move(s));
    }
  }
  return Dataset(std::move(spectra));
}

namespace {

EchoTime echo_from_name(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  if (name.ends_with("_let.csv")) return EchoTime::kLong;
  return EchoTime::kShort;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, echo_from_name(path));
}

Dataset load_dataset(const std::filesystem::path& path, EchoTime echo_time) {
  std::ifstream in(path);
  if (!in) throw DataError("dataset not provided: cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  auto header = split(line, ',');
  if (header.size() < 3 || header[0] != "id" || header[1] != "label" || header[2] != "v0") {
    throw DataError(path.string() + ": bad header, expected id,label,v0,...");
  }
  const std::size_t m = header.size() - 2;
  for (std::size_t j = 0; j < m; ++j) {
    if (header[j + 2] != "v" + std::to_string(j)) {
      throw DataError(path.string() + ": bad header column '" + std::string(header[j + 2]) + "'");
    }
  }

  std::vector<Spectrum> spectra;
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    auto fields = split(line, ',');
    if (fields.size() != m + 2) {
      throw DataError(path.string() + ": wrong column count at row " + std::to_string(row) +
                      " (expected " + std::to_string(m + 2) + ", got " +
                      std::to_string(fields.size()) + ")");
    }
    Spectrum s;
    s.id = std::string(fields[0]);
    s.label = std::string(fields[1]);
    if (!ClassCode::is_atomic(s.label)) {
      throw DataError(path.string() + ": unknown class code '" + s.label + "' at row " +
                      std::to_string(row));
    }
    s.echo_time = echo_time;
    s.intensities.resize(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      double v = 0;
      if (!parse_double(fields[j + 2], v)) {
        throw DataError(path.string() + ": malformed value '" + std::string(fields[j + 2]) +
                        "' at row " + std::to_string(row));
      }
      if (!std::isfinite(v)) {
        throw DataError(path.string() + ": non-finite value at row " + std::to_string(row));
      }
      s.intensities[static_cast<Eigen::Index>(j)] = v;
    }
    spectra.push_back(std::move(s));
  }

  try {
    return Dataset(std::move(spectra));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_dataset(const Dataset& ds, std::ostream& os) {
  os << "id,label";
  for (Eigen::Index j = 0; j < ds.length(); ++j) os << ",v" << j;
  os << '\n';
  for (const Spectrum& s : ds) {
    os << s.id << ',' << s.label;
    for (Eigen::Index j = 0; j < s.intensities.size(); ++j) {
      os << ',' << format_double(s.intensities[j]);
    }
    os << '\n';
  }
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_dataset(ds, out);
}

}  // namespace dimsel
