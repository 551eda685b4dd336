#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dimsel/errors.hpp"

namespace dimsel {

enum class EchoTime { kShort, kLong };

std::string_view to_string(EchoTime et);

/// Tumour class label. Atomic codes name one class; the composite codes
/// G1 (low-grade gliomas: a2+oa+od) and G2 (high-grade malignant: gl+me)
/// expand to sets of atomic codes at selection time and never appear in
/// stored datasets.
class ClassCode {
 public:
  explicit ClassCode(std::string_view code);

  const std::string& str() const { return code_; }
  bool composite() const { return members_.size() > 1; }
  /// Atomic members; an atomic code expands to itself.
  const std::vector<std::string>& members() const { return members_; }

  static const std::vector<std::string>& atomic_codes();
  static bool is_atomic(std::string_view code);

  friend bool operator==(const ClassCode& a, const ClassCode& b) {
    return a.code_ == b.code_;
  }

 private:
  std::string code_;
  std::vector<std::string> members_;
};

/// One labeled spectrum: m intensity samples for a single patient/voxel.
struct Spectrum {
  std::string id;
  std::string label;  // atomic class code
  EchoTime echo_time = EchoTime::kShort;
  Eigen::VectorXd intensities;
};

/// Equal-length spectra with unique ids. Row order is preserved from the
/// source (file or generator).
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Spectrum> spectra);

  Eigen::Index size() const { return static_cast<Eigen::Index>(spectra_.size()); }
  /// Samples per spectrum (0 when empty).
  Eigen::Index length() const { return m_; }
  bool empty() const { return spectra_.empty(); }

  const Spectrum& operator[](Eigen::Index i) const { return spectra_[static_cast<std::size_t>(i)]; }
  auto begin() const { return spectra_.begin(); }
  auto end() const { return spectra_.end(); }

  std::map<std::string, Eigen::Index> class_counts() const;

 private:
  std::vector<Spectrum> spectra_;
  Eigen::Index m_ = 0;
};

/// Rows of `x` are spectra; `targets` is -1 for class_a members and +1 for
/// class_b members, matching the tansig output range of the classifier.
struct BinaryDataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd targets;
  std::vector<std::string> ids;
  std::string class_a;
  std::string class_b;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index length() const { return x.cols(); }
  /// Row-submatrix of one side (target -1 or +1).
  Eigen::MatrixXd side(double target) const;
};

/// Keeps spectra whose label falls in either expansion and attaches binary
/// targets. Rejects identical or overlapping expansions and empty sides.
BinaryDataset select_binary(const Dataset& ds, const ClassCode& a, const ClassCode& b);

struct GaussianPeak {
  double center = 0.0;  // frequency index units, in [0, m)
  double width = 1.0;   // index units, > 0
  double amplitude = 1.0;
};

struct SynthClass {
  std::string label;
  Eigen::Index count = 0;
  std::vector<GaussianPeak> peaks;
};

/// Desk-scale generator spec: per class, spectra are the sum of Gaussian
/// peaks plus N(0, noise_sigma) noise. Identical seed gives a bit-identical
/// dataset.
struct SynthSpec {
  Eigen::Index m = 512;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  EchoTime echo_time = EchoTime::kShort;
  std::vector<SynthClass> classes;
};

Dataset synthesize(const SynthSpec& spec);

/// CSV layout: header `id,label,v0,...,v{m-1}`, one spectrum per row,
/// decimal floating point, no quoting. Echo time is not a column; it comes
/// from the file name suffix (_set.csv / _let.csv) or the caller.
Dataset load_dataset(const std::filesystem::path& path, EchoTime echo_time);
/// As above, with echo time inferred from the file name (default short).
Dataset load_dataset(const std::filesystem::path& path);

void write_dataset(const Dataset& ds, std::ostream& os);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

}  // namespace dimsel
