#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dimsel/dataset.hpp"
#include "dimsel/energy_select.hpp"
#include "dimsel/neuralnet.hpp"

namespace dimsel {

/// Five-fold cross-validation of one feature group: per-fold accuracies in
/// percent, their mean, and sample standard deviation (n-1 denominator).
struct CVResult {
  int percent = 0;
  Eigen::Index n_vars = 0;
  Eigen::VectorXd fold_accuracies;
  double mean = 0;
  double stdev = 0;
};

CVResult make_cv_result(int percent, Eigen::Index n_vars, Eigen::VectorXd fold_accuracies);

/// One pairwise experiment: the 10%-group energy ratio, the CV result at
/// 10%, and the best CV result over the swept percents.
struct ExperimentRow {
  std::string class_a, class_b;
  double ratio_e10_e3 = 0;
  CVResult at_10;
  CVResult best;
  int best_percent = 0;
  std::vector<CVResult> all;  // per-percent detail, ascending percent
};

/// `paper` selects features once on the full pair dataset before CV
/// (selection precedes the folds, so it leaks into test data). `nested`
/// redoes selection inside each training fold for honest generalization
/// estimates.
enum class SelectionMode { kPaper, kNested };

struct SuiteConfig {
  std::vector<int> percents = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  ZoneConfig zones;
  std::uint64_t seed = 0;
  SelectionMode mode = SelectionMode::kPaper;
  bool include_z1 = true;
  int folds = 5;
  Eigen::Index n_hidden = 20;
  int max_epochs = 150;
  int jobs = 1;
};

/// Partitions indices into k disjoint folds with per-stratum counts
/// differing by at most one across folds. Every stratum needs >= k
/// members. Deterministic under seed.
std::vector<std::vector<Eigen::Index>> stratified_kfold(const std::vector<int>& strata,
                                                        int k, std::uint64_t seed);

/// As above, stratified on the -1/+1 targets of a binary dataset.
std::vector<std::vector<Eigen::Index>> stratified_kfold(const BinaryDataset& ds, int k,
                                                        std::uint64_t seed);

/// Full protocol for one pair: w=1 lambda sweep, cumulative-energy groups
/// (10% always included in the sweep), k-fold CV per group with fold-wise
/// z-scoring, and the best percent (smallest percent wins mean ties).
ExperimentRow run_pair(const Dataset& ds, const ClassCode& a, const ClassCode& b,
                       const SuiteConfig& cfg);

/// One row per pair, sorted ascending by ratio_e10_e3, ties by pair name.
std::vector<ExperimentRow> run_pairwise_suite(
    const Dataset& ds, const std::vector<std::pair<ClassCode, ClassCode>>& pairs,
    const SuiteConfig& cfg);

/// Least-squares fit of accuracy against {1, u, u^2, u^3, u^4} with
/// u = ln(ratio), plus the Spearman rank correlation of (ratio, accuracy).
struct TrendFit {
  Eigen::VectorXd coefficients;  // degree 0..4
  double spearman = 0;
};

/// Needs >= 6 points and strictly positive ratios.
TrendFit trend_fit(const Eigen::VectorXd& ratios, const Eigen::VectorXd& accuracies);
/// Fit over (ratio_e10_e3, at_10.mean) of the rows.
TrendFit trend_fit(const std::vector<ExperimentRow>& rows);

double spearman_rank_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// CSV report mirroring the pairwise table:
/// `pair,ratio_e10_e3,mean_at_10,std_at_10,best_mean,best_std,best_percent,n_vars_at_10`.
void write_suite_csv(const std::vector<ExperimentRow>& rows, std::ostream& os);

/// JSON report with per-fold detail and, when present, the trend fit.
void write_suite_json(const std::vector<ExperimentRow>& rows,
                      const std::optional<TrendFit>& trend, std::ostream& os);

}  // namespace dimsel
