#pragma once

#include <Eigen/Core>
#include <cmath>
#include <iosfwd>
#include <utility>

#include "dimsel/dataset.hpp"

namespace dimsel {

/// Window of `width` samples starting at frequency index `start`;
/// start + width <= m.
struct WindowSlice {
  Eigen::Index start = 0;
  Eigen::Index width = 1;
};

/// Two class groups restricted to one window. Rows are members, columns the
/// window's w frequency samples.
struct GroupedWindows {
  Eigen::MatrixXd x;  // n   x w
  Eigen::MatrixXd y;  // m_y x w
};

/// Coordinate-wise means of the two groups.
std::pair<Eigen::VectorXd, Eigen::VectorXd> group_means(const GroupedWindows& g);

inline constexpr double kLambdaEpsilon = 1e-12;

/// Separability ratio on one window: distance between the group centroids
/// divided by the summed within-group scatter, both normalized by sqrt(w).
///
///   scatter = sum_i |x_i - mu_x| / (n sqrt(w)) + sum_j |y_j - mu_y| / (m_y sqrt(w))
///   dist    = |mu_x - mu_y| / sqrt(w)
///   lambda  = dist / scatter
///
/// Degenerate windows (scatter below kLambdaEpsilon) map to 0 when the
/// centroids also coincide and to dist/epsilon otherwise, so lambda stays
/// finite and comparable for ranking. Works for any real scalar type.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar lambda_from_groups(const Eigen::MatrixBase<DerivedX>& x,
                                             const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const Scalar eps = static_cast<Scalar>(kLambdaEpsilon);
  const auto w = x.cols();
  const Scalar sqrt_w = std::sqrt(static_cast<Scalar>(w));

  const Eigen::RowVector<Scalar, Eigen::Dynamic> mu_x = x.colwise().mean();
  const Eigen::RowVector<Scalar, Eigen::Dynamic> mu_y = y.colwise().mean();

  const Scalar scatter_x =
      (x.rowwise() - mu_x).rowwise().norm().sum() / (static_cast<Scalar>(x.rows()) * sqrt_w);
  const Scalar scatter_y =
      (y.rowwise() - mu_y).rowwise().norm().sum() / (static_cast<Scalar>(y.rows()) * sqrt_w);
  const Scalar scatter = scatter_x + scatter_y;
  const Scalar dist = (mu_x - mu_y).norm() / sqrt_w;

  if (scatter < eps) return dist < eps ? Scalar(0) : dist / eps;
  return dist / scatter;
}

double lambda_ratio(const GroupedWindows& g);

/// Per-position lambda for a fixed width: entry k covers indices
/// [k, k+w). Returns m-w+1 values. Both classes must be non-empty.
Eigen::VectorXd sweep_windows(const BinaryDataset& ds, Eigen::Index w);

/// Triangular table of lambda over every valid (start k, width w) pair,
/// stored flat in width-major order: the w=1 row (m cells) first, then
/// w=2 (m-1 cells), down to w=m (1 cell). m(m+1)/2 cells total.
class DissimilarityIndexMatrix {
 public:
  explicit DissimilarityIndexMatrix(Eigen::Index m);

  Eigen::Index signal_length() const { return m_; }
  Eigen::Index cell_count() const { return m_ * (m_ + 1) / 2; }

  double operator()(Eigen::Index k, Eigen::Index w) const {
    return values_[offset(w) + k];
  }
  double& cell(Eigen::Index k, Eigen::Index w) { return values_[offset(w) + k]; }

  /// All m-w+1 cells of one width, in start order.
  Eigen::Map<const Eigen::VectorXd> width_row(Eigen::Index w) const {
    return {values_.data() + offset(w), m_ - w + 1};
  }

  const Eigen::VectorXd& raw() const { return values_; }

 private:
  Eigen::Index offset(Eigen::Index w) const {
    // Rows 1..w-1 hold m, m-1, ..., m-w+2 cells.
    return (w - 1) * (m_ + 1) - (w - 1) * w / 2;
  }

  Eigen::Index m_;
  Eigen::VectorXd values_;
};

/// Fills the full triangle by sweeping every width. Widths are independent,
/// so they may be computed on `jobs` threads; the result is bit-identical
/// to the sequential build because each cell's reduction order is fixed.
DissimilarityIndexMatrix build_dim(const BinaryDataset& ds, int jobs = 1);

/// CSV export: header `k,w,lambda`, one valid cell per row, ascending (w, k).
void write_dim_csv(const DissimilarityIndexMatrix& dim, std::ostream& os);

/// 8-bit binary PGM (P5) heatmap: rows are widths (w = 1 at the top),
/// columns are starts, linear min-max scaling of lambda over the valid
/// cells, cells outside the triangle black.
void write_dim_pgm(const DissimilarityIndexMatrix& dim, std::ostream& os);

}  // namespace dimsel
