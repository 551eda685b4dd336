#include "dimsel/window_stats.hpp"

#include <algorithm>
#include <ostream>
#include <thread>
#include <vector>

#include "dimsel/text.hpp"

namespace dimsel {

std::pair<Eigen::VectorXd, Eigen::VectorXd> group_means(const GroupedWindows& g) {
  if (g.x.rows() < 1 || g.y.rows() < 1) throw DataError("empty window group");
  if (g.x.cols() != g.y.cols()) throw DataError("window groups have different widths");
  return {g.x.colwise().mean(), g.y.colwise().mean()};
}

double lambda_ratio(const GroupedWindows& g) {
  if (g.x.rows() < 1 || g.y.rows() < 1) throw DataError("empty window group");
  if (g.x.cols() != g.y.cols()) throw DataError("window groups have different widths");
  return lambda_from_groups(g.x, g.y);
}

namespace {

// Class sides and their deviations from the class mean, computed once per
// dataset so every window slice reuses the same values.
struct SweepContext {
  Eigen::MatrixXd dev_x, dev_y;      // member-minus-mean, per class
  Eigen::RowVectorXd mean_diff;      // mu_x - mu_y over the full axis
  Eigen::Index n_x = 0, n_y = 0;

  explicit SweepContext(const BinaryDataset& ds) {
    const Eigen::MatrixXd gx = ds.side(-1.0);
    const Eigen::MatrixXd gy = ds.side(+1.0);
    n_x = gx.rows();
    n_y = gy.rows();
    if (n_x == 0 || n_y == 0) {
      throw DataError("empty class in pair '" + ds.class_a + "' vs '" + ds.class_b + "'");
    }
    const Eigen::RowVectorXd mu_x = gx.colwise().mean();
    const Eigen::RowVectorXd mu_y = gy.colwise().mean();
    dev_x = gx.rowwise() - mu_x;
    dev_y = gy.rowwise() - mu_y;
    mean_diff = mu_x - mu_y;
  }

  double lambda_at(Eigen::Index k, Eigen::Index w) const {
    const double sqrt_w = std::sqrt(static_cast<double>(w));
    const double scatter =
        dev_x.middleCols(k, w).rowwise().norm().sum() / (static_cast<double>(n_x) * sqrt_w) +
        dev_y.middleCols(k, w).rowwise().norm().sum() / (static_cast<double>(n_y) * sqrt_w);
    const double dist = mean_diff.segment(k, w).norm() / sqrt_w;
    if (scatter < kLambdaEpsilon) return dist < kLambdaEpsilon ? 0.0 : dist / kLambdaEpsilon;
    return dist / scatter;
  }
};

void sweep_into(const SweepContext& ctx, Eigen::Index m, Eigen::Index w, double* out) {
  for (Eigen::Index k = 0; k + w <= m; ++k) out[k] = ctx.lambda_at(k, w);
}

}  // namespace

Eigen::VectorXd sweep_windows(const BinaryDataset& ds, Eigen::Index w) {
  const Eigen::Index m = ds.length();
  if (w < 1 || w > m) {
    throw DataError("window width " + std::to_string(w) + " outside [1, " +
                    std::to_string(m) + "]");
  }
  const SweepContext ctx(ds);
  Eigen::VectorXd out(m - w + 1);
  sweep_into(ctx, m, w, out.data());
  return out;
}

DissimilarityIndexMatrix::DissimilarityIndexMatrix(Eigen::Index m)
    : m_(m), values_(Eigen::VectorXd::Zero(m * (m + 1) / 2)) {
  if (m < 1) throw DataError("signal length must be positive");
}

DissimilarityIndexMatrix build_dim(const BinaryDataset& ds, int jobs) {
  const Eigen::Index m = ds.length();
  const SweepContext ctx(ds);
  DissimilarityIndexMatrix dim(m);

  auto run_widths = [&](Eigen::Index w_begin, Eigen::Index w_end) {
    for (Eigen::Index w = w_begin; w < w_end; ++w) {
      sweep_into(ctx, m, w, &dim.cell(0, w));
    }
  };

  if (jobs <= 1 || m == 1) {
    run_widths(1, m + 1);
    return dim;
  }

  const int n_threads = static_cast<int>(std::min<Eigen::Index>(jobs, m));
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(n_threads));
  // Contiguous width blocks; every cell is written exactly once.
  const Eigen::Index chunk = (m + n_threads - 1) / n_threads;
  for (int t = 0; t < n_threads; ++t) {
    const Eigen::Index w_begin = 1 + static_cast<Eigen::Index>(t) * chunk;
    const Eigen::Index w_end = std::min<Eigen::Index>(w_begin + chunk, m + 1);
    if (w_begin > m) break;
    workers.emplace_back(run_widths, w_begin, w_end);
  }
  for (std::thread& th : workers) th.join();
  return dim;
}

void write_dim_csv(const DissimilarityIndexMatrix& dim, std::ostream& os) {
  os << "k,w,lambda\n";
  const Eigen::Index m = dim.signal_length();
  for (Eigen::Index w = 1; w <= m; ++w) {
    for (Eigen::Index k = 0; k + w <= m; ++k) {
      os << k << ',' << w << ',' << format_double(dim(k, w)) << '\n';
    }
  }
}

void write_dim_pgm(const DissimilarityIndexMatrix& dim, std::ostream& os) {
  const Eigen::Index m = dim.signal_length();
  const double lo = dim.raw().minCoeff();
  const double hi = dim.raw().maxCoeff();
  const double span = hi - lo;

  os << "P5\n" << m << ' ' << m << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(m));
  for (Eigen::Index w = 1; w <= m; ++w) {
    for (Eigen::Index k = 0; k < m; ++k) {
      unsigned char pix = 0;
      if (k + w <= m && span > 0) {
        const double v = (dim(k, w) - lo) / span;
        pix = static_cast<unsigned char>(std::lround(255.0 * v));
      }
      row[static_cast<std::size_t>(k)] = pix;
    }
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(m));
  }
}

}  // namespace dimsel
