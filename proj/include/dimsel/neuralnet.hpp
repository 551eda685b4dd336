#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "dimsel/errors.hpp"

namespace dimsel {

/// logsig(z) = 1 / (1 + e^-z)
inline double logsig(double z) { return 1.0 / (1.0 + std::exp(-z)); }
/// tansig(z) = 2 / (1 + e^-2z) - 1
inline double tansig(double z) { return 2.0 / (1.0 + std::exp(-2.0 * z)) - 1.0; }

template <typename Derived>
auto logsig(const Eigen::ArrayBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  return Scalar(1) / (Scalar(1) + (-z).exp());
}

template <typename Derived>
auto tansig(const Eigen::ArrayBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  return Scalar(2) / (Scalar(1) + (Scalar(-2) * z).exp()) - Scalar(1);
}

/// One hidden layer of logsig units, one tansig output unit.
struct NetworkConfig {
  Eigen::Index n_inputs = 0;
  Eigen::Index n_hidden = 20;
  int max_epochs = 150;
  double gradient_tol = 1e-7;
  double mu_init = 1e-3;
  double mu_max = 1e10;
  std::uint64_t seed = 0;

  /// Flat parameter count: (n_inputs+1)*n_hidden + n_hidden + 1.
  Eigen::Index parameter_count() const {
    return (n_inputs + 1) * n_hidden + n_hidden + 1;
  }
};

/// Weights, biases, and the regularization state of one classifier.
/// Parameters are packed [W1 (col-major), b1, w2, b2].
class NetworkState {
 public:
  NetworkState(Eigen::Index n_inputs, Eigen::Index n_hidden);

  /// Seeded init: uniform [-0.5, 0.5] scaled by 1/sqrt(fan_in) per layer.
  static NetworkState random_init(const NetworkConfig& cfg);

  Eigen::Index n_inputs() const { return n_inputs_; }
  Eigen::Index n_hidden() const { return n_hidden_; }
  Eigen::Index parameter_count() const { return theta_.size(); }

  const Eigen::VectorXd& parameters() const { return theta_; }
  void set_parameters(const Eigen::VectorXd& theta);

  Eigen::Map<const Eigen::MatrixXd> hidden_weights() const;  // n_hidden x n_inputs
  Eigen::Map<const Eigen::VectorXd> hidden_bias() const;     // n_hidden
  Eigen::Map<const Eigen::VectorXd> output_weights() const;  // n_hidden
  double output_bias() const;

  // Regularization hyperparameters (evidence framework) and LM damping.
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = 0.0;  // effective number of parameters, in [0, N]
  double mu = 1e-3;

 private:
  Eigen::Index n_inputs_, n_hidden_;
  Eigen::VectorXd theta_;
};

/// out = tansig(w2 . logsig(W1 x + b1) + b2), strictly inside (-1, 1).
double forward(const NetworkState& state, const Eigen::Ref<const Eigen::VectorXd>& x);

/// One output per row of `x`.
Eigen::VectorXd forward_batch(const NetworkState& state,
                              const Eigen::Ref<const Eigen::MatrixXd>& x);

/// residual_s = target_s - out_s.
Eigen::VectorXd residuals(const NetworkState& state,
                          const Eigen::Ref<const Eigen::MatrixXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& targets);

/// J[s, j] = d residual_s / d theta_j, by backpropagation of the two-layer
/// chain. Independent of the targets since residual = target - out.
Eigen::MatrixXd jacobian(const NetworkState& state,
                         const Eigen::Ref<const Eigen::MatrixXd>& x);

/// sign(forward); an exact 0 maps to +1.
double predict_class(const NetworkState& state, const Eigen::Ref<const Eigen::VectorXd>& x);

enum class StopReason { kMaxEpochs, kGradientTolerance, kMuOverflow };

/// One accepted Levenberg-Marquardt step. f_before/f_after are the
/// regularized objective F = beta*E_D + alpha*E_W evaluated before and
/// after the step under that epoch's (alpha, beta); the acceptance rule
/// guarantees f_after <= f_before.
struct EpochRecord {
  int epoch = 0;
  double f_before = 0, f_after = 0;
  double e_d = 0, e_w = 0;
  double alpha = 0, beta = 0, gamma = 0, mu = 0;
  int attempts = 1;  // damping adjustments tried before acceptance
};

struct TrainResult {
  NetworkState state;
  std::vector<EpochRecord> trace;
  StopReason stop = StopReason::kMaxEpochs;
};

/// Bayesian-regularized Levenberg-Marquardt on F = beta*E_D + alpha*E_W
/// (E_D = sum of squared residuals, E_W = sum of squared parameters).
/// Steps solve (beta J'J + (alpha+mu) I) d = -(beta J'r + alpha theta);
/// after each accepted step the evidence framework re-estimates the
/// effective parameter count gamma = N - alpha tr((beta J'J + alpha I)^-1)
/// together with alpha = gamma/(2 E_W) and beta = (n - gamma)/(2 E_D),
/// iterated to self-consistency via the data-space spectrum of J J'.
/// Starts from alpha = 0, beta = 1; stops at max_epochs, gradient norm <
/// gradient_tol, or mu > mu_max. Deterministic under cfg.seed.
TrainResult train(const NetworkConfig& cfg, const Eigen::Ref<const Eigen::MatrixXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& targets);

/// Per-feature z-scoring fitted on training data and reused on test data.
/// Constant columns pass through centered only.
class FeatureScaler {
 public:
  static FeatureScaler fit(const Eigen::Ref<const Eigen::MatrixXd>& x);
  Eigen::MatrixXd transform(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

  const Eigen::RowVectorXd& mean() const { return mean_; }
  const Eigen::RowVectorXd& scale() const { return scale_; }

 private:
  Eigen::RowVectorXd mean_, scale_;
};

/// Flat text model format: `n_inputs n_hidden seed` header, then one
/// parameter per line in shortest round-trip decimal form.
void save_model(const NetworkState& state, std::uint64_t seed, std::ostream& os);
void save_model(const NetworkState& state, std::uint64_t seed, const std::filesystem::path& path);
NetworkState load_model(std::istream& is);
NetworkState load_model(const std::filesystem::path& path);

}  // namespace dimsel
