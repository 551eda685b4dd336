#include "dimsel/neuralnet.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <fstream>
#include <ostream>
#include <random>

#include "dimsel/text.hpp"

namespace dimsel {

NetworkState::NetworkState(Eigen::Index n_inputs, Eigen::Index n_hidden)
    : n_inputs_(n_inputs), n_hidden_(n_hidden) {
  if (n_inputs < 1 || n_hidden < 1) {
    throw std::invalid_argument("network needs at least one input and one hidden unit");
  }
  theta_ = Eigen::VectorXd::Zero((n_inputs + 1) * n_hidden + n_hidden + 1);
}

NetworkState NetworkState::random_init(const NetworkConfig& cfg) {
  NetworkState state(cfg.n_inputs, cfg.n_hidden);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);

  const Eigen::Index ni = cfg.n_inputs;
  const Eigen::Index nh = cfg.n_hidden;
  const double scale1 = 1.0 / std::sqrt(static_cast<double>(ni));
  const double scale2 = 1.0 / std::sqrt(static_cast<double>(nh));

  Eigen::VectorXd theta(state.parameter_count());
  Eigen::Index j = 0;
  for (; j < nh * ni + nh; ++j) theta[j] = unif(rng) * scale1;  // W1, b1
  for (; j < theta.size(); ++j) theta[j] = unif(rng) * scale2;  // w2, b2
  state.theta_ = std::move(theta);
  state.mu = cfg.mu_init;
  state.gamma = static_cast<double>(state.parameter_count());
  return state;
}

void NetworkState::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != theta_.size()) {
    throw std::invalid_argument("parameter vector has wrong length");
  }
  theta_ = theta;
}

Eigen::Map<const Eigen::MatrixXd> NetworkState::hidden_weights() const {
  return {theta_.data(), n_hidden_, n_inputs_};
}
Eigen::Map<const Eigen::VectorXd> NetworkState::hidden_bias() const {
  return {theta_.data() + n_hidden_ * n_inputs_, n_hidden_};
}
Eigen::Map<const Eigen::VectorXd> NetworkState::output_weights() const {
  return {theta_.data() + n_hidden_ * (n_inputs_ + 1), n_hidden_};
}
double NetworkState::output_bias() const { return theta_[theta_.size() - 1]; }

double forward(const NetworkState& state, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != state.n_inputs()) throw std::invalid_argument("input dimension mismatch");
  const Eigen::VectorXd h =
      logsig((state.hidden_weights() * x + state.hidden_bias()).array()).matrix();
  return tansig(state.output_weights().dot(h) + state.output_bias());
}

Eigen::VectorXd forward_batch(const NetworkState& state,
                              const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.cols() != state.n_inputs()) throw std::invalid_argument("input dimension mismatch");
  // Samples are rows: Z1 = X W1' + b1', column k holds hidden unit k.
  Eigen::MatrixXd h = ((x * state.hidden_weights().transpose()).rowwise() +
                       state.hidden_bias().transpose())
                          .array()
                          .unaryExpr([](double z) { return logsig(z); })
                          .matrix();
  Eigen::VectorXd z2 = (h * state.output_weights()).array() + state.output_bias();
  return z2.unaryExpr([](double z) { return tansig(z); });
}

Eigen::VectorXd residuals(const NetworkState& state,
                          const Eigen::Ref<const Eigen::MatrixXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& targets) {
  if (targets.size() != x.rows()) throw std::invalid_argument("target count mismatch");
  return targets - forward_batch(state, x);
}

Eigen::MatrixXd jacobian(const NetworkState& state,
                         const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.cols() != state.n_inputs()) throw std::invalid_argument("input dimension mismatch");
  const Eigen::Index n = x.rows();
  const Eigen::Index ni = state.n_inputs();
  const Eigen::Index nh = state.n_hidden();
  const auto w1 = state.hidden_weights();
  const auto b1 = state.hidden_bias();
  const auto w2 = state.output_weights();

  Eigen::MatrixXd jac(n, state.parameter_count());
  for (Eigen::Index s = 0; s < n; ++s) {
    const Eigen::VectorXd h = logsig(((w1 * x.row(s).transpose()) + b1).array()).matrix();
    const double out = tansig(w2.dot(h) + state.output_bias());
    const double gout = 1.0 - out * out;  // tansig'
    // delta1_k = gout * w2_k * h_k (1 - h_k); residual = target - out flips sign.
    const Eigen::VectorXd delta1 =
        (gout * w2.array() * h.array() * (1.0 - h.array())).matrix();

    auto row = jac.row(s);
    // dW1 block, col-major: column i of (delta1 x_i) at offset i*nh.
    for (Eigen::Index i = 0; i < ni; ++i) {
      row.segment(i * nh, nh) = -delta1 * x(s, i);
    }
    row.segment(nh * ni, nh) = -delta1;                      // b1
    row.segment(nh * (ni + 1), nh) = -gout * h;              // w2
    row[state.parameter_count() - 1] = -gout;                // b2
  }
  return jac;
}

double predict_class(const NetworkState& state, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return forward(state, x) < 0.0 ? -1.0 : +1.0;
}

TrainResult train(const NetworkConfig& cfg_in, const Eigen::Ref<const Eigen::MatrixXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& targets) {
  if (x.rows() == 0) throw DataError("empty training set");
  if (targets.size() != x.rows()) throw DataError("target count mismatch");
  for (Eigen::Index s = 0; s < targets.size(); ++s) {
    if (targets[s] != -1.0 && targets[s] != 1.0) {
      throw DataError("targets must be -1 or +1");
    }
  }

  NetworkConfig cfg = cfg_in;
  if (cfg.n_inputs == 0) cfg.n_inputs = x.cols();
  if (cfg.n_inputs != x.cols()) throw DataError("config n_inputs does not match data");

  const Eigen::Index n_params = cfg.parameter_count();
  const double n_samples = static_cast<double>(x.rows());
  const Eigen::MatrixXd identity =
      Eigen::MatrixXd::Identity(n_params, n_params);

  TrainResult result{NetworkState::random_init(cfg), {}, StopReason::kMaxEpochs};
  NetworkState& state = result.state;
  state.alpha = 0.0;
  state.beta = 1.0;
  double mu = cfg.mu_init;

  Eigen::VectorXd theta = state.parameters();
  bool stepped = false;  // hyperparameters update only after an accepted step

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const Eigen::MatrixXd jac = jacobian(state, x);
    const Eigen::VectorXd res = residuals(state, x, targets);
    const double e_d = res.squaredNorm();
    const double e_w = theta.squaredNorm();
    if (!std::isfinite(e_d) || !std::isfinite(e_w)) {
      throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
    }

    const Eigen::MatrixXd jtj = jac.transpose() * jac;

    if (stepped) {
      // Evidence-framework re-estimation at the accepted parameters,
      // iterated to self-consistency: gamma depends on (alpha, beta) and
      // vice versa, so alternate until the triple settles. gamma needs only
      // the nonzero spectrum of beta J'J, which lives in data space:
      // the eigenvalues of the small n x n Gram matrix J J'.
      Eigen::VectorXd gram_eigs =
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(jac * jac.transpose())
              .eigenvalues()
              .cwiseMax(0.0);
      const double e_w_eff = std::max(e_w, 1e-12);
      const double e_d_eff = std::max(e_d, 1e-12 * n_samples);  // perfect-fit guard

      double alpha = state.alpha > 0.0 ? state.alpha : 1e-6;
      double beta = state.beta;
      double gamma = state.gamma;
      for (int it = 0; it < 100; ++it) {
        gamma = (beta * gram_eigs.array() / (beta * gram_eigs.array() + alpha)).sum();
        const double alpha_new = std::max(gamma / (2.0 * e_w_eff), 1e-12);
        const double beta_raw = (n_samples - gamma) / (2.0 * e_d_eff);
        const double beta_new = beta_raw > 0.0 ? beta_raw : beta;
        const bool settled = std::abs(alpha_new - alpha) <= 1e-10 * alpha &&
                             std::abs(beta_new - beta) <= 1e-10 * beta;
        alpha = alpha_new;
        beta = beta_new;
        if (settled) break;
      }
      state.gamma = std::clamp(gamma, 0.0, static_cast<double>(n_params));
      state.alpha = alpha;
      state.beta = beta;
    }

    const double f = state.beta * e_d + state.alpha * e_w;
    const Eigen::VectorXd grad = state.beta * (jac.transpose() * res) + state.alpha * theta;
    if (grad.norm() < cfg.gradient_tol) {
      result.stop = StopReason::kGradientTolerance;
      break;
    }

    const Eigen::MatrixXd hess = state.beta * jtj + state.alpha * identity;

    int attempts = 0;
    bool accepted = false;
    double f_new = f;
    while (!accepted) {
      ++attempts;
      Eigen::MatrixXd damped = hess;
      damped.diagonal().array() += mu;
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      if (step.allFinite()) {
        const Eigen::VectorXd cand = theta + step;
        NetworkState probe = state;
        probe.set_parameters(cand);
        const double e_d2 = residuals(probe, x, targets).squaredNorm();
        const double e_w2 = cand.squaredNorm();
        f_new = state.beta * e_d2 + state.alpha * e_w2;
        if (std::isfinite(f_new) && f_new <= f) {
          theta = cand;
          state.set_parameters(theta);
          mu = std::max(mu / 10.0, 1e-20);
          accepted = true;
          result.trace.push_back({epoch, f, f_new, e_d2, e_w2, state.alpha, state.beta,
                                  state.gamma, mu, attempts});
          break;
        }
      }
      mu *= 10.0;
      if (mu > cfg.mu_max) {
        state.mu = mu;
        result.stop = StopReason::kMuOverflow;
        return result;
      }
    }
    state.mu = mu;
    stepped = true;
  }
  return result;
}

FeatureScaler FeatureScaler::fit(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.rows() == 0) throw DataError("cannot fit scaler on empty data");
  FeatureScaler fs;
  fs.mean_ = x.colwise().mean();
  if (x.rows() < 2) {
    fs.scale_ = Eigen::RowVectorXd::Ones(x.cols());
    return fs;
  }
  const Eigen::RowVectorXd var =
      (x.rowwise() - fs.mean_).array().square().colwise().sum() /
      static_cast<double>(x.rows() - 1);
  fs.scale_ = var.array().sqrt();
  for (Eigen::Index j = 0; j < fs.scale_.size(); ++j) {
    if (fs.scale_[j] < 1e-12) fs.scale_[j] = 1.0;
  }
  return fs;
}

Eigen::MatrixXd FeatureScaler::transform(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.cols() != mean_.size()) throw std::invalid_argument("scaler dimension mismatch");
  return (x.rowwise() - mean_).array().rowwise() / scale_.array();
}

void save_model(const NetworkState& state, std::uint64_t seed, std::ostream& os) {
  os << state.n_inputs() << ' ' << state.n_hidden() << ' ' << seed << '\n';
  for (Eigen::Index j = 0; j < state.parameter_count(); ++j) {
    os << format_double(state.parameters()[j]) << '\n';
  }
}

void save_model(const NetworkState& state, std::uint64_t seed,
                const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  save_model(state, seed, out);
}

NetworkState load_model(std::istream& is) {
  Eigen::Index ni = 0, nh = 0;
  std::uint64_t seed = 0;
  if (!(is >> ni >> nh >> seed)) throw DataError("bad model header");
  NetworkState state(ni, nh);
  Eigen::VectorXd theta(state.parameter_count());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    std::string tok;
    if (!(is >> tok)) throw DataError("truncated model file");
    double v = 0;
    if (!parse_double(tok, v)) throw DataError("malformed model value '" + tok + "'");
    theta[j] = v;
  }
  state.set_parameters(theta);
  return state;
}

NetworkState load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return load_model(in);
}

}  // namespace dimsel
