#include "scanopt/plant.hpp"

#include "scanopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace scanopt {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

// |h_1| below this fraction of max|h_k| counts as a structural zero.
constexpr double kSingularLeadingRatio = 1e-12;

}  // namespace

void validate(const Trajectory& t, const char* name) {
  if (t.size() < 1) {
    throw ConfigError(name, "must contain at least one sample");
  }
  if (!t.samples.allFinite()) {
    throw ConfigError(name, "contains non-finite samples");
  }
  if (!(t.dt > 0.0) || !std::isfinite(t.dt)) {
    throw ConfigError(name, "sample period must be positive");
  }
}

double rms(const Eigen::VectorXd& v) {
  if (v.size() == 0) return 0.0;
  return std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

StateSpaceModel::StateSpaceModel(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::RowVectorXd c,
                                 double dt)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), dt_(dt) {
  const auto n = a_.rows();
  if (n < 1 || a_.cols() != n) {
    throw ConfigError("plant.a", "state matrix must be square with order >= 1");
  }
  if (b_.size() != n) {
    throw ConfigError("plant.b", "input matrix must have " + std::to_string(n) + " rows");
  }
  if (c_.size() != n) {
    throw ConfigError("plant.c", "output matrix must have " + std::to_string(n) + " columns");
  }
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw ConfigError("plant.dt", "sample period must be positive");
  }
  if (!all_finite(a_) || !b_.allFinite() || !c_.allFinite()) {
    throw ConfigError("plant", "matrices contain non-finite entries");
  }
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) {
    throw ConfigError("matrix_exponential: matrix must be square");
  }
  const auto n = m.rows();
  // Scale so the Taylor series converges quickly, then square back.
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  }
  const Eigen::MatrixXd scaled = m / std::ldexp(1.0, squarings);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k < 64; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= tol * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

StateSpaceModel discretize_zoh(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                               const Eigen::RowVectorXd& c, double dt) {
  const auto n = a.rows();
  if (a.cols() != n || b.size() != n || c.size() != n) {
    throw ConfigError("plant", "continuous model dimensions are inconsistent");
  }
  if (!(dt > 0.0)) throw ConfigError("plant.dt", "sample period must be positive");

  Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(n + 1, n + 1);
  augmented.topLeftCorner(n, n) = a;
  augmented.topRightCorner(n, 1) = b;
  const Eigen::MatrixXd e = matrix_exponential(augmented * dt);
  return StateSpaceModel(e.topLeftCorner(n, n), e.topRightCorner(n, 1), c, dt);
}

StateSpaceModel servo_model(const ServoParams& p, double dt) {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be positive");
  };
  positive(p.gain, "plant.gain");
  positive(p.wn, "plant.wn");
  positive(p.zeta, "plant.zeta");
  if (p.lag_tau < 0.0 || !std::isfinite(p.lag_tau)) {
    throw ConfigError("plant.lag_tau", "must be >= 0");
  }
  if (p.extra_wn < 0.0 || !std::isfinite(p.extra_wn)) {
    throw ConfigError("plant.extra_wn", "must be >= 0");
  }
  const bool has_lag = p.lag_tau > 0.0;
  const bool has_extra = p.extra_wn > 0.0;
  if (has_extra) positive(p.extra_zeta, "plant.extra_zeta");

  // States, in chain order: [lag output], main mode (angle, rate), [extra mode (angle, rate)].
  const int n = (has_lag ? 1 : 0) + 2 + (has_extra ? 2 : 0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(n);

  int idx = 0;
  int drive = -1;  // state feeding the next block; -1 means the input
  double drive_gain = p.gain;
  if (has_lag) {
    a(0, 0) = -1.0 / p.lag_tau;
    b(0) = p.gain / p.lag_tau;
    drive = 0;
    drive_gain = 1.0;
    idx = 1;
  }
  auto add_mode = [&](double wn, double zeta) {
    const int pos = idx;
    const int vel = idx + 1;
    a(pos, vel) = 1.0;
    a(vel, pos) = -wn * wn;
    a(vel, vel) = -2.0 * zeta * wn;
    if (drive < 0) {
      b(vel) = drive_gain * wn * wn;
    } else {
      a(vel, drive) += drive_gain * wn * wn;
    }
    drive = pos;
    drive_gain = 1.0;
    idx += 2;
  };
  add_mode(p.wn, p.zeta);
  if (has_extra) add_mode(p.extra_wn, p.extra_zeta);
  c(drive) = 1.0;

  return discretize_zoh(a, b, c, dt);
}

namespace {

Eigen::VectorXd initial_state(const StateSpaceModel& model,
                              const std::optional<Eigen::VectorXd>& x0) {
  if (!x0) return Eigen::VectorXd::Zero(model.order());
  if (x0->size() != model.order()) {
    throw ConfigError("x0", "initial state must have dimension " +
                                std::to_string(model.order()));
  }
  return *x0;
}

}  // namespace

Trajectory simulate(const StateSpaceModel& model, const Trajectory& u,
                    const std::optional<Eigen::VectorXd>& x0) {
  validate(u, "u");
  Eigen::VectorXd x = initial_state(model, x0);
  Trajectory y{Eigen::VectorXd(u.size()), model.dt()};
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    y.samples[k] = model.c().dot(x);
    x = model.a() * x + model.b() * u[k];
  }
  return y;
}

Trajectory trial_response(const StateSpaceModel& model, const Trajectory& u,
                          std::optional<double> saturation) {
  validate(u, "u");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.order());
  Trajectory y{Eigen::VectorXd(u.size()), model.dt()};
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    double input = u[k];
    if (saturation) input = std::clamp(input, -*saturation, *saturation);
    x = model.a() * x + model.b() * input;
    y.samples[k] = model.c().dot(x);
  }
  return y;
}

LiftedSystem::LiftedSystem(Eigen::VectorXd markov, double dt) : h_(std::move(markov)), dt_(dt) {
  if (h_.size() < 1) throw ConfigError("N", "lifted horizon must be >= 1");
  if (!h_.allFinite()) throw ConfigError("markov", "Markov parameters must be finite");
}

Eigen::MatrixXd LiftedSystem::dense() const {
  const auto n = h_.size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    p.col(j).tail(n - j) = h_.head(n - j);
  }
  return p;
}

LiftedSystem lift(const StateSpaceModel& model, Eigen::Index n) {
  if (n < 1) throw ConfigError("N", "lifted horizon must be >= 1");
  Eigen::VectorXd h(n);
  Eigen::VectorXd power_b = model.b();  // A^(k-1) B
  for (Eigen::Index k = 0; k < n; ++k) {
    h[k] = model.c().dot(power_b);
    power_b = model.a() * power_b;
  }
  return LiftedSystem(std::move(h), model.dt());
}

Trajectory toeplitz_apply(const LiftedSystem& sys, const Trajectory& u) {
  const auto n = sys.size();
  if (u.size() != n) {
    throw ConfigError("u", "length " + std::to_string(u.size()) +
                               " does not match lifted horizon " + std::to_string(n));
  }
  const auto& h = sys.markov();
  Trajectory y{Eigen::VectorXd::Zero(n), sys.dt()};
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j) acc += h[i - j] * u[j];
    y.samples[i] = acc;
  }
  return y;
}

Eigen::VectorXd toeplitz_apply_transpose(const LiftedSystem& sys, const Eigen::VectorXd& e) {
  const auto n = sys.size();
  if (e.size() != n) throw ConfigError("e", "length does not match lifted horizon");
  const auto& h = sys.markov();
  Eigen::VectorXd out(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = j; i < n; ++i) acc += h[i - j] * e[i];
    out[j] = acc;
  }
  return out;
}

Eigen::VectorXd toeplitz_solve(const LiftedSystem& sys, const Eigen::VectorXd& rhs) {
  const auto n = sys.size();
  if (rhs.size() != n) throw ConfigError("rhs", "length does not match lifted horizon");
  const auto& h = sys.markov();
  const double scale = h.cwiseAbs().maxCoeff();
  if (h[0] == 0.0 || std::abs(h[0]) <= kSingularLeadingRatio * scale) {
    throw SingularModelError(
        "lifted model has zero first Markov parameter (C*B = 0); inverse-type learning is "
        "undefined");
  }
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = rhs[i];
    for (Eigen::Index j = 0; j < i; ++j) acc -= h[i - j] * x[j];
    x[i] = acc / h[0];
  }
  return x;
}

}  // namespace scanopt
