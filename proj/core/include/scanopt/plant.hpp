#pragma once

#include <Eigen/Dense>

#include <optional>

namespace scanopt {

/// Uniformly sampled scalar signal (angles in radians or command units).
struct Trajectory {
  Eigen::VectorXd samples;
  double dt = 1.0;

  Eigen::Index size() const noexcept { return samples.size(); }
  double operator[](Eigen::Index k) const { return samples[k]; }
};

/// Throws ConfigError unless the trajectory is non-empty, finite and has dt > 0.
void validate(const Trajectory& t, const char* name = "trajectory");

/// Root-mean-square of a sample vector; 0 for an empty vector.
double rms(const Eigen::VectorXd& v);

/// Single-input single-output discrete-time plant
///
///   x(k+1) = A x(k) + B u(k),   y(k) = C x(k)
///
/// Direct feedthrough is identically zero, so the output reacts to an input one
/// step later. Immutable after construction.
class StateSpaceModel {
 public:
  StateSpaceModel(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::RowVectorXd c, double dt);

  const Eigen::MatrixXd& a() const noexcept { return a_; }
  const Eigen::VectorXd& b() const noexcept { return b_; }
  const Eigen::RowVectorXd& c() const noexcept { return c_; }
  double dt() const noexcept { return dt_; }
  Eigen::Index order() const noexcept { return a_.rows(); }

  /// First Markov parameter C*B; zero means relative degree above one.
  double leading_markov() const { return c_.dot(b_); }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  Eigen::RowVectorXd c_;
  double dt_;
};

/// Continuous-time servo: first-order lag in series with an underdamped
/// second-order mode, optionally followed by a second (unmodeled) mode.
///
///   G(s) = gain / (lag_tau s + 1) * wn^2 / (s^2 + 2 zeta wn s + wn^2)
///                                 * extra_wn^2 / (s^2 + 2 extra_zeta extra_wn s + extra_wn^2)
///
/// lag_tau = 0 drops the lag; extra_wn = 0 drops the extra mode.
struct ServoParams {
  double gain = 1.0;
  double lag_tau = 0.01;
  double wn = 300.0;
  double zeta = 0.3;
  double extra_wn = 0.0;
  double extra_zeta = 0.05;
};

/// Exponential of a square matrix by scaling and squaring of the Taylor series;
/// the series is truncated once a term falls below `tol` relative to the sum.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m, double tol = 1e-14);

/// Zero-order-hold discretization of (A, B, C) via the exponential of the
/// augmented matrix [[A, B], [0, 0]] * dt.
StateSpaceModel discretize_zoh(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                               const Eigen::RowVectorXd& c, double dt);

/// ZOH-discretized servo model. Throws ConfigError on non-positive parameters.
StateSpaceModel servo_model(const ServoParams& params, double dt);

/// Simulates y(k) = C x(k) for k = 0..N-1 starting from x(0) = x0.
/// With x0 = 0 the first sample is always zero (one-step delay).
Trajectory simulate(const StateSpaceModel& model, const Trajectory& u,
                    const std::optional<Eigen::VectorXd>& x0 = std::nullopt);

/// Trial output aligned with the command: element k is y(k+1), the first
/// output sample that input u(k) can influence. With x0 = 0 this equals the
/// lifted convolution of u. Optional symmetric input saturation.
Trajectory trial_response(const StateSpaceModel& model, const Trajectory& u,
                          std::optional<double> saturation = std::nullopt);

/// Finite-horizon convolution representation of a plant: Markov parameters
/// h_1..h_N viewed as the lower-triangular Toeplitz matrix P(i, j) = h_{i-j+1}.
class LiftedSystem {
 public:
  LiftedSystem(Eigen::VectorXd markov, double dt);

  const Eigen::VectorXd& markov() const noexcept { return h_; }
  double dt() const noexcept { return dt_; }
  Eigen::Index size() const noexcept { return h_.size(); }

  /// Dense N x N lifted matrix.
  Eigen::MatrixXd dense() const;

 private:
  Eigen::VectorXd h_;
  double dt_;
};

/// Markov parameters h_k = C A^(k-1) B, k = 1..n.
LiftedSystem lift(const StateSpaceModel& model, Eigen::Index n);

/// y = P u for the lifted matrix P of `sys`.
Trajectory toeplitz_apply(const LiftedSystem& sys, const Trajectory& u);

/// P^T e.
Eigen::VectorXd toeplitz_apply_transpose(const LiftedSystem& sys, const Eigen::VectorXd& e);

/// Solves P x = rhs by forward substitution. Throws SingularModelError if h_1
/// is zero relative to the largest Markov parameter.
Eigen::VectorXd toeplitz_solve(const LiftedSystem& sys, const Eigen::VectorXd& rhs);

}  // namespace scanopt
