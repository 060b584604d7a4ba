#include "scanopt/ilc.hpp"

#include "scanopt/errors.hpp"
#include "scanopt/spectral.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace scanopt {

namespace {

// Retained circulant bins with |H(k)| below this are treated as uninvertible.
constexpr double kMinCirculantMagnitude = 1e-12;
// Bins within this distance of the cutoff count as inside the passband.
constexpr double kCutoffSlack = 1e-12;

void check_leading_markov(const LiftedSystem& model, LawKind kind) {
  const auto& h = model.markov();
  const double scale = h.cwiseAbs().maxCoeff();
  if (h[0] == 0.0 || std::abs(h[0]) <= 1e-12 * scale) {
    throw SingularModelError(std::string(to_string(kind)) +
                             " law requires a nonzero first Markov parameter (C*B)");
  }
}

void check_cutoff(double cutoff, const char* key) {
  if (!(cutoff > 0.0 && cutoff <= 0.5)) {
    throw ConfigError(key, "cutoff must lie in (0, 0.5] cycles per sample");
  }
}

}  // namespace

std::string_view to_string(LawKind kind) {
  switch (kind) {
    case LawKind::Transpose: return "transpose";
    case LawKind::PartialIsometry: return "partial_isometry";
    case LawKind::Inverse: return "inverse";
    case LawKind::NormOptimal: return "norm_optimal";
    case LawKind::CirculantInverse: return "circulant_inverse";
  }
  return "unknown";
}

std::optional<LawKind> parse_law_kind(std::string_view text) {
  for (auto kind : {LawKind::Transpose, LawKind::PartialIsometry, LawKind::Inverse,
                    LawKind::NormOptimal, LawKind::CirculantInverse}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(Phase phase) { return phase == Phase::Model ? "model" : "hardware"; }

void validate(const LearningLaw& law) {
  switch (law.kind) {
    case LawKind::Transpose:
    case LawKind::PartialIsometry:
      if (!(law.gain > 0.0) || !std::isfinite(law.gain)) {
        throw ConfigError("ilc.gain", "learning gain must be positive");
      }
      break;
    case LawKind::NormOptimal:
      if (!(law.weight > 0.0) || !std::isfinite(law.weight)) {
        throw ConfigError("ilc.weight", "norm-optimal weight must be positive");
      }
      break;
    case LawKind::CirculantInverse:
      check_cutoff(law.cutoff, "ilc.cutoff");
      break;
    case LawKind::Inverse:
      break;
  }
}

LearningOperator::LearningOperator(const LearningLaw& law, const LiftedSystem& model)
    : law_(law), model_(model) {
  validate(law_);
  const auto n = model_.size();
  switch (law_.kind) {
    case LawKind::Transpose:
      break;
    case LawKind::PartialIsometry: {
      Eigen::BDCSVD<Eigen::MatrixXd> svd(model_.dense(),
                                         Eigen::ComputeFullU | Eigen::ComputeFullV);
      dense_op_ = law_.gain * svd.matrixV() * svd.matrixU().transpose();
      break;
    }
    case LawKind::Inverse:
      check_leading_markov(model_, law_.kind);
      break;
    case LawKind::NormOptimal: {
      check_leading_markov(model_, law_.kind);
      const Eigen::MatrixXd p = model_.dense();
      Eigen::MatrixXd normal = p.transpose() * p;
      normal.diagonal().array() += law_.weight;
      llt_.compute(normal);
      if (llt_.info() != Eigen::Success) {
        throw SingularModelError("norm-optimal normal matrix is not positive definite");
      }
      break;
    }
    case LawKind::CirculantInverse: {
      const Eigen::VectorXcd response = spectral::forward(model_.markov());
      inverse_response_ = Eigen::VectorXcd::Zero(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(spectral::bin_frequency(k, n)) > law_.cutoff + kCutoffSlack) continue;
        if (std::abs(response[k]) < kMinCirculantMagnitude) {
          std::ostringstream msg;
          msg << "circulant frequency response magnitude " << std::abs(response[k])
              << " at bin " << k << " is below " << kMinCirculantMagnitude
              << " inside the learning band";
          throw IllConditionedBandError(msg.str());
        }
        inverse_response_[k] = 1.0 / response[k];
      }
      break;
    }
  }
}

Eigen::VectorXd LearningOperator::increment(const Eigen::VectorXd& error) const {
  if (error.size() != model_.size()) {
    throw ConfigError("e", "error length does not match the lifted model");
  }
  if (error.isZero(0.0)) return Eigen::VectorXd::Zero(error.size());

  switch (law_.kind) {
    case LawKind::Transpose:
      return law_.gain * toeplitz_apply_transpose(model_, error);
    case LawKind::PartialIsometry:
      return dense_op_ * error;
    case LawKind::Inverse:
      return toeplitz_solve(model_, error);
    case LawKind::NormOptimal:
      return llt_.solve(toeplitz_apply_transpose(model_, error));
    case LawKind::CirculantInverse: {
      Eigen::VectorXcd spec = spectral::forward(error);
      spec.array() *= inverse_response_.array();
      return spectral::inverse_real(spec);
    }
  }
  return Eigen::VectorXd::Zero(error.size());
}

Trajectory ilc_step(const LearningLaw& law, const LiftedSystem& model, const Trajectory& command,
                    const Trajectory& error) {
  if (command.size() != model.size() || error.size() != model.size()) {
    throw ConfigError("ilc_step", "command, error and model lengths must all match");
  }
  if (error.samples.isZero(0.0)) return command;
  const LearningOperator op(law, model);
  return {command.samples + op.increment(error.samples), command.dt};
}

double max_singular_value(const LiftedSystem& model) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(model.dense());
  return svd.singularValues()[0];
}

double monotonic_gain_bound(const LiftedSystem& model, LawKind kind) {
  const double sigma = max_singular_value(model);
  if (!(sigma > 0.0)) throw SingularModelError("lifted matrix is zero");
  switch (kind) {
    case LawKind::Transpose: return 2.0 / (sigma * sigma);
    case LawKind::PartialIsometry: return 2.0 / sigma;
    default:
      throw ConfigError("ilc.law", "monotonic gain bound is defined only for transpose and "
                                   "partial_isometry laws");
  }
}

Trajectory zero_phase_filter(const Trajectory& signal, double cutoff) {
  check_cutoff(cutoff, "filter_cutoff");
  if (cutoff >= 0.5) return signal;
  const auto n = signal.size();
  Eigen::VectorXcd spec = spectral::forward(signal.samples);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(spectral::bin_frequency(k, n)) > cutoff + kCutoffSlack) spec[k] = 0.0;
  }
  return {spectral::inverse_real(spec), signal.dt};
}

const Trajectory& IterationHistory::final_command() const {
  if (records.empty()) throw ContractError("iteration history is empty");
  return records.back().command;
}

IterationHistory run_ilc(const LearningLaw& law, const StateSpaceModel& model_plant,
                         const StateSpaceModel& world_plant, const Trajectory& desired,
                         const IlcSettings& settings) {
  validate(law);
  validate(desired, "y_d");
  if (!(settings.tol > 0.0)) throw ConfigError("ilc.tol", "tolerance must be positive");
  if (settings.filter_cutoff) check_cutoff(*settings.filter_cutoff, "ilc.filter_cutoff");
  if (settings.saturation && !(*settings.saturation > 0.0)) {
    throw ConfigError("world.saturation", "saturation level must be positive");
  }

  const auto n = desired.size();
  const LiftedSystem lifted = lift(model_plant, n);
  const LearningOperator op(law, lifted);

  IterationHistory history;
  history.tolerance = settings.tol;
  Trajectory command{Eigen::VectorXd::Zero(n), desired.dt};
  double initial_rms = -1.0;

  auto record = [&](Phase phase, const Eigen::VectorXd& error) {
    const double value = rms(error);
    history.records.push_back({history.records.size(), command, value, phase});
    if (phase == Phase::Hardware) ++history.hardware_iterations;
    if (initial_rms < 0.0) initial_rms = value;
    if (!std::isfinite(value) || value > settings.divergence_ratio * initial_rms) {
      std::ostringstream msg;
      msg << "ILC diverged at iteration " << history.records.size() - 1 << " (" << to_string(phase)
          << " phase): RMS error " << value << " exceeds " << settings.divergence_ratio
          << " x initial " << initial_rms;
      throw DivergenceError(msg.str());
    }
    return value < settings.tol;
  };
  auto learn = [&](const Eigen::VectorXd& error) {
    Trajectory delta{op.increment(error), desired.dt};
    if (settings.filter_cutoff) delta = zero_phase_filter(delta, *settings.filter_cutoff);
    command.samples += delta.samples;
  };

  bool done = false;
  for (std::size_t j = 0; j < settings.max_model_iters; ++j) {
    const Eigen::VectorXd error = desired.samples - toeplitz_apply(lifted, command).samples;
    if (record(Phase::Model, error)) {
      done = true;
      break;
    }
    learn(error);
  }
  history.converged = done;

  for (std::size_t j = 0; j < settings.max_hw_iters; ++j) {
    const Eigen::VectorXd error =
        desired.samples - trial_response(world_plant, command, settings.saturation).samples;
    history.converged = record(Phase::Hardware, error);
    if (history.converged) break;
    learn(error);
  }
  return history;
}

}  // namespace scanopt
