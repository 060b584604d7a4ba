#pragma once

#include "scanopt/plant.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scanopt {

enum class LawKind { Transpose, PartialIsometry, Inverse, NormOptimal, CirculantInverse };

std::string_view to_string(LawKind kind);
/// Parses "transpose", "partial_isometry", "inverse", "norm_optimal", "circulant_inverse".
std::optional<LawKind> parse_law_kind(std::string_view text);

/// A learning law and its tuning. Only the field relevant to `kind` is used:
/// `gain` for Transpose/PartialIsometry, `weight` for NormOptimal, `cutoff`
/// (cycles per sample) for CirculantInverse.
struct LearningLaw {
  LawKind kind = LawKind::Inverse;
  double gain = 1.0;
  double weight = 1.0;
  double cutoff = 0.5;

  static LearningLaw transpose(double gain) { return {LawKind::Transpose, gain, 1.0, 0.5}; }
  static LearningLaw partial_isometry(double gain) {
    return {LawKind::PartialIsometry, gain, 1.0, 0.5};
  }
  static LearningLaw inverse() { return {LawKind::Inverse, 1.0, 1.0, 0.5}; }
  static LearningLaw norm_optimal(double weight) {
    return {LawKind::NormOptimal, 1.0, weight, 0.5};
  }
  static LearningLaw circulant_inverse(double cutoff) {
    return {LawKind::CirculantInverse, 1.0, 1.0, cutoff};
  }
};

/// Throws ConfigError when gain, weight or cutoff is out of range.
void validate(const LearningLaw& law);

/// Learning operator L of a law, factorized once for a given lifted model so
/// that repeated updates cost a matrix-vector product (or an FFT pair).
class LearningOperator {
 public:
  LearningOperator(const LearningLaw& law, const LiftedSystem& model);

  /// Command increment L(e) for the tracking error e.
  Eigen::VectorXd increment(const Eigen::VectorXd& error) const;

  const LearningLaw& law() const noexcept { return law_; }
  Eigen::Index size() const noexcept { return model_.size(); }

 private:
  LearningLaw law_;
  LiftedSystem model_;
  Eigen::MatrixXd dense_op_;         // PartialIsometry: gain * V U^T
  Eigen::LLT<Eigen::MatrixXd> llt_;  // NormOptimal: P^T P + r I
  Eigen::VectorXcd inverse_response_;  // CirculantInverse: masked 1/H(k)
};

/// u_{j+1} = u_j + L(e_j).
Trajectory ilc_step(const LearningLaw& law, const LiftedSystem& model, const Trajectory& command,
                    const Trajectory& error);

/// Largest gain with guaranteed monotonic decay of the error norm on an exact
/// model: 2 / sigma_max^2 for Transpose, 2 / sigma_max for PartialIsometry.
double monotonic_gain_bound(const LiftedSystem& model, LawKind kind);

/// Largest singular value of the lifted matrix.
double max_singular_value(const LiftedSystem& model);

/// Ideal zero-phase low-pass: DFT bins with |f| <= cutoff (cycles per sample)
/// are kept, the rest are zeroed. cutoff = 0.5 returns the input unchanged.
Trajectory zero_phase_filter(const Trajectory& signal, double cutoff);

enum class Phase { Model, Hardware };
std::string_view to_string(Phase phase);

struct IterationRecord {
  std::size_t index = 0;
  Trajectory command;
  double rms_error = 0.0;
  Phase phase = Phase::Model;
};

struct IterationHistory {
  std::vector<IterationRecord> records;
  std::size_t hardware_iterations = 0;
  bool converged = false;
  double tolerance = 0.0;

  /// Command of the last recorded trial.
  const Trajectory& final_command() const;
};

struct IlcSettings {
  double tol = 1e-6;
  std::size_t max_model_iters = 50;
  std::size_t max_hw_iters = 50;
  /// Zero-phase cutoff applied to each command increment.
  std::optional<double> filter_cutoff;
  /// Symmetric input saturation of the world plant only.
  std::optional<double> saturation;
  /// Abort once the error RMS exceeds this multiple of the first trial's RMS.
  double divergence_ratio = 1e6;
};

/// Two-phase learning. Phase one iterates on the model plant starting from
/// u = 0 until the predicted RMS error drops below tol or max_model_iters
/// trials have run; phase two continues from the learned command on the world
/// plant. Learning always uses the model's lifted operator. Each record holds
/// the command of one trial and the RMS error measured on the plant of its
/// phase. `converged` reports whether the last trial met the tolerance.
IterationHistory run_ilc(const LearningLaw& law, const StateSpaceModel& model_plant,
                         const StateSpaceModel& world_plant, const Trajectory& desired,
                         const IlcSettings& settings);

}  // namespace scanopt
