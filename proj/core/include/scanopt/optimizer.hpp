#pragma once

#include "scanopt/ilc.hpp"
#include "scanopt/imaging.hpp"
#include "scanopt/plant.hpp"
#include "scanopt/scan.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace scanopt {

/// Everything an evaluation needs besides the candidate's amplitude and period.
struct Scenario {
  Scenario(StateSpaceModel model, StateSpaceModel world)
      : model_plant(std::move(model)), world_plant(std::move(world)) {}

  StateSpaceModel model_plant;
  StateSpaceModel world_plant;
  LearningLaw law = LearningLaw::inverse();
  /// If set, the Transpose/PartialIsometry gain is this multiple of the
  /// monotonic bound of the candidate's lifted model.
  std::optional<double> gain_fraction;
  IlcSettings ilc;
  ActuatorLimits limits;
  Geometry geometry;

  std::size_t periods = 3;    // trajectory length in scan periods
  std::size_t captures = 0;   // 0 means q^2
  std::size_t scene_size = 128;
  std::size_t q = 2;
  double noise_sigma = 0.0;
  double lambda = 1e-2;
  std::size_t max_cg_iters = 200;
  double contrast_threshold = kDefaultContrastThreshold;
  /// Extra Gaussian error (high-resolution pixels) added to achieved shifts.
  double shift_error_std = 0.0;
  std::uint64_t seed = 1;
  /// Worker threads for optimize(); 0 uses the hardware concurrency.
  std::size_t threads = 1;
};

/// Throws ConfigError for inconsistent scenario settings.
void validate(const Scenario& s);

enum class CandidateStatus { Scored, Infeasible, Unresolvable, Diverged };
std::string_view to_string(CandidateStatus status);

struct CandidateScore {
  ScanParams params;
  FeasibilityReport feasibility;
  CandidateStatus status = CandidateStatus::Scored;
  double factor = 0.0;
  double rmse_recon = 0.0;
  double rmse_single = 0.0;
  double tracking_rms = 0.0;  // at the capture instants, radians
  std::size_t hw_iters = 0;
  bool ilc_converged = false;
  std::vector<Shift> shifts;  // achieved shifts used for capture
  ImprovementReport report;
  Raster recon;

  bool feasible() const { return status != CandidateStatus::Infeasible; }
  /// '|'-separated flags, empty for a clean score.
  std::string flags() const;
};

/// Builds the candidate with the scenario's default capture schedule.
ScanParams make_candidate(double amplitude, std::size_t period, const Scenario& s);

/// Runs feasibility check, ILC, capture at the achieved shifts, least-squares
/// reconstruction and improvement measurement. Throws InfeasibleError for a
/// candidate that violates the limits (no pipeline run). An unresolvable bar
/// target is reported as status Unresolvable with factor 0.
CandidateScore evaluate_candidate(const ScanParams& params, const Scenario& s);

/// Seed of grid point (amplitude index, period index).
std::uint64_t candidate_seed(std::uint64_t master, std::size_t amplitude_index,
                             std::size_t period_index);

struct OptResult {
  CandidateScore best;
  /// Row-major over (amplitude index, period index).
  std::vector<CandidateScore> table;
};

/// True if `a` ranks strictly above `b`: higher factor, then lower amplitude,
/// then shorter period, then lower reconstruction RMSE.
bool ranks_above(const CandidateScore& a, const CandidateScore& b);

/// Exhaustive grid search. Infeasible and diverged candidates are recorded
/// with flags; throws EmptyFeasibleSetError if no candidate is feasible.
OptResult optimize(const Scenario& s, const std::vector<double>& amplitudes,
                   const std::vector<std::size_t>& periods);

/// Columns: amplitude, period, feasible, factor, rmse_recon, tracking_rms,
/// hw_iters, flags. Score fields are empty for infeasible rows.
void write_table_csv(std::ostream& out, const OptResult& result);

}  // namespace scanopt
