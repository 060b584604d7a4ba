#include "scanopt/optimizer.hpp"

#include "scanopt/errors.hpp"
#include "scanopt/io.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <random>
#include <thread>

namespace scanopt {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kShiftErrorStream = 0x5348494654ULL;

}  // namespace

void validate(const Scenario& s) {
  validate(s.law);
  validate(s.limits);
  validate(s.geometry);
  if (s.periods < 1) throw ConfigError("scan.periods", "must be >= 1");
  if (s.q < 1) throw ConfigError("imaging.q", "must be >= 1");
  bar_target(s.scene_size, s.contrast_threshold);
  if (s.scene_size % s.q != 0) throw ConfigError("imaging.q", "must divide imaging.size");
  if (!(s.noise_sigma >= 0.0)) throw ConfigError("imaging.noise_sigma", "must be >= 0");
  if (!(s.lambda >= 0.0)) throw ConfigError("imaging.lambda", "must be >= 0");
  if (!(s.shift_error_std >= 0.0)) throw ConfigError("imaging.shift_error_std", "must be >= 0");
  if (!(s.ilc.tol > 0.0)) throw ConfigError("ilc.tol", "must be positive");
  if (s.gain_fraction && !(*s.gain_fraction > 0.0)) {
    throw ConfigError("ilc.gain_fraction", "must be positive");
  }
  if (s.model_plant.dt() != s.world_plant.dt()) {
    throw ConfigError("world.dt", "model and world must share the sample period");
  }
}

std::string_view to_string(CandidateStatus status) {
  switch (status) {
    case CandidateStatus::Scored: return "scored";
    case CandidateStatus::Infeasible: return "infeasible";
    case CandidateStatus::Unresolvable: return "unresolvable";
    case CandidateStatus::Diverged: return "diverged";
  }
  return "unknown";
}

std::string CandidateScore::flags() const {
  std::string out;
  auto add = [&out](std::string_view f) {
    if (!out.empty()) out += '|';
    out += f;
  };
  switch (status) {
    case CandidateStatus::Scored: break;
    case CandidateStatus::Infeasible:
      for (const auto& v : feasibility.violations) {
        add(std::string("infeasible_") + std::string(to_string(v.constraint)));
      }
      break;
    case CandidateStatus::Unresolvable: add("no_resolvable_frequency"); break;
    case CandidateStatus::Diverged: add("diverged"); break;
  }
  if (feasible() && status != CandidateStatus::Diverged && !ilc_converged) add("ilc_not_converged");
  return out;
}

ScanParams make_candidate(double amplitude, std::size_t period, const Scenario& s) {
  const std::size_t count = s.captures == 0 ? s.q * s.q : s.captures;
  return {amplitude, period, default_capture_indices(period, s.periods, count),
          s.model_plant.dt()};
}

CandidateScore evaluate_candidate(const ScanParams& params, const Scenario& s) {
  validate(s);
  const std::size_t n = s.periods * params.period;
  CandidateScore score;
  score.params = params;
  if (score.params.capture_indices.empty()) {
    score.params.capture_indices = make_candidate(params.amplitude, params.period, s).capture_indices;
  }
  score.feasibility = feasibility_check(params, s.limits, n);
  if (!score.feasibility.feasible) {
    throw InfeasibleError("candidate amplitude " + io::format_double(params.amplitude) +
                          " period " + std::to_string(params.period) + " is " +
                          score.feasibility.describe());
  }

  const Trajectory desired = gen_periodic_trajectory(score.params, n);
  LearningLaw law = s.law;
  if (s.gain_fraction) {
    law.gain = *s.gain_fraction *
               monotonic_gain_bound(lift(s.model_plant, static_cast<Eigen::Index>(n)), law.kind);
  }
  const IterationHistory history = run_ilc(law, s.model_plant, s.world_plant, desired, s.ilc);
  score.hw_iters = history.hardware_iterations;
  score.ilc_converged = history.converged;
  const Trajectory achieved =
      trial_response(s.world_plant, history.final_command(), s.ilc.saturation);

  std::mt19937_64 rng(mix(s.seed ^ kShiftErrorStream));
  std::normal_distribution<double> shift_noise(0.0, 1.0);
  double tracking_sq = 0.0;
  for (std::size_t idx : score.params.capture_indices) {
    const auto k = static_cast<Eigen::Index>(idx);
    const double err = achieved[k] - desired[k];
    tracking_sq += err * err;
    Shift shift = angle_to_shift(achieved[k], s.geometry);
    if (s.shift_error_std > 0.0) {
      const double extra = s.shift_error_std * shift_noise(rng);
      (s.geometry.axis == Axis::Horizontal ? shift.dx : shift.dy) += extra;
    }
    score.shifts.push_back(shift);
  }
  score.tracking_rms =
      std::sqrt(tracking_sq / static_cast<double>(score.params.capture_indices.size()));

  const Raster scene = synth_scene(SceneKind::Bars, s.scene_size, s.seed);
  const CaptureSet cs = capture_set(scene, score.shifts, s.q, s.noise_sigma, s.seed);
  score.recon = ls_recon(cs, s.lambda, s.max_cg_iters).image;
  const Raster single = upsample_replicate(
      capture(scene, {}, s.q, s.noise_sigma, frame_seed(s.seed, cs.frames.size())), s.q);

  const BarTarget target = bar_target(s.scene_size, s.contrast_threshold);
  try {
    score.report = measure_improvement(score.recon, single, target);
    score.factor = score.report.factor;
    score.rmse_recon = score.report.rmse_recon;
    score.rmse_single = score.report.rmse_single;
  } catch (const NoResolvableFrequencyError&) {
    score.status = CandidateStatus::Unresolvable;
    score.factor = 0.0;
    const Raster truth = synth_scene(SceneKind::Bars, s.scene_size, 0);
    score.rmse_recon = rmse(score.recon, truth);
    score.rmse_single = rmse(single, truth);
  }
  return score;
}

std::uint64_t candidate_seed(std::uint64_t master, std::size_t amplitude_index,
                             std::size_t period_index) {
  return mix(mix(master ^ mix(amplitude_index + 1)) ^ mix((period_index + 1) << 32));
}

bool ranks_above(const CandidateScore& a, const CandidateScore& b) {
  if (a.factor != b.factor) return a.factor > b.factor;
  if (a.params.amplitude != b.params.amplitude) return a.params.amplitude < b.params.amplitude;
  if (a.params.period != b.params.period) return a.params.period < b.params.period;
  return a.rmse_recon < b.rmse_recon;
}

OptResult optimize(const Scenario& s, const std::vector<double>& amplitudes,
                   const std::vector<std::size_t>& periods) {
  validate(s);
  if (amplitudes.empty()) throw ConfigError("optimize.amplitudes", "grid must not be empty");
  if (periods.empty()) throw ConfigError("optimize.periods", "grid must not be empty");
  for (std::size_t p : periods) {
    if (p < 2) throw ConfigError("optimize.periods", "every period must be >= 2 samples");
  }
  for (double a : amplitudes) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw ConfigError("optimize.amplitudes", "amplitudes must be finite and >= 0");
    }
  }

  const std::size_t rows = amplitudes.size() * periods.size();
  OptResult result;
  result.table.resize(rows);
  std::vector<std::exception_ptr> failures(rows);

  auto evaluate_row = [&](std::size_t row) {
    const std::size_t ai = row / periods.size();
    const std::size_t pi = row % periods.size();
    Scenario local = s;
    local.seed = candidate_seed(s.seed, ai, pi);
    const ScanParams params = make_candidate(amplitudes[ai], periods[pi], local);
    CandidateScore& out = result.table[row];
    try {
      out = evaluate_candidate(params, local);
    } catch (const InfeasibleError&) {
      out = CandidateScore{};
      out.params = params;
      out.feasibility = feasibility_check(params, s.limits, s.periods * params.period);
      out.status = CandidateStatus::Infeasible;
    } catch (const DivergenceError&) {
      out = CandidateScore{};
      out.params = params;
      out.feasibility = feasibility_check(params, s.limits, s.periods * params.period);
      out.status = CandidateStatus::Diverged;
    } catch (...) {
      failures[row] = std::current_exception();
    }
  };

  std::size_t workers = s.threads == 0 ? std::thread::hardware_concurrency() : s.threads;
  workers = std::clamp<std::size_t>(workers, 1, rows);
  if (workers == 1) {
    for (std::size_t row = 0; row < rows; ++row) evaluate_row(row);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t row = next++; row < rows; row = next++) evaluate_row(row);
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  const CandidateScore* best = nullptr;
  for (const auto& row : result.table) {
    if (!row.feasible()) continue;
    if (best == nullptr || ranks_above(row, *best)) best = &row;
  }
  if (best == nullptr) {
    throw EmptyFeasibleSetError("all " + std::to_string(rows) +
                                " candidates violate the actuator or timing limits");
  }
  result.best = *best;
  return result;
}

void write_table_csv(std::ostream& out, const OptResult& result) {
  out << "amplitude,period,feasible,factor,rmse_recon,tracking_rms,hw_iters,flags\n";
  for (const auto& row : result.table) {
    out << io::format_double(row.params.amplitude) << ',' << row.params.period << ','
        << (row.feasible() ? "true" : "false") << ',';
    if (row.feasible() && row.status != CandidateStatus::Diverged) {
      out << io::format_double(row.factor) << ',' << io::format_double(row.rmse_recon) << ','
          << io::format_double(row.tracking_rms) << ',' << row.hw_iters;
    } else {
      out << ",,,";
    }
    out << ',' << row.flags() << '\n';
  }
}

}  // namespace scanopt
