#include "scanopt/scan.hpp"

#include "scanopt/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace scanopt {

std::string_view to_string(Axis axis) {
  return axis == Axis::Horizontal ? "horizontal" : "vertical";
}

std::optional<Axis> parse_axis(std::string_view text) {
  if (text == "horizontal") return Axis::Horizontal;
  if (text == "vertical") return Axis::Vertical;
  return std::nullopt;
}

std::string_view to_string(Constraint c) {
  switch (c) {
    case Constraint::Velocity: return "velocity";
    case Constraint::Acceleration: return "acceleration";
    case Constraint::Duration: return "duration";
  }
  return "unknown";
}

void validate(const ScanParams& p, std::size_t n) {
  if (!(p.amplitude >= 0.0) || !std::isfinite(p.amplitude)) {
    throw ConfigError("scan.amplitude", "must be finite and >= 0");
  }
  if (p.period < 2) throw ConfigError("scan.period", "must be >= 2 samples");
  if (!(p.dt > 0.0) || !std::isfinite(p.dt)) throw ConfigError("plant.dt", "must be positive");
  if (n < p.period) {
    throw ConfigError("scan.period", "trajectory length " + std::to_string(n) +
                                         " is shorter than one period");
  }
  for (std::size_t i = 0; i < p.capture_indices.size(); ++i) {
    if (p.capture_indices[i] >= n) {
      throw ConfigError("scan.capture_indices", "index " + std::to_string(p.capture_indices[i]) +
                                                    " lies beyond the trajectory");
    }
    if (i > 0 && p.capture_indices[i] <= p.capture_indices[i - 1]) {
      throw ConfigError("scan.capture_indices", "indices must be strictly increasing");
    }
  }
}

void validate(const ActuatorLimits& l) {
  // Zero limits are accepted: they admit only a motionless scan.
  auto check = [](double v, const char* key) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be finite and >= 0");
  };
  check(l.max_velocity, "limits.max_velocity");
  check(l.max_acceleration, "limits.max_acceleration");
  check(l.time_budget, "limits.time_budget");
}

void validate(const Geometry& g) {
  if (!(g.shift_gain > 0.0) || !std::isfinite(g.shift_gain)) {
    throw ConfigError("geometry.shift_gain", "must be positive and finite");
  }
}

Trajectory gen_periodic_trajectory(const ScanParams& p, std::size_t n) {
  validate(p, n);
  Trajectory t{Eigen::VectorXd(static_cast<Eigen::Index>(n)), p.dt};
  const double w = 2.0 * std::numbers::pi / static_cast<double>(p.period);
  for (std::size_t k = 0; k < n; ++k) {
    // Reduce the phase first so samples repeat exactly every period.
    const auto phase = static_cast<double>(k % p.period);
    t.samples[static_cast<Eigen::Index>(k)] = p.amplitude * std::sin(w * phase);
  }
  return t;
}

std::vector<std::size_t> default_capture_indices(std::size_t period, std::size_t n_periods,
                                                 std::size_t count) {
  if (period < 2) throw ConfigError("scan.period", "must be >= 2 samples");
  if (n_periods < 1) throw ConfigError("scan.periods", "must be >= 1");
  if (count < 1) throw ConfigError("scan.captures", "must be >= 1");
  const std::size_t n = period * n_periods;
  if (count > n) throw ConfigError("scan.captures", "more captures than trajectory samples");

  const auto base = static_cast<long>((n_periods - 1) * period);  // last rising zero crossing
  const auto len = static_cast<long>(n);
  std::set<long> used;
  for (std::size_t k = 0; k < count; ++k) {
    const double level =
        count == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(count - 1);
    const double offset =
        std::asin(level) * static_cast<double>(period) / (2.0 * std::numbers::pi);
    const long target = base + std::lround(offset);
    // Nearest sample not taken yet, searching outward.
    for (long d = 0; d < len; ++d) {
      bool placed = false;
      for (long candidate : {target + d, target - d}) {
        const long idx = ((candidate % len) + len) % len;
        if (!used.count(idx)) {
          used.insert(idx);
          placed = true;
          break;
        }
      }
      if (placed) break;
    }
  }
  return {used.begin(), used.end()};
}

double angle_to_pixels(double angle, const Geometry& g) { return g.shift_gain * angle; }

double pixels_to_angle(double pixels, const Geometry& g) { return pixels / g.shift_gain; }

Shift angle_to_shift(double angle, const Geometry& g) {
  const double px = angle_to_pixels(angle, g);
  return g.axis == Axis::Horizontal ? Shift{px, 0.0} : Shift{0.0, px};
}

std::string FeasibilityReport::describe() const {
  if (feasible) return "feasible";
  std::ostringstream out;
  out << "infeasible:";
  for (const auto& v : violations) {
    out << ' ' << to_string(v.constraint) << ' ' << v.value << " > " << v.limit
        << " (margin " << v.margin << ")";
  }
  return out.str();
}

FeasibilityReport feasibility_check(const ScanParams& p, const ActuatorLimits& limits,
                                    std::size_t n) {
  validate(limits);
  if (p.period < 2) throw ConfigError("scan.period", "must be >= 2 samples");
  FeasibilityReport report;
  const double omega = 2.0 * std::numbers::pi / (static_cast<double>(p.period) * p.dt);
  report.peak_velocity = omega * p.amplitude;
  report.peak_acceleration = omega * omega * p.amplitude;
  report.duration = static_cast<double>(n) * p.dt;

  auto check = [&](Constraint c, double value, double limit) {
    if (value > limit) {
      report.feasible = false;
      report.violations.push_back({c, value, limit, limit - value});
    }
  };
  check(Constraint::Velocity, report.peak_velocity, limits.max_velocity);
  check(Constraint::Acceleration, report.peak_acceleration, limits.max_acceleration);
  check(Constraint::Duration, report.duration, limits.time_budget);
  return report;
}

Trajectory read_angle_list(const std::filesystem::path& path, double dt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open angle list " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string_view token(line.data() + first, last - first + 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
      throw ConfigError("scan.trajectory_file", path.string() + ":" + std::to_string(line_no) +
                                                    ": not a finite number");
    }
    values.push_back(value);
  }
  Trajectory t{Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())),
               dt};
  validate(t, "scan.trajectory_file");
  return t;
}

}  // namespace scanopt
