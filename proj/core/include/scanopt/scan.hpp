#pragma once

#include "scanopt/plant.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scanopt {

/// One scan candidate. Sample indices are zero-based.
struct ScanParams {
  double amplitude = 0.0;   // radians
  std::size_t period = 2;   // samples per oscillation
  std::vector<std::size_t> capture_indices;
  double dt = 0.01;         // seconds per sample
};

struct ActuatorLimits {
  double max_velocity = 1.0;      // rad/s
  double max_acceleration = 1.0;  // rad/s^2
  double time_budget = 1.0;       // s
};

enum class Axis { Horizontal, Vertical };
std::string_view to_string(Axis axis);
std::optional<Axis> parse_axis(std::string_view text);

/// Small-angle camera model: rotating by `angle` translates the image by
/// shift_gain * angle high-resolution pixels along `axis`.
struct Geometry {
  double shift_gain = 100.0;  // pixels per radian
  Axis axis = Axis::Horizontal;
};

/// Image-plane translation in high-resolution pixels.
struct Shift {
  double dx = 0.0;
  double dy = 0.0;
  friend bool operator==(const Shift&, const Shift&) = default;
};

/// Throws ConfigError naming the offending field.
void validate(const ScanParams& params, std::size_t trajectory_length);
void validate(const ActuatorLimits& limits);
void validate(const Geometry& geometry);

/// amplitude * sin(2 pi k / period) for k = 0..n-1.
Trajectory gen_periodic_trajectory(const ScanParams& params, std::size_t n);

/// Default capture schedule: `count` instants inside the last rising half
/// period of an n_periods-long sine whose desired angles are evenly spaced
/// over [-A, A], i.e. phases asin(-1 + 2k/(count-1)). Rounded to the nearest
/// free sample so the indices are strictly increasing.
std::vector<std::size_t> default_capture_indices(std::size_t period, std::size_t n_periods,
                                                 std::size_t count);

double angle_to_pixels(double angle, const Geometry& geometry);
double pixels_to_angle(double pixels, const Geometry& geometry);
Shift angle_to_shift(double angle, const Geometry& geometry);

enum class Constraint { Velocity, Acceleration, Duration };
std::string_view to_string(Constraint c);

struct Violation {
  Constraint constraint;
  double value;
  double limit;
  double margin;  // limit - value, negative when violated
};

struct FeasibilityReport {
  bool feasible = true;
  double peak_velocity = 0.0;      // 2 pi A / (period dt)
  double peak_acceleration = 0.0;  // (2 pi / (period dt))^2 A
  double duration = 0.0;           // n dt
  std::vector<Violation> violations;

  std::string describe() const;
};

/// Peak rates use the continuous-time envelope of the sine. All constraints
/// are closed: a value equal to its limit is feasible.
FeasibilityReport feasibility_check(const ScanParams& params, const ActuatorLimits& limits,
                                    std::size_t trajectory_length);

/// Reads a desired-angle list: one value in radians per line, blank lines and
/// '#' comments ignored.
Trajectory read_angle_list(const std::filesystem::path& path, double dt);

}  // namespace scanopt
