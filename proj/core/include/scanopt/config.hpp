#pragma once

#include "scanopt/ilc.hpp"
#include "scanopt/imaging.hpp"
#include "scanopt/optimizer.hpp"
#include "scanopt/plant.hpp"
#include "scanopt/scan.hpp"
#include "scanopt/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace scanopt {

/// Plant description: a continuous servo discretized by ZOH, or explicit
/// discrete matrices.
struct PlantConfig {
  bool discrete = false;
  ServoParams servo;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::RowVectorXd c;
  double dt = 0.01;

  StateSpaceModel build() const;
};

/// Parsed and validated experiment file. See docs/config.md for the keys.
struct ExperimentConfig {
  PlantConfig model;
  PlantConfig world;  // starts as a copy of `model`; world.* keys override
  std::optional<double> saturation;

  LearningLaw law = LearningLaw::inverse();
  std::optional<double> gain_fraction;
  IlcSettings ilc;

  double amplitude = 0.015;
  std::size_t period = 32;
  std::size_t periods = 3;
  std::size_t captures = 0;
  std::vector<std::size_t> capture_indices;
  std::optional<std::filesystem::path> trajectory_file;

  Geometry geometry;
  ActuatorLimits limits{0.6, 25.0, 1.5};

  SceneKind scene = SceneKind::Bars;
  std::size_t size = 128;
  std::size_t q = 2;
  double noise_sigma = 0.0;
  double lambda = 1e-2;
  std::size_t max_cg_iters = 200;
  double contrast_threshold = kDefaultContrastThreshold;
  double shift_error_std = 0.0;
  std::vector<Shift> shifts;  // reconstruct command; empty means the q^2 interleave

  std::vector<double> amplitudes{0.0, 0.005, 0.01, 0.015, 0.02};
  std::vector<std::size_t> period_grid{16, 24, 32, 48, 64};
  std::size_t threads = 1;

  std::size_t sim_samples = 256;
  SimPattern sim;

  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";

  Scenario scenario() const;
  /// Desired trajectory: the configured sine, or the angle list file.
  Trajectory desired_trajectory() const;
  ScanParams scan_params() const;
};

/// Parses `key = value` lines ('#' starts a comment). Unknown or repeated keys
/// and out-of-range values raise ConfigError naming the key. Relative paths
/// are resolved against `base_dir`.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});

ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks every section against the preconditions of the modules that will
/// consume it.
void validate(const ExperimentConfig& config);

/// All recognized keys, sorted.
std::vector<std::string> known_config_keys();

}  // namespace scanopt
