#pragma once

#include "scanopt/plant.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

namespace scanopt::testing {

inline Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline Trajectory random_trajectory(Eigen::Index n, std::uint64_t seed, double dt = 0.01) {
  return {random_vector(n, seed), dt};
}

/// Random stable SISO model with spectral radius below 0.9 and C*B != 0.
inline StateSpaceModel random_stable_model(Eigen::Index order, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::MatrixXd a(order, order);
  for (auto& x : a.reshaped()) x = unit(rng);
  const double radius = a.eigenvalues().cwiseAbs().maxCoeff();
  a *= 0.85 / std::max(radius, 1e-3);
  Eigen::VectorXd b(order);
  Eigen::RowVectorXd c(order);
  for (auto& x : b) x = unit(rng);
  for (auto& x : c) x = unit(rng);
  if (std::abs(c.dot(b)) < 0.2) b[0] += (c[0] >= 0 ? 1.0 : -1.0) * 0.5;
  return StateSpaceModel(a, b, c, 0.01);
}

/// Fresh, empty scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(SCANOPT_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path source_path(const std::string& relative) {
  return std::filesystem::path(SCANOPT_SOURCE_DIR) / relative;
}

}  // namespace scanopt::testing
