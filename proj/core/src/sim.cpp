#include "scanopt/sim.hpp"

#include "scanopt/errors.hpp"
#include "scanopt/spectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace scanopt {

namespace {

constexpr double kBinTolerance = 1e-9;
constexpr double kPhaseTolerance = 1e-9;

Eigen::Index to_bin(double f, Eigen::Index n, const char* key) {
  const double bins = f * static_cast<double>(n);
  if (std::abs(bins - std::round(bins)) > kBinTolerance) {
    throw ConfigError(key, "frequency must be a multiple of 1/" + std::to_string(n));
  }
  return static_cast<Eigen::Index>(std::llround(bins));
}

Eigen::Matrix3cd mixing_matrix(const SimPattern& p) {
  Eigen::Matrix3cd m;
  for (int row = 0; row < 3; ++row) {
    m(row, 0) = 1.0;
    m(row, 1) = 0.5 * p.modulation * std::polar(1.0, p.phases[row]);
    m(row, 2) = 0.5 * p.modulation * std::polar(1.0, -p.phases[row]);
  }
  return m;
}

void low_pass(Eigen::VectorXcd& spec, Eigen::Index cutoff_bin) {
  const auto n = spec.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(spectral::signed_bin(k, n)) > cutoff_bin) spec[k] = 0.0;
  }
}

}  // namespace

void validate(const SimPattern& p, Eigen::Index n) {
  if (n < 4) throw ConfigError("sim.samples", "need at least 4 samples");
  if (!(p.fc > 0.0)) throw ConfigError("sim.fc", "must be positive");
  if (!(p.f0 > 0.0)) throw ConfigError("sim.f0", "must be positive");
  if (p.f0 > p.fc) throw ConfigError("sim.f0", "must not exceed the passband cutoff fc");
  if (!(p.fc + p.f0 < 0.5)) throw ConfigError("sim.f0", "fc + f0 must stay below 0.5");
  to_bin(p.f0, n, "sim.f0");
  to_bin(p.fc, n, "sim.fc");
  if (!(p.modulation > 0.0) || !std::isfinite(p.modulation)) {
    throw SingularMixingError("modulation depth must be positive (m = " +
                              std::to_string(p.modulation) + "); the bands cannot be separated");
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const double d = std::remainder(p.phases[a] - p.phases[b], 2.0 * std::numbers::pi);
      if (std::abs(d) < kPhaseTolerance) {
        throw SingularMixingError("illumination phases " + std::to_string(a) + " and " +
                                  std::to_string(b) + " coincide modulo 2 pi");
      }
    }
  }
}

std::array<Eigen::VectorXd, 3> sim_observe(const Eigen::VectorXd& s, const SimPattern& p) {
  validate(p, s.size());
  const auto n = s.size();
  const Eigen::Index cutoff_bin = to_bin(p.fc, n, "sim.fc");
  std::array<Eigen::VectorXd, 3> out;
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd lit(n);
    for (Eigen::Index x = 0; x < n; ++x) {
      lit[x] = s[x] * (1.0 + p.modulation *
                                 std::cos(2.0 * std::numbers::pi * p.f0 * static_cast<double>(x) +
                                          p.phases[k]));
    }
    Eigen::VectorXcd spec = spectral::forward(lit);
    low_pass(spec, cutoff_bin);
    out[k] = spectral::inverse_real(spec);
  }
  return out;
}

SimReconstruction sim_demodulate_1d(const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                                    const Eigen::VectorXd& y2, const SimPattern& p) {
  const auto n = y0.size();
  if (y1.size() != n || y2.size() != n) {
    throw ConfigError("sim", "the three observations must have equal length");
  }
  validate(p, n);
  const Eigen::Index k0 = to_bin(p.f0, n, "sim.f0");
  const Eigen::Index kc = to_bin(p.fc, n, "sim.fc");

  const Eigen::Matrix3cd mix = mixing_matrix(p);
  const Eigen::FullPivLU<Eigen::Matrix3cd> lu(mix);
  if (!lu.isInvertible()) throw SingularMixingError("illumination mixing matrix is singular");
  const Eigen::Matrix3cd unmix = lu.inverse();

  const Eigen::VectorXcd spec0 = spectral::forward(y0);
  const Eigen::VectorXcd spec1 = spectral::forward(y1);
  const Eigen::VectorXcd spec2 = spectral::forward(y2);

  SimReconstruction out;
  out.center = Eigen::VectorXcd::Zero(n);
  out.lower = Eigen::VectorXcd::Zero(n);
  out.upper = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(n);
  auto wrap = [n](Eigen::Index k) { return ((k % n) + n) % n; };

  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index f = spectral::signed_bin(k, n);
    if (std::abs(f) > kc) continue;
    const Eigen::Vector3cd bands = unmix * Eigen::Vector3cd(spec0[k], spec1[k], spec2[k]);
    out.center[k] = bands[0];
    out.lower[k] = bands[1];
    out.upper[k] = bands[2];
    sum[k] += bands[0];
    count[k] += 1.0;
    sum[wrap(f - k0)] += bands[1];
    count[wrap(f - k0)] += 1.0;
    sum[wrap(f + k0)] += bands[2];
    count[wrap(f + k0)] += 1.0;
  }

  out.spectrum = Eigen::VectorXcd::Zero(n);
  Eigen::Index support_bin = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (count[k] == 0.0) continue;
    out.spectrum[k] = sum[k] / count[k];
    support_bin = std::max(support_bin, std::abs(spectral::signed_bin(k, n)));
  }
  out.signal = spectral::inverse_real(out.spectrum);
  out.passband = p.fc;
  out.support = static_cast<double>(support_bin) / static_cast<double>(n);
  out.extension_factor = out.support / out.passband;
  return out;
}

}  // namespace scanopt
