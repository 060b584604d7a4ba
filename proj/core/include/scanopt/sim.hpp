#pragma once

#include <Eigen/Dense>

#include <array>

namespace scanopt {

/// Sinusoidal illumination s(x) * (1 + m cos(2 pi f0 x + phase_p)) observed
/// through an ideal low-pass of cutoff fc (cycles per sample).
struct SimPattern {
  double f0 = 0.125;
  std::array<double, 3> phases{};
  double modulation = 1.0;
  double fc = 0.125;
};

/// Throws ConfigError for out-of-range frequencies (f0 and fc must land on
/// DFT bins of an n-sample signal, 0 < f0 <= fc, fc + f0 < 0.5) and
/// SingularMixingError when m = 0 or two phases coincide modulo 2 pi.
void validate(const SimPattern& pattern, Eigen::Index n);

/// Synthesizes the three band-limited observations of s under the pattern.
std::array<Eigen::VectorXd, 3> sim_observe(const Eigen::VectorXd& s, const SimPattern& pattern);

struct SimReconstruction {
  Eigen::VectorXd signal;     // recovered s on the original grid
  Eigen::VectorXcd spectrum;  // DFT of the recovered signal
  Eigen::VectorXcd center;    // S(f) for |f| <= fc
  Eigen::VectorXcd lower;     // S(f - f0) estimated at bins |f| <= fc
  Eigen::VectorXcd upper;     // S(f + f0) estimated at bins |f| <= fc
  double passband = 0.0;      // fc
  double support = 0.0;       // highest recovered |frequency|
  double extension_factor = 0.0;  // support / passband
};

/// Separates the three mixed bands bin-by-bin with a 3x3 complex solve and
/// reassembles them into a spectrum extending to fc + f0. Where bands overlap
/// the estimates are averaged.
SimReconstruction sim_demodulate_1d(const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                                    const Eigen::VectorXd& y2, const SimPattern& pattern);

}  // namespace scanopt
