#include "scanopt/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <vector>

namespace scanopt::spectral {

namespace {

// Eigen::FFT keeps per-size plans; one engine per thread keeps callers independent.
Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

}  // namespace

ComplexVector forward(const Eigen::VectorXd& x) {
  std::vector<std::complex<double>> in(x.data(), x.data() + x.size());
  std::vector<std::complex<double>> out;
  engine().fwd(out, in);
  return Eigen::Map<ComplexVector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

ComplexVector inverse(const ComplexVector& spectrum) {
  std::vector<std::complex<double>> in(spectrum.data(), spectrum.data() + spectrum.size());
  std::vector<std::complex<double>> out;
  engine().inv(out, in);  // Eigen scales by 1/N
  return Eigen::Map<ComplexVector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Eigen::VectorXd inverse_real(const ComplexVector& spectrum) { return inverse(spectrum).real(); }

Eigen::Index signed_bin(Eigen::Index k, Eigen::Index n) { return (2 * k <= n) ? k : k - n; }

double bin_frequency(Eigen::Index k, Eigen::Index n) {
  return static_cast<double>(signed_bin(k, n)) / static_cast<double>(n);
}

Eigen::VectorXd fourier_shift(const Eigen::VectorXd& x, double shift) {
  const auto n = x.size();
  if (n == 0 || shift == 0.0) return x;
  ComplexVector spec = forward(x);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (2 * k == n) {
      spec[k] *= std::cos(std::numbers::pi * shift);
      continue;
    }
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(signed_bin(k, n)) *
                         shift / static_cast<double>(n);
    spec[k] *= std::polar(1.0, phase);
  }
  return inverse_real(spec);
}

}  // namespace scanopt::spectral
