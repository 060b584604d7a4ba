#pragma once

#include <Eigen/Dense>

#include <complex>

namespace scanopt::spectral {

using ComplexVector = Eigen::VectorXcd;

/// Full (two-sided) DFT of a real signal, X(k) = sum_n x(n) exp(-2 pi i k n / N).
ComplexVector forward(const Eigen::VectorXd& x);

/// Inverse DFT including the 1/N factor.
ComplexVector inverse(const ComplexVector& spectrum);

/// Real part of the inverse DFT.
Eigen::VectorXd inverse_real(const ComplexVector& spectrum);

/// Signed frequency of bin k in cycles per sample, in (-0.5, 0.5].
double bin_frequency(Eigen::Index k, Eigen::Index n);

/// Signed integer index of bin k: k for k <= N/2, k - N otherwise.
Eigen::Index signed_bin(Eigen::Index k, Eigen::Index n);

/// Circularly shifts a real signal so that out(x) = in(x + shift), using the
/// DFT shift theorem. The Nyquist bin (even N) is scaled by cos(pi * shift) so
/// the operator stays real and its transpose is the shift by -shift.
Eigen::VectorXd fourier_shift(const Eigen::VectorXd& x, double shift);

}  // namespace scanopt::spectral
