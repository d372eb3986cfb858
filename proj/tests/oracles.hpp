#pragma once

// Reference computations that share no code with the library: direct
// O(N^2) transforms, closed-form kernels and small least-squares solvers.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "utd/synthetic_bench.hpp"

namespace oracle {

using cd = std::complex<double>;

inline std::vector<cd> dft(const std::vector<cd>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<long double> acc{};
    for (std::size_t j = 0; j < n; ++j) {
      const long double a = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>((k * j) % n) / n;
      acc += std::complex<long double>(x[j].real(), x[j].imag()) * std::complex<long double>(std::cos(a), std::sin(a));
    }
    out[k] = {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
  }
  return out;
}

/// Hilbert transform of a unit impulse on an even-length periodic grid:
/// (2/N) cot(pi m / N) for odd offsets m, zero for even ones.
inline double periodic_hilbert_kernel(long m, std::size_t n) {
  const long mm = ((m % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n);
  if (mm % 2 == 0) return 0.0;
  return 2.0 / static_cast<double>(n) / std::tan(std::numbers::pi * static_cast<double>(mm) / static_cast<double>(n));
}

/// Ideal discrete Hilbert kernel 2 / (pi m) for odd m.
inline double ideal_hilbert_kernel(long m) {
  if (m % 2 == 0) return 0.0;
  return 2.0 / (std::numbers::pi * static_cast<double>(m));
}

/// Direct (time-domain) circular convolution.
inline std::vector<double> circular_convolve(const std::vector<double>& x, const std::vector<double>& h) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i] += x[j] * h[(i + n - j) % n];
  return y;
}

/// Least-squares forward AR(2) fit of x[t] + a1 x[t-1] + a2 x[t-2] = e[t]
/// by the 2x2 normal equations.
inline std::pair<double, double> ls_ar2(const std::vector<double>& x) {
  double r11 = 0, r12 = 0, r22 = 0, b1 = 0, b2 = 0;
  for (std::size_t t = 2; t < x.size(); ++t) {
    r11 += x[t - 1] * x[t - 1];
    r12 += x[t - 1] * x[t - 2];
    r22 += x[t - 2] * x[t - 2];
    b1 -= x[t] * x[t - 1];
    b2 -= x[t] * x[t - 2];
  }
  const double det = r11 * r22 - r12 * r12;
  return {(b1 * r22 - b2 * r12) / det, (r11 * b2 - r12 * b1) / det};
}

/// Normalized cross-correlation of two equal-length sequences at zero lag.
inline double ncc(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

/// Centered window of length n taken from a centered pulse.
inline std::vector<double> center_crop(const std::vector<double>& w, std::size_t n) {
  std::vector<double> out(n, 0.0);
  const long c = static_cast<long>(w.size() / 2), h = static_cast<long>(n / 2);
  for (long i = 0; i < static_cast<long>(n); ++i) {
    const long j = c - h + i;
    if (j >= 0 && j < static_cast<long>(w.size())) out[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(j)];
  }
  return out;
}

/// Angular distance modulo 180 degrees, in degrees.
inline double half_turn_error_deg(double a_rad, double b_rad) {
  double d = std::fmod(std::abs(a_rad - b_rad), std::numbers::pi);
  d = std::min(d, std::numbers::pi - d);
  return d * 180.0 / std::numbers::pi;
}

}  // namespace oracle
