#pragma once

// Discrete Fourier transforms used throughout the library.
//
// Convention: the forward transform is unnormalized,
//   X[k] = sum_n x[n] exp(-2 pi i k n / N),
// and the inverse carries the 1/N factor.  Power-of-two sizes use an
// iterative radix-2 kernel; every other size goes through Bluestein's
// chirp-z algorithm on top of it.  The code is sequential and allocation
// order is fixed, so results are bitwise reproducible for a given input.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace utd {

namespace detail {

template <std::floating_point T>
std::complex<T> unit_phasor(long double turns) {
  // turns is a fraction of a full cycle; evaluate in long double so that
  // large-N twiddles keep full T precision.
  const long double a = -2.0L * std::numbers::pi_v<long double> * turns;
  return {static_cast<T>(std::cos(a)), static_cast<T>(std::sin(a))};
}

template <std::floating_point T>
void radix2(std::vector<std::complex<T>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  std::vector<std::complex<T>> tw(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    auto w = unit_phasor<T>(static_cast<long double>(k) / static_cast<long double>(n));
    tw[k] = inverse ? std::conj(w) : w;
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < half; ++j) {
        const std::complex<T> u = a[i + j];
        const std::complex<T> v = a[i + j + half] * tw[j * stride];
        a[i + j] = u + v;
        a[i + j + half] = u - v;
      }
    }
  }
}

template <std::floating_point T>
void bluestein(std::vector<std::complex<T>>& a, bool inverse) {
  const std::size_t n = a.size();
  const std::size_t m = std::bit_ceil(2 * n - 1);

  // chirp[k] = exp(-i pi k^2 / n); k^2 is reduced mod 2n to keep the
  // argument small.
  std::vector<std::complex<T>> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const unsigned long long k2 = (static_cast<unsigned long long>(k) * k) % (2ULL * n);
    auto c = unit_phasor<T>(static_cast<long double>(k2) / (2.0L * static_cast<long double>(n)));
    chirp[k] = inverse ? std::conj(c) : c;
  }

  std::vector<std::complex<T>> x(m), y(m);
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
  y[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) y[k] = y[m - k] = std::conj(chirp[k]);

  radix2(x, false);
  radix2(y, false);
  for (std::size_t k = 0; k < m; ++k) x[k] *= y[k];
  radix2(x, true);

  const T scale = T(1) / static_cast<T>(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * scale * chirp[k];
}

template <std::floating_point T>
void transform(std::vector<std::complex<T>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if (std::has_single_bit(n))
    radix2(a, inverse);
  else
    bluestein(a, inverse);
}

}  // namespace detail

/// Forward DFT, unnormalized.
template <std::floating_point T>
std::vector<std::complex<T>> fft(std::vector<std::complex<T>> a) {
  detail::transform(a, false);
  return a;
}

/// Forward DFT of a real sequence, zero-padded (or truncated) to nfft.
/// nfft == 0 means the input length.
template <std::floating_point T>
std::vector<std::complex<T>> fft_real(const std::vector<T>& x, std::size_t nfft = 0) {
  if (nfft == 0) nfft = x.size();
  std::vector<std::complex<T>> a(nfft);
  for (std::size_t i = 0; i < std::min(nfft, x.size()); ++i) a[i] = x[i];
  detail::transform(a, false);
  return a;
}

/// Inverse DFT including the 1/N factor.
template <std::floating_point T>
std::vector<std::complex<T>> ifft(std::vector<std::complex<T>> a) {
  detail::transform(a, true);
  const T scale = a.empty() ? T(1) : T(1) / static_cast<T>(a.size());
  for (auto& v : a) v *= scale;
  return a;
}

/// Inverse DFT keeping the real part.  If imag_residue is given it receives
/// max|imag| / max|real| (0 for an all-zero result).
template <std::floating_point T>
std::vector<T> ifft_real(std::vector<std::complex<T>> a, T* imag_residue = nullptr) {
  a = ifft(std::move(a));
  std::vector<T> out(a.size());
  T max_re = 0, max_im = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = a[i].real();
    max_re = std::max(max_re, std::abs(a[i].real()));
    max_im = std::max(max_im, std::abs(a[i].imag()));
  }
  if (imag_residue) *imag_residue = max_re > 0 ? max_im / max_re : max_im;
  return out;
}

/// Signum of the frequency of bin k in an n-point DFT: +1 for positive
/// frequencies, -1 for negative, 0 at DC and (for even n) Nyquist.
inline int frequency_sign(std::size_t k, std::size_t n) {
  if (k == 0) return 0;
  if (2 * k == n) return 0;
  return 2 * k < n ? 1 : -1;
}

}  // namespace utd
