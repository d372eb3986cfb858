#pragma once

// Trace and spectrum types plus the spectral primitives the rest of the
// library is built on: Hilbert transform, envelope, constant-phase
// rotation and autocorrelation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "fft.hpp"

namespace utd {

/// Uniformly sampled real A-scan.
template <std::floating_point T = double>
struct RfTrace {
  std::vector<T> samples;
  T fs = T(100e6);  // Hz
  T t0 = 0;         // time of the first sample, s

  std::size_t size() const { return samples.size(); }

  void validate(const char* stage = "signal_model") const {
    if (samples.size() < 2) throw input_error(stage, "trace needs at least 2 samples");
    if (!(fs > 0) || !std::isfinite(fs)) throw input_error(stage, "sampling rate must be positive");
    for (T v : samples)
      if (!std::isfinite(v)) throw input_error(stage, "trace contains non-finite samples");
  }
};

/// Complex spectrum over bins 0..N-1 with spacing df.  hermitian asserts
/// that the bins describe a real time signal.
template <std::floating_point T = double>
struct Spectrum {
  std::vector<std::complex<T>> bins;
  T df = 0;
  bool hermitian = false;

  std::size_t size() const { return bins.size(); }

  /// True when bin[k] == conj(bin[N-k]) within rel_tol of the largest bin.
  bool is_hermitian(T rel_tol = T(1e-9)) const {
    T peak = 0;
    for (auto& b : bins) peak = std::max(peak, std::abs(b));
    const std::size_t n = bins.size();
    for (std::size_t k = 1; k < n; ++k)
      if (std::abs(bins[k] - std::conj(bins[n - k])) > rel_tol * peak) return false;
    return n == 0 || std::abs(bins[0].imag()) <= rel_tol * peak;
  }
};

template <std::floating_point T = double>
struct AnalyticTrace {
  std::vector<T> real_part;
  std::vector<T> imag_part;
  T fs = 0;
};

enum class lag_taper { none, hann };

template <std::floating_point T = double>
struct Autocorrelation {
  std::vector<T> values;  // lags 0..max_lag
  std::size_t max_lag = 0;
  lag_taper taper = lag_taper::none;
};

/// Magnitude spectrum derived from an autocorrelation.  clamped_bins
/// counts the bins whose power went negative and was set to zero.
template <std::floating_point T = double>
struct AmplitudeSpectrum {
  Spectrum<T> spectrum;
  std::size_t clamped_bins = 0;
};

/// Hilbert transform of a real sequence: multiplication by -i sgn(f) with
/// DC and Nyquist zeroed, on the full-length DFT.
template <std::floating_point T>
std::vector<T> hilbert(const std::vector<T>& x) {
  const std::size_t n = x.size();
  auto X = fft_real(x);
  for (std::size_t k = 0; k < n; ++k) {
    const int s = frequency_sign(k, n);
    X[k] = s == 0 ? std::complex<T>{} : X[k] * std::complex<T>(0, -T(s));
  }
  return ifft_real(std::move(X));
}

template <std::floating_point T>
AnalyticTrace<T> analytic_signal(const RfTrace<T>& trace) {
  trace.validate();
  if (trace.size() < 8) throw input_error("signal_model", "analytic signal needs at least 8 samples");
  return {trace.samples, hilbert(trace.samples), trace.fs};
}

template <std::floating_point T>
std::vector<T> envelope(const std::vector<T>& x) {
  auto h = hilbert(x);
  std::vector<T> e(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) e[i] = std::hypot(x[i], h[i]);
  return e;
}

template <std::floating_point T>
RfTrace<T> envelope(const RfTrace<T>& trace) {
  auto a = analytic_signal(trace);
  RfTrace<T> out{std::vector<T>(trace.size()), trace.fs, trace.t0};
  for (std::size_t i = 0; i < trace.size(); ++i) out.samples[i] = std::hypot(a.real_part[i], a.imag_part[i]);
  return out;
}

/// s cos(phi) + H[s] sin(phi), given a precomputed Hilbert transform.
template <std::floating_point T>
std::vector<T> rotate_with(const std::vector<T>& s, const std::vector<T>& h, T phi) {
  const T c = std::cos(phi), sn = std::sin(phi);
  std::vector<T> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] * c + h[i] * sn;
  return out;
}

template <std::floating_point T>
std::vector<T> phase_rotate(const std::vector<T>& s, T phi) {
  return rotate_with(s, hilbert(s), phi);
}

template <std::floating_point T>
RfTrace<T> phase_rotate(const RfTrace<T>& trace, T phi) {
  trace.validate();
  return {phase_rotate(trace.samples, phi), trace.fs, trace.t0};
}

/// Biased sample autocorrelation r[k] = (1/N) sum s[n] s[n+k], k = 0..max_lag,
/// optionally multiplied by the Hann lag window 0.5 (1 + cos(pi k / (max_lag+1))).
template <std::floating_point T>
Autocorrelation<T> autocorrelation(const std::vector<T>& s, std::size_t max_lag,
                                   lag_taper taper = lag_taper::hann) {
  const std::size_t n = s.size();
  if (max_lag >= n) throw input_error("signal_model", "max_lag must be smaller than the trace length");
  Autocorrelation<T> r{std::vector<T>(max_lag + 1), max_lag, taper};
  for (std::size_t k = 0; k <= max_lag; ++k) {
    T acc = 0;
    for (std::size_t i = 0; i + k < n; ++i) acc += s[i] * s[i + k];
    r.values[k] = acc / static_cast<T>(n);
  }
  if (taper == lag_taper::hann) {
    const T denom = static_cast<T>(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k)
      r.values[k] *= T(0.5) * (T(1) + std::cos(std::numbers::pi_v<T> * static_cast<T>(k) / denom));
  }
  return r;
}

template <std::floating_point T>
Autocorrelation<T> autocorrelation(const RfTrace<T>& trace, std::size_t max_lag,
                                   lag_taper taper = lag_taper::hann) {
  trace.validate();
  return autocorrelation(trace.samples, max_lag, taper);
}

/// Square root of the power spectrum obtained by transforming the
/// even extension of acf on an nfft grid.  df is left at 0 unless fs is
/// supplied.
template <std::floating_point T>
AmplitudeSpectrum<T> amplitude_spectrum_from_acf(const Autocorrelation<T>& acf, std::size_t nfft, T fs = 0) {
  const std::size_t L = acf.values.size() - 1;
  if (acf.values.empty() || nfft < 2 * L + 1)
    throw input_error("signal_model", "nfft must be at least 2*max_lag + 1");
  std::vector<std::complex<T>> c(nfft);
  c[0] = acf.values[0];
  for (std::size_t k = 1; k <= L; ++k) c[k] = c[nfft - k] = acf.values[k];
  auto P = fft(std::move(c));

  AmplitudeSpectrum<T> out;
  out.spectrum.df = fs > 0 ? fs / static_cast<T>(nfft) : T(0);
  out.spectrum.hermitian = true;
  out.spectrum.bins.resize(nfft);
  for (std::size_t k = 0; k < nfft; ++k) {
    T p = P[k].real();
    if (p < 0) {
      p = 0;
      ++out.clamped_bins;
    }
    out.spectrum.bins[k] = std::sqrt(p);
  }
  return out;
}

/// Sum of squares.
template <std::floating_point T>
T energy(const std::vector<T>& x) {
  T e = 0;
  for (T v : x) e += v * v;
  return e;
}

template <std::floating_point T>
std::vector<T> remove_mean(std::vector<T> x) {
  if (x.empty()) return x;
  T m = 0;
  for (T v : x) m += v;
  m /= static_cast<T>(x.size());
  for (T& v : x) v -= m;
  return x;
}

}  // namespace utd
