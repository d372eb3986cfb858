#pragma once

// Blind pulse estimation.  The magnitude spectrum comes from the trace
// autocorrelation and the constant phase from the rotation angle that
// maximizes kurtosis.

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "signal_model.hpp"

namespace utd {

template <std::floating_point T = double>
struct KurtosisCurve {
  std::vector<T> angles;  // radians, [-pi/2, pi/2)
  std::vector<T> values;  // excess kurtosis at each angle
  std::size_t best_index = 0;
  T best_angle = 0;  // parabolic estimate when refinement is on, else angles[best_index]
  T best_value = 0;  // values[best_index]
};

template <std::floating_point T = double>
struct WaveletEstimate {
  std::vector<T> samples;  // zero lag at index size()/2
  T fs = 0;
  T phase = 0;  // constant phase of the pulse, radians
  KurtosisCurve<T> curve;
  T scale = 1;  // peak magnitude removed by normalization
  std::size_t clamped_bins = 0;
};

/// Sample window [begin, end) restricting the statistics to part of a trace.
struct Gate {
  std::size_t begin = 0;
  std::size_t end = 0;
};

template <std::floating_point T = double>
struct WaveletConfig {
  std::size_t wavelet_length = 0;  // 0 picks three dominant periods
  T grid_step = std::numbers::pi_v<T> / 180;
  bool refine = true;
  std::optional<Gate> gate;
};

/// Maps an angle onto [-pi/2, pi/2).
template <std::floating_point T>
T canonical_half_turn(T a) {
  const T pi = std::numbers::pi_v<T>;
  T r = a - pi * std::floor((a + pi / 2) / pi);
  if (r >= pi / 2) r -= pi;
  return r;
}

/// E[s^4] / E[s^2]^2 - 3 with plain sample means.  The mean is removed
/// first unless remove_dc is false.
template <std::floating_point T>
T excess_kurtosis(const std::vector<T>& s, bool remove_dc = true) {
  if (s.size() < 16) throw input_error("wavelet_estimation", "kurtosis needs at least 16 samples");
  T mean = 0;
  if (remove_dc) {
    for (T v : s) mean += v;
    mean /= static_cast<T>(s.size());
  }
  T m2 = 0, m4 = 0;
  for (T v : s) {
    const T d = v - mean;
    const T d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= static_cast<T>(s.size());
  m4 /= static_cast<T>(s.size());
  if (!(m2 > 0)) throw processing_error("wavelet_estimation", "kurtosis undefined for a zero-variance trace");
  return m4 / (m2 * m2) - 3;
}

template <std::floating_point T>
std::size_t grid_size(T grid_step) {
  const T pi = std::numbers::pi_v<T>;
  if (!(grid_step > 0)) throw input_error("wavelet_estimation", "grid step must be positive");
  const T ratio = pi / grid_step;
  const auto n = static_cast<std::size_t>(std::llround(ratio));
  if (n < 3 || std::abs(ratio - static_cast<T>(n)) > T(1e-6) * ratio)
    throw input_error("wavelet_estimation", "grid step must divide pi into at least 3 steps");
  return n;
}

/// Fills best_* from values.  Refinement fits a parabola through the
/// maximum and its two neighbours, wrapping around the periodic grid.
template <std::floating_point T>
void select_maximum(KurtosisCurve<T>& c, T grid_step, bool refine) {
  const std::size_t n = c.values.size();
  const auto it = std::max_element(c.values.begin(), c.values.end());
  c.best_index = static_cast<std::size_t>(it - c.values.begin());
  c.best_value = *it;
  c.best_angle = c.angles[c.best_index];
  if (!refine) return;
  const T y0 = c.values[(c.best_index + n - 1) % n];
  const T y1 = c.values[c.best_index];
  const T y2 = c.values[(c.best_index + 1) % n];
  const T d = y0 - 2 * y1 + y2;
  if (d < 0) {
    const T offset = T(0.5) * (y0 - y2) / d;
    c.best_angle = canonical_half_turn(c.best_angle + offset * grid_step);
  }
}

/// Kurtosis of the rotated trace over the [-pi/2, pi/2) grid.  The Hilbert
/// transform is taken once; each angle is a linear mix of s and H[s].
template <std::floating_point T>
KurtosisCurve<T> kurtosis_curve(const std::vector<T>& trace, T grid_step, bool refine = true) {
  const std::size_t n = grid_size(grid_step);
  const T pi = std::numbers::pi_v<T>;
  const auto s = remove_mean(trace);
  const auto h = hilbert(s);

  KurtosisCurve<T> c;
  c.angles.resize(n);
  c.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.angles[i] = -pi / 2 + grid_step * static_cast<T>(i);
    c.values[i] = excess_kurtosis(rotate_with(s, h, c.angles[i]));
  }
  select_maximum(c, grid_step, refine);
  return c;
}

template <std::floating_point T>
std::vector<T> gated(const std::vector<T>& s, const std::optional<Gate>& gate) {
  if (!gate) return s;
  if (gate->begin >= gate->end || gate->end > s.size())
    throw input_error("wavelet_estimation", "gate must satisfy begin < end <= trace length");
  return {s.begin() + static_cast<std::ptrdiff_t>(gate->begin), s.begin() + static_cast<std::ptrdiff_t>(gate->end)};
}

template <std::floating_point T>
KurtosisCurve<T> estimate_phase(const RfTrace<T>& trace, T grid_step = std::numbers::pi_v<T> / 180,
                                bool refine = true) {
  trace.validate("wavelet_estimation");
  return kurtosis_curve(trace.samples, grid_step, refine);
}

/// Three dominant periods, rounded up to an even count and kept within
/// [8, N/4].  The dominant frequency is the peak of the 5-bin smoothed
/// magnitude spectrum averaged over all given traces.
template <std::floating_point T>
std::size_t default_wavelet_length(const std::vector<const std::vector<T>*>& traces) {
  if (traces.empty()) throw input_error("wavelet_estimation", "no traces");
  const std::size_t n = traces.front()->size();
  const std::size_t half = n / 2 + 1;
  std::vector<T> mag(half, T(0));
  for (auto* tr : traces) {
    auto X = fft_real(remove_mean(*tr));
    for (std::size_t k = 0; k < half; ++k) mag[k] += std::abs(X[k]);
  }
  std::size_t best = 0;
  T best_v = -1;
  for (std::size_t k = 0; k < half; ++k) {
    T acc = 0;
    for (std::size_t j = (k >= 2 ? k - 2 : 0); j <= std::min(half - 1, k + 2); ++j) acc += mag[j];
    if (acc > best_v) {
      best_v = acc;
      best = k;
    }
  }
  if (best == 0 || !(best_v > 0))
    throw processing_error("wavelet_estimation", "no dominant frequency in the trace spectrum");
  auto L = static_cast<std::size_t>(std::llround(3.0 * static_cast<double>(n) / static_cast<double>(best)));
  L += L % 2;
  const std::size_t upper = (n / 4) & ~std::size_t{1};
  return std::clamp<std::size_t>(L, 8, std::max<std::size_t>(8, upper));
}

template <std::floating_point T>
std::size_t default_wavelet_length(const std::vector<T>& trace) {
  return default_wavelet_length<T>(std::vector<const std::vector<T>*>{&trace});
}

/// Builds the time-domain pulse from |S_cc| and the kurtosis phase:
/// W(f) = |S_cc(f)| exp(i phi_kurt sgn f), zero lag moved to L/2, cosine
/// taper on the outer tenth, unit peak.
template <std::floating_point T>
WaveletEstimate<T> wavelet_from_statistics(const Autocorrelation<T>& acf, const KurtosisCurve<T>& curve,
                                           std::size_t wavelet_length, T fs) {
  const std::size_t L = wavelet_length;
  const std::size_t nfft = std::bit_ceil(4 * L);
  auto amp = amplitude_spectrum_from_acf(acf, nfft, fs);

  bool any = false;
  for (auto& b : amp.spectrum.bins) any = any || b.real() > 0;
  if (!any) throw processing_error("wavelet_estimation", "magnitude spectrum is empty after clamping");

  const T phi = curve.best_angle;
  const std::complex<T> pos = std::polar(T(1), phi);
  std::vector<std::complex<T>> W(nfft);
  for (std::size_t k = 0; k < nfft; ++k) {
    const int s = frequency_sign(k, nfft);
    const T a = amp.spectrum.bins[k].real();
    W[k] = s == 0 ? std::complex<T>(a) : a * (s > 0 ? pos : std::conj(pos));
  }
  const auto wt = ifft_real(std::move(W));

  WaveletEstimate<T> w;
  w.fs = fs;
  w.samples.resize(L);
  for (std::size_t j = 0; j < L; ++j) w.samples[j] = wt[(j + nfft - L / 2) % nfft];

  // The taper weight depends only on the distance from the zero-lag sample,
  // so a zero-phase estimate stays exactly even about L/2.
  const std::size_t nt = std::max<std::size_t>(1, L / 10);
  const std::size_t c = L / 2;
  for (std::size_t j = 0; j < L; ++j) {
    const std::size_t d = j < c ? c - j : j - c;
    if (c - d >= nt) continue;
    const T e = static_cast<T>(c - d) + T(0.5);
    w.samples[j] *= T(0.5) * (T(1) - std::cos(std::numbers::pi_v<T> * e / static_cast<T>(nt)));
  }

  T peak = 0;
  for (T v : w.samples) peak = std::max(peak, std::abs(v));
  if (!(peak > 0)) throw processing_error("wavelet_estimation", "estimated wavelet is identically zero");
  for (T& v : w.samples) v /= peak;

  w.scale = peak;
  w.phase = canonical_half_turn(-phi);
  w.curve = curve;
  w.clamped_bins = amp.clamped_bins;
  return w;
}

template <std::floating_point T>
void check_wavelet_length(std::size_t L, std::size_t n) {
  if (L < 4 || L % 2 != 0) throw input_error("wavelet_estimation", "wavelet length must be even and at least 4");
  if (L > n / 4) throw input_error("wavelet_estimation", "wavelet length must not exceed a quarter of the trace");
}

template <std::floating_point T>
WaveletEstimate<T> estimate_wavelet(const RfTrace<T>& trace, const WaveletConfig<T>& cfg = {}) {
  trace.validate("wavelet_estimation");
  const auto s = remove_mean(gated(trace.samples, cfg.gate));
  const std::size_t L = cfg.wavelet_length ? cfg.wavelet_length : default_wavelet_length(s);
  check_wavelet_length<T>(L, s.size());
  auto curve = kurtosis_curve(s, cfg.grid_step, cfg.refine);
  auto acf = autocorrelation(s, L, lag_taper::hann);
  return wavelet_from_statistics(acf, curve, L, trace.fs);
}

template <std::floating_point T>
WaveletEstimate<T> estimate_wavelet(const RfTrace<T>& trace, std::size_t wavelet_length,
                                    T grid_step = std::numbers::pi_v<T> / 180) {
  WaveletConfig<T> cfg;
  cfg.wavelet_length = wavelet_length;
  cfg.grid_step = grid_step;
  return estimate_wavelet(trace, cfg);
}

}  // namespace utd
