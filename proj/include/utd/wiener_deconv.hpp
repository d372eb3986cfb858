#pragma once

// Regularized least-squares inverse filtering.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "signal_model.hpp"
#include "wavelet_estimation.hpp"

namespace utd {

template <std::floating_point T = double>
struct WienerConfig {
  T eps_factor = T(0.01);  // epsilon = eps_factor * max|W|^2
  std::size_t nfft = 0;    // 0: next power of two >= trace + wavelet length
  // When set, epsilon is this noise variance instead of the max|W|^2 rule.
  std::optional<T> noise_variance;
};

template <std::floating_point T = double>
struct DeconTrace {
  std::vector<T> samples;
  T fs = 0;
  Spectrum<T> spectrum;  // R_est on the nfft grid
  T eps = 0;
  T imag_residue = 0;
};

/// Wavelet spectrum on an nfft grid with the zero-lag sample (index L/2)
/// placed at the origin.
template <std::floating_point T>
std::vector<std::complex<T>> centered_wavelet_spectrum(const std::vector<T>& w, std::size_t nfft) {
  const std::size_t L = w.size();
  if (L > nfft) throw input_error("wiener_deconv", "nfft shorter than the wavelet");
  std::vector<std::complex<T>> c(nfft);
  for (std::size_t j = 0; j < L; ++j) c[(j + nfft - L / 2) % nfft] += w[j];
  return fft(std::move(c));
}

template <std::floating_point T>
T wiener_epsilon(const std::vector<std::complex<T>>& W, const WienerConfig<T>& cfg) {
  if (cfg.noise_variance) {
    if (!(*cfg.noise_variance > 0)) throw input_error("wiener_deconv", "noise variance must be positive");
    return *cfg.noise_variance;
  }
  if (!(cfg.eps_factor > 0)) throw input_error("wiener_deconv", "eps_factor must be positive");
  T mx = 0;
  for (auto& v : W) mx = std::max(mx, std::norm(v));
  return cfg.eps_factor * mx;
}

/// G(f) = conj(W) / (|W|^2 + eps) evaluated on the nfft grid.  eps_out
/// receives the regularizer actually used.
template <std::floating_point T>
Spectrum<T> wiener_filter_spectrum(const WaveletEstimate<T>& wavelet, const WienerConfig<T>& cfg,
                                   std::size_t nfft, T* eps_out = nullptr) {
  const auto W = centered_wavelet_spectrum(wavelet.samples, nfft);
  T mx = 0;
  for (auto& v : W) mx = std::max(mx, std::norm(v));
  if (!(mx > 0)) throw input_error("wiener_deconv", "wavelet is identically zero");
  const T eps = wiener_epsilon(W, cfg);
  if (eps_out) *eps_out = eps;
  Spectrum<T> G{std::vector<std::complex<T>>(nfft), wavelet.fs > 0 ? wavelet.fs / static_cast<T>(nfft) : T(0), true};
  for (std::size_t k = 0; k < nfft; ++k) G.bins[k] = std::conj(W[k]) / (std::norm(W[k]) + eps);
  return G;
}

template <std::floating_point T>
Spectrum<T> wiener_filter_spectrum(const WaveletEstimate<T>& wavelet, const WienerConfig<T>& cfg = {}) {
  const std::size_t nfft = cfg.nfft ? cfg.nfft : std::bit_ceil(2 * wavelet.samples.size());
  return wiener_filter_spectrum(wavelet, cfg, nfft);
}

/// R(f) = S(f) conj(W) / (|W|^2 + eps), linear (zero-padded) convolution
/// semantics, output truncated to the trace length.
template <std::floating_point T>
DeconTrace<T> wiener_deconvolve(const RfTrace<T>& trace, const WaveletEstimate<T>& wavelet,
                                const WienerConfig<T>& cfg = {}) {
  trace.validate("wiener_deconv");
  if (wavelet.fs > 0 && std::abs(wavelet.fs - trace.fs) > T(1e-9) * trace.fs)
    throw input_error("wiener_deconv", "trace and wavelet sampling rates differ");
  const std::size_t need = trace.size() + wavelet.samples.size();
  const std::size_t nfft = cfg.nfft ? cfg.nfft : std::bit_ceil(need);
  if (nfft < trace.size()) throw input_error("wiener_deconv", "nfft shorter than the trace");

  DeconTrace<T> out;
  const auto G = wiener_filter_spectrum(wavelet, cfg, nfft, &out.eps);
  auto S = fft_real(trace.samples, nfft);
  out.fs = trace.fs;
  out.spectrum = {std::vector<std::complex<T>>(nfft), trace.fs / static_cast<T>(nfft), true};
  for (std::size_t k = 0; k < nfft; ++k) out.spectrum.bins[k] = S[k] * G.bins[k];

  auto full = ifft_real(out.spectrum.bins, &out.imag_residue);
  full.resize(trace.size());
  out.samples = std::move(full);
  return out;
}

}  // namespace utd
