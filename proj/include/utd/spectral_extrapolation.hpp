#pragma once

// Autoregressive spectral extrapolation.  A Burg model is fitted to the
// complex bins of the high-SNR band of a deconvolved spectrum and used as a
// linear predictor to fill in the bins on either side of it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "signal_model.hpp"
#include "wiener_deconv.hpp"

namespace utd {

struct BandSelection {
  std::size_t m = 0;  // first in-band bin
  std::size_t n = 0;  // last in-band bin
  double threshold_db = -6;
  std::size_t smoothing_bins = 5;

  std::size_t width() const { return n - m + 1; }
};

template <std::floating_point T = double>
struct ArModel {
  std::vector<std::complex<T>> coeffs;  // a_1..a_p
  std::size_t order = 0;
  T residual_power = 0;
  std::vector<std::complex<T>> reflection_coeffs;  // k_1..k_p
  std::vector<T> residual_history;                 // E_0..E_p
};

template <std::floating_point T = double>
struct AseConfig {
  double threshold_db = -6;
  std::size_t smoothing_bins = 0;  // 0: max(5, N/64 rounded to odd)
  std::size_t p_max = 0;           // 0: min(band width / 3, 40)
  T clamp_factor = 3;              // 0 disables the magnitude clamp
  // Upper extrapolation stops this many band widths above the band; 0 runs
  // to Nyquist.  Bins beyond the stop keep their deconvolved values.
  T span = 2;
};

template <std::floating_point T = double>
struct ExtrapolatedSpectrum {
  Spectrum<T> spectrum;
  std::size_t clamped_bins = 0;
  std::size_t upper_stop = 0;  // last bin filled by forward prediction
};

template <std::floating_point T = double>
struct AseResult {
  RfTrace<T> broadened;
  Spectrum<T> input;   // N-point spectrum of the deconvolved trace
  Spectrum<T> output;  // extrapolated spectrum
  BandSelection band;
  ArModel<T> model;
  std::size_t clamped_bins = 0;
  T imag_residue = 0;
  bool fallback = false;
  std::string warning;
};

/// Complex Burg recursion up to order p.
template <std::floating_point T>
ArModel<T> burg_fit(const std::vector<std::complex<T>>& x, std::size_t p) {
  using C = std::complex<T>;
  const std::size_t N = x.size();
  if (p < 1) throw input_error("spectral_extrapolation", "AR order must be at least 1");
  if (N < 2 * p + 1) throw input_error("spectral_extrapolation", "segment too short for the requested AR order");

  T e0 = 0;
  for (auto& v : x) e0 += std::norm(v);
  e0 /= static_cast<T>(N);
  if (!(e0 > 0)) throw processing_error("spectral_extrapolation", "segment has zero energy");

  std::vector<C> f(x), b(x), a;
  a.reserve(p);
  ArModel<T> model;
  model.residual_history.push_back(e0);
  T E = e0;

  for (std::size_t m = 1; m <= p; ++m) {
    C num{};
    T den = 0;
    for (std::size_t i = m; i < N; ++i) {
      num += f[i] * std::conj(b[i - 1]);
      den += std::norm(f[i]) + std::norm(b[i - 1]);
    }
    // den == 0 only when the forward and backward errors vanish, in which
    // case the model is already exact and the new stage is trivial.
    const C k = den > 0 ? T(-2) * num / den : C{};

    std::vector<C> next(m);
    for (std::size_t i = 0; i + 1 < m; ++i) next[i] = a[i] + k * std::conj(a[m - 2 - i]);
    next[m - 1] = k;
    a = std::move(next);

    // Update from the top down so b[i-1] is still the previous stage value.
    for (std::size_t i = N - 1; i >= m; --i) {
      const C fi = f[i];
      const C bi = b[i - 1];
      f[i] = fi + k * bi;
      b[i] = bi + std::conj(k) * fi;
    }

    E *= std::max(T(0), T(1) - std::norm(k));
    model.reflection_coeffs.push_back(k);
    model.residual_history.push_back(E);
  }
  model.coeffs = std::move(a);
  model.order = p;
  model.residual_power = E;
  return model;
}

template <std::floating_point T>
ArModel<T> burg_fit(const std::vector<T>& x, std::size_t p) {
  return burg_fit(std::vector<std::complex<T>>(x.begin(), x.end()), p);
}

/// AIC(p) = N ln(E_p) + 2p for p = 1..p_max.  E_p is floored at 1e-13 E_0
/// so that an exactly fitting model does not produce -inf.
template <std::floating_point T>
std::vector<T> aic_table(const ArModel<T>& fit, std::size_t segment_length) {
  const T floor = fit.residual_history.front() * T(1e-13);
  std::vector<T> out;
  for (std::size_t p = 1; p < fit.residual_history.size(); ++p)
    out.push_back(static_cast<T>(segment_length) * std::log(std::max(fit.residual_history[p], floor)) +
                  T(2) * static_cast<T>(p));
  return out;
}

template <std::floating_point T>
std::size_t select_order_aic(const std::vector<std::complex<T>>& segment, std::size_t p_max) {
  const auto table = aic_table(burg_fit(segment, p_max), segment.size());
  std::size_t best = 0;
  for (std::size_t i = 1; i < table.size(); ++i)
    if (table[i] < table[best]) best = i;
  return best + 1;
}

inline std::size_t default_smoothing_bins(std::size_t n) { return std::max<std::size_t>(5, (n / 64) | 1); }

/// Contiguous region around the smoothed magnitude maximum (positive
/// frequencies only) where the smoothed magnitude stays within threshold_db.
template <std::floating_point T>
BandSelection select_band(const Spectrum<T>& spectrum, double threshold_db = -6, std::size_t smoothing_bins = 5) {
  const std::size_t K = spectrum.size() / 2 + 1;
  if (spectrum.size() < 2) throw input_error("spectral_extrapolation", "spectrum too short");
  if (smoothing_bins == 0) smoothing_bins = 1;
  std::vector<T> mag(K);
  for (std::size_t k = 0; k < K; ++k) mag[k] = std::abs(spectrum.bins[k]);

  const std::size_t h = smoothing_bins / 2;
  std::vector<T> s(K);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t lo = k >= h ? k - h : 0;
    const std::size_t hi = std::min(K - 1, k + h);
    T acc = 0;
    for (std::size_t j = lo; j <= hi; ++j) acc += mag[j];
    s[k] = acc / static_cast<T>(hi - lo + 1);
  }

  const auto peak = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
  if (!(s[peak] > 0)) throw processing_error("spectral_extrapolation", "spectrum is identically zero");
  const T level = s[peak] * static_cast<T>(std::pow(10.0, threshold_db / 20.0));
  std::size_t m = peak, n = peak;
  while (m > 0 && s[m - 1] >= level) --m;
  while (n + 1 < K && s[n + 1] >= level) ++n;
  if (n - m + 1 < 3) throw processing_error("spectral_extrapolation", "band narrower than 3 bins");
  return {m, n, threshold_db, smoothing_bins};
}

/// Fills bins below the band by backward prediction (marching down to DC)
/// and above it by forward prediction (up to the stop bin), keeps the band
/// itself untouched and restores the negative frequencies by conjugate
/// mirroring.
template <std::floating_point T>
ExtrapolatedSpectrum<T> extrapolate_spectrum(const Spectrum<T>& spectrum, const BandSelection& band,
                                             const ArModel<T>& model, T clamp_factor = 3, T span = 0) {
  using C = std::complex<T>;
  const std::size_t N = spectrum.size();
  const std::size_t K = N / 2;  // highest non-negative bin
  const std::size_t p = model.order;
  if (band.n > K || band.m > band.n || model.coeffs.size() != p || p >= band.width())
    throw input_error("spectral_extrapolation", "band, model and spectrum are inconsistent");

  std::vector<C> X(spectrum.bins.begin(), spectrum.bins.begin() + static_cast<std::ptrdiff_t>(K + 1));
  T inband_max = 0;
  for (std::size_t k = band.m; k <= band.n; ++k) inband_max = std::max(inband_max, std::abs(X[k]));
  const T cap = clamp_factor > 0 ? clamp_factor * inband_max : std::numeric_limits<T>::infinity();

  ExtrapolatedSpectrum<T> out;
  auto limit = [&](C v) {
    const T mag = std::abs(v);
    if (mag > cap) {
      ++out.clamped_bins;
      return v * (cap / mag);
    }
    return v;
  };

  for (std::size_t l = band.m; l-- > 0;) {
    C v{};
    for (std::size_t i = 1; i <= p; ++i) v -= std::conj(model.coeffs[i - 1]) * X[l + i];
    X[l] = limit(v);
  }

  std::size_t top = K;
  if (span > 0)
    top = std::min<std::size_t>(K, band.n + static_cast<std::size_t>(span * static_cast<T>(band.width())));
  for (std::size_t r = band.n + 1; r <= top; ++r) {
    C v{};
    for (std::size_t i = 1; i <= p; ++i) v -= model.coeffs[i - 1] * X[r - i];
    X[r] = limit(v);
  }
  out.upper_stop = top;

  X[0] = X[0].real();
  if (N % 2 == 0) X[K] = X[K].real();

  out.spectrum.df = spectrum.df;
  out.spectrum.hermitian = true;
  out.spectrum.bins.assign(N, C{});
  for (std::size_t k = 0; k <= K; ++k) out.spectrum.bins[k] = X[k];
  for (std::size_t k = 1; k < N - K; ++k) out.spectrum.bins[N - k] = std::conj(X[k]);
  return out;
}

/// Band selection, AIC order, Burg fit and bidirectional extrapolation on
/// the trace-length spectrum of a deconvolved trace.  When any of those
/// steps fails the deconvolved samples are returned unchanged with a
/// warning.
template <std::floating_point T>
AseResult<T> ase_broaden(const std::vector<T>& decon, T fs, const AseConfig<T>& cfg = {}) {
  AseResult<T> res;
  const std::size_t N = decon.size();
  res.input = {fft_real(decon), N ? fs / static_cast<T>(N) : T(0), true};
  res.broadened = {decon, fs, 0};
  try {
    const std::size_t sm = cfg.smoothing_bins ? cfg.smoothing_bins : default_smoothing_bins(N);
    res.band = select_band(res.input, cfg.threshold_db, sm);
    std::vector<std::complex<T>> seg(res.input.bins.begin() + static_cast<std::ptrdiff_t>(res.band.m),
                                     res.input.bins.begin() + static_cast<std::ptrdiff_t>(res.band.n + 1));
    const std::size_t p_max = cfg.p_max ? cfg.p_max : std::min<std::size_t>(res.band.width() / 3, 40);
    if (p_max < 1) throw processing_error("spectral_extrapolation", "band too narrow for an AR model");
    const std::size_t p = select_order_aic(seg, p_max);
    res.model = burg_fit(seg, p);
    auto ext = extrapolate_spectrum(res.input, res.band, res.model, cfg.clamp_factor, cfg.span);
    res.clamped_bins = ext.clamped_bins;
    res.output = std::move(ext.spectrum);
    res.broadened.samples = ifft_real(res.output.bins, &res.imag_residue);
  } catch (const error& e) {
    res.fallback = true;
    res.warning = e.what();
    res.output = res.input;
    res.broadened.samples = decon;
  }
  return res;
}

template <std::floating_point T>
AseResult<T> ase_broaden(const DeconTrace<T>& decon, const AseConfig<T>& cfg = {}) {
  return ase_broaden(decon.samples, decon.fs, cfg);
}

/// Geometric over arithmetic mean of |X|^2 across the non-negative
/// frequency bins; 1 for a white spectrum, 0 when any bin vanishes.
template <std::floating_point T>
T spectral_flatness(const Spectrum<T>& s) {
  const std::size_t K = s.size() / 2 + 1;
  T log_sum = 0, sum = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const T p = std::norm(s.bins[k]);
    if (!(p > 0)) return 0;
    log_sum += std::log(p);
    sum += p;
  }
  return std::exp(log_sum / static_cast<T>(K)) / (sum / static_cast<T>(K));
}

}  // namespace utd
