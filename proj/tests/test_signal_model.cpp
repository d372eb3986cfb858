#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

using utd::RfTrace;
constexpr double pi = std::numbers::pi;

RfTrace<double> tone(std::size_t n, double cycles, double amp = 1.0, bool sine = false) {
  RfTrace<double> t{std::vector<double>(n), fixture::kFs, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2 * pi * cycles * static_cast<double>(i) / static_cast<double>(n);
    t.samples[i] = amp * (sine ? std::sin(a) : std::cos(a));
  }
  return t;
}

/// Random real signal with no DC and no Nyquist content.
std::vector<double> band_interior_noise(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  for (auto& v : x) v = d(g);
  auto X = utd::fft_real(x);
  X[0] = 0;
  X[n / 2] = 0;
  return utd::ifft_real(X);
}

TEST(AnalyticSignal, QuadraturePairOfCosine) {
  const auto c = tone(1024, 37);
  const auto s = tone(1024, 37, 1.0, true);
  const auto a = utd::analytic_signal(c);
  EXPECT_EQ(a.real_part, c.samples);
  for (std::size_t i = 52; i < 1024 - 52; ++i) EXPECT_NEAR(a.imag_part[i], s.samples[i], 1e-6);
}

TEST(AnalyticSignal, ZeroTraceStaysZero) {
  const RfTrace<double> z{std::vector<double>(256, 0.0), fixture::kFs, 0};
  for (double v : utd::analytic_signal(z).imag_part) EXPECT_EQ(v, 0.0);
  for (double v : utd::envelope(z).samples) EXPECT_EQ(v, 0.0);
}

TEST(AnalyticSignal, ImpulseGivesDiscreteHilbertKernel) {
  const std::size_t n = 1024, c = 512;
  RfTrace<double> t{std::vector<double>(n, 0.0), fixture::kFs, 0};
  t.samples[c] = 1.0;
  const auto h = utd::analytic_signal(t).imag_part;

  // The periodic kernel is what a length-N quadrature filter must produce:
  // check it by direct circular convolution.
  std::vector<double> kernel(n);
  for (std::size_t m = 0; m < n; ++m) kernel[m] = oracle::periodic_hilbert_kernel(static_cast<long>(m), n);
  const auto ref = oracle::circular_convolve(t.samples, kernel);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(h[i], ref[i], 1e-12) << i;

  // Near the impulse the periodic kernel approaches 2 / (pi m).
  for (long m = -31; m <= 31; ++m)
    EXPECT_NEAR(h[static_cast<std::size_t>(static_cast<long>(c) + m)], oracle::ideal_hilbert_kernel(m), 1e-4) << m;
}

TEST(AnalyticSignal, RejectsShortOrNonFinite) {
  EXPECT_THROW(utd::analytic_signal(RfTrace<double>{std::vector<double>(4, 1.0), fixture::kFs, 0}), utd::error);
  RfTrace<double> bad{std::vector<double>(64, 0.0), fixture::kFs, 0};
  bad.samples[3] = std::nan("");
  EXPECT_THROW(utd::analytic_signal(bad), utd::error);
}

TEST(Envelope, PureToneIsFlat) {
  const auto e = utd::envelope(tone(2048, 101, 2.5));
  for (std::size_t i = 103; i < 2048 - 103; ++i) EXPECT_NEAR(e.samples[i], 2.5, 1e-9);
}

TEST(Envelope, GaussianModulatedTone) {
  const std::size_t n = 2048;
  const double sigma = 40.0, f0 = 0.08;  // f0 * sigma = 3.2 cycles
  RfTrace<double> t{std::vector<double>(n), fixture::kFs, 0};
  std::vector<double> truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) - 1024.0;
    truth[i] = std::exp(-x * x / (2 * sigma * sigma));
    t.samples[i] = truth[i] * std::cos(2 * pi * f0 * x);
  }
  const auto e = utd::envelope(t).samples;
  for (std::size_t i = 0; i < n; ++i)
    if (truth[i] > 0.05) {
      EXPECT_LT(std::abs(e[i] - truth[i]) / truth[i], 0.02) << i;
    }
}

TEST(Envelope, BoundsTheSignal) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> d;
    std::vector<double> x(777);
    for (auto& v : x) v = d(g);
    const auto e = utd::envelope(x);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_GE(e[i], std::abs(x[i]) - 1e-9);
  }
}

TEST(PhaseRotate, SpecialAngles) {
  const RfTrace<double> s{band_interior_noise(512, 3), fixture::kFs, 0};
  const auto r0 = utd::phase_rotate(s, 0.0);
  EXPECT_EQ(r0.samples, s.samples);
  const auto rpi = utd::phase_rotate(s, pi);
  const auto rhalf = utd::phase_rotate(s, pi / 2);
  const auto h = utd::hilbert(s.samples);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_NEAR(rpi.samples[i], -s.samples[i], 1e-12);
    EXPECT_NEAR(rhalf.samples[i], h[i], 1e-12);
  }
}

TEST(PhaseRotate, GroupLawOnBandInteriorSignals) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto s = band_interior_noise(1000 + seed, seed);
    const double a = 0.3 + 0.4 * seed, b = -1.1 + 0.2 * seed;
    const auto two = utd::phase_rotate(utd::phase_rotate(s, a), b);
    const auto one = utd::phase_rotate(s, a + b);
    const double scale = std::sqrt(utd::energy(s));
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(two[i], one[i], 1e-9 * scale);
  }
}

TEST(PhaseRotate, PreservesEnergy) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto s = band_interior_noise(1024, 100 + seed);
    for (double phi : {0.1, 0.7, 1.3, 2.9, -2.0}) {
      const auto r = utd::phase_rotate(s, phi);
      EXPECT_NEAR(utd::energy(r) / utd::energy(s), 1.0, 1e-6);
    }
  }
}

TEST(Parseval, TimeAndFrequencyEnergyAgree) {
  for (std::size_t n : {64u, 1000u, 2048u}) {
    std::mt19937_64 g(n);
    std::normal_distribution<double> d;
    std::vector<double> x(n);
    for (auto& v : x) v = d(g);
    const auto X = utd::fft_real(x);
    double ef = 0;
    for (auto& v : X) ef += std::norm(v);
    EXPECT_NEAR(ef / static_cast<double>(n) / utd::energy(x), 1.0, 1e-9);
  }
}

TEST(Autocorrelation, ImpulseAndConstant) {
  const std::size_t n = 200;
  std::vector<double> imp(n, 0.0);
  imp[50] = 1.0;
  const auto r = utd::autocorrelation(imp, 20, utd::lag_taper::none);
  EXPECT_DOUBLE_EQ(r.values[0], 1.0 / n);
  for (std::size_t k = 1; k <= 20; ++k) EXPECT_EQ(r.values[k], 0.0);

  const double c = 1.7;
  const auto rc = utd::autocorrelation(std::vector<double>(n, c), 30, utd::lag_taper::none);
  for (std::size_t k = 0; k <= 30; ++k) EXPECT_NEAR(rc.values[k], c * c * (n - k) / n, 1e-12);
}

TEST(Autocorrelation, WhiteNoiseLagsAreSmall) {
  const std::size_t n = 4096, lags = 100;
  std::size_t within = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    utd::GaussianSource g(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = g();
    const auto r = utd::autocorrelation(x, lags, utd::lag_taper::none);
    for (std::size_t k = 1; k <= lags; ++k, ++total) within += std::abs(r.values[k] / r.values[0]) <= 3.0 / std::sqrt(n);
  }
  EXPECT_GE(static_cast<double>(within) / total, 0.99);
}

TEST(Autocorrelation, BoundedByLagZeroAndTapered) {
  const auto x = band_interior_noise(1500, 9);
  for (auto taper : {utd::lag_taper::none, utd::lag_taper::hann}) {
    const auto r = utd::autocorrelation(x, 200, taper);
    EXPECT_GT(r.values[0], 0.0);
    for (double v : r.values) EXPECT_LE(std::abs(v), r.values[0]);
  }
  const auto raw = utd::autocorrelation(x, 200, utd::lag_taper::none);
  const auto tap = utd::autocorrelation(x, 200, utd::lag_taper::hann);
  EXPECT_EQ(tap.values[0], raw.values[0]);
  EXPECT_NEAR(tap.values[100], raw.values[100] * 0.5 * (1 + std::cos(pi * 100 / 201)), 1e-15);
  EXPECT_THROW(utd::autocorrelation(x, 1500), utd::error);
}

TEST(AmplitudeSpectrum, WhiteProcessIsFlat) {
  utd::Autocorrelation<double> acf{{1.0, 0.0, 0.0, 0.0}, 3, utd::lag_taper::none};
  const auto a = utd::amplitude_spectrum_from_acf(acf, 16);
  EXPECT_EQ(a.clamped_bins, 0u);
  for (auto& b : a.spectrum.bins) EXPECT_NEAR(b.real(), 1.0, 1e-12);
  EXPECT_THROW(utd::amplitude_spectrum_from_acf(acf, 6), utd::error);
}

TEST(AmplitudeSpectrum, CosineAcfPeaksAtToneBins) {
  const std::size_t n = 4096, L = 255, nfft = 512;
  const auto x = tone(n, 512).samples;  // 1/8 cycles per sample
  const auto a = utd::amplitude_spectrum_from_acf(utd::autocorrelation(x, L), nfft);
  std::vector<double> mag;
  for (auto& b : a.spectrum.bins) mag.push_back(b.real());
  const auto top = std::max_element(mag.begin(), mag.begin() + nfft / 2) - mag.begin();
  EXPECT_EQ(top, 64);
  EXPECT_NEAR(mag[nfft - 64], mag[64], 1e-9 * mag[64]);
}

TEST(AmplitudeSpectrum, RecoversWaveletMagnitude) {
  utd::PulseSpec<double> ps;
  ps.fc = 5e6;
  ps.bandwidth_frac = 0.6;
  const auto pulse = utd::make_pulse(ps);
  const std::size_t n = 16384, L = 128, nfft = 512;
  utd::GaussianSource g(21);
  std::vector<double> r(n);
  for (auto& v : r) v = g();
  const auto s = utd::convolve_centered(r, pulse.samples);
  const auto a = utd::amplitude_spectrum_from_acf(utd::autocorrelation(utd::remove_mean(s), L), nfft);
  const auto W = utd::fft_real(pulse.samples, nfft);

  double wmax = 0;
  for (std::size_t k = 0; k <= nfft / 2; ++k) wmax = std::max(wmax, std::abs(W[k]));
  std::vector<double> est, tru;
  for (std::size_t k = 0; k <= nfft / 2; ++k)
    if (std::abs(W[k]) >= 0.1 * wmax) {
      est.push_back(a.spectrum.bins[k].real());
      tru.push_back(std::abs(W[k]));
    }
  ASSERT_GT(est.size(), 10u);
  EXPECT_GE(oracle::ncc(est, tru), 0.98);
  for (auto& b : a.spectrum.bins) {
    EXPECT_GE(b.real(), 0.0);
    EXPECT_EQ(b.imag(), 0.0);
  }
}

TEST(Spectrum, HermitianCheck) {
  const auto x = band_interior_noise(300, 2);
  utd::Spectrum<double> s{utd::fft_real(x), 1.0, true};
  EXPECT_TRUE(s.is_hermitian());
  s.bins[5] += std::complex<double>(0, 1e-3);
  EXPECT_FALSE(s.is_hermitian());
}

}  // namespace
