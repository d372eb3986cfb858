#include <gtest/gtest.h>

#include <numbers>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

constexpr double pi = std::numbers::pi;

TEST(MakePulse, ZeroPhaseIsEvenAndPiNegates) {
  for (auto kind : {utd::pulse_kind::gabor, utd::pulse_kind::ricker}) {
    utd::PulseSpec<double> ps;
    ps.kind = kind;
    const auto w0 = utd::make_pulse(ps);
    const std::size_t c = ps.length / 2;
    EXPECT_DOUBLE_EQ(w0.samples[c], 1.0);
    for (std::size_t k = 1; k < c; ++k) EXPECT_NEAR(w0.samples[c + k], w0.samples[c - k], 1e-9);
    ps.phase = pi;
    const auto wpi = utd::make_pulse(ps);
    for (std::size_t i = 0; i < ps.length; ++i) EXPECT_NEAR(wpi.samples[i], -w0.samples[i], 1e-12);
  }
}

TEST(MakePulse, GaborSixDbBandwidth) {
  utd::PulseSpec<double> ps;  // 5 MHz, 60 %
  const auto w = utd::make_pulse(ps);
  const std::size_t nfft = 1024;
  const auto W = utd::fft_real(w.samples, nfft);
  std::vector<double> mag(nfft / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(W[k]);
  const auto peak = static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
  const double half = mag[peak] / 2;
  std::size_t lo = peak, hi = peak;
  while (lo > 0 && mag[lo - 1] >= half) --lo;
  while (hi + 1 < mag.size() && mag[hi + 1] >= half) ++hi;
  const double flo = (lo - 1) + (half - mag[lo - 1]) / (mag[lo] - mag[lo - 1]);
  const double fhi = hi + (mag[hi] - half) / (mag[hi] - mag[hi + 1]);
  const double df = ps.fs / nfft;
  EXPECT_NEAR((fhi - flo) * df, 3e6, df);
}

TEST(MakePulse, GaborHasNoDc) {
  utd::PulseSpec<double> ps;
  ps.bandwidth_frac = 1.6;
  const auto w = utd::make_pulse(ps);
  double sum = 0, abs_sum = 0;
  for (double v : w.samples) sum += v, abs_sum += std::abs(v);
  EXPECT_LT(std::abs(sum), 1e-6 * abs_sum);
}

TEST(MakePulse, RotationMatchesHilbertMixing) {
  const double theta = 0.9;
  auto ps = fixture::broadband_pulse();
  ps.length = 256;
  const auto w0 = utd::make_pulse(ps);
  ps.phase = theta;
  const auto wt = utd::make_pulse(ps);
  // Away from the edges the rotated pulse equals cos/sin mixing of the
  // zero-phase pulse up to the peak normalization.
  const auto mixed = utd::phase_rotate(w0.samples, theta);
  double peak = 0;
  for (double v : mixed) peak = std::max(peak, std::abs(v));
  for (std::size_t i = 96; i < 160; ++i) EXPECT_NEAR(wt.samples[i], mixed[i] / peak, 1e-3);
}

TEST(MakePulse, RejectsBadSpecs) {
  utd::PulseSpec<double> ps;
  ps.fc = 60e6;
  EXPECT_THROW(utd::make_pulse(ps), utd::error);
  ps = {};
  ps.bandwidth_frac = 2.0;
  EXPECT_THROW(utd::make_pulse(ps), utd::error);
  ps = {};
  ps.length = 31;
  EXPECT_THROW(utd::make_pulse(ps), utd::error);
}

TEST(RenderReflectivity, Basics) {
  utd::ReflectivitySeries<double> r{{}, 100, fixture::kFs};
  for (double v : utd::render_reflectivity(r).samples) EXPECT_EQ(v, 0.0);
  r.spikes.push_back({37.2e-8, 1.0});
  const auto t = utd::render_reflectivity(r);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(t.samples[i], i == 37 ? 1.0 : 0.0);
}

TEST(RenderReflectivity, CanonicalSignPattern) {
  const auto sc = utd::canonical_scenario<double>();
  const auto t = utd::render_reflectivity(sc.reflectivity);
  std::vector<int> signs;
  for (double v : t.samples)
    if (v != 0) signs.push_back(v > 0 ? 1 : -1);
  EXPECT_EQ(signs, (std::vector<int>{1, -1, 1, 1, -1}));
}

TEST(RenderReflectivity, Errors) {
  utd::ReflectivitySeries<double> r{{{1e-8, 1.0}, {1.2e-8, 2.0}}, 100, fixture::kFs};
  EXPECT_THROW(utd::render_reflectivity(r), utd::error);
  r.spikes = {{2e-6, 1.0}};
  EXPECT_THROW(utd::render_reflectivity(r), utd::error);
  r.spikes = {{-1e-8, 1.0}};
  EXPECT_THROW(utd::render_reflectivity(r), utd::error);
}

TEST(SynthesizeRf, SingleSpikeIsCenteredPulse) {
  utd::PulseSpec<double> ps;
  const auto pulse = utd::make_pulse(ps);
  utd::ReflectivitySeries<double> r{{{500e-8, 1.0}}, 1024, fixture::kFs};
  const auto t = utd::synthesize_rf(r, pulse, {});
  for (std::size_t i = 0; i < 1024; ++i) {
    const long j = static_cast<long>(i) - 500 + 64;
    EXPECT_EQ(t.samples[i], j >= 0 && j < 128 ? pulse.samples[static_cast<std::size_t>(j)] : 0.0);
  }
}

TEST(SynthesizeRf, SnrIsCalibrated) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto sc = utd::canonical_scenario<double>(15.0, seed);
    const auto noisy = utd::synthesize_rf(sc);
    sc.noise.snr_db.reset();
    const auto clean = utd::synthesize_rf(sc);
    double pn = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) pn += std::pow(noisy.samples[i] - clean.samples[i], 2);
    const double snr = 10 * std::log10(utd::energy(clean.samples) / pn);
    EXPECT_NEAR(snr, 15.0, 0.2);
  }
}

TEST(SynthesizeRf, SuperpositionAndDeterminism) {
  utd::PulseSpec<double> ps;
  const auto pulse = utd::make_pulse(ps);
  const utd::ReflectivitySeries<double> a{{{300e-8, 0.7}}, 1024, fixture::kFs};
  const utd::ReflectivitySeries<double> b{{{340e-8, -1.3}}, 1024, fixture::kFs};
  const utd::ReflectivitySeries<double> ab{{{300e-8, 0.7}, {340e-8, -1.3}}, 1024, fixture::kFs};
  const auto ta = utd::synthesize_rf(a, pulse, {}), tb = utd::synthesize_rf(b, pulse, {}),
             tab = utd::synthesize_rf(ab, pulse, {});
  for (std::size_t i = 0; i < 1024; ++i) EXPECT_EQ(tab.samples[i], ta.samples[i] + tb.samples[i]);

  const auto sc = utd::canonical_scenario<double>(15.0, 42);
  EXPECT_EQ(utd::synthesize_rf(sc).samples, utd::synthesize_rf(sc).samples);
  auto other = sc;
  other.noise.seed = 43;
  EXPECT_NE(utd::synthesize_rf(sc).samples, utd::synthesize_rf(other).samples);
}

TEST(SynthesizeRf, NoiselessPipelineRecoversSpikes) {
  const auto sc = utd::canonical_scenario<double>(std::nullopt);
  const auto r = utd::deconvolve_trace(utd::synthesize_rf(sc), utd::PipelineConfig<double>{});
  const auto m = utd::analyze_signal(r.ase.broadened.samples, utd::truth_samples(sc.reflectivity));
  for (const auto& mt : m.matches) {
    ASSERT_TRUE(mt.peak);
    EXPECT_LE(std::labs(mt.offset), 2);
    EXPECT_TRUE(mt.polarity_ok);
  }
}

TEST(GaussianSource, StableStream) {
  utd::GaussianSource a(5), b(5);
  double sum = 0, sq = 0;
  for (int i = 0; i < 20000; ++i) {
    const double x = a();
    EXPECT_EQ(x, b());
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / 20000, 0.0, 0.03);
  EXPECT_NEAR(sq / 20000, 1.0, 0.03);
}

TEST(BernoulliGaussian, Density) {
  const auto r = utd::bernoulli_gaussian<double>(100000, 0.03, 1);
  const auto nz = std::count_if(r.begin(), r.end(), [](double v) { return v != 0; });
  EXPECT_NEAR(static_cast<double>(nz) / 100000, 0.03, 0.003);
}

}  // namespace
