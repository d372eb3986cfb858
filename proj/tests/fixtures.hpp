#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include "utd/utd.hpp"

namespace fixture {

constexpr double kFs = 100e6;

inline utd::PulseSpec<double> broadband_pulse(double phase = 0.0) {
  utd::PulseSpec<double> p;
  p.fc = 10e6;
  p.bandwidth_frac = 1.2;
  p.phase = phase;
  p.length = 128;
  p.fs = kFs;
  return p;
}

/// Bernoulli-Gaussian reflectivity convolved with a pulse, optional noise.
inline utd::RfTrace<double> bg_trace(const utd::WaveletEstimate<double>& pulse, std::size_t n, double density,
                                     std::uint64_t seed, std::optional<double> snr_db = std::nullopt) {
  const auto r = utd::bernoulli_gaussian<double>(n, density, seed);
  utd::NoiseSpec<double> noise{snr_db, seed + 1000003};
  return {utd::add_noise(utd::convolve_centered(r, pulse.samples), noise), kFs, 0};
}

/// Single reflector of amplitude a at sample k.
inline utd::RfTrace<double> single_reflector(const utd::WaveletEstimate<double>& pulse, std::size_t n, std::size_t k,
                                             double a = 1.0) {
  std::vector<double> r(n, 0.0);
  r[k] = a;
  return {utd::convolve_centered(r, pulse.samples), kFs, 0};
}

/// A B-scan of the canonical scenario with per-trace noise seeds.
inline utd::ScanSet<double> canonical_bscan(std::size_t traces, std::size_t first_seed = 0, double snr = 15.0) {
  utd::ScanSet<double> s;
  for (std::size_t i = 0; i < traces; ++i) {
    s.traces.push_back(utd::synthesize_rf(utd::canonical_scenario<double>(snr, first_seed + i)));
    s.axis.push_back(static_cast<double>(i) * 0.5);
  }
  return s;
}

inline utd::WaveletEstimate<double> as_wavelet(std::vector<double> samples) {
  utd::WaveletEstimate<double> w;
  w.samples = std::move(samples);
  w.fs = kFs;
  return w;
}

}  // namespace fixture
