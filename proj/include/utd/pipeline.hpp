#pragma once

// Trace and scan level orchestration: wavelet estimation, Wiener
// deconvolution and spectral extrapolation, with per-trace, pooled or zoned
// wavelet estimation and an optional worker pool.

#include <algorithm>
#include <atomic>
#include <exception>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"
#include "metrics.hpp"
#include "signal_model.hpp"
#include "spectral_extrapolation.hpp"
#include "synthetic_bench.hpp"
#include "wavelet_estimation.hpp"
#include "wiener_deconv.hpp"

namespace utd {

enum class scan_kind : std::uint8_t { tofd_bscan = 0, sscan = 1 };
enum class scope_strategy { per_trace, global, zoned };

template <std::floating_point T = double>
struct ScanSet {
  std::vector<RfTrace<T>> traces;
  scan_kind kind = scan_kind::tofd_bscan;
  std::vector<double> axis;  // mm for B-scans, degrees for S-scans

  T fs() const { return traces.empty() ? T(0) : traces.front().fs; }
  std::size_t samples_per_trace() const { return traces.empty() ? 0 : traces.front().size(); }

  void validate() const {
    if (traces.empty()) throw input_error("pipeline", "scan has no traces");
    if (axis.size() != traces.size()) throw input_error("pipeline", "axis length differs from trace count");
    for (const auto& t : traces) {
      t.validate("pipeline");
      if (t.size() != traces.front().size()) throw input_error("pipeline", "traces differ in length");
      if (t.fs != traces.front().fs) throw input_error("pipeline", "traces differ in sampling rate");
    }
  }
};

struct WaveletScope {
  scope_strategy strategy = scope_strategy::per_trace;
  std::vector<std::size_t> zone_boundaries;  // zoned only
};

template <std::floating_point T = double>
struct PipelineConfig {
  WaveletConfig<T> wavelet;
  WienerConfig<T> wiener;
  AseConfig<T> ase;
  WaveletScope scope;
  bool emit_envelope = false;
  std::size_t workers = 1;
  std::size_t crossfade = 16;  // samples across each zone seam
};

/// Everything produced for one trace.
template <std::floating_point T = double>
struct TraceResult {
  WaveletEstimate<T> wavelet;
  DeconTrace<T> wiener;
  AseResult<T> ase;
  std::vector<T> envelope;  // of the broadened trace
};

struct AseSummary {
  std::size_t band_first = 0, band_last = 0, order = 0, clamped_bins = 0;
  bool fallback = false;
};

/// Scan-level products.  For zoned runs the time series are the joined
/// zone outputs and ase holds one summary per zone.
template <std::floating_point T = double>
struct TraceProducts {
  std::vector<T> wiener;
  std::vector<T> broadened;
  std::vector<T> envelope;
  std::vector<AseSummary> ase;
  std::vector<std::string> warnings;
  std::size_t wavelet_index = 0;  // into ScanResult::wavelets (first zone for zoned runs)
};

template <std::floating_point T = double>
struct ScanResult {
  std::vector<TraceProducts<T>> traces;
  std::vector<WaveletEstimate<T>> wavelets;
  std::vector<std::string> notes;
};

namespace detail {

inline error annotate(const error& e, std::size_t index) {
  return {e.kind(), e.stage(), "trace " + std::to_string(index) + ": " + e.what()};
}

/// Runs fn(i) for i in [0, n).  Each index writes only its own slot, so
/// the result does not depend on the worker count.  The first failure by
/// index is rethrown after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  std::vector<std::exception_ptr> errs(n);
  auto run = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errs[i] = std::current_exception();
    }
  };
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      });
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errs[i]) continue;
    try {
      std::rethrow_exception(errs[i]);
    } catch (const error& e) {
      throw annotate(e, i);
    }
  }
}

template <std::floating_point T>
AseSummary summarize(const AseResult<T>& a) {
  return {a.band.m, a.band.n, a.model.order, a.clamped_bins, a.fallback};
}

template <std::floating_point T>
TraceProducts<T> products_of(TraceResult<T>&& r, std::size_t wavelet_index) {
  TraceProducts<T> p;
  p.ase.push_back(summarize(r.ase));
  if (r.ase.fallback) p.warnings.push_back("spectral extrapolation skipped: " + r.ase.warning);
  p.wiener = std::move(r.wiener.samples);
  p.broadened = std::move(r.ase.broadened.samples);
  p.envelope = std::move(r.envelope);
  p.wavelet_index = wavelet_index;
  return p;
}

}  // namespace detail

/// Wavelet estimate (unless one is supplied), Wiener filter, spectral
/// extrapolation and envelope for a single trace.
template <std::floating_point T>
TraceResult<T> deconvolve_trace(const RfTrace<T>& trace, const PipelineConfig<T>& cfg,
                                const WaveletEstimate<T>* wavelet_override = nullptr) {
  trace.validate("pipeline");
  TraceResult<T> r;
  r.wavelet = wavelet_override ? *wavelet_override : estimate_wavelet(trace, cfg.wavelet);
  r.wiener = wiener_deconvolve(trace, r.wavelet, cfg.wiener);
  r.ase = ase_broaden(r.wiener, cfg.ase);
  r.envelope = envelope(r.ase.broadened.samples);
  return r;
}

/// One wavelet from statistics pooled over all traces: the autocorrelations
/// and kurtosis curves are averaged in trace order before the maximum is
/// picked.
template <std::floating_point T>
WaveletEstimate<T> pooled_wavelet(const std::vector<RfTrace<T>>& traces, const WaveletConfig<T>& wc,
                                  std::size_t workers = 1) {
  const std::size_t n = traces.size();
  std::vector<std::vector<T>> prepared(n);
  detail::parallel_for(n, workers, [&](std::size_t i) {
    prepared[i] = remove_mean(gated(traces[i].samples, wc.gate));
  });

  std::vector<const std::vector<T>*> ptrs;
  for (auto& p : prepared) ptrs.push_back(&p);
  const std::size_t L = wc.wavelet_length ? wc.wavelet_length : default_wavelet_length(ptrs);
  check_wavelet_length<T>(L, prepared.front().size());

  std::vector<KurtosisCurve<T>> curves(n);
  std::vector<Autocorrelation<T>> acfs(n);
  detail::parallel_for(n, workers, [&](std::size_t i) {
    curves[i] = kurtosis_curve(prepared[i], wc.grid_step, wc.refine);
    acfs[i] = autocorrelation(prepared[i], L, lag_taper::hann);
  });

  KurtosisCurve<T> curve = curves.front();
  Autocorrelation<T> acf = acfs.front();
  std::fill(curve.values.begin(), curve.values.end(), T(0));
  std::fill(acf.values.begin(), acf.values.end(), T(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < curve.values.size(); ++k) curve.values[k] += curves[i].values[k];
    for (std::size_t k = 0; k < acf.values.size(); ++k) acf.values[k] += acfs[i].values[k];
  }
  for (auto& v : curve.values) v /= static_cast<T>(n);
  for (auto& v : acf.values) v /= static_cast<T>(n);
  select_maximum(curve, wc.grid_step, wc.refine);
  return wavelet_from_statistics(acf, curve, L, traces.front().fs);
}

namespace detail {

/// 0, the interior boundaries, N.
inline std::vector<std::size_t> zone_edges(const std::vector<std::size_t>& b, std::size_t N) {
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i] == 0 || b[i] >= N || (i && b[i] <= b[i - 1]))
      throw input_error("pipeline", "zone boundaries must be strictly increasing and inside the trace");
  std::vector<std::size_t> edges{0};
  edges.insert(edges.end(), b.begin(), b.end());
  edges.push_back(N);
  return edges;
}

/// Sub-traces of zone z, extended by half on each interior side so that
/// neighbouring zones both cover the seam.  Returns the first sample index
/// and the traces.
template <std::floating_point T>
std::pair<std::size_t, std::vector<RfTrace<T>>> zone_traces(const ScanSet<T>& scan, const std::vector<std::size_t>& edges,
                                                            std::size_t z, std::size_t half) {
  const std::size_t N = edges.back();
  const std::size_t lo = z == 0 ? 0 : edges[z] - std::min(half, edges[z]);
  const std::size_t hi = z + 2 == edges.size() ? N : std::min(N, edges[z + 1] + half);
  std::vector<RfTrace<T>> sub;
  for (const auto& t : scan.traces)
    sub.push_back({{t.samples.begin() + static_cast<std::ptrdiff_t>(lo), t.samples.begin() + static_cast<std::ptrdiff_t>(hi)},
                   t.fs,
                   t.t0 + static_cast<T>(lo) / t.fs});
  return {lo, std::move(sub)};
}

template <std::floating_point T>
ScanResult<T> run_global(const std::vector<RfTrace<T>>& traces, const PipelineConfig<T>& cfg) {
  ScanResult<T> out;
  out.wavelets.push_back(pooled_wavelet(traces, cfg.wavelet, cfg.workers));
  out.traces.resize(traces.size());
  detail::parallel_for(traces.size(), cfg.workers, [&](std::size_t i) {
    out.traces[i] = products_of(deconvolve_trace(traces[i], cfg, &out.wavelets.front()), 0);
  });
  return out;
}

template <std::floating_point T>
ScanResult<T> run_zoned(const ScanSet<T>& scan, const PipelineConfig<T>& cfg) {
  const auto& b = cfg.scope.zone_boundaries;
  const std::size_t N = scan.samples_per_trace();
  if (b.empty()) return run_global(scan.traces, cfg);
  const std::size_t half = cfg.crossfade / 2;
  const auto edges = zone_edges(b, N);

  std::vector<ScanResult<T>> zones;
  std::vector<std::size_t> starts;
  for (std::size_t z = 0; z + 1 < edges.size(); ++z) {
    auto [lo, sub] = zone_traces(scan, edges, z, half);
    try {
      zones.push_back(run_global(sub, cfg));
    } catch (const error& e) {
      throw error(e.kind(), e.stage(), "zone " + std::to_string(z) + ": " + e.what());
    }
    starts.push_back(lo);
  }

  auto weight_right = [&](std::size_t seam, std::size_t t) -> T {
    // Raised-cosine ramp from the left zone to the right zone across
    // [seam - half, seam + half).
    if (t + half < seam) return 0;
    if (t >= seam + half) return 1;
    const T x = (static_cast<T>(t + half - seam) + T(0.5)) / static_cast<T>(2 * half);
    return T(0.5) * (T(1) - std::cos(std::numbers::pi_v<T> * x));
  };

  auto join = [&](std::size_t trace, auto member) {
    std::vector<T> outv(N);
    for (std::size_t t = 0; t < N; ++t) {
      std::size_t z = 0;
      while (z + 1 < b.size() + 1 && t >= edges[z + 1]) ++z;
      auto value = [&](std::size_t zone) { return (zones[zone].traces[trace].*member)[t - starts[zone]]; };
      T v = value(z);
      if (half > 0) {
        if (z > 0 && t < edges[z] + half) {
          const T w = weight_right(edges[z], t);
          v = (1 - w) * value(z - 1) + w * v;
        } else if (z + 1 < zones.size() && t + half >= edges[z + 1]) {
          const T w = weight_right(edges[z + 1], t);
          v = (1 - w) * v + w * value(z + 1);
        }
      }
      outv[t] = v;
    }
    return outv;
  };

  ScanResult<T> out;
  for (auto& zr : zones) out.wavelets.push_back(zr.wavelets.front());
  out.traces.resize(scan.traces.size());
  for (std::size_t i = 0; i < scan.traces.size(); ++i) {
    auto& p = out.traces[i];
    p.wiener = join(i, &TraceProducts<T>::wiener);
    p.broadened = join(i, &TraceProducts<T>::broadened);
    p.envelope = envelope(p.broadened);
    p.wavelet_index = 0;
    for (std::size_t z = 0; z < zones.size(); ++z) {
      auto& zp = zones[z].traces[i];
      p.ase.insert(p.ase.end(), zp.ase.begin(), zp.ase.end());
      for (auto& w : zp.warnings) p.warnings.push_back("zone " + std::to_string(z) + ": " + w);
    }
  }
  out.notes.push_back("zones use independent magnitude and phase estimates");
  return out;
}

}  // namespace detail

template <std::floating_point T>
ScanResult<T> process_scan(const ScanSet<T>& scan, const PipelineConfig<T>& cfg) {
  scan.validate();
  switch (cfg.scope.strategy) {
    case scope_strategy::per_trace: {
      ScanResult<T> out;
      out.traces.resize(scan.traces.size());
      out.wavelets.resize(scan.traces.size());
      detail::parallel_for(scan.traces.size(), cfg.workers, [&](std::size_t i) {
        auto r = deconvolve_trace(scan.traces[i], cfg);
        out.wavelets[i] = r.wavelet;
        out.traces[i] = detail::products_of(std::move(r), i);
      });
      return out;
    }
    case scope_strategy::global:
      return detail::run_global(scan.traces, cfg);
    case scope_strategy::zoned:
      return detail::run_zoned(scan, cfg);
  }
  throw input_error("pipeline", "unknown wavelet scope");
}

/// Wavelets only, following the configured scope: one per trace, one for
/// the scan, or one per zone.
template <std::floating_point T>
std::vector<WaveletEstimate<T>> estimate_scan_wavelets(const ScanSet<T>& scan, const PipelineConfig<T>& cfg) {
  scan.validate();
  std::vector<WaveletEstimate<T>> out;
  switch (cfg.scope.strategy) {
    case scope_strategy::per_trace:
      out.resize(scan.traces.size());
      detail::parallel_for(scan.traces.size(), cfg.workers,
                           [&](std::size_t i) { out[i] = estimate_wavelet(scan.traces[i], cfg.wavelet); });
      break;
    case scope_strategy::global:
      out.push_back(pooled_wavelet(scan.traces, cfg.wavelet, cfg.workers));
      break;
    case scope_strategy::zoned: {
      if (cfg.scope.zone_boundaries.empty()) {
        out.push_back(pooled_wavelet(scan.traces, cfg.wavelet, cfg.workers));
        break;
      }
      const auto edges = detail::zone_edges(cfg.scope.zone_boundaries, scan.samples_per_trace());
      for (std::size_t z = 0; z + 1 < edges.size(); ++z)
        out.push_back(pooled_wavelet(detail::zone_traces(scan, edges, z, cfg.crossfade / 2).second, cfg.wavelet, cfg.workers));
      break;
    }
  }
  return out;
}

/// Truth spikes as sample positions.
template <std::floating_point T>
std::vector<TruthSpike> truth_samples(const ReflectivitySeries<T>& r) {
  std::vector<TruthSpike> out;
  for (const auto& s : r.spikes) out.push_back({r.sample_of(s), static_cast<double>(s.amplitude)});
  std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.position < b.position; });
  return out;
}

/// Metrics for the raw, Wiener and broadened versions of every trace.
template <std::floating_point T>
ResolutionReport resolution_metrics(const ScanSet<T>& scan, const ScanResult<T>& result,
                                    const std::vector<TruthSpike>& truth, const MetricConfig& mc = {}) {
  ResolutionReport rep;
  rep.conventions = mc;
  rep.traces.resize(scan.traces.size());
  for (std::size_t i = 0; i < scan.traces.size(); ++i) {
    auto& tr = rep.traces[i];
    tr.index = i;
    tr.stages.push_back({"raw", analyze_signal(scan.traces[i].samples, truth, mc)});
    tr.stages.push_back({"wiener", analyze_signal(result.traces[i].wiener, truth, mc)});
    tr.stages.push_back({"broadened", analyze_signal(result.traces[i].broadened, truth, mc)});
    tr.warnings = result.traces[i].warnings;
  }
  rep.aggregate = aggregate(rep.traces);
  rep.notes = result.notes;
  return rep;
}

/// Metrics for a scan of already processed signals.
template <std::floating_point T>
ResolutionReport resolution_metrics(const ScanSet<T>& scan, const std::vector<TruthSpike>& truth,
                                    const MetricConfig& mc = {}) {
  ResolutionReport rep;
  rep.conventions = mc;
  rep.traces.resize(scan.traces.size());
  for (std::size_t i = 0; i < scan.traces.size(); ++i) {
    rep.traces[i].index = i;
    rep.traces[i].stages.push_back({"input", analyze_signal(scan.traces[i].samples, truth, mc)});
  }
  rep.aggregate = aggregate(rep.traces);
  return rep;
}

}  // namespace utd
