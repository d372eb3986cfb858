#pragma once

// JSON documents: pipeline configuration, synthetic scenarios, ground truth
// and resolution reports.

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "scan_io.hpp"
#include "synthetic_bench.hpp"

namespace utd {

using json = nlohmann::json;

/// Synthetic scan description: one scenario rendered for trace_count
/// traces, trace i using noise seed + i.
struct ScenarioScan {
  Scenario<double> scenario;
  std::size_t trace_count = 1;
  scan_kind kind = scan_kind::tofd_bscan;
  double axis_start = 0;
  double axis_step = 1;
};

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw input_error("config", where + " must be a JSON object");
  std::set<std::string> k(known.begin(), known.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!k.count(it.key())) throw input_error("config", "unknown key '" + it.key() + "' in " + where);
}

template <class V>
void get_if(const json& j, const char* key, V& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<V>();
}

template <class Fn>
auto guarded(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw input_error("config", what + ": " + e.what());
  }
}

}  // namespace detail

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("config", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw input_error("config", path + ": " + e.what());
  }
}

inline MetricConfig parse_metric_config(const json& j) {
  detail::reject_unknown(j, {"threshold_db", "min_spacing", "resolve_dip_db", "match_tolerance", "close_pair"}, "metrics");
  MetricConfig m;
  detail::get_if(j, "threshold_db", m.threshold_db);
  detail::get_if(j, "min_spacing", m.min_spacing);
  detail::get_if(j, "resolve_dip_db", m.resolve_dip_db);
  detail::get_if(j, "match_tolerance", m.match_tolerance);
  detail::get_if(j, "close_pair", m.close_pair);
  return m;
}

inline PipelineConfig<double> parse_pipeline_config(const json& j, MetricConfig* metrics = nullptr) {
  return detail::guarded("pipeline config", [&] {
    detail::reject_unknown(j,
                           {"wavelet_length", "grid_step_deg", "refine_phase", "gate", "eps_factor", "noise_variance",
                            "threshold_db", "p_max", "smoothing_bins", "clamp_factor", "extrapolation_span", "scope",
                            "emit_envelope", "workers", "crossfade", "metrics"},
                           "config");
    PipelineConfig<double> c;
    detail::get_if(j, "wavelet_length", c.wavelet.wavelet_length);
    double step_deg = 1.0;
    detail::get_if(j, "grid_step_deg", step_deg);
    c.wavelet.grid_step = step_deg * std::numbers::pi / 180.0;
    grid_size(c.wavelet.grid_step);
    detail::get_if(j, "refine_phase", c.wavelet.refine);
    if (j.contains("gate") && !j["gate"].is_null()) {
      auto g = j["gate"].get<std::vector<std::size_t>>();
      if (g.size() != 2 || g[0] >= g[1]) throw input_error("config", "gate must be [begin, end) with begin < end");
      c.wavelet.gate = Gate{g[0], g[1]};
    }
    detail::get_if(j, "eps_factor", c.wiener.eps_factor);
    if (!(c.wiener.eps_factor > 0)) throw input_error("config", "eps_factor must be positive");
    if (j.contains("noise_variance") && !j["noise_variance"].is_null())
      c.wiener.noise_variance = j["noise_variance"].get<double>();
    detail::get_if(j, "threshold_db", c.ase.threshold_db);
    detail::get_if(j, "p_max", c.ase.p_max);
    detail::get_if(j, "smoothing_bins", c.ase.smoothing_bins);
    detail::get_if(j, "clamp_factor", c.ase.clamp_factor);
    detail::get_if(j, "extrapolation_span", c.ase.span);
    if (c.ase.clamp_factor < 0 || c.ase.span < 0) throw input_error("config", "clamp_factor and extrapolation_span must be >= 0");
    if (j.contains("scope")) {
      const auto& s = j["scope"];
      detail::reject_unknown(s, {"strategy", "zone_boundaries"}, "scope");
      const auto name = s.value("strategy", std::string("per_trace"));
      if (name == "per_trace")
        c.scope.strategy = scope_strategy::per_trace;
      else if (name == "global")
        c.scope.strategy = scope_strategy::global;
      else if (name == "zoned")
        c.scope.strategy = scope_strategy::zoned;
      else
        throw input_error("config", "unknown scope strategy '" + name + "'");
      detail::get_if(s, "zone_boundaries", c.scope.zone_boundaries);
      if (c.scope.strategy == scope_strategy::zoned && c.scope.zone_boundaries.empty())
        throw input_error("config", "zoned scope needs at least one zone boundary");
    }
    detail::get_if(j, "emit_envelope", c.emit_envelope);
    detail::get_if(j, "workers", c.workers);
    detail::get_if(j, "crossfade", c.crossfade);
    if (metrics) *metrics = j.contains("metrics") ? parse_metric_config(j["metrics"]) : MetricConfig{};
    return c;
  });
}

inline std::vector<Spike<double>> parse_spikes(const json& arr, double fs) {
  std::vector<Spike<double>> out;
  for (const auto& s : arr) {
    detail::reject_unknown(s, {"time", "sample", "amplitude", "label"}, "spike");
    Spike<double> sp;
    sp.amplitude = s.at("amplitude").get<double>();
    if (s.contains("time") == s.contains("sample")) throw input_error("config", "each spike needs exactly one of time or sample");
    sp.time = s.contains("time") ? s["time"].get<double>() : static_cast<double>(s["sample"].get<long long>()) / fs;
    out.push_back(sp);
  }
  return out;
}

inline ScenarioScan parse_scenario(const json& j) {
  return detail::guarded("scenario", [&] {
    detail::reject_unknown(j, {"fs", "length", "spikes", "pulse", "noise", "scan", "description"}, "scenario");
    ScenarioScan sc;
    auto& s = sc.scenario;
    s.reflectivity.fs = j.at("fs").get<double>();
    if (!(s.reflectivity.fs > 0)) throw input_error("config", "fs must be positive");
    s.reflectivity.length = j.at("length").get<std::size_t>();
    s.reflectivity.spikes = parse_spikes(j.at("spikes"), s.reflectivity.fs);
    s.pulse.fs = s.reflectivity.fs;
    if (j.contains("pulse")) {
      const auto& p = j["pulse"];
      detail::reject_unknown(p, {"kind", "fc", "bandwidth_frac", "phase_deg", "length"}, "pulse");
      const auto kind = p.value("kind", std::string("gabor"));
      if (kind == "gabor")
        s.pulse.kind = pulse_kind::gabor;
      else if (kind == "ricker")
        s.pulse.kind = pulse_kind::ricker;
      else
        throw input_error("config", "unknown pulse kind '" + kind + "'");
      detail::get_if(p, "fc", s.pulse.fc);
      detail::get_if(p, "bandwidth_frac", s.pulse.bandwidth_frac);
      double deg = 0;
      detail::get_if(p, "phase_deg", deg);
      s.pulse.phase = deg * std::numbers::pi / 180.0;
      detail::get_if(p, "length", s.pulse.length);
    }
    s.pulse.validate();
    if (j.contains("noise")) {
      const auto& n = j["noise"];
      detail::reject_unknown(n, {"snr_db", "seed"}, "noise");
      if (n.contains("snr_db") && !n["snr_db"].is_null()) s.noise.snr_db = n["snr_db"].get<double>();
      detail::get_if(n, "seed", s.noise.seed);
    }
    if (j.contains("scan")) {
      const auto& g = j["scan"];
      detail::reject_unknown(g, {"traces", "kind", "axis_start", "axis_step"}, "scan");
      detail::get_if(g, "traces", sc.trace_count);
      if (g.contains("kind")) sc.kind = parse_kind(g["kind"].get<std::string>());
      detail::get_if(g, "axis_start", sc.axis_start);
      detail::get_if(g, "axis_step", sc.axis_step);
      if (sc.trace_count == 0) throw input_error("config", "scan.traces must be at least 1");
    }
    return sc;
  });
}

inline ScanSet<double> synthesize_scan(const ScenarioScan& sc) {
  ScanSet<double> scan;
  scan.kind = sc.kind;
  const auto pulse = make_pulse(sc.scenario.pulse);
  for (std::size_t i = 0; i < sc.trace_count; ++i) {
    auto noise = sc.scenario.noise;
    noise.seed += i;
    scan.traces.push_back(synthesize_rf(sc.scenario.reflectivity, pulse, noise));
    scan.axis.push_back(sc.axis_start + sc.axis_step * static_cast<double>(i));
  }
  return scan;
}

/// Truth from either a scenario document or a bare {fs, spikes} document.
inline std::vector<TruthSpike> parse_truth(const json& j) {
  return detail::guarded("truth", [&] {
    if (!j.is_object() || !j.contains("spikes") || !j.contains("fs"))
      throw input_error("config", "truth needs 'fs' and 'spikes'");
    ReflectivitySeries<double> r;
    r.fs = j.at("fs").get<double>();
    if (!(r.fs > 0)) throw input_error("config", "truth fs must be positive");
    r.spikes = parse_spikes(j.at("spikes"), r.fs);
    for (const auto& s : r.spikes)
      if (!(s.time >= 0)) throw input_error("config", "truth spike time must be non-negative");
    return truth_samples(r);
  });
}

inline json to_json(const SignalMetrics& m) {
  json j;
  j["mean_fwhm"] = m.mean_fwhm;
  j["peaks"] = json::array();
  for (const auto& p : m.peaks)
    j["peaks"].push_back({{"sample", p.position}, {"polarity", p.polarity}, {"height", p.height}, {"fwhm", p.fwhm}});
  if (!m.matches.empty()) {
    j["matches"] = json::array();
    for (const auto& mt : m.matches) {
      json e{{"truth_sample", mt.truth.position}, {"truth_amplitude", mt.truth.amplitude}};
      if (mt.peak) {
        e["peak_sample"] = m.peaks[*mt.peak].position;
        e["offset"] = mt.offset;
        e["polarity_ok"] = mt.polarity_ok;
      } else {
        e["peak_sample"] = nullptr;
      }
      j["matches"].push_back(e);
    }
  }
  if (!m.pairs.empty()) {
    j["pairs"] = json::array();
    for (const auto& p : m.pairs)
      j["pairs"].push_back({{"first", p.first},
                            {"second", p.second},
                            {"dip_db", std::isfinite(p.dip_db) ? json(p.dip_db) : json("inf")},
                            {"resolved", p.resolved}});
  }
  return j;
}

inline json to_json(const ResolutionReport& r) {
  json j;
  j["conventions"] = {{"peak_threshold_db", r.conventions.threshold_db},
                      {"min_peak_spacing", r.conventions.min_spacing},
                      {"resolve_dip_db", r.conventions.resolve_dip_db},
                      {"match_tolerance", r.conventions.match_tolerance},
                      {"close_pair", r.conventions.close_pair},
                      {"polarity_source", "signed trace at envelope peak"}};
  j["notes"] = r.notes;
  j["aggregate"] = {{"position_rmse", r.aggregate.position_rmse},
                    {"detected_fraction", r.aggregate.detected_fraction},
                    {"polarity_fraction", r.aggregate.polarity_fraction},
                    {"resolved_pairs", r.aggregate.resolved_pairs},
                    {"total_pairs", r.aggregate.total_pairs}};
  for (const auto& [stage, v] : r.aggregate.mean_fwhm) j["aggregate"]["mean_fwhm"][stage] = v;
  j["traces"] = json::array();
  for (const auto& t : r.traces) {
    json jt{{"index", t.index}, {"warnings", t.warnings}};
    for (const auto& st : t.stages) jt["stages"][st.stage] = to_json(st.metrics);
    j["traces"].push_back(jt);
  }
  return j;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw input_error("config", "cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace utd
