#pragma once

// Resolution metrics on envelopes: peak picking, widths, pair dips and
// matching against a known reflectivity.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "signal_model.hpp"

namespace utd {

struct MetricConfig {
  double threshold_db = -20;       // peaks below max + threshold_db are ignored
  std::size_t min_spacing = 3;     // samples between accepted peaks
  double resolve_dip_db = 3;       // dip below the lower peak needed to call a pair resolved
  std::size_t match_tolerance = 4; // samples
  std::size_t close_pair = 32;     // truth spikes closer than this form a pair
};

struct Peak {
  std::size_t position = 0;
  int polarity = 0;  // sign of the signed trace at the peak
  double height = 0;
  double fwhm = 1;   // envelope width at half height, samples
};

struct TruthSpike {
  std::size_t position = 0;
  double amplitude = 0;
};

struct Match {
  TruthSpike truth;
  std::optional<std::size_t> peak;  // index into the peak list
  long offset = 0;                  // peak - truth, samples
  bool polarity_ok = false;
};

struct PairDip {
  std::size_t first = 0, second = 0;  // truth indices
  double dip_db = 0;
  bool resolved = false;
};

struct SignalMetrics {
  std::vector<Peak> peaks;
  std::vector<Match> matches;
  std::vector<PairDip> pairs;
  double mean_fwhm = 0;
};

/// Envelope width at half the peak height, linearly interpolated on both
/// flanks and never less than one sample.
template <std::floating_point T>
double envelope_fwhm(const std::vector<T>& e, std::size_t i) {
  const double half = static_cast<double>(e[i]) / 2;
  double left = 0, right = static_cast<double>(e.size() - 1);
  for (std::size_t j = i; j-- > 0;) {
    if (e[j] < half) {
      left = static_cast<double>(j) + (half - e[j]) / (static_cast<double>(e[j + 1]) - e[j]);
      break;
    }
  }
  for (std::size_t j = i + 1; j < e.size(); ++j) {
    if (e[j] < half) {
      right = static_cast<double>(j) - (half - e[j]) / (static_cast<double>(e[j - 1]) - e[j]);
      break;
    }
  }
  return std::max(1.0, right - left);
}

/// Local maxima of the envelope above the threshold, accepted greedily from
/// the tallest down while keeping min_spacing; returned in time order.
template <std::floating_point T>
std::vector<Peak> detect_peaks(const std::vector<T>& env, const std::vector<T>& signed_trace,
                               const MetricConfig& cfg = {}) {
  if (env.empty()) throw input_error("metrics", "empty envelope");
  const T mx = *std::max_element(env.begin(), env.end());
  const T level = mx * static_cast<T>(std::pow(10.0, cfg.threshold_db / 20.0));
  std::vector<std::size_t> cand;
  for (std::size_t i = 1; i + 1 < env.size(); ++i)
    if (env[i] >= env[i - 1] && env[i] > env[i + 1] && env[i] >= level && env[i] > 0) cand.push_back(i);
  std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return env[a] > env[b]; });

  std::vector<std::size_t> kept;
  for (std::size_t c : cand) {
    bool ok = true;
    for (std::size_t k : kept) ok = ok && (c > k ? c - k : k - c) >= cfg.min_spacing;
    if (ok) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());

  std::vector<Peak> out;
  for (std::size_t k : kept) {
    const T v = signed_trace[k];
    out.push_back({k, v > 0 ? 1 : (v < 0 ? -1 : 0), static_cast<double>(env[k]), envelope_fwhm(env, k)});
  }
  return out;
}

/// One-to-one assignment of truth spikes to peaks, closest pairs first.
inline std::vector<Match> match_truth(const std::vector<Peak>& peaks, const std::vector<TruthSpike>& truth,
                                      std::size_t tolerance) {
  struct Cand {
    long dist;
    std::size_t t, p;
  };
  std::vector<Cand> cands;
  for (std::size_t t = 0; t < truth.size(); ++t)
    for (std::size_t p = 0; p < peaks.size(); ++p) {
      const long d = static_cast<long>(peaks[p].position) - static_cast<long>(truth[t].position);
      if (static_cast<std::size_t>(std::labs(d)) <= tolerance) cands.push_back({std::labs(d), t, p});
    }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.dist < b.dist; });

  std::vector<Match> out(truth.size());
  std::vector<bool> peak_used(peaks.size(), false);
  for (std::size_t t = 0; t < truth.size(); ++t) out[t].truth = truth[t];
  for (const auto& c : cands) {
    if (out[c.t].peak || peak_used[c.p]) continue;
    out[c.t].peak = c.p;
    peak_used[c.p] = true;
    out[c.t].offset = static_cast<long>(peaks[c.p].position) - static_cast<long>(truth[c.t].position);
    const int want = truth[c.t].amplitude > 0 ? 1 : -1;
    out[c.t].polarity_ok = peaks[c.p].polarity == want;
  }
  return out;
}

/// Depth of the envelope minimum between two peaks below the lower of the
/// two, in dB.  0 when the pair shares a single peak.
template <std::floating_point T>
double dip_db(const std::vector<T>& env, std::size_t a, std::size_t b) {
  if (a == b) return 0;
  const std::size_t lo = std::min(a, b), hi = std::max(a, b);
  const T mn = *std::min_element(env.begin() + static_cast<std::ptrdiff_t>(lo),
                                 env.begin() + static_cast<std::ptrdiff_t>(hi + 1));
  const T lower = std::min(env[a], env[b]);
  if (!(mn > 0)) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(static_cast<double>(lower) / static_cast<double>(mn));
}

/// Peaks, truth matches, close-pair dips and mean width for one signal.
/// The envelope is computed here; polarity is read from the signal itself.
template <std::floating_point T>
SignalMetrics analyze_signal(const std::vector<T>& signal, const std::vector<TruthSpike>& truth,
                             const MetricConfig& cfg = {}) {
  const auto env = envelope(signal);
  SignalMetrics m;
  m.peaks = detect_peaks(env, signal, cfg);
  m.matches = match_truth(m.peaks, truth, cfg.match_tolerance);

  for (std::size_t i = 0; i + 1 < truth.size(); ++i)
    for (std::size_t j = i + 1; j < truth.size(); ++j) {
      const std::size_t d = truth[i].position > truth[j].position ? truth[i].position - truth[j].position
                                                                  : truth[j].position - truth[i].position;
      if (d == 0 || d >= cfg.close_pair) continue;
      PairDip pd{i, j, 0, false};
      const auto& a = m.matches[i];
      const auto& b = m.matches[j];
      if (a.peak && b.peak) pd.dip_db = dip_db(env, m.peaks[*a.peak].position, m.peaks[*b.peak].position);
      pd.resolved = pd.dip_db >= cfg.resolve_dip_db;
      m.pairs.push_back(pd);
    }

  double sum = 0;
  std::size_t count = 0;
  if (truth.empty()) {
    for (const auto& p : m.peaks) sum += p.fwhm, ++count;
  } else {
    for (const auto& mt : m.matches)
      if (mt.peak) sum += m.peaks[*mt.peak].fwhm, ++count;
  }
  m.mean_fwhm = count ? sum / static_cast<double>(count) : 0.0;
  return m;
}

struct StageMetrics {
  std::string stage;  // "raw", "wiener", "broadened", "input"
  SignalMetrics metrics;
};

struct TraceReport {
  std::size_t index = 0;
  std::vector<StageMetrics> stages;  // last entry is the one aggregated
  std::vector<std::string> warnings;
};

struct Aggregate {
  double position_rmse = 0;  // matched peaks only
  double detected_fraction = 0;
  double polarity_fraction = 0;
  std::vector<std::pair<std::string, double>> mean_fwhm;  // per stage
  std::size_t resolved_pairs = 0, total_pairs = 0;
};

struct ResolutionReport {
  MetricConfig conventions;
  std::vector<TraceReport> traces;
  Aggregate aggregate;
  std::vector<std::string> notes;
};

inline Aggregate aggregate(const std::vector<TraceReport>& traces) {
  Aggregate a;
  double se = 0;
  std::size_t matched = 0, total = 0, polar = 0;
  std::vector<std::pair<std::string, std::pair<double, std::size_t>>> fw;
  for (const auto& t : traces) {
    for (const auto& st : t.stages) {
      auto it = std::find_if(fw.begin(), fw.end(), [&](auto& e) { return e.first == st.stage; });
      if (it == fw.end()) {
        fw.push_back({st.stage, {0.0, 0}});
        it = fw.end() - 1;
      }
      it->second.first += st.metrics.mean_fwhm;
      it->second.second += 1;
    }
    if (t.stages.empty()) continue;
    const auto& m = t.stages.back().metrics;
    for (const auto& mt : m.matches) {
      ++total;
      if (!mt.peak) continue;
      ++matched;
      se += static_cast<double>(mt.offset * mt.offset);
      polar += mt.polarity_ok ? 1 : 0;
    }
    for (const auto& p : m.pairs) {
      ++a.total_pairs;
      a.resolved_pairs += p.resolved ? 1 : 0;
    }
  }
  a.position_rmse = matched ? std::sqrt(se / static_cast<double>(matched)) : 0.0;
  a.detected_fraction = total ? static_cast<double>(matched) / static_cast<double>(total) : 0.0;
  a.polarity_fraction = total ? static_cast<double>(polar) / static_cast<double>(total) : 0.0;
  for (auto& [name, v] : fw) a.mean_fwhm.push_back({name, v.second ? v.first / static_cast<double>(v.second) : 0.0});
  return a;
}

}  // namespace utd
