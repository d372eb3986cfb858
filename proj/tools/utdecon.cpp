// Command-line front end: synthesize scans, estimate wavelets, deconvolve
// and score resolution.
//
// Exit status: 0 success, 2 input error, 3 processing error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include "CLI11.hpp"
#include "utd/config_json.hpp"
#include "utd/utd.hpp"

namespace {

constexpr int kInputError = 2;
constexpr int kProcessingError = 3;

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }

utd::PipelineConfig<double> load_config(const std::string& path, utd::MetricConfig* mc) {
  if (path.empty()) {
    if (mc) *mc = {};
    return {};
  }
  return utd::parse_pipeline_config(utd::load_json(path), mc);
}

void write_wavelets_csv(const std::string& path, const std::vector<utd::WaveletEstimate<double>>& ws,
                        const char* scope) {
  std::ofstream out(path);
  if (!out) throw utd::input_error("cli", "cannot write " + path);
  out << "# scope=" << scope << " columns=index,phase_deg,kurtosis,length,samples...\n";
  out.precision(17);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    out << i << ',' << deg(ws[i].phase) << ',' << ws[i].curve.best_value << ',' << ws[i].samples.size();
    for (double v : ws[i].samples) out << ',' << v;
    out << '\n';
  }
  if (!out) throw utd::input_error("cli", "write failed for " + path);
}

const char* scope_name(utd::scope_strategy s) {
  switch (s) {
    case utd::scope_strategy::per_trace: return "per_trace";
    case utd::scope_strategy::global: return "global";
    case utd::scope_strategy::zoned: return "zoned";
  }
  return "?";
}

void emit_plots(const std::filesystem::path& dir, const utd::ScanSet<double>& scan,
                const utd::ScanResult<double>& res) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw utd::input_error("cli", "cannot create " + dir.string());
  const double fs = scan.fs();
  for (std::size_t i = 0; i < scan.traces.size(); ++i) {
    const auto& raw = scan.traces[i].samples;
    const auto& p = res.traces[i];
    const std::string stem = "trace_" + std::to_string(i);

    std::ofstream tf(dir / (stem + "_time.csv"));
    tf << "t,raw,wiener,broadened,envelope\n";
    tf.precision(10);
    for (std::size_t k = 0; k < raw.size(); ++k)
      tf << static_cast<double>(k) / fs << ',' << raw[k] << ',' << p.wiener[k] << ',' << p.broadened[k] << ','
         << p.envelope[k] << '\n';

    const auto S = utd::fft_real(raw);
    const auto Rw = utd::fft_real(p.wiener);
    const auto Ra = utd::fft_real(p.broadened);
    std::ofstream ff(dir / (stem + "_spectrum.csv"));
    ff << "f,abs_s,abs_r_wiener,abs_r_ase\n";
    ff.precision(10);
    for (std::size_t k = 0; k <= raw.size() / 2; ++k)
      ff << static_cast<double>(k) * fs / static_cast<double>(raw.size()) << ',' << std::abs(S[k]) << ','
         << std::abs(Rw[k]) << ',' << std::abs(Ra[k]) << '\n';
    if (!tf || !ff) throw utd::input_error("cli", "write failed in " + dir.string());
  }
}

int run_synth(const std::string& scenario, const std::string& out) {
  const auto sc = utd::parse_scenario(utd::load_json(scenario));
  utd::write_scan(out, utd::synthesize_scan(sc));
  return 0;
}

int run_wavelet(const std::string& in, const std::string& config, const std::string& out) {
  auto scan = utd::read_scan(in);
  const auto cfg = load_config(config, nullptr);
  write_wavelets_csv(out, utd::estimate_scan_wavelets(scan, cfg), scope_name(cfg.scope.strategy));
  return 0;
}

int run_deconv(const std::string& in, const std::string& config, const std::string& out, const std::string& report,
               const std::string& truth, const std::string& plots, int workers) {
  auto scan = utd::read_scan(in);
  utd::MetricConfig mc;
  auto cfg = load_config(config, &mc);
  if (workers > 0) cfg.workers = static_cast<std::size_t>(workers);
  const auto truth_spikes = truth.empty() ? std::vector<utd::TruthSpike>{} : utd::parse_truth(utd::load_json(truth));

  const auto res = utd::process_scan(scan, cfg);

  utd::ScanSet<double> outscan{{}, scan.kind, scan.axis};
  for (std::size_t i = 0; i < scan.traces.size(); ++i)
    outscan.traces.push_back(
        {cfg.emit_envelope ? res.traces[i].envelope : res.traces[i].broadened, scan.fs(), scan.traces[i].t0});
  utd::write_scan(out, outscan);

  auto j = utd::to_json(utd::resolution_metrics(scan, res, truth_spikes, mc));
  j["scope"] = scope_name(cfg.scope.strategy);
  j["output"] = cfg.emit_envelope ? "envelope" : "broadened";
  j["wavelets"] = utd::json::array();
  for (const auto& w : res.wavelets)
    j["wavelets"].push_back({{"phase_deg", deg(w.phase)}, {"length", w.samples.size()},
                             {"kurtosis", w.curve.best_value}, {"clamped_bins", w.clamped_bins}});
  for (std::size_t i = 0; i < res.traces.size(); ++i) {
    auto& jt = j["traces"][i];
    jt["wavelet_index"] = res.traces[i].wavelet_index;
    jt["ase"] = utd::json::array();
    for (const auto& a : res.traces[i].ase)
      jt["ase"].push_back({{"band", {a.band_first, a.band_last}}, {"order", a.order},
                           {"clamped_bins", a.clamped_bins}, {"fallback", a.fallback}});
  }
  utd::write_json(report, j);
  if (!plots.empty()) emit_plots(plots, scan, res);
  for (const auto& t : res.traces)
    for (const auto& w : t.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int run_metrics(const std::string& in, const std::string& truth, const std::string& report) {
  auto scan = utd::read_scan(in);
  const auto spikes = utd::parse_truth(utd::load_json(truth));
  utd::write_json(report, utd::to_json(utd::resolution_metrics(scan, spikes)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind deconvolution and bandwidth extrapolation for ultrasonic RF scans"};
  app.require_subcommand(1);

  std::string scenario, in, out, config, report, truth, plots, wavelets_out;
  int workers = 0;

  auto* synth = app.add_subcommand("synth", "Render a synthetic scan from a scenario file");
  synth->add_option("--scenario", scenario, "Scenario JSON")->required();
  synth->add_option("--out", out, "Output scan (.uts or .csv)")->required();

  auto* wavelet = app.add_subcommand("wavelet", "Estimate wavelets for a scan");
  wavelet->add_option("--in", in, "Input scan")->required();
  wavelet->add_option("--config", config, "Pipeline config JSON");
  wavelet->add_option("--out-wavelets", wavelets_out, "Output CSV")->required();

  auto* deconv = app.add_subcommand("deconv", "Deconvolve and broaden a scan");
  deconv->add_option("--in", in, "Input scan")->required();
  deconv->add_option("--config", config, "Pipeline config JSON");
  deconv->add_option("--out", out, "Output scan")->required();
  deconv->add_option("--report", report, "Report JSON")->required();
  deconv->add_option("--truth", truth, "Scenario or truth JSON");
  deconv->add_option("--emit-plots", plots, "Directory for per-trace plot CSVs");
  deconv->add_option("--workers", workers, "Worker threads (overrides config)");

  auto* metrics = app.add_subcommand("metrics", "Score peaks of a processed scan against truth");
  metrics->add_option("--in", in, "Input scan")->required();
  metrics->add_option("--truth", truth, "Scenario or truth JSON")->required();
  metrics->add_option("--report", report, "Report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  try {
    if (*synth) return run_synth(scenario, out);
    if (*wavelet) return run_wavelet(in, config, wavelets_out);
    if (*deconv) return run_deconv(in, config, out, report, truth, plots, workers);
    if (*metrics) return run_metrics(in, truth, report);
  } catch (const utd::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == utd::error_kind::input ? kInputError : kProcessingError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kProcessingError;
  }
  return kInputError;
}
