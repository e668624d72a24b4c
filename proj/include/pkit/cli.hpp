/* Copyright 2026 The previous-kit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// The previous-kit command line. run() takes explicit streams so it can be
// driven in-process by tests.
//
// Exit status: 0 success, 1 domain error, 2 I/O, format or usage error.

#ifndef PKIT_CLI_HPP_
#define PKIT_CLI_HPP_

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pkit/error.hpp"
#include "pkit/metrics.hpp"
#include "pkit/model.hpp"
#include "pkit/netdef.hpp"
#include "pkit/pipeline.hpp"
#include "pkit/predict.hpp"
#include "pkit/previousnet.hpp"
#include "pkit/profiling.hpp"
#include "pkit/simdevice.hpp"

namespace pkit::cli {

namespace fs = std::filesystem;

struct Global {
  std::string format = "csv";
  bool quiet = false;
  bool stamp = false;
  unsigned jobs = 1;
};

namespace detail {

using pkit::detail::format_decimal;
using pkit::detail::read_file;
using pkit::detail::write_file;

inline NetworkDef load_network(const std::string& path) {
  try {
    return parse_network(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline ShapedNetwork load_shaped(const std::string& path) {
  auto net = load_network(path);
  auto vs = validate(net);
  if (!vs.empty()) throw DomainError(path + ": invalid network\n" + describe(vs));
  return infer_shapes(net);
}

inline void emit(const std::string& content, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) out << content;
  else write_file(out_path, content);
}

inline void require_files(const std::vector<std::string>& paths) {
  for (const auto& p : paths)
    if (!fs::is_regular_file(p)) throw IoError("cannot open '" + p + "'");
}

inline void require_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw IoError("cannot create directory '" + dir + "'");
}

inline std::vector<Target> targets_of(const std::string& s) {
  if (s == "both") return {Target::kRuntime, Target::kEnergy};
  return {*target_from_name(s)};
}

inline std::string join_names(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += v[i];
  }
  return s;
}

// ---------------------------------------------------------------------------

inline std::string inspect_output(const ShapedNetwork& sn, const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json j;
    j["network"] = sn.net.name;
    j["input"] = {sn.net.input_shape.h, sn.net.input_shape.w, sn.net.input_shape.c};
    auto layers = nlohmann::ordered_json::array();
    for (const auto& name : sn.order) {
      const auto& l = sn.layer(name);
      const auto& s = sn.shapes_of(name).output;
      nlohmann::ordered_json lj;
      lj["name"] = name;
      lj["kind"] = kind_name(l.kind);
      lj["inputs"] = l.inputs;
      lj["output"] = {s.h, s.w, s.c};
      layers.push_back(lj);
    }
    j["layers"] = layers;
    nlohmann::ordered_json kinds;
    for (const auto& [k, n] : kind_histogram(sn.net)) kinds[std::string(kind_name(k))] = n;
    j["kinds"] = kinds;
    return j.dump(2) + "\n";
  }
  std::string s(kCsvVersionLine);
  s += "\n# network=" + sn.net.name + " input=" + to_string(sn.net.input_shape) +
       " layers=" + std::to_string(sn.order.size()) + "\n";
  s += "layer,kind,inputs,h_out,w_out,c_out\n";
  for (const auto& name : sn.order) {
    const auto& l = sn.layer(name);
    const auto& o = sn.shapes_of(name).output;
    s += name + "," + std::string(kind_name(l.kind)) + "," + join_names(l.inputs, ';') + "," + std::to_string(o.h) +
         "," + std::to_string(o.w) + "," + std::to_string(o.c) + "\n";
  }
  return s;
}

inline std::string metrics_json(const MetricsTable& t) {
  nlohmann::ordered_json j;
  j["network"] = t.network;
  j["im2col"] = t.options.im2col;
  j["count_bias_ops"] = t.options.count_bias_ops;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& m : t.rows) {
    nlohmann::ordered_json r;
    r["layer"] = m.layer_name;
    r["kind"] = kind_name(m.kind);
    r["output"] = {m.out_shape.h, m.out_shape.w, m.out_shape.c};
    r["n_weights"] = m.n_weights;
    r["ops"] = m.ops;
    r["mem_ops"] = m.mem_ops;
    rows.push_back(r);
  }
  j["layers"] = rows;
  auto tot = totals(t.rows);
  j["totals"] = {{"n_weights", tot.n_weights}, {"ops", tot.ops}, {"mem_ops", tot.mem_ops}};
  return j.dump(2) + "\n";
}

inline std::string report_summary_output(const std::vector<PredictionReport>& reports, const std::string& format) {
  auto s = summarize(reports);
  auto opt = [](const std::optional<double>& v) { return v ? format_decimal(*v) : std::string(); };
  if (format == "json") {
    nlohmann::ordered_json j;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
      nlohmann::ordered_json rj;
      rj["network"] = r.network;
      rj["target"] = target_name(r.target);
      rj["sum_layers"] = r.sum_layers;
      if (r.sum_measured) rj["sum_measured"] = *r.sum_measured;
      if (r.sum_error_pct) rj["sum_error_pct"] = *r.sum_error_pct;
      if (r.network_error_pct) rj["network_error_pct"] = *r.network_error_pct;
      if (auto m = per_layer_mape(r)) rj["per_layer_mape_pct"] = *m;
      arr.push_back(rj);
    }
    j["reports"] = arr;
    nlohmann::ordered_json sj;
    sj["n_reports"] = s.n_reports;
    if (s.avg_abs_sum_error_pct) sj["avg_abs_sum_error_pct"] = *s.avg_abs_sum_error_pct;
    if (s.network_mape_pct) sj["network_mape_pct"] = *s.network_mape_pct;
    if (s.avg_per_layer_mape_pct) sj["avg_per_layer_mape_pct"] = *s.avg_per_layer_mape_pct;
    j["summary"] = sj;
    return j.dump(2) + "\n";
  }
  std::string out(kCsvVersionLine);
  out += "\nnetwork,target,sum_layers,sum_measured,sum_error_pct,network_error_pct,per_layer_mape_pct\n";
  for (const auto& r : reports) {
    out += r.network + "," + std::string(target_name(r.target)) + "," + format_decimal(r.sum_layers) + "," +
           opt(r.sum_measured) + "," + opt(r.sum_error_pct) + "," + opt(r.network_error_pct) + "," +
           opt(per_layer_mape(r)) + "\n";
  }
  out += "AVERAGE_ABS,,,," + opt(s.avg_abs_sum_error_pct) + "," + opt(s.network_mape_pct) + "," +
         opt(s.avg_per_layer_mape_pct) + "\n";
  return out;
}

inline std::string utc_stamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"previous-kit: layer-wise performance modeling and prediction for CNN inference", "previous-kit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "previous-kit 1.0.0");

  Global g;
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--quiet", g.quiet, "Suppress warnings and progress messages");
  app.add_flag("--stamp", g.stamp, "Print a UTC timestamp on the error stream");
  app.add_option("--jobs", g.jobs, "Worker threads for per-layer work")->check(CLI::Range(1u, 256u));

  // inspect
  std::string net_path, out_path, out_dir;
  auto* inspect = app.add_subcommand("inspect", "Validate a network and print inferred shapes");
  inspect->add_option("--net", net_path, "Network JSON")->required();
  inspect->add_option("--out", out_path, "Output file (default: stdout)");

  // metrics
  bool im2col = false, no_bias_ops = false;
  auto* metrics = app.add_subcommand("metrics", "Per-layer n(W), #OPs and #memOPs");
  metrics->add_option("--net", net_path, "Network JSON")->required();
  metrics->add_flag("--im2col", im2col, "Count Conv input reads as the im2col matrix");
  metrics->add_flag("--no-bias-ops", no_bias_ops, "Exclude bias additions from #OPs");
  metrics->add_option("--out", out_path, "Output file (default: stdout)");

  // generate
  std::string variant = "01";
  std::optional<std::uint64_t> gh, gw, gc;
  std::uint64_t k1 = 10, k2 = 1000;
  bool suite = false;
  auto* generate = app.add_subcommand("generate", "Write characterization network definitions");
  generate->set_help_flag("--help", "Print this help message and exit");
  generate->add_option("--variant", variant, "01 (3-D tensors) or 02 (1-D vectors)")
      ->check(CLI::IsMember({"01", "02"}));
  generate->add_option("--h", gh, "Input height");
  generate->add_option("--w", gw, "Input width");
  generate->add_option("--c", gc, "Input channels");
  generate->add_option("--k1", k1, "First class count (02)");
  generate->add_option("--k2", k2, "Second class count (02)");
  generate->add_flag("--suite", suite, "Write the five standard networks into --out-dir");
  generate->add_option("--out", out_path, "Output file (default: stdout)");
  generate->add_option("--out-dir", out_dir, "Output directory for --suite");

  // simulate
  std::uint64_t seed = 0;
  double noise = 0.0, hidden_c = 1.0, gap_ms = kDefaultGapMs, period = kDefaultSamplePeriodS;
  std::size_t runs = kDefaultRuns;
  bool nonlinear = false, no_trace = false;
  auto* simulate = app.add_subcommand("simulate", "Profile a network on the synthetic device");
  simulate->add_option("--net", net_path, "Network JSON")->required();
  simulate->add_option("--seed", seed, "Device seed");
  simulate->add_option("--noise", noise, "Relative per-run noise in [0, 0.5]");
  simulate->add_option("--hidden-c", hidden_c, "Whole-network scaling in [0.5, 1.5]");
  simulate->add_option("--runs", runs, "Runs per layer")->check(CLI::PositiveNumber);
  simulate->add_option("--gap-ms", gap_ms, "Idle gap between layers (ms)");
  simulate->add_option("--sample-period", period, "Power sample period (s)");
  simulate->add_flag("--nonlinear", nonlinear, "Add a mild nonlinear term to the hidden cost");
  simulate->add_flag("--no-trace", no_trace, "Skip the power trace and schedule");
  simulate->add_option("--out-dir", out_dir, "Output directory")->required();

  // fit
  std::vector<std::string> f_metrics, f_timing, f_trace, f_schedule, f_totals;
  std::string target = "runtime", system_id = "synthetic";
  double lambda = 1.0;
  bool subtract_baseline = false;
  auto* fit = app.add_subcommand("fit", "Fit per-kind models from profiled networks");
  fit->add_option("--metrics", f_metrics, "Metrics CSV (repeat per network)")->required();
  fit->add_option("--timing", f_timing, "Timing CSV, paired with --metrics")->required();
  fit->add_option("--trace", f_trace, "Power trace, paired with --metrics");
  fit->add_option("--schedule", f_schedule, "Schedule CSV, paired with --trace");
  fit->add_option("--totals", f_totals, "Whole-network totals JSON, paired with --metrics");
  fit->add_option("--target", target, "runtime, energy or both")->check(CLI::IsMember({"runtime", "energy", "both"}));
  fit->add_option("--lambda", lambda, "Ridge penalty")->check(CLI::NonNegativeNumber);
  fit->add_option("--system-id", system_id, "System identifier stored in the bundle");
  fit->add_option("--gap-ms", gap_ms, "Idle gap used when segmenting traces (ms)");
  fit->add_flag("--subtract-baseline", subtract_baseline, "Subtract idle power before integrating");
  fit->add_option("--out", out_path, "Bundle JSON")->required();

  // predict
  std::string bundle_path, measured_path, p_trace, p_schedule, p_totals, plot_path;
  auto* predict = app.add_subcommand("predict", "Predict per-layer and whole-network cost");
  predict->add_option("--bundle", bundle_path, "Bundle JSON")->required();
  predict->add_option("--net", net_path, "Network JSON")->required();
  predict->add_option("--target", target, "runtime, energy or both")
      ->check(CLI::IsMember({"runtime", "energy", "both"}));
  predict->add_option("--measured", measured_path, "Timing CSV with per-layer measurements");
  predict->add_option("--trace", p_trace, "Power trace with per-layer measurements");
  predict->add_option("--schedule", p_schedule, "Schedule CSV for --trace");
  predict->add_option("--totals", p_totals, "Whole-network measurement JSON");
  predict->add_option("--gap-ms", gap_ms, "Idle gap used when segmenting traces (ms)");
  predict->add_option("--plot-data", plot_path, "Write (measured, predicted) pairs CSV");
  predict->add_option("--out", out_path, "Output file (default: stdout)");

  // report
  std::string inputs_dir;
  auto* report = app.add_subcommand("report", "Summarize stored prediction reports");
  report->add_option("--inputs", inputs_dir, "Directory of report JSON files")->required();
  report->add_option("--out", out_path, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    if (e.get_exit_code() != 0) err << app.help();
    return 2;
  }

  try {
    if (g.stamp) err << "stamp: " << utc_stamp() << "\n";
    auto warn = [&](const std::string& msg) {
      if (!g.quiet) err << "warning: " << msg << "\n";
    };

    if (inspect->parsed()) {
      require_files({net_path});
      emit(inspect_output(load_shaped(net_path), g.format), out_path, out);
      return 0;
    }

    if (metrics->parsed()) {
      require_files({net_path});
      auto sn = load_shaped(net_path);
      MetricsOptions opts{im2col, !no_bias_ops};
      MetricsTable t{sn.net.name, opts, network_metrics(sn, opts, g.jobs)};
      emit(g.format == "json" ? metrics_json(t) : write_metrics_csv(t), out_path, out);
      return 0;
    }

    if (generate->parsed()) {
      if (suite) {
        if (out_dir.empty()) throw DomainError("--suite needs --out-dir");
        require_dir(out_dir);
        for (const auto& cfg : standard_suite()) {
          const auto path = (fs::path(out_dir) / suite_file_name(cfg)).string();
          write_file(path, serialize_network(pkit::generate(cfg)));
          if (!g.quiet) err << "wrote " << path << "\n";
        }
        return 0;
      }
      PNetConfig cfg;
      if (variant == "02") {
        cfg.variant = PNetVariant::kNet02;
        cfg.h = gh.value_or(1);
        cfg.w = gw.value_or(1);
        cfg.c = gc.value_or(256);
      } else {
        cfg.h = gh.value_or(56);
        cfg.w = gw.value_or(56);
        cfg.c = gc.value_or(32);
      }
      cfg.k1 = k1;
      cfg.k2 = k2;
      auto doc = serialize_network(pkit::generate(cfg));
      if (!out_dir.empty() && out_path.empty()) {
        require_dir(out_dir);
        out_path = (fs::path(out_dir) / suite_file_name(cfg)).string();
      }
      emit(doc, out_path, out);
      return 0;
    }

    if (simulate->parsed()) {
      require_files({net_path});
      auto device = make_device(seed, noise, hidden_c, nonlinear);
      auto sn = load_shaped(net_path);
      SimulateOptions so;
      so.n_runs = runs;
      so.gap_ms = gap_ms;
      so.sample_period_s = period;
      so.with_trace = !no_trace;
      so.jobs = g.jobs;
      auto res = simulate_profile(device, sn, so);
      require_dir(out_dir);
      const fs::path dir(out_dir);
      write_file((dir / "timing.csv").string(), write_timing_csv(res.timing));
      if (!no_trace) {
        write_file((dir / "trace.csv").string(), write_trace_csv(res.trace));
        write_file((dir / "schedule.csv").string(), write_schedule_csv(res.schedule));
      }
      write_file((dir / "totals.json").string(), totals_to_json(res.totals));
      if (!g.quiet) err << "wrote " << out_dir << "\n";
      return 0;
    }

    if (fit->parsed()) {
      const auto n = f_metrics.size();
      if (f_timing.size() != n) throw DomainError("--timing must be given once per --metrics");
      if (f_trace.size() != f_schedule.size()) throw DomainError("--trace and --schedule must be paired");
      if (!f_trace.empty() && f_trace.size() != n) throw DomainError("--trace must be given once per --metrics");
      if (!f_totals.empty() && f_totals.size() != n) throw DomainError("--totals must be given once per --metrics");
      require_files(f_metrics);
      require_files(f_timing);
      require_files(f_trace);
      require_files(f_schedule);
      require_files(f_totals);
      std::vector<ProfiledNetwork> inputs(n);
      for (std::size_t i = 0; i < n; ++i) {
        auto& in = inputs[i];
        in.metrics = read_metrics_csv(read_file(f_metrics[i]), f_metrics[i]);
        in.timing = read_timing_csv(read_file(f_timing[i]), f_timing[i]);
        if (!f_trace.empty()) {
          in.trace = read_trace_csv(read_file(f_trace[i]), f_trace[i]);
          in.schedule = read_schedule_csv(read_file(f_schedule[i]), f_schedule[i]);
        }
        if (!f_totals.empty()) in.totals = totals_from_json(read_file(f_totals[i]), f_totals[i]);
      }
      FitConfig cfg;
      cfg.targets = targets_of(target);
      cfg.lambda = lambda;
      cfg.system_id = system_id;
      cfg.subtract_baseline = subtract_baseline;
      cfg.gap_ms = gap_ms;
      std::vector<std::string> names;
      for (const auto& in : inputs) names.push_back(in.metrics.network);
      cfg.suite = join_names(names, ',');
      auto res = fit_bundle(inputs, cfg);
      for (const auto& w : res.warnings) warn(w);
      write_file(out_path, bundle_to_json(res.bundle));
      return 0;
    }

    if (predict->parsed()) {
      if (p_trace.empty() != p_schedule.empty()) throw DomainError("--trace and --schedule must be paired");
      std::vector<std::string> files{bundle_path, net_path};
      for (const auto* p : {&measured_path, &p_trace, &p_schedule, &p_totals})
        if (!p->empty()) files.push_back(*p);
      require_files(files);
      ModelBundle bundle;
      try {
        bundle = bundle_from_json(read_file(bundle_path));
      } catch (const ParseError& e) {
        throw ParseError(bundle_path + ": " + e.what());
      }
      auto sn = load_shaped(net_path);
      std::map<std::string, double> meas_rt, meas_en;
      if (!measured_path.empty())
        for (const auto& [layer, s] : ingest_timing(read_timing_csv(read_file(measured_path), measured_path)))
          meas_rt[layer] = s.mean_ms;
      if (!p_trace.empty()) {
        auto tr = read_trace_csv(read_file(p_trace), p_trace);
        auto sc = read_schedule_csv(read_file(p_schedule), p_schedule);
        for (const auto& [layer, e] : energy_profile(tr, sc, {gap_ms, 0.10}, bundle.provenance.subtract_baseline))
          meas_en[layer] = e.mean_mj;
      }
      std::optional<NetworkTotals> tot;
      if (!p_totals.empty()) tot = totals_from_json(read_file(p_totals), p_totals);

      std::vector<PredictionReport> reports;
      for (Target t : targets_of(target)) {
        auto r = predict_per_layer(bundle, sn, t, g.jobs);
        for (const auto& row : r.per_layer)
          if (row.clamped) warn("negative prediction clamped to 0 for layer " + row.layer);
        std::optional<double> net_meas;
        if (tot) net_meas = t == Target::kRuntime ? tot->runtime_ms : tot->energy_mj;
        reports.push_back(error_report(std::move(r), t == Target::kRuntime ? meas_rt : meas_en, net_meas));
      }
      std::string doc;
      if (g.format == "json") {
        doc = reports_to_json(reports);
      } else {
        for (const auto& r : reports) doc += report_to_csv(r);
      }
      emit(doc, out_path, out);
      if (!plot_path.empty()) write_file(plot_path, plot_data_csv(reports));
      return 0;
    }

    if (report->parsed()) {
      if (!fs::is_directory(inputs_dir)) throw IoError("cannot open directory '" + inputs_dir + "'");
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(inputs_dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path().string());
      std::sort(files.begin(), files.end());
      if (files.empty()) throw DomainError("no report files in '" + inputs_dir + "'");
      std::vector<PredictionReport> reports;
      for (const auto& f : files) {
        for (auto& r : reports_from_json(read_file(f), f)) {
          std::map<std::string, double> m;
          for (const auto& row : r.per_layer)
            if (row.measured) m[row.layer] = *row.measured;
          reports.push_back(error_report(std::move(r), m));
        }
      }
      emit(report_summary_output(reports, g.format), out_path, out);
      return 0;
    }
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON document: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("previous-kit");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace pkit::cli

#endif  // PKIT_CLI_HPP_
