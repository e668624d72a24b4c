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

// Reduction of profiling artifacts to per-layer mean runtime and energy.
//
// The capture protocol runs every layer n times back to back, separated from
// the next layer by an idle gap, while a power analyzer samples the supply at
// a fixed period. Timing comes from a separate per-run log; the power trace
// is cut into per-run windows by walking the schedule of (layer, runs,
// per-run duration) and locating each burst near its expected offset.

#ifndef PKIT_PROFILING_HPP_
#define PKIT_PROFILING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pkit/detail/text.hpp"
#include "pkit/error.hpp"
#include "pkit/metrics.hpp"
#include "pkit/model.hpp"

namespace pkit {

inline constexpr double kDefaultSamplePeriodS = 40.96e-6;
inline constexpr double kDefaultGapMs = 300.0;
inline constexpr std::size_t kDefaultRuns = 50;

// ---------------------------------------------------------------------------
// Timing.

struct TimingRecord {
  std::string layer;
  std::int64_t run = 0;
  double elapsed_ms = 0.0;
};

struct TimingLog {
  std::vector<TimingRecord> records;
};

struct TimingStats {
  double mean_ms = 0.0;
  double std_ms = 0.0;  // sample standard deviation; 0 for a single run
  std::size_t n = 0;
};

inline std::map<std::string, TimingStats> ingest_timing(const TimingLog& log) {
  if (log.records.empty()) throw DomainError("timing log is empty");
  std::set<std::pair<std::string, std::int64_t>> seen;
  std::map<std::string, std::vector<double>> runs;
  for (const auto& r : log.records) {
    if (!seen.emplace(r.layer, r.run).second)
      throw DomainError("duplicate timing record for layer " + r.layer + " run " + std::to_string(r.run));
    if (!(r.elapsed_ms > 0.0))
      throw DomainError("non-positive elapsed time for layer " + r.layer + " run " + std::to_string(r.run));
    runs[r.layer].push_back(r.elapsed_ms);
  }
  std::map<std::string, TimingStats> out;
  for (const auto& [layer, v] : runs) {
    TimingStats s;
    s.n = v.size();
    double sum = 0.0;
    for (double e : v) sum += e;
    s.mean_ms = sum / static_cast<double>(s.n);
    if (s.n > 1) {
      double ss = 0.0;
      for (double e : v) ss += (e - s.mean_ms) * (e - s.mean_ms);
      s.std_ms = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    out.emplace(layer, s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Power trace segmentation.

struct PowerTrace {
  double sample_period_s = kDefaultSamplePeriodS;
  std::vector<double> samples;  // watts
};

struct ScheduleEntry {
  std::string layer;
  std::size_t n_runs = 0;
  double per_run_ms = 0.0;
};

using Schedule = std::vector<ScheduleEntry>;

struct SampleWindow {
  std::size_t begin = 0;
  std::size_t count = 0;
};

struct LayerSegment {
  std::string layer;
  std::size_t burst_begin = 0;
  std::size_t burst_end = 0;  // exclusive
  double idle_level_w = 0.0;  // median of the preceding gap, 0 if there is none
  std::vector<SampleWindow> windows;
};

struct SegmentOptions {
  double gap_ms = kDefaultGapMs;
  // Allowed burst misplacement, as a fraction of (gap + burst) length.
  double slack = 0.10;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid - 1), v.end());
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

}  // namespace detail

// Window count per run is ceil(per_run / period), at least 2 so a window can
// be integrated. Window k starts k * per_run after the detected burst onset,
// snapped to the nearest sample and kept inside the burst.
inline std::map<std::string, LayerSegment> segment_power_trace(const PowerTrace& trace, const Schedule& schedule,
                                                               const SegmentOptions& opts = {}) {
  std::map<std::string, LayerSegment> out;
  if (schedule.empty()) return out;
  const double dt = trace.sample_period_s;
  if (!(dt > 0.0)) throw DomainError("sample period must be positive");
  if (!(opts.gap_ms >= 0.0)) throw DomainError("gap must be non-negative");
  const auto size = trace.samples.size();
  const double gap_samples = opts.gap_ms * 1e-3 / dt;
  double cursor = 0.0;

  for (const auto& e : schedule) {
    if (e.n_runs == 0 || !(e.per_run_ms > 0.0))
      throw DomainError("schedule entry for " + e.layer + " needs runs > 0 and a positive duration");
    if (out.count(e.layer)) throw DomainError("layer " + e.layer + " scheduled twice");
    const double run_samples = e.per_run_ms * 1e-3 / dt;
    const double burst_samples = run_samples * static_cast<double>(e.n_runs);
    const auto burst_len = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(burst_samples)));
    const auto window_len = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(run_samples - 1e-9)));

    const double expected = cursor + gap_samples;
    const double slack = opts.slack * (gap_samples + burst_samples);
    const double lo_d = std::max(0.0, expected - slack);
    const double hi_d = expected + slack;
    const auto lo = static_cast<std::size_t>(std::ceil(lo_d));
    if (lo >= size) throw DomainError("trace shorter than schedule (layer " + e.layer + ")");

    LayerSegment seg;
    seg.layer = e.layer;
    const auto idle_begin = static_cast<std::size_t>(std::floor(cursor));
    const auto idle_end = std::min(size, static_cast<std::size_t>(std::floor(lo_d)));
    std::size_t onset = 0;
    if (idle_end > idle_begin) {
      std::vector<double> idle(trace.samples.begin() + static_cast<std::ptrdiff_t>(idle_begin),
                               trace.samples.begin() + static_cast<std::ptrdiff_t>(idle_end));
      seg.idle_level_w = detail::median(idle);
      std::vector<double> dev(idle.size());
      for (std::size_t i = 0; i < idle.size(); ++i) dev[i] = std::abs(idle[i] - seg.idle_level_w);
      const double mad = detail::median(std::move(dev));
      const double threshold = std::max({0.05 * std::abs(seg.idle_level_w), 6.0 * 1.4826 * mad, 1e-9});
      const auto hi = std::min(size, static_cast<std::size_t>(std::floor(hi_d)) + 1);
      bool found = false;
      for (std::size_t i = lo; i < hi; ++i) {
        if (std::abs(trace.samples[i] - seg.idle_level_w) > threshold) {
          onset = i;
          found = true;
          break;
        }
      }
      if (!found) {
        if (hi >= size) throw DomainError("trace shorter than schedule (layer " + e.layer + ")");
        throw DomainError("burst for layer " + e.layer + " not found within slack: expected offset " +
                          detail::format_decimal(expected * dt) + " s, searched samples [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + ")");
      }
    } else {
      // No idle samples to compare against: trust the schedule.
      onset = static_cast<std::size_t>(std::ceil(expected - 1e-9));
    }
    if (onset + std::max(burst_len, window_len) > size)
      throw DomainError("trace shorter than schedule (layer " + e.layer + ")");

    seg.burst_begin = onset;
    seg.burst_end = onset + burst_len;
    const auto last_start = seg.burst_end >= onset + window_len ? seg.burst_end - window_len : onset;
    for (std::size_t k = 0; k < e.n_runs; ++k) {
      auto start = onset + static_cast<std::size_t>(std::llround(static_cast<double>(k) * run_samples));
      start = std::min(start, last_start);
      seg.windows.push_back({start, window_len});
    }
    cursor = static_cast<double>(onset) + burst_samples;
    out.emplace(e.layer, std::move(seg));
  }
  return out;
}

struct EnergyStats {
  double mean_mj = 0.0;
  double std_mj = 0.0;
  std::size_t n = 0;
};

// Trapezoidal energy of one window in mJ; `baseline_w` is subtracted from
// every sample first.
inline double window_energy_mj(std::span<const double> samples, double sample_period_s, double baseline_w = 0.0) {
  if (samples.size() < 2) throw DomainError("energy window needs at least 2 samples");
  double joules = 0.0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i)
    joules += 0.5 * ((samples[i] - baseline_w) + (samples[i + 1] - baseline_w)) * sample_period_s;
  return joules * 1e3;
}

// Mean and sample standard deviation of per-window energies.
inline EnergyStats layer_energy(std::span<const std::span<const double>> windows, double sample_period_s,
                                double baseline_w = 0.0) {
  if (windows.empty()) throw DomainError("layer_energy needs at least one window");
  if (!(sample_period_s > 0.0)) throw DomainError("sample period must be positive");
  std::vector<double> e;
  e.reserve(windows.size());
  for (auto w : windows) e.push_back(window_energy_mj(w, sample_period_s, baseline_w));
  EnergyStats s;
  s.n = e.size();
  double sum = 0.0;
  for (double v : e) sum += v;
  s.mean_mj = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : e) ss += (v - s.mean_mj) * (v - s.mean_mj);
    s.std_mj = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

inline std::vector<std::span<const double>> window_views(const PowerTrace& trace, const LayerSegment& seg) {
  std::vector<std::span<const double>> v;
  v.reserve(seg.windows.size());
  for (const auto& w : seg.windows) v.emplace_back(trace.samples.data() + w.begin, w.count);
  return v;
}

// Segments the trace and integrates every layer's windows.
inline std::map<std::string, EnergyStats> energy_profile(const PowerTrace& trace, const Schedule& schedule,
                                                         const SegmentOptions& opts = {},
                                                         bool subtract_baseline = false) {
  std::map<std::string, EnergyStats> out;
  for (const auto& [layer, seg] : segment_power_trace(trace, schedule, opts)) {
    auto views = window_views(trace, seg);
    out.emplace(layer, layer_energy(views, trace.sample_period_s, subtract_baseline ? seg.idle_level_w : 0.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Profiles and observations.

struct LayerProfile {
  std::string layer_name;
  double mean_runtime_ms = 0.0;
  double runtime_std_ms = 0.0;
  std::optional<double> mean_energy_mj;
  std::optional<double> energy_std_mj;
  std::size_t n_runs = 0;
};

inline std::map<std::string, LayerProfile> make_profiles(const std::map<std::string, TimingStats>& timing,
                                                         const std::map<std::string, EnergyStats>& energy = {}) {
  std::map<std::string, LayerProfile> out;
  for (const auto& [layer, t] : timing) {
    LayerProfile p;
    p.layer_name = layer;
    p.mean_runtime_ms = t.mean_ms;
    p.runtime_std_ms = t.std_ms;
    p.n_runs = t.n;
    if (auto it = energy.find(layer); it != energy.end()) {
      p.mean_energy_mj = it->second.mean_mj;
      p.energy_std_mj = it->second.std_mj;
    }
    out.emplace(layer, std::move(p));
  }
  for (const auto& [layer, e] : energy)
    if (!timing.count(layer)) throw DomainError("energy profile for layer " + layer + " has no timing");
  return out;
}

struct ObservationBuild {
  std::map<LayerKind, ObservationSet> sets;
  std::vector<std::string> warnings;
};

// Rows follow the order of `metrics` (topological for network_metrics output).
inline ObservationBuild build_observations(std::span<const ArchMetrics> metrics,
                                           const std::map<std::string, LayerProfile>& profiles, Target target,
                                           std::string_view network = {}) {
  ObservationBuild b;
  const std::string prefix = network.empty() ? std::string() : std::string(network) + "/";
  for (const auto& m : metrics) {
    auto it = profiles.find(m.layer_name);
    if (it == profiles.end()) {
      b.warnings.push_back("no profile for layer " + prefix + m.layer_name + "; skipped");
      continue;
    }
    std::optional<double> y;
    if (target == Target::kRuntime) y = it->second.mean_runtime_ms;
    else y = it->second.mean_energy_mj;
    if (!y) {
      b.warnings.push_back("no energy for layer " + prefix + m.layer_name + "; skipped");
      continue;
    }
    auto& set = b.sets[m.kind];
    set.kind = m.kind;
    set.target = target;
    set.sources.push_back(prefix + m.layer_name);
    set.x.push_back(predictors_of(m));
    set.y.push_back(*y);
  }
  return b;
}

inline void append_observations(ObservationBuild& into, const ObservationBuild& from) {
  for (const auto& [kind, set] : from.sets) {
    auto& dst = into.sets[kind];
    dst.kind = kind;
    dst.target = set.target;
    dst.sources.insert(dst.sources.end(), set.sources.begin(), set.sources.end());
    dst.x.insert(dst.x.end(), set.x.begin(), set.x.end());
    dst.y.insert(dst.y.end(), set.y.begin(), set.y.end());
  }
  into.warnings.insert(into.warnings.end(), from.warnings.begin(), from.warnings.end());
}

// ---------------------------------------------------------------------------
// Files: timing "layer,run,elapsed_ms", schedule "layer,n_runs,per_run_ms",
// trace "sample_period_s=<v>" followed by one watt value per line.

inline constexpr std::string_view kTimingHeader = "layer,run,elapsed_ms";
inline constexpr std::string_view kScheduleHeader = "layer,n_runs,per_run_ms";

inline std::string write_timing_csv(const TimingLog& log) {
  std::string s(kCsvVersionLine);
  s += '\n';
  s += kTimingHeader;
  s += '\n';
  for (const auto& r : log.records)
    s += r.layer + "," + std::to_string(r.run) + "," + detail::format_decimal(r.elapsed_ms) + "\n";
  return s;
}

inline TimingLog read_timing_csv(std::string_view text, std::string_view source = "timing") {
  TimingLog log;
  for (const auto& row : detail::parse_csv(text, kTimingHeader, source)) {
    auto ctx = detail::where(source, row);
    log.records.push_back({row.cells[0], detail::parse_int(row.cells[1], ctx),
                           detail::parse_decimal(row.cells[2], ctx)});
  }
  return log;
}

inline std::string write_schedule_csv(const Schedule& sched) {
  std::string s(kCsvVersionLine);
  s += '\n';
  s += kScheduleHeader;
  s += '\n';
  for (const auto& e : sched)
    s += e.layer + "," + std::to_string(e.n_runs) + "," + detail::format_decimal(e.per_run_ms) + "\n";
  return s;
}

inline Schedule read_schedule_csv(std::string_view text, std::string_view source = "schedule") {
  Schedule sched;
  for (const auto& row : detail::parse_csv(text, kScheduleHeader, source)) {
    auto ctx = detail::where(source, row);
    auto runs = detail::parse_int(row.cells[1], ctx);
    if (runs <= 0) throw ParseError(ctx + ": n_runs must be positive");
    sched.push_back({row.cells[0], static_cast<std::size_t>(runs), detail::parse_decimal(row.cells[2], ctx)});
  }
  return sched;
}

inline std::string write_trace_csv(const PowerTrace& trace) {
  std::string s = "sample_period_s=" + detail::format_decimal(trace.sample_period_s) + "\n";
  s.reserve(s.size() + trace.samples.size() * 8);
  for (double v : trace.samples) {
    s += detail::format_decimal(v);
    s += '\n';
  }
  return s;
}

inline PowerTrace read_trace_csv(std::string_view text, std::string_view source = "trace") {
  PowerTrace t;
  bool have_header = false;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto ctx = std::string(source) + ":" + std::to_string(line_no);
    if (!have_header) {
      constexpr std::string_view key = "sample_period_s=";
      if (line.substr(0, key.size()) != key) throw ParseError(ctx + ": expected 'sample_period_s=<value>'");
      t.sample_period_s = detail::parse_decimal(line.substr(key.size()), ctx);
      if (!(t.sample_period_s > 0.0)) throw ParseError(ctx + ": sample period must be positive");
      have_header = true;
      continue;
    }
    double v = detail::parse_decimal(line, ctx);
    if (v < 0.0) throw ParseError(ctx + ": negative power sample");
    t.samples.push_back(v);
  }
  if (!have_header) throw ParseError(std::string(source) + ": missing 'sample_period_s=' header");
  return t;
}

}  // namespace pkit

#endif  // PKIT_PROFILING_HPP_
