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

// Synthetic device: emits timing logs, power traces and whole-network totals
// from a hidden cost function that is linear in [n_weights, ops, mem_ops].
//
// Per-kind runtime coefficients (ms per unit) are drawn uniformly from the
// ranges in kRuntimeRanges. Energy coefficients are the runtime ones times a
// per-term power drawn from [2, 3.5] W, so every plateau sits well above the
// 1 W idle level. Per-run noise depends only on (seed, layer, run, stream).

#ifndef PKIT_SIMDEVICE_HPP_
#define PKIT_SIMDEVICE_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pkit/detail/parallel.hpp"
#include "pkit/detail/text.hpp"
#include "pkit/error.hpp"
#include "pkit/metrics.hpp"
#include "pkit/model.hpp"
#include "pkit/netdef.hpp"
#include "pkit/profiling.hpp"

namespace pkit {

// cost = a_w * n_weights + a_ops * ops + a_mem * mem_ops + beta
struct CostCoefficients {
  double a_w = 0.0;
  double a_ops = 0.0;
  double a_mem = 0.0;
  double beta = 0.0;

  bool operator==(const CostCoefficients&) const = default;
};

struct SyntheticDevice {
  std::uint64_t seed = 0;
  double noise_rel = 0.0;
  double hidden_c = 1.0;
  bool nonlinear = false;
  double baseline_w = 1.0;
  std::map<LayerKind, CostCoefficients> runtime;  // ms
  std::map<LayerKind, CostCoefficients> energy;   // mJ

  bool operator==(const SyntheticDevice&) const = default;
};

struct CoefficientRange {
  LayerKind kind;
  std::array<double, 2> a_w, a_ops, a_mem, beta;
};

// Runtime ranges, ms per unit and ms.
inline constexpr std::array<CoefficientRange, 9> kRuntimeRanges = {{
    {LayerKind::kConv, {0.0, 2e-8}, {4e-7, 9e-7}, {1e-8, 4e-8}, {0.05, 0.3}},
    {LayerKind::kFC, {5e-8, 2e-7}, {3e-7, 8e-7}, {1e-8, 4e-8}, {0.02, 0.1}},
    {LayerKind::kPool, {0.0, 0.0}, {1e-7, 3e-7}, {2e-8, 6e-8}, {0.02, 0.1}},
    {LayerKind::kReLU, {0.0, 0.0}, {5e-8, 1.5e-7}, {2e-8, 5e-8}, {0.01, 0.05}},
    {LayerKind::kBatchNorm, {1e-8, 5e-8}, {5e-8, 1.5e-7}, {2e-8, 5e-8}, {0.01, 0.05}},
    {LayerKind::kScale, {1e-8, 5e-8}, {5e-8, 1.5e-7}, {2e-8, 5e-8}, {0.01, 0.05}},
    {LayerKind::kConcat, {0.0, 0.0}, {0.0, 0.0}, {5e-8, 1.5e-7}, {0.01, 0.05}},
    {LayerKind::kEltwise, {0.0, 0.0}, {5e-8, 1.5e-7}, {2e-8, 5e-8}, {0.01, 0.05}},
    {LayerKind::kSoftmax, {0.0, 0.0}, {1e-7, 3e-7}, {1e-8, 3e-8}, {0.01, 0.05}},
}};

inline constexpr std::array<double, 2> kTermPowerRangeW = {2.0, 3.5};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double unit_from_bits(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Uniform in [-1, 1), a pure function of its arguments.
inline double noise_unit(std::uint64_t seed, std::uint64_t layer, std::uint64_t run, std::uint64_t stream) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (layer * 0xd1b54a32d192ed03ULL));
  h = splitmix64(h ^ (run * 0x8cb92ba72f3d8dd7ULL));
  h = splitmix64(h ^ (stream * 0xa0761d6478bd642fULL));
  return 2.0 * unit_from_bits(h) - 1.0;
}

inline constexpr std::uint64_t kStreamRuntime = 0;
inline constexpr std::uint64_t kStreamEnergy = 1;
inline constexpr std::uint64_t kStreamTotalRuntime = 2;
inline constexpr std::uint64_t kStreamTotalEnergy = 3;

}  // namespace detail

inline SyntheticDevice make_device(std::uint64_t seed, double noise_rel = 0.0, double hidden_c = 1.0,
                                   bool nonlinear = false) {
  if (!(noise_rel >= 0.0 && noise_rel <= 0.5)) throw DomainError("noise_rel must be in [0, 0.5]");
  if (!(hidden_c >= 0.5 && hidden_c <= 1.5)) throw DomainError("hidden_c must be in [0.5, 1.5]");
  SyntheticDevice d;
  d.seed = seed;
  d.noise_rel = noise_rel;
  d.hidden_c = hidden_c;
  d.nonlinear = nonlinear;
  std::mt19937_64 rng(seed);
  auto draw = [&](const std::array<double, 2>& r) {
    const double u = detail::unit_from_bits(rng());
    return r[0] + (r[1] - r[0]) * u;
  };
  for (const auto& r : kRuntimeRanges) {
    CostCoefficients rt{draw(r.a_w), draw(r.a_ops), draw(r.a_mem), draw(r.beta)};
    CostCoefficients en{rt.a_w * draw(kTermPowerRangeW), rt.a_ops * draw(kTermPowerRangeW),
                        rt.a_mem * draw(kTermPowerRangeW), rt.beta * draw(kTermPowerRangeW)};
    d.runtime.emplace(r.kind, rt);
    d.energy.emplace(r.kind, en);
  }
  return d;
}

// Noise-free cost of one run of a layer.
inline double true_cost(const SyntheticDevice& d, const ArchMetrics& m, Target t) {
  const auto& table = t == Target::kRuntime ? d.runtime : d.energy;
  auto it = table.find(m.kind);
  if (it == table.end())
    throw DomainError("device has no " + std::string(target_name(t)) + " cost for kind " +
                      std::string(kind_name(m.kind)));
  const auto& c = it->second;
  const auto x = predictors_of(m);
  double v = c.beta + c.a_w * x[0] + c.a_ops * x[1] + c.a_mem * x[2];
  // Same factor for both targets keeps plateau power unchanged.
  if (d.nonlinear) v *= 1.0 + 0.1 * std::tanh(x[1] / 1e7);
  return v;
}

struct SimulateOptions {
  std::size_t n_runs = kDefaultRuns;
  double gap_ms = kDefaultGapMs;
  double sample_period_s = kDefaultSamplePeriodS;
  bool with_trace = true;
  MetricsOptions metrics;
  unsigned jobs = 1;
};

struct LayerTruth {
  std::string layer;
  LayerKind kind = LayerKind::kConv;
  double runtime_ms = 0.0;
  double energy_mj = 0.0;
};

struct NetworkTotals {
  std::string network;
  double runtime_ms = 0.0;
  double energy_mj = 0.0;

  bool operator==(const NetworkTotals&) const = default;
};

struct SimulationResult {
  TimingLog timing;
  PowerTrace trace;
  Schedule schedule;
  NetworkTotals totals;
  std::vector<LayerTruth> truth;  // topological order
};

// Layers execute in topological order. Each layer runs n_runs times back to
// back after an idle gap; the trace ends with one more gap. Plateau power of
// run r is E_r / t_r, so integrating a run recovers its energy without
// baseline subtraction. Trace samples are quantized to 1 uW.
inline SimulationResult simulate_profile(const SyntheticDevice& d, const ShapedNetwork& sn,
                                         const SimulateOptions& opts = {}) {
  if (opts.n_runs == 0) throw DomainError("n_runs must be positive");
  if (!(opts.sample_period_s > 0.0)) throw DomainError("sample period must be positive");
  if (!(opts.gap_ms >= 0.0)) throw DomainError("gap must be non-negative");
  const auto metrics = network_metrics(sn, opts.metrics, opts.jobs);
  const auto n_layers = metrics.size();

  struct Runs {
    std::vector<double> t_ms, e_mj;
  };
  std::vector<Runs> runs(n_layers);
  SimulationResult res;
  res.truth.resize(n_layers);
  detail::parallel_for(n_layers, opts.jobs, [&](std::size_t i) {
    const auto& m = metrics[i];
    const double t = true_cost(d, m, Target::kRuntime);
    const double e = true_cost(d, m, Target::kEnergy);
    res.truth[i] = {m.layer_name, m.kind, t, e};
    auto& r = runs[i];
    r.t_ms.resize(opts.n_runs);
    r.e_mj.resize(opts.n_runs);
    for (std::size_t k = 0; k < opts.n_runs; ++k) {
      r.t_ms[k] = t * (1.0 + d.noise_rel * detail::noise_unit(d.seed, i, k, detail::kStreamRuntime));
      r.e_mj[k] = e * (1.0 + d.noise_rel * detail::noise_unit(d.seed, i, k, detail::kStreamEnergy));
    }
  });

  double sum_t = 0.0, sum_e = 0.0;
  for (std::size_t i = 0; i < n_layers; ++i) {
    const auto& m = metrics[i];
    double mean = 0.0;
    for (std::size_t k = 0; k < opts.n_runs; ++k) {
      res.timing.records.push_back({m.layer_name, static_cast<std::int64_t>(k), runs[i].t_ms[k]});
      mean += runs[i].t_ms[k];
    }
    res.schedule.push_back({m.layer_name, opts.n_runs, mean / static_cast<double>(opts.n_runs)});
    sum_t += res.truth[i].runtime_ms;
    sum_e += res.truth[i].energy_mj;
  }
  res.totals.network = sn.net.name;
  res.totals.runtime_ms =
      d.hidden_c * sum_t * (1.0 + d.noise_rel * detail::noise_unit(d.seed, n_layers, 0, detail::kStreamTotalRuntime));
  res.totals.energy_mj =
      d.hidden_c * sum_e * (1.0 + d.noise_rel * detail::noise_unit(d.seed, n_layers, 0, detail::kStreamTotalEnergy));

  res.trace.sample_period_s = opts.sample_period_s;
  if (!opts.with_trace) return res;

  // Plateaus in seconds: [begin, end) at power watts.
  struct Plateau {
    double begin, end, watts;
  };
  std::vector<Plateau> plateaus;
  plateaus.reserve(n_layers * opts.n_runs);
  double clock = 0.0;
  const double gap_s = opts.gap_ms * 1e-3;
  for (std::size_t i = 0; i < n_layers; ++i) {
    clock += gap_s;
    for (std::size_t k = 0; k < opts.n_runs; ++k) {
      const double dur = runs[i].t_ms[k] * 1e-3;
      plateaus.push_back({clock, clock + dur, runs[i].e_mj[k] / runs[i].t_ms[k]});
      clock += dur;
    }
  }
  clock += gap_s;
  const double dt = opts.sample_period_s;
  const auto n_samples = static_cast<std::size_t>(std::ceil(clock / dt)) + 1;
  res.trace.samples.resize(n_samples);
  std::size_t p = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const double ts = static_cast<double>(s) * dt;
    while (p < plateaus.size() && ts >= plateaus[p].end) ++p;
    double w = d.baseline_w;
    if (p < plateaus.size() && ts >= plateaus[p].begin) w = plateaus[p].watts;
    res.trace.samples[s] = std::round(w * 1e6) / 1e6;
  }
  return res;
}

// ---------------------------------------------------------------------------
// totals.json: {"network": ..., "runtime_ms": ..., "energy_mj": ...}

inline std::string totals_to_json(const NetworkTotals& t) {
  nlohmann::ordered_json j;
  j["network"] = t.network;
  j["runtime_ms"] = t.runtime_ms;
  j["energy_mj"] = t.energy_mj;
  return j.dump(2) + "\n";
}

inline NetworkTotals totals_from_json(std::string_view text, const std::string& source = "totals") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + ": syntax error at byte " + std::to_string(e.byte));
  }
  if (!j.is_object() || !j.contains("network") || !j.at("network").is_string())
    throw ParseError(source + ": missing 'network'");
  NetworkTotals t;
  t.network = j.at("network").get<std::string>();
  t.runtime_ms = detail::number_at(j, "runtime_ms", source);
  t.energy_mj = detail::number_at(j, "energy_mj", source);
  if (!(t.runtime_ms > 0.0) || !(t.energy_mj > 0.0)) throw ParseError(source + ": totals must be positive");
  return t;
}

}  // namespace pkit

#endif  // PKIT_SIMDEVICE_HPP_
