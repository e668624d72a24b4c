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

// Modeling stage: profiled characterization networks in, fitted bundle out.

#ifndef PKIT_PIPELINE_HPP_
#define PKIT_PIPELINE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "pkit/error.hpp"
#include "pkit/metrics.hpp"
#include "pkit/model.hpp"
#include "pkit/profiling.hpp"
#include "pkit/simdevice.hpp"

namespace pkit {

// Artifacts of one profiled network.
struct ProfiledNetwork {
  MetricsTable metrics;
  TimingLog timing;
  std::optional<PowerTrace> trace;
  std::optional<Schedule> schedule;
  std::optional<NetworkTotals> totals;
};

struct FitConfig {
  std::vector<Target> targets = {Target::kRuntime};
  double lambda = 1.0;
  std::string system_id = "synthetic";
  std::string suite;
  bool subtract_baseline = false;
  double gap_ms = kDefaultGapMs;
  FitOptions fit;
};

struct FitResult {
  ModelBundle bundle;
  std::vector<std::string> warnings;
};

inline ProfiledNetwork profiled_from_simulation(const ShapedNetwork& sn, const SimulationResult& sim,
                                                const MetricsOptions& opts = {}, bool with_totals = true) {
  ProfiledNetwork p;
  p.metrics = {sn.net.name, opts, network_metrics(sn, opts)};
  p.timing = sim.timing;
  if (!sim.trace.samples.empty()) {
    p.trace = sim.trace;
    p.schedule = sim.schedule;
  }
  if (with_totals) p.totals = sim.totals;
  return p;
}

inline FitResult fit_bundle(const std::vector<ProfiledNetwork>& inputs, const FitConfig& cfg) {
  if (inputs.empty()) throw DomainError("fit needs at least one profiled network");
  if (cfg.targets.empty()) throw DomainError("fit needs at least one target");
  const auto opts = inputs.front().metrics.options;
  for (const auto& in : inputs)
    if (!(in.metrics.options == opts))
      throw DomainError("metrics of " + in.metrics.network + " use different counting options");

  FitResult out;
  auto& b = out.bundle;
  b.system_id = cfg.system_id;
  b.provenance.im2col = opts.im2col;
  b.provenance.count_bias_ops = opts.count_bias_ops;
  b.provenance.subtract_baseline = cfg.subtract_baseline;
  b.provenance.suite = cfg.suite;

  std::vector<std::map<std::string, LayerProfile>> profiles;
  for (const auto& in : inputs) {
    std::map<std::string, EnergyStats> energy;
    if (in.trace && in.schedule) {
      energy = energy_profile(*in.trace, *in.schedule, {cfg.gap_ms, 0.10}, cfg.subtract_baseline);
    }
    profiles.push_back(make_profiles(ingest_timing(in.timing), energy));
  }

  for (Target t : cfg.targets) {
    ObservationBuild all;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (t == Target::kEnergy && !(inputs[i].trace && inputs[i].schedule))
        throw DomainError("energy target needs a trace and schedule for " + inputs[i].metrics.network);
      append_observations(all, build_observations(inputs[i].metrics.rows, profiles[i], t, inputs[i].metrics.network));
    }
    out.warnings.insert(out.warnings.end(), all.warnings.begin(), all.warnings.end());
    for (const auto& [kind, set] : all.sets) b.models.emplace(std::pair{kind, t}, fit_ridge(set, cfg.lambda, cfg.fit));

    std::vector<double> sums, measured;
    for (const auto& in : inputs) {
      if (!in.totals) continue;
      double s = 0.0;
      for (const auto& m : in.metrics.rows) s += predict_layer(b.model(m.kind, t), m).value;
      sums.push_back(s);
      measured.push_back(t == Target::kRuntime ? in.totals->runtime_ms : in.totals->energy_mj);
    }
    double c = 1.0;
    if (!sums.empty()) c = fit_network_coefficient(sums, measured);
    else out.warnings.push_back("no network totals for " + std::string(target_name(t)) + "; c set to 1");
    if (t == Target::kRuntime) {
      b.c_runtime = c;
      b.provenance.c_runtime_fitted = !sums.empty();
    } else {
      b.c_energy = c;
      b.provenance.c_energy_fitted = !sums.empty();
    }
  }
  return out;
}

}  // namespace pkit

#endif  // PKIT_PIPELINE_HPP_
