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

#include <gtest/gtest.h>

#include "pkit/simdevice.hpp"
#include "sim_util.hpp"
#include "test_util.hpp"

namespace pkit {
namespace {

ShapedNetwork one_relu() {
  NetworkDef net;
  net.name = "one";
  net.input_shape = {4, 4, 2};
  net.layers = {testing::make_layer("r", LayerKind::kReLU, {"input"})};
  return infer_shapes(net);
}

SyntheticDevice constant_device(double t_ms, double e_mj) {
  auto d = make_device(1);
  d.runtime[LayerKind::kReLU] = {0, 0, 0, t_ms};
  d.energy[LayerKind::kReLU] = {0, 0, 0, e_mj};
  return d;
}

TEST(Device, SameSeedSameCoefficients) {
  auto a = make_device(42), b = make_device(42), c = make_device(43);
  EXPECT_EQ(a.runtime, b.runtime);
  EXPECT_EQ(a.energy, b.energy);
  EXPECT_NE(a.runtime, c.runtime);
  EXPECT_EQ(a.runtime.size(), kAllLayerKinds.size());
}

TEST(Device, CoefficientsWithinRanges) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto d = make_device(seed);
    for (const auto& r : kRuntimeRanges) {
      const auto& rt = d.runtime.at(r.kind);
      const auto& en = d.energy.at(r.kind);
      EXPECT_GE(rt.beta, r.beta[0]);
      EXPECT_LE(rt.beta, r.beta[1]);
      EXPECT_GE(rt.a_ops, r.a_ops[0]);
      EXPECT_LE(rt.a_ops, r.a_ops[1]);
      EXPECT_GE(en.beta, rt.beta * kTermPowerRangeW[0]);
      EXPECT_LE(en.beta, rt.beta * kTermPowerRangeW[1]);
    }
  }
}

TEST(Device, InvalidParameters) {
  EXPECT_THROW(make_device(1, -0.1), DomainError);
  EXPECT_THROW(make_device(1, 0.6), DomainError);
  EXPECT_THROW(make_device(1, 0.0, 0.2), DomainError);
  EXPECT_THROW(make_device(1, 0.0, 1.6), DomainError);
}

TEST(Noise, UnitRangeAndStreams) {
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const double u = detail::noise_unit(5, i, i % 7, i % 4);
    EXPECT_GE(u, -1.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(detail::noise_unit(5, 1, 2, 0), detail::noise_unit(5, 1, 2, 1));
  EXPECT_EQ(detail::noise_unit(5, 1, 2, 0), detail::noise_unit(5, 1, 2, 0));
}

TEST(Simulate, ConstantCostLayer) {
  auto sn = one_relu();
  auto res = simulate_profile(constant_device(10.0, 20.0), sn);
  ASSERT_EQ(res.timing.records.size(), 50u);
  for (const auto& r : res.timing.records) EXPECT_DOUBLE_EQ(r.elapsed_ms, 10.0);
  ASSERT_EQ(res.schedule.size(), 1u);
  EXPECT_DOUBLE_EQ(res.schedule[0].per_run_ms, 10.0);
  // plateau at 2 W absolute, 1 W elsewhere
  const auto& s = res.trace.samples;
  EXPECT_EQ(s.front(), 1.0);
  EXPECT_EQ(s.back(), 1.0);
  EXPECT_EQ(*std::max_element(s.begin(), s.end()), 2.0);
  auto e = energy_profile(res.trace, res.schedule, {}, false);
  EXPECT_NEAR(e.at("r").mean_mj, 20.0, 20.0 * 0.005);
  EXPECT_EQ(e.at("r").n, 50u);
}

TEST(Simulate, NoiseBounded) {
  auto sn = infer_shapes(testing::load_fixture_net("all_cnn_c"));
  auto dev = make_device(3, 0.05);
  auto res = simulate_profile(dev, sn, testing::no_trace());
  std::map<std::string, double> truth;
  for (const auto& t : res.truth) truth[t.layer] = t.runtime_ms;
  bool varied = false;
  for (const auto& r : res.timing.records) {
    EXPECT_LE(std::abs(r.elapsed_ms / truth[r.layer] - 1.0), 0.05 + 1e-12);
    varied = varied || r.elapsed_ms != truth[r.layer];
  }
  EXPECT_TRUE(varied);
}

TEST(Simulate, HiddenCoefficientScalesTotals) {
  auto sn = infer_shapes(testing::load_fixture_net("alexnet"));
  auto res = simulate_profile(make_device(4, 0.0, 0.9), sn, testing::no_trace());
  double st = 0.0, se = 0.0;
  for (const auto& t : res.truth) {
    st += t.runtime_ms;
    se += t.energy_mj;
  }
  EXPECT_NEAR(res.totals.runtime_ms, 0.9 * st, 1e-12 * st);
  EXPECT_NEAR(res.totals.energy_mj, 0.9 * se, 1e-12 * se);
  EXPECT_EQ(res.totals.network, "alexnet");
}

TEST(Simulate, DeterministicAndParallelInvariant) {
  auto sn = infer_shapes(testing::load_fixture_net("unseen20"));
  auto dev = make_device(8, 0.05, 1.0, true);
  SimulateOptions serial;
  serial.n_runs = 5;
  SimulateOptions parallel = serial;
  parallel.jobs = 4;
  auto a = simulate_profile(dev, sn, serial);
  auto b = simulate_profile(dev, sn, parallel);
  EXPECT_EQ(write_timing_csv(a.timing), write_timing_csv(b.timing));
  EXPECT_EQ(write_trace_csv(a.trace), write_trace_csv(b.trace));
  EXPECT_EQ(write_schedule_csv(a.schedule), write_schedule_csv(b.schedule));
  EXPECT_EQ(totals_to_json(a.totals), totals_to_json(b.totals));
  EXPECT_EQ(write_timing_csv(simulate_profile(dev, sn, serial).timing), write_timing_csv(a.timing));
}

TEST(Simulate, Errors) {
  auto sn = one_relu();
  SimulateOptions o;
  o.n_runs = 0;
  EXPECT_THROW(simulate_profile(make_device(1), sn, o), DomainError);
  o = {};
  o.sample_period_s = 0.0;
  EXPECT_THROW(simulate_profile(make_device(1), sn, o), DomainError);
  auto d = make_device(1);
  d.runtime.erase(LayerKind::kReLU);
  EXPECT_THROW(simulate_profile(d, sn), DomainError);
}

TEST(Totals, JsonRoundTrip) {
  NetworkTotals t{"net", 123.456789, 0.1};
  auto back = totals_from_json(totals_to_json(t));
  EXPECT_EQ(back.network, t.network);
  EXPECT_EQ(back.runtime_ms, t.runtime_ms);
  EXPECT_EQ(back.energy_mj, t.energy_mj);
  EXPECT_THROW(totals_from_json("[]"), ParseError);
}

TEST(Pipeline, RecoversHiddenCoefficient) {
  for (double c : {0.85, 1.09}) {
    FitConfig cfg;
    cfg.lambda = 0.0;
    auto fit = testing::train_on_suite(make_device(21, 0.0, c), cfg, testing::no_trace());
    EXPECT_NEAR(fit.bundle.c_runtime, c, 1e-6);
    EXPECT_TRUE(fit.bundle.provenance.c_runtime_fitted);
  }
}

TEST(Pipeline, EnergyNeedsTrace) {
  FitConfig cfg;
  cfg.targets = {Target::kEnergy};
  EXPECT_THROW(testing::train_on_suite(make_device(2), cfg, testing::no_trace()), DomainError);
}

}  // namespace
}  // namespace pkit
