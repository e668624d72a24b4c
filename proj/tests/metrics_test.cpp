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

#include <random>

#include "oracles.hpp"
#include "pkit/metrics.hpp"
#include "test_util.hpp"

namespace pkit {
namespace {

using testing::make_conv;
using testing::make_layer;

ArchMetrics single(const LayerSpec& l, std::vector<TensorShape> in, const MetricsOptions& opts = {}) {
  auto out = infer_layer_shape(l, in);
  EXPECT_TRUE(out.shape.has_value()) << out.message;
  return layer_metrics(l, {in, *out.shape}, opts);
}

TEST(Weights, SpecExamples) {
  auto c = make_conv("c", "input", 3, 64, 1, 1);
  TensorShape in{14, 14, 32};
  EXPECT_EQ(layer_weights(c, std::span(&in, 1)), 18496u);
  EXPECT_EQ(18496u, oracle::conv(in, c, true).weights);

  TensorShape bn_in{9, 3, 64};
  EXPECT_EQ(layer_weights(make_layer("bn", LayerKind::kBatchNorm, {"input"}), std::span(&bn_in, 1)), 128u);
  TensorShape r{14, 14, 64};
  EXPECT_EQ(layer_weights(make_layer("r", LayerKind::kReLU, {"input"}), std::span(&r, 1)), 0u);
}

TEST(Ops, SpecExamples) {
  auto c = make_conv("c", "input", 11, 96, 4, 0, 1, false);
  EXPECT_EQ(single(c, {{227, 227, 3}}).ops, 105415200u);

  auto dw = make_conv("dw", "input", 3, 64, 1, 1, 64, false);
  EXPECT_EQ(single(dw, {{28, 28, 64}}).ops, 451584u);
  // small-instance oracle for the depthwise case
  auto small = make_conv("dw", "input", 3, 6, 1, 1, 6, false);
  EXPECT_EQ(single(small, {{5, 4, 6}}).ops, oracle::conv({5, 4, 6}, small, true).ops);

  auto cat = make_layer("cat", LayerKind::kConcat, {"a", "b"});
  EXPECT_EQ(single(cat, {{5, 5, 3}, {5, 5, 7}}).ops, 0u);
}

TEST(MemOps, SpecExamples) {
  auto pw = make_conv("pw", "input", 1, 128);
  EXPECT_EQ(single(pw, {{7, 7, 64}}).mem_ops, 17728u);
  EXPECT_EQ(single(pw, {{7, 7, 64}}, {true, true}).mem_ops, 17728u);
  auto c3 = make_conv("c3", "input", 3, 64, 1, 1, 1, false);
  EXPECT_EQ(single(c3, {{7, 7, 64}}, {true, true}).mem_ops, 68224u);
}

TEST(Ops, BiasToggle) {
  auto c = make_conv("c", "input", 3, 8, 1, 1);
  auto with = single(c, {{6, 6, 4}});
  auto without = single(c, {{6, 6, 4}}, {false, false});
  EXPECT_EQ(with.ops - without.ops, 6u * 6u * 8u);
  EXPECT_EQ(with.n_weights, without.n_weights);
}

TEST(Ops, SoftmaxEltwiseScaleGlobalPool) {
  EXPECT_EQ(single(make_layer("s", LayerKind::kSoftmax, {"x"}), {{1, 1, 1000}}).ops, 3000u);
  EXPECT_EQ(single(make_layer("e", LayerKind::kEltwise, {"a", "b", "c"}), {{2, 3, 4}, {2, 3, 4}, {2, 3, 4}}).ops,
            48u);
  auto sc = make_layer("sc", LayerKind::kScale, {"x"});
  EXPECT_EQ(single(sc, {{2, 2, 3}}).ops, 12u);
  EXPECT_EQ(single(sc, {{2, 2, 3}}).n_weights, 3u);
  sc.has_bias = true;
  EXPECT_EQ(single(sc, {{2, 2, 3}}).ops, 24u);
  EXPECT_EQ(single(sc, {{2, 2, 3}}).n_weights, 6u);
  auto gp = make_layer("gp", LayerKind::kPool, {"x"});
  gp.global_pool = true;
  EXPECT_EQ(single(gp, {{7, 7, 16}}).ops, 784u);
}

TEST(Network, SingleReluAndEmpty) {
  NetworkDef net;
  net.name = "r";
  net.input_shape = {2, 2, 1};
  net.layers = {make_layer("r", LayerKind::kReLU, {"input"})};
  auto ms = network_metrics(infer_shapes(net));
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].ops, 4u);
  EXPECT_EQ(ms[0].n_weights, 0u);
  EXPECT_EQ(ms[0].mem_ops, 8u);

  net.layers.clear();
  EXPECT_TRUE(network_metrics(infer_shapes(net)).empty());
}

TEST(Network, AlexNetMatchesCommittedTable) {
  auto sn = infer_shapes(testing::load_fixture_net("alexnet"));
  MetricsTable t{sn.net.name, {}, network_metrics(sn)};
  const auto expected = detail::read_file(testing::fixture("expected/alexnet.metrics.csv"));
  EXPECT_EQ(write_metrics_csv(t), expected);
  // Conv + FC MACs without bias, about 7.2e8
  std::uint64_t macs = 0;
  for (const auto& m : network_metrics(sn, {false, false}))
    if (m.kind == LayerKind::kConv || m.kind == LayerKind::kFC) macs += m.ops;
  EXPECT_NEAR(static_cast<double>(macs), 7.2e8, 0.1e8);
}

TEST(Network, ParallelEqualsSerial) {
  auto sn = infer_shapes(testing::load_fixture_net("squeezenet"));
  EXPECT_EQ(network_metrics(sn, {}, 1), network_metrics(sn, {}, 4));
}

TEST(Csv, RoundTripAndTotalCheck) {
  auto sn = infer_shapes(testing::load_fixture_net("unseen20"));
  MetricsTable t{sn.net.name, {true, false}, network_metrics(sn, {true, false})};
  auto text = write_metrics_csv(t);
  auto back = read_metrics_csv(text);
  EXPECT_EQ(back.network, "unseen20");
  EXPECT_EQ(back.options, t.options);
  EXPECT_EQ(back.rows, t.rows);
  auto pos = text.find("TOTAL,,,,,");
  std::string broken = text.substr(0, pos) + "TOTAL,,,,,1,2,3\n";
  EXPECT_THROW(read_metrics_csv(broken), ParseError);
  EXPECT_THROW(read_metrics_csv("# previous-kit v1\nlayer,kind\n"), ParseError);
}

TEST(Overflow, HugeLayerThrows) {
  auto f = make_layer("f", LayerKind::kFC, {"x"});
  f.out_features = std::uint64_t{1} << 40;
  TensorShape in{1 << 15, 1 << 15, 1 << 10};
  EXPECT_THROW(layer_weights(f, std::span(&in, 1)), DomainError);
}

// --- properties ------------------------------------------------------------

TEST(Property, ConvOpsMatchLoopNestOracle) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 300; ++t) {
    const std::uint64_t g = 1 + rng() % 3;
    TensorShape in{1 + rng() % 8, 1 + rng() % 8, g * (1 + rng() % 3)};
    const std::uint64_t k = 1 + rng() % std::min<std::uint64_t>(in.h, in.w);
    auto c = make_conv("c", "input", k, g * (1 + rng() % 3), 1 + rng() % 3, rng() % 2, g, rng() % 2);
    const bool bias_ops = rng() % 2;
    auto m = single(c, {in}, {false, bias_ops});
    auto o = oracle::conv(in, c, bias_ops);
    EXPECT_EQ(m.out_shape, o.out);
    EXPECT_EQ(m.ops, o.ops);
    EXPECT_EQ(m.n_weights, o.weights);
    EXPECT_EQ(m.mem_ops, oracle::mem_ops({in}, o.weights, o.out));
  }
}

TEST(Property, Im2colInflation) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const std::uint64_t g = 1 + rng() % 2;
    TensorShape in{3 + rng() % 6, 3 + rng() % 6, g * (1 + rng() % 4)};
    const std::uint64_t k = 1 + rng() % 3;
    auto c = make_conv("c", "input", k, g * 2, 1, rng() % 2, g);
    auto off = single(c, {in});
    auto on = single(c, {in}, {true, true});
    EXPECT_EQ(on.mem_ops - on.n_weights - on.out_shape.elements(), oracle::im2col_elements(in, c));
    if (k > 1) {
      EXPECT_GE(on.mem_ops, off.mem_ops);
    } else if (c.pad == 0) {
      EXPECT_EQ(on.mem_ops, off.mem_ops);
    }
  }
}

TEST(Property, DoublingKernelsDoublesOpsAndWeights) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    TensorShape in{2 + rng() % 7, 2 + rng() % 7, 1 + rng() % 6};
    auto c = make_conv("c", "input", 1 + rng() % 2, 1 + rng() % 5, 1, 0, 1, false);
    auto a = single(c, {in});
    c.num_kernels *= 2;
    auto b = single(c, {in});
    EXPECT_EQ(b.ops, 2 * a.ops);
    EXPECT_EQ(b.n_weights, 2 * a.n_weights);
  }
}

TEST(Property, ShapeMonotone) {
  std::mt19937_64 rng(4);
  const LayerKind kinds[] = {LayerKind::kConv, LayerKind::kFC, LayerKind::kPool, LayerKind::kReLU,
                             LayerKind::kBatchNorm, LayerKind::kScale, LayerKind::kSoftmax};
  for (int t = 0; t < 300; ++t) {
    const auto kind = kinds[rng() % std::size(kinds)];
    LayerSpec l = make_layer("l", kind, {"x"});
    l.kernel_h = l.kernel_w = 1 + rng() % 3;
    l.num_kernels = 1 + rng() % 4;
    l.out_features = 1 + rng() % 9;
    l.stride = 1 + rng() % 2;
    l.has_bias = rng() % 2;
    TensorShape in{3 + rng() % 5, 3 + rng() % 5, 1 + rng() % 5};
    TensorShape bigger = in;
    (rng() % 3 == 0 ? bigger.h : rng() % 2 ? bigger.w : bigger.c) += 1;
    auto a = single(l, {in});
    auto b = single(l, {bigger});
    EXPECT_LE(a.ops, b.ops);
    EXPECT_LE(a.n_weights, b.n_weights);
    EXPECT_LE(a.mem_ops, b.mem_ops);
  }
}

TEST(Property, MemOpsAtLeastWeightsAndConcatZeroOps) {
  for (const auto* name : {"alexnet", "all_cnn_c", "squeezenet", "unseen20"}) {
    for (const auto& m : network_metrics(infer_shapes(testing::load_fixture_net(name)))) {
      EXPECT_GE(m.mem_ops, m.n_weights);
      if (m.kind == LayerKind::kConcat) {
        EXPECT_EQ(m.ops, 0u);
      }
    }
  }
}

}  // namespace
}  // namespace pkit
