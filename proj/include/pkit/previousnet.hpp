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

// Generators for the two characterization networks whose per-layer profiles
// become regression observations.
//
// PreVIousNet-01 (3-D tensors, 52 layers) is five levels deep. The trunk
// keeps the input resolution and doubles its channels at every level through
// a concat of two equal-shaped sibling branches. Levels alternate between two
// cluster styles:
//
//   squeeze level (0, 2, 4), trunk X with C channels:
//     sq  = pointwise bottleneck  X  -> C/2
//     ex1 = pointwise general     sq -> C      (C_out = 2*C_in)
//     ex3 = standard 3x3 s1 p1    sq -> C
//     sum = eltwise(ex1, ex3)            -> terminal pool
//     cat = concat(ex1, ex3) -> BN -> Scale -> ReLU -> next trunk (2C)
//
//   parallel level (1, 3):
//     std = standard 3x3 s1 p1    X -> C
//     dw  = depthwise 3x3 s1 p1   X -> C
//     str = standard 3x3 s2 p1    X -> C (half resolution) -> BN -> Scale -> ReLU, terminal
//     sum = eltwise(std, dw)             -> terminal pool
//     cat = concat(std, dw) -> BN -> Scale -> ReLU -> next trunk (2C)
//
// The level-4 trunk output ends in a global average pool. Terminal pools per
// level: max 2x2/2, max 3x3/2, max 3x3/1, avg 2x2/2, avg 3x3/2.
//
// PreVIousNet-02 (1-D vectors, 44 layers) grows a trunk c -> 2c -> ... -> 16c
// with FC layers. Each trunk vector of size s feeds FCs to s, s/2, k1 and k2;
// the k-sized outputs feed cross FCs k2 -> k1 and k1 -> k2. Softmax layers sit
// on the five same-size outputs, four k1->k2 outputs and three k2->k1
// outputs.

#ifndef PKIT_PREVIOUSNET_HPP_
#define PKIT_PREVIOUSNET_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pkit/error.hpp"
#include "pkit/netdef.hpp"

namespace pkit {

enum class PNetVariant { kNet01, kNet02 };

struct PNetConfig {
  PNetVariant variant = PNetVariant::kNet01;
  std::uint64_t h = 56;
  std::uint64_t w = 56;
  std::uint64_t c = 32;
  std::uint64_t k1 = 10;
  std::uint64_t k2 = 1000;

  bool operator==(const PNetConfig&) const = default;
};

inline constexpr int kPNetLevels = 5;

// Empty string when the configuration is usable.
inline std::string check_config(const PNetConfig& cfg) {
  if (cfg.variant == PNetVariant::kNet01) {
    // The widest windows are 3x3 without padding.
    if (cfg.h < 3 || cfg.w < 3) return "net01 needs h >= 3 and w >= 3";
    if (cfg.c < 2 || cfg.c % 2 != 0) return "net01 needs an even c >= 2";
    if (cfg.c > (std::uint64_t{1} << 40)) return "net01 c too large";
  } else {
    if (cfg.h != 1 || cfg.w != 1) return "net02 needs h = w = 1";
    if (cfg.c < 2 || cfg.c % 2 != 0) return "net02 needs an even c >= 2";
    if (cfg.c > (std::uint64_t{1} << 40)) return "net02 c too large";
    if (cfg.k1 == 0 || cfg.k2 == 0) return "net02 needs positive k1 and k2";
  }
  return {};
}

namespace detail {

inline LayerSpec conv(std::string name, std::string in, std::uint64_t k, std::uint64_t n,
                      std::uint64_t stride, std::uint64_t pad, std::uint64_t groups = 1) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::kConv;
  l.inputs = {std::move(in)};
  l.kernel_h = l.kernel_w = k;
  l.num_kernels = n;
  l.stride = stride;
  l.pad = pad;
  l.groups = groups;
  l.has_bias = true;
  return l;
}

inline LayerSpec simple(std::string name, LayerKind kind, std::vector<std::string> in) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = kind;
  l.inputs = std::move(in);
  if (kind == LayerKind::kScale) l.has_bias = true;
  return l;
}

inline LayerSpec pool(std::string name, std::string in, PoolFn fn, std::uint64_t k, std::uint64_t s) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::kPool;
  l.inputs = {std::move(in)};
  l.pool_fn = fn;
  l.kernel_h = l.kernel_w = k;
  l.stride = s;
  return l;
}

inline LayerSpec fc(std::string name, std::string in, std::uint64_t out) {
  LayerSpec l;
  l.name = std::move(name);
  l.kind = LayerKind::kFC;
  l.inputs = {std::move(in)};
  l.out_features = out;
  l.has_bias = true;
  return l;
}

// Appends BN -> Scale -> ReLU after `in`; returns the ReLU name.
inline std::string add_bn_chain(std::vector<LayerSpec>& ls, const std::string& prefix, const std::string& in) {
  ls.push_back(simple(prefix + "_bn", LayerKind::kBatchNorm, {in}));
  ls.push_back(simple(prefix + "_scale", LayerKind::kScale, {prefix + "_bn"}));
  ls.push_back(simple(prefix + "_relu", LayerKind::kReLU, {prefix + "_scale"}));
  return prefix + "_relu";
}

struct TerminalPool {
  PoolFn fn;
  std::uint64_t k;
  std::uint64_t s;
};

inline constexpr std::array<TerminalPool, kPNetLevels> kLevelPools = {{
    {PoolFn::kMax, 2, 2},
    {PoolFn::kMax, 3, 2},
    {PoolFn::kMax, 3, 1},
    {PoolFn::kAvg, 2, 2},
    {PoolFn::kAvg, 3, 2},
}};

inline std::string dims_suffix(const PNetConfig& cfg) {
  return std::to_string(cfg.h) + "x" + std::to_string(cfg.w) + "x" + std::to_string(cfg.c);
}

}  // namespace detail

inline NetworkDef generate_01(const PNetConfig& cfg) {
  if (cfg.variant != PNetVariant::kNet01) throw DomainError("generate_01 needs a net01 config");
  if (auto err = check_config(cfg); !err.empty()) throw DomainError(err);
  using namespace detail;
  NetworkDef net;
  net.name = "previousnet01_" + dims_suffix(cfg);
  net.input_shape = {cfg.h, cfg.w, cfg.c};
  auto& ls = net.layers;
  std::string trunk(kInputName);
  std::uint64_t ch = cfg.c;
  for (int lvl = 0; lvl < kPNetLevels; ++lvl) {
    const std::string p = "l" + std::to_string(lvl);
    std::string a, b;
    if (lvl % 2 == 0) {
      ls.push_back(conv(p + "_squeeze", trunk, 1, ch / 2, 1, 0));
      ls.push_back(conv(p + "_expand1x1", p + "_squeeze", 1, ch, 1, 0));
      ls.push_back(conv(p + "_expand3x3", p + "_squeeze", 3, ch, 1, 1));
      a = p + "_expand1x1";
      b = p + "_expand3x3";
    } else {
      ls.push_back(conv(p + "_conv3x3", trunk, 3, ch, 1, 1));
      ls.push_back(conv(p + "_dwconv3x3", trunk, 3, ch, 1, 1, ch));
      ls.push_back(conv(p + "_conv3x3_s2", trunk, 3, ch, 2, 1));
      add_bn_chain(ls, p + "_s2", p + "_conv3x3_s2");
      a = p + "_conv3x3";
      b = p + "_dwconv3x3";
    }
    ls.push_back(simple(p + "_sum", LayerKind::kEltwise, {a, b}));
    const auto& tp = kLevelPools[static_cast<std::size_t>(lvl)];
    ls.push_back(pool(p + "_pool", p + "_sum", tp.fn, tp.k, tp.s));
    ls.push_back(simple(p + "_concat", LayerKind::kConcat, {a, b}));
    trunk = add_bn_chain(ls, p + "_trunk", p + "_concat");
    ch *= 2;
  }
  LayerSpec gap;
  gap.name = "global_pool";
  gap.kind = LayerKind::kPool;
  gap.inputs = {trunk};
  gap.pool_fn = PoolFn::kAvg;
  gap.global_pool = true;
  ls.push_back(gap);
  return net;
}

inline NetworkDef generate_02(const PNetConfig& cfg) {
  if (cfg.variant != PNetVariant::kNet02) throw DomainError("generate_02 needs a net02 config");
  if (auto err = check_config(cfg); !err.empty()) throw DomainError(err);
  using namespace detail;
  NetworkDef net;
  net.name = "previousnet02_" + std::to_string(cfg.c);
  net.input_shape = {1, 1, cfg.c};
  auto& ls = net.layers;
  std::string trunk(kInputName);
  std::uint64_t size = cfg.c;
  for (int lvl = 0; lvl < kPNetLevels; ++lvl) {
    const std::string p = "fc" + std::to_string(lvl);
    ls.push_back(fc(p + "_same", trunk, size));
    ls.push_back(simple(p + "_same_prob", LayerKind::kSoftmax, {p + "_same"}));
    if (lvl > 0) ls.push_back(fc(p + "_half", trunk, size / 2));
    ls.push_back(fc(p + "_k1", trunk, cfg.k1));
    ls.push_back(fc(p + "_k2", trunk, cfg.k2));
    ls.push_back(fc(p + "_k2_k1", p + "_k2", cfg.k1));
    if (lvl < 3) ls.push_back(simple(p + "_k2_k1_prob", LayerKind::kSoftmax, {p + "_k2_k1"}));
    if (lvl < 4) {
      ls.push_back(fc(p + "_k1_k2", p + "_k1", cfg.k2));
      ls.push_back(simple(p + "_k1_k2_prob", LayerKind::kSoftmax, {p + "_k1_k2"}));
      ls.push_back(fc(p + "_up", trunk, size * 2));
      trunk = p + "_up";
      size *= 2;
    }
  }
  return net;
}

inline NetworkDef generate(const PNetConfig& cfg) {
  return cfg.variant == PNetVariant::kNet01 ? generate_01(cfg) : generate_02(cfg);
}

// File name used by `generate --suite`.
inline std::string suite_file_name(const PNetConfig& cfg) {
  if (cfg.variant == PNetVariant::kNet01) return "previousnet01_" + detail::dims_suffix(cfg) + ".json";
  return "previousnet02_" + std::to_string(cfg.c) + ".json";
}

// The four net01 input sizes and the single net02 vector used for fitting.
inline std::vector<PNetConfig> standard_suite() {
  return {
      {PNetVariant::kNet01, 56, 56, 32, 10, 1000},
      {PNetVariant::kNet01, 28, 28, 64, 10, 1000},
      {PNetVariant::kNet01, 14, 14, 64, 10, 1000},
      {PNetVariant::kNet01, 7, 7, 64, 10, 1000},
      {PNetVariant::kNet02, 1, 1, 256, 10, 1000},
  };
}

}  // namespace pkit

#endif  // PKIT_PREVIOUSNET_HPP_
