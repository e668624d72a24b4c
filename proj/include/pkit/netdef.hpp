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

// Network definitions: layer specs, the canonical JSON document, validation,
// shape inference and topological ordering.
//
// A network is a DAG of layers over 3-D tensors (h x w x c). Layers refer to
// their producers by name; the network input is the reserved name "input".

#ifndef PKIT_NETDEF_HPP_
#define PKIT_NETDEF_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "pkit/error.hpp"

namespace pkit {

inline constexpr std::string_view kInputName = "input";

struct TensorShape {
  std::uint64_t h = 1;
  std::uint64_t w = 1;
  std::uint64_t c = 1;

  // n = h*w*c; throws DomainError on 64-bit overflow.
  std::uint64_t elements() const {
    std::uint64_t hw = 0, n = 0;
    if (__builtin_mul_overflow(h, w, &hw) || __builtin_mul_overflow(hw, c, &n))
      throw DomainError("tensor element count overflows 64 bits");
    return n;
  }

  bool operator==(const TensorShape&) const = default;
};

inline std::string to_string(const TensorShape& s) {
  return std::to_string(s.h) + "x" + std::to_string(s.w) + "x" + std::to_string(s.c);
}

enum class LayerKind { kConv, kFC, kPool, kReLU, kBatchNorm, kScale, kConcat, kEltwise, kSoftmax };

inline constexpr std::array<LayerKind, 9> kAllLayerKinds = {
    LayerKind::kConv,      LayerKind::kFC,    LayerKind::kPool,
    LayerKind::kReLU,      LayerKind::kBatchNorm, LayerKind::kScale,
    LayerKind::kConcat,    LayerKind::kEltwise,   LayerKind::kSoftmax};

inline std::string_view kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kFC: return "fc";
    case LayerKind::kPool: return "pool";
    case LayerKind::kReLU: return "relu";
    case LayerKind::kBatchNorm: return "batchnorm";
    case LayerKind::kScale: return "scale";
    case LayerKind::kConcat: return "concat";
    case LayerKind::kEltwise: return "eltwise";
    case LayerKind::kSoftmax: return "softmax";
  }
  return "?";
}

inline std::optional<LayerKind> kind_from_name(std::string_view s) {
  for (auto k : kAllLayerKinds)
    if (kind_name(k) == s) return k;
  return std::nullopt;
}

enum class PoolFn { kMax, kAvg };
enum class EltwiseFn { kSum, kProd, kMax };

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kReLU;
  std::vector<std::string> inputs;
  // Conv/Pool window.
  std::uint64_t kernel_h = 1;
  std::uint64_t kernel_w = 1;
  std::uint64_t stride = 1;
  std::uint64_t pad = 0;
  // Conv only. groups == C_in is a depthwise convolution.
  std::uint64_t num_kernels = 0;
  std::uint64_t groups = 1;
  // Conv/FC/Scale.
  bool has_bias = false;
  // Pool only.
  PoolFn pool_fn = PoolFn::kMax;
  bool global_pool = false;
  // Eltwise only.
  EltwiseFn eltwise_fn = EltwiseFn::kSum;
  // FC only.
  std::uint64_t out_features = 0;

  bool operator==(const LayerSpec&) const = default;
};

struct NetworkDef {
  std::string name;
  TensorShape input_shape;
  std::vector<LayerSpec> layers;

  bool operator==(const NetworkDef&) const = default;
};

struct LayerShapes {
  std::vector<TensorShape> inputs;
  TensorShape output;
};

struct ShapedNetwork {
  NetworkDef net;
  // Layer names in topological order.
  std::vector<std::string> order;
  std::map<std::string, LayerShapes> shapes;

  const LayerSpec& layer(const std::string& name) const {
    for (const auto& l : net.layers)
      if (l.name == name) return l;
    throw DomainError("no layer named '" + name + "'");
  }
  const LayerShapes& shapes_of(const std::string& name) const {
    auto it = shapes.find(name);
    if (it == shapes.end()) throw DomainError("no shapes for layer '" + name + "'");
    return it->second;
  }
};

struct Violation {
  std::string layer;
  std::string rule;     // stable rule id, e.g. "duplicate-name"
  std::string message;  // short, stable text, e.g. "duplicate name conv1"
  std::string detail;   // free-form context

  bool operator==(const Violation&) const = default;
};

// ---------------------------------------------------------------------------
// Shape rules.

struct ShapeOutcome {
  std::optional<TensorShape> shape;
  std::string rule;
  std::string message;
  std::string detail;
};

namespace detail {

inline std::optional<std::uint64_t> window_output(std::uint64_t in, std::uint64_t k,
                                                  std::uint64_t s, std::uint64_t pad) {
  const std::uint64_t padded = in + 2 * pad;
  if (s == 0 || k == 0 || padded < k) return std::nullopt;
  return (padded - k) / s + 1;
}

inline ShapeOutcome shape_error(std::string rule, std::string message, std::string detail = {}) {
  return ShapeOutcome{std::nullopt, std::move(rule), std::move(message), std::move(detail)};
}

}  // namespace detail

// Output shape of one layer given its input shapes. Never throws; rule
// failures are reported in the outcome.
inline ShapeOutcome infer_layer_shape(const LayerSpec& l, std::span<const TensorShape> in) {
  using detail::shape_error;
  const auto arity = in.size();
  switch (l.kind) {
    case LayerKind::kEltwise:
    case LayerKind::kConcat:
      if (arity < 2)
        return shape_error("arity", std::string(kind_name(l.kind)) + " needs at least 2 inputs",
                           "got " + std::to_string(arity));
      break;
    default:
      if (arity != 1)
        return shape_error("arity", std::string(kind_name(l.kind)) + " needs exactly 1 input",
                           "got " + std::to_string(arity));
  }
  for (const auto& s : in)
    if (s.h == 0 || s.w == 0 || s.c == 0)
      return shape_error("nonpositive-dim", "non-positive input dimension", to_string(s));

  const TensorShape& x = in.front();
  switch (l.kind) {
    case LayerKind::kConv: {
      if (l.kernel_h == 0 || l.kernel_w == 0 || l.stride == 0 || l.num_kernels == 0 ||
          l.groups == 0)
        return shape_error("param-range", "conv parameters must be positive");
      if (x.c % l.groups != 0 || l.num_kernels % l.groups != 0)
        return shape_error("conv-groups", "conv groups do not divide channels",
                           "c_in=" + std::to_string(x.c) + " n=" + std::to_string(l.num_kernels) +
                               " groups=" + std::to_string(l.groups));
      auto h = detail::window_output(x.h, l.kernel_h, l.stride, l.pad);
      auto w = detail::window_output(x.w, l.kernel_w, l.stride, l.pad);
      if (!h || !w) return shape_error("nonpositive-dim", "non-positive output dimension");
      return {TensorShape{*h, *w, l.num_kernels}, {}, {}, {}};
    }
    case LayerKind::kPool: {
      if (l.global_pool) return {TensorShape{1, 1, x.c}, {}, {}, {}};
      if (l.kernel_h == 0 || l.kernel_w == 0 || l.stride == 0)
        return shape_error("param-range", "pool parameters must be positive");
      auto h = detail::window_output(x.h, l.kernel_h, l.stride, l.pad);
      auto w = detail::window_output(x.w, l.kernel_w, l.stride, l.pad);
      if (!h || !w) return shape_error("nonpositive-dim", "non-positive output dimension");
      return {TensorShape{*h, *w, x.c}, {}, {}, {}};
    }
    case LayerKind::kFC:
      if (l.out_features == 0) return shape_error("param-range", "fc out_features must be positive");
      return {TensorShape{1, 1, l.out_features}, {}, {}, {}};
    case LayerKind::kReLU:
    case LayerKind::kBatchNorm:
    case LayerKind::kScale:
    case LayerKind::kSoftmax:
      return {x, {}, {}, {}};
    case LayerKind::kEltwise:
      for (const auto& s : in)
        if (s != x)
          return shape_error("eltwise-shape", "eltwise shape mismatch",
                             to_string(x) + " vs " + to_string(s));
      return {x, {}, {}, {}};
    case LayerKind::kConcat: {
      std::uint64_t c = 0;
      for (const auto& s : in) {
        if (s.h != x.h || s.w != x.w)
          return shape_error("concat-shape", "concat spatial mismatch",
                             to_string(x) + " vs " + to_string(s));
        if (__builtin_add_overflow(c, s.c, &c))
          return shape_error("overflow", "channel count overflows 64 bits");
      }
      return {TensorShape{x.h, x.w, c}, {}, {}, {}};
    }
  }
  return shape_error("kind", "unknown layer kind");
}

// ---------------------------------------------------------------------------
// Graph ordering.

namespace detail {

// Producer indices per layer (-1 for the network input). Names must be unique
// and resolvable; callers check that first.
inline std::vector<std::vector<long>> producer_indices(const NetworkDef& net) {
  std::unordered_map<std::string, long> index;
  for (std::size_t i = 0; i < net.layers.size(); ++i)
    index.emplace(net.layers[i].name, static_cast<long>(i));
  std::vector<std::vector<long>> preds(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    for (const auto& in : net.layers[i].inputs) {
      if (in == kInputName) {
        preds[i].push_back(-1);
        continue;
      }
      auto it = index.find(in);
      if (it == index.end()) throw DomainError("unresolved input " + in + " of layer " + net.layers[i].name);
      preds[i].push_back(it->second);
    }
  }
  return preds;
}

struct OrderResult {
  std::vector<std::size_t> order;
  std::vector<std::string> cycle;  // empty when acyclic
};

// Kahn's algorithm, always releasing the ready layer declared first.
inline OrderResult stable_topological(const NetworkDef& net,
                                      const std::vector<std::vector<long>>& preds) {
  const auto n = net.layers.size();
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> users(n);
  for (std::size_t i = 0; i < n; ++i)
    for (long p : preds[i])
      if (p >= 0) {
        ++pending[i];
        users[static_cast<std::size_t>(p)].push_back(i);
      }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (pending[i] == 0) ready.push(i);
  OrderResult r;
  while (!ready.empty()) {
    auto i = ready.top();
    ready.pop();
    r.order.push_back(i);
    for (auto u : users[i])
      if (--pending[u] == 0) ready.push(u);
  }
  if (r.order.size() == n) return r;

  // Walk producer links among the leftovers until a layer repeats.
  std::vector<int> pos_in_walk(n, -1);
  std::vector<std::size_t> walk;
  std::size_t cur = 0;
  while (pending[cur] == 0) ++cur;
  while (pos_in_walk[cur] < 0) {
    pos_in_walk[cur] = static_cast<int>(walk.size());
    walk.push_back(cur);
    for (long p : preds[cur])
      if (p >= 0 && pending[static_cast<std::size_t>(p)] > 0) {
        cur = static_cast<std::size_t>(p);
        break;
      }
  }
  std::vector<std::size_t> cyc(walk.begin() + pos_in_walk[cur], walk.end());
  std::reverse(cyc.begin(), cyc.end());
  for (auto i : cyc) r.cycle.push_back(net.layers[i].name);
  return r;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace detail

// Layer names such that every layer follows all of its producers. Among
// independent layers declaration order is kept.
inline std::vector<std::string> topological_order(const NetworkDef& net) {
  std::set<std::string> names;
  for (const auto& l : net.layers)
    if (!names.insert(l.name).second) throw DomainError("duplicate name " + l.name);
  auto r = detail::stable_topological(net, detail::producer_indices(net));
  if (!r.cycle.empty()) throw DomainError("cycle detected: " + detail::join(r.cycle, " -> "));
  std::vector<std::string> out;
  out.reserve(r.order.size());
  for (auto i : r.order) out.push_back(net.layers[i].name);
  return out;
}

// Every rule violation, ordered by layer declaration then by check order.
inline std::vector<Violation> validate(const NetworkDef& net) {
  std::vector<Violation> out;
  const auto n = net.layers.size();
  std::vector<std::vector<Violation>> per_layer(n);
  std::vector<Violation> global;

  if (net.input_shape.h == 0 || net.input_shape.w == 0 || net.input_shape.c == 0)
    global.push_back({std::string(kInputName), "nonpositive-dim", "non-positive input dimension",
                      to_string(net.input_shape)});

  std::unordered_map<std::string, std::size_t> first;
  std::vector<bool> usable(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = net.layers[i];
    if (l.name == kInputName) {
      per_layer[i].push_back({l.name, "reserved-name", "reserved name " + l.name, {}});
      usable[i] = false;
    } else if (!first.emplace(l.name, i).second) {
      per_layer[i].push_back({l.name, "duplicate-name", "duplicate name " + l.name, {}});
      usable[i] = false;
    }
  }
  // Resolve producers against first declarations.
  std::vector<std::vector<long>> preds(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = net.layers[i];
    if (l.inputs.empty()) {
      per_layer[i].push_back({l.name, "arity", "layer has no inputs", {}});
      usable[i] = false;
    }
    for (const auto& in : l.inputs) {
      if (in == kInputName) {
        preds[i].push_back(-1);
        continue;
      }
      auto it = first.find(in);
      if (it == first.end()) {
        per_layer[i].push_back({l.name, "unresolved-input", "unresolved input " + in, {}});
        usable[i] = false;
      } else {
        preds[i].push_back(static_cast<long>(it->second));
      }
    }
  }
  // Order over the resolvable subgraph; duplicates are excluded by name.
  NetworkDef resolvable;
  std::vector<std::size_t> orig;
  std::vector<long> remap(n, -2);
  for (std::size_t i = 0; i < n; ++i)
    if (first.count(net.layers[i].name) && first.at(net.layers[i].name) == i &&
        net.layers[i].name != kInputName) {
      remap[i] = static_cast<long>(orig.size());
      orig.push_back(i);
      resolvable.layers.push_back(net.layers[i]);
    }
  std::vector<std::vector<long>> rpreds(orig.size());
  for (std::size_t j = 0; j < orig.size(); ++j)
    for (long p : preds[orig[j]]) rpreds[j].push_back(p < 0 ? -1 : remap[static_cast<std::size_t>(p)]);
  auto topo = detail::stable_topological(resolvable, rpreds);
  if (!topo.cycle.empty()) {
    const auto& head = topo.cycle.front();
    global.push_back({head, "cycle", "cycle detected", detail::join(topo.cycle, " -> ")});
  }

  // Shape checks in topological order; layers downstream of a failure are skipped.
  std::vector<std::optional<TensorShape>> shape(n);
  for (auto j : topo.order) {
    const auto i = orig[j];
    if (!usable[i]) continue;
    std::vector<TensorShape> in;
    bool ok = true;
    for (long p : preds[i]) {
      if (p < 0) {
        in.push_back(net.input_shape);
      } else if (shape[static_cast<std::size_t>(p)]) {
        in.push_back(*shape[static_cast<std::size_t>(p)]);
      } else {
        ok = false;
      }
    }
    if (!ok) continue;
    auto outcome = infer_layer_shape(net.layers[i], in);
    if (outcome.shape) {
      try {
        (void)outcome.shape->elements();
        shape[i] = outcome.shape;
      } catch (const DomainError&) {
        per_layer[i].push_back({net.layers[i].name, "overflow", "element count overflow", {}});
      }
    } else {
      per_layer[i].push_back({net.layers[i].name, outcome.rule, outcome.message, outcome.detail});
    }
  }

  out = std::move(global);
  for (auto& v : per_layer) out.insert(out.end(), v.begin(), v.end());
  return out;
}

inline std::string describe(const std::vector<Violation>& vs) {
  std::string s;
  for (const auto& v : vs) {
    if (!s.empty()) s += "; ";
    s += v.layer + ": " + v.message;
    if (!v.detail.empty()) s += " (" + v.detail + ")";
  }
  return s;
}

// Resolves every tensor shape. Throws DomainError carrying all violations when
// the network is invalid.
inline ShapedNetwork infer_shapes(const NetworkDef& net) {
  auto violations = validate(net);
  if (!violations.empty()) throw DomainError("invalid network " + net.name + ": " + describe(violations));
  ShapedNetwork sn;
  sn.net = net;
  sn.order = topological_order(net);
  std::unordered_map<std::string, const LayerSpec*> by_name;
  for (const auto& l : net.layers) by_name.emplace(l.name, &l);
  for (const auto& name : sn.order) {
    const auto& l = *by_name.at(name);
    LayerShapes ls;
    for (const auto& in : l.inputs)
      ls.inputs.push_back(in == kInputName ? net.input_shape : sn.shapes.at(in).output);
    auto outcome = infer_layer_shape(l, ls.inputs);
    ls.output = *outcome.shape;
    sn.shapes.emplace(name, std::move(ls));
  }
  return sn;
}

inline std::map<LayerKind, std::size_t> kind_histogram(const NetworkDef& net) {
  std::map<LayerKind, std::size_t> h;
  for (const auto& l : net.layers) ++h[l.kind];
  return h;
}

// ---------------------------------------------------------------------------
// Canonical JSON document.

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline std::string_view pool_fn_name(PoolFn f) { return f == PoolFn::kMax ? "max" : "avg"; }

inline std::string_view eltwise_fn_name(EltwiseFn f) {
  switch (f) {
    case EltwiseFn::kSum: return "sum";
    case EltwiseFn::kProd: return "prod";
    case EltwiseFn::kMax: return "max";
  }
  return "sum";
}

inline std::vector<std::string_view> allowed_fields(const LayerSpec& l) {
  std::vector<std::string_view> f = {"name", "kind", "inputs"};
  switch (l.kind) {
    case LayerKind::kConv:
      f.insert(f.end(), {"kernel_h", "kernel_w", "stride", "pad", "num_kernels", "groups", "has_bias"});
      break;
    case LayerKind::kFC: f.insert(f.end(), {"out_features", "has_bias"}); break;
    case LayerKind::kPool:
      f.insert(f.end(), {"pool_fn", "global_pool"});
      if (!l.global_pool) f.insert(f.end(), {"kernel_h", "kernel_w", "stride", "pad"});
      break;
    case LayerKind::kScale: f.push_back("has_bias"); break;
    case LayerKind::kEltwise: f.push_back("eltwise_fn"); break;
    default: break;
  }
  return f;
}

inline ordered_json layer_to_json(const LayerSpec& l) {
  ordered_json j;
  j["name"] = l.name;
  j["kind"] = kind_name(l.kind);
  j["inputs"] = l.inputs;
  for (auto field : allowed_fields(l)) {
    if (field == "kernel_h") j["kernel_h"] = l.kernel_h;
    else if (field == "kernel_w") j["kernel_w"] = l.kernel_w;
    else if (field == "stride") j["stride"] = l.stride;
    else if (field == "pad") j["pad"] = l.pad;
    else if (field == "num_kernels") j["num_kernels"] = l.num_kernels;
    else if (field == "groups") j["groups"] = l.groups;
    else if (field == "has_bias") j["has_bias"] = l.has_bias;
    else if (field == "out_features") j["out_features"] = l.out_features;
    else if (field == "pool_fn") j["pool_fn"] = pool_fn_name(l.pool_fn);
    else if (field == "global_pool") j["global_pool"] = l.global_pool;
    else if (field == "eltwise_fn") j["eltwise_fn"] = eltwise_fn_name(l.eltwise_fn);
  }
  return j;
}

inline std::uint64_t get_uint(const nlohmann::json& j, std::string_view key, const std::string& ctx) {
  const auto& v = j.at(std::string(key));
  if (!v.is_number_integer())
    throw ParseError(ctx + ": field '" + std::string(key) + "' must be an integer");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  auto s = v.get<std::int64_t>();
  if (s < 0) throw ParseError(ctx + ": field '" + std::string(key) + "' must be non-negative");
  return static_cast<std::uint64_t>(s);
}

inline bool get_bool(const nlohmann::json& j, std::string_view key, const std::string& ctx) {
  const auto& v = j.at(std::string(key));
  if (!v.is_boolean()) throw ParseError(ctx + ": field '" + std::string(key) + "' must be a boolean");
  return v.get<bool>();
}

inline std::string get_string(const nlohmann::json& j, std::string_view key, const std::string& ctx) {
  if (!j.contains(std::string(key)))
    throw ParseError(ctx + ": missing mandatory field '" + std::string(key) + "'");
  const auto& v = j.at(std::string(key));
  if (!v.is_string()) throw ParseError(ctx + ": field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

inline LayerSpec layer_from_json(const nlohmann::json& j, std::size_t index) {
  std::string ctx = "layer #" + std::to_string(index);
  if (!j.is_object()) throw ParseError(ctx + ": expected an object");
  LayerSpec l;
  l.name = get_string(j, "name", ctx);
  ctx = "layer '" + l.name + "'";
  auto kind_str = get_string(j, "kind", ctx);
  auto kind = kind_from_name(kind_str);
  if (!kind) throw ParseError(ctx + ": unknown layer kind '" + kind_str + "'");
  l.kind = *kind;
  if (!j.contains("inputs") || !j.at("inputs").is_array())
    throw ParseError(ctx + ": missing mandatory field 'inputs'");
  for (const auto& in : j.at("inputs")) {
    if (!in.is_string()) throw ParseError(ctx + ": inputs must be strings");
    l.inputs.push_back(in.get<std::string>());
  }

  auto has = [&](std::string_view k) { return j.contains(std::string(k)); };
  auto require = [&](std::string_view k) {
    if (!has(k)) throw ParseError(ctx + ": missing mandatory field '" + std::string(k) + "'");
  };
  switch (l.kind) {
    case LayerKind::kConv:
      require("kernel_h");
      require("kernel_w");
      require("num_kernels");
      l.kernel_h = get_uint(j, "kernel_h", ctx);
      l.kernel_w = get_uint(j, "kernel_w", ctx);
      l.num_kernels = get_uint(j, "num_kernels", ctx);
      if (has("stride")) l.stride = get_uint(j, "stride", ctx);
      if (has("pad")) l.pad = get_uint(j, "pad", ctx);
      if (has("groups")) l.groups = get_uint(j, "groups", ctx);
      l.has_bias = has("has_bias") ? get_bool(j, "has_bias", ctx) : true;
      break;
    case LayerKind::kFC:
      require("out_features");
      l.out_features = get_uint(j, "out_features", ctx);
      l.has_bias = has("has_bias") ? get_bool(j, "has_bias", ctx) : true;
      break;
    case LayerKind::kPool: {
      require("pool_fn");
      auto fn = get_string(j, "pool_fn", ctx);
      if (fn == "max") l.pool_fn = PoolFn::kMax;
      else if (fn == "avg") l.pool_fn = PoolFn::kAvg;
      else throw ParseError(ctx + ": pool_fn must be 'max' or 'avg'");
      if (has("global_pool")) l.global_pool = get_bool(j, "global_pool", ctx);
      if (!l.global_pool) {
        require("kernel_h");
        require("kernel_w");
        l.kernel_h = get_uint(j, "kernel_h", ctx);
        l.kernel_w = get_uint(j, "kernel_w", ctx);
        if (has("stride")) l.stride = get_uint(j, "stride", ctx);
        if (has("pad")) l.pad = get_uint(j, "pad", ctx);
      }
      break;
    }
    case LayerKind::kScale:
      l.has_bias = has("has_bias") ? get_bool(j, "has_bias", ctx) : false;
      break;
    case LayerKind::kEltwise:
      if (has("eltwise_fn")) {
        auto fn = get_string(j, "eltwise_fn", ctx);
        if (fn == "sum") l.eltwise_fn = EltwiseFn::kSum;
        else if (fn == "prod") l.eltwise_fn = EltwiseFn::kProd;
        else if (fn == "max") l.eltwise_fn = EltwiseFn::kMax;
        else throw ParseError(ctx + ": eltwise_fn must be 'sum', 'prod' or 'max'");
      }
      break;
    default: break;
  }
  auto allowed = allowed_fields(l);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ParseError(ctx + ": field '" + it.key() + "' not allowed for kind " +
                       std::string(kind_name(l.kind)));
  return l;
}

}  // namespace detail

// Parses the canonical JSON network document. Defaults are filled in:
// stride 1, pad 0, groups 1, has_bias true for conv/fc and false for scale,
// eltwise_fn sum, global_pool false.
inline NetworkDef parse_network(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError("network document must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "name" && it.key() != "input" && it.key() != "layers")
      throw ParseError("network: unknown field '" + it.key() + "'");
  NetworkDef net;
  net.name = detail::get_string(doc, "name", "network");
  if (!doc.contains("input") || !doc.at("input").is_object())
    throw ParseError("network: missing mandatory field 'input'");
  const auto& in = doc.at("input");
  for (auto it = in.begin(); it != in.end(); ++it)
    if (it.key() != "h" && it.key() != "w" && it.key() != "c")
      throw ParseError("input: unknown field '" + it.key() + "'");
  for (auto key : {"h", "w", "c"})
    if (!in.contains(key)) throw ParseError(std::string("input: missing mandatory field '") + key + "'");
  net.input_shape = {detail::get_uint(in, "h", "input"), detail::get_uint(in, "w", "input"),
                     detail::get_uint(in, "c", "input")};
  if (net.input_shape.h == 0 || net.input_shape.w == 0 || net.input_shape.c == 0)
    throw ParseError("input: dimensions must be positive");
  try {
    (void)net.input_shape.elements();
  } catch (const DomainError& e) {
    throw ParseError(std::string("input: ") + e.what());
  }
  if (!doc.contains("layers") || !doc.at("layers").is_array())
    throw ParseError("network: missing mandatory field 'layers'");
  std::set<std::string> seen;
  std::size_t i = 0;
  for (const auto& lj : doc.at("layers")) {
    auto l = detail::layer_from_json(lj, i++);
    if (!seen.insert(l.name).second) throw ParseError("duplicate layer name '" + l.name + "'");
    net.layers.push_back(std::move(l));
  }
  for (const auto& l : net.layers)
    for (const auto& input : l.inputs)
      if (input != kInputName && !seen.count(input))
        throw ParseError("layer '" + l.name + "': unresolved input " + input);
  return net;
}

// Canonical serialization: fixed field order, every applicable field written,
// one layer per line.
inline std::string serialize_network(const NetworkDef& net) {
  nlohmann::ordered_json input;
  input["h"] = net.input_shape.h;
  input["w"] = net.input_shape.w;
  input["c"] = net.input_shape.c;
  std::string out = "{\n";
  out += "  \"name\": " + nlohmann::json(net.name).dump() + ",\n";
  out += "  \"input\": " + input.dump() + ",\n";
  out += "  \"layers\": [";
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    out += i ? ",\n    " : "\n    ";
    out += detail::layer_to_json(net.layers[i]).dump();
  }
  out += net.layers.empty() ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

}  // namespace pkit

#endif  // PKIT_NETDEF_HPP_
