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

// Per-layer architectural metrics: learnable weights n(W), operation count
// #OPs and memory accesses #memOPs = n(I) + n(W) + n(O).

#ifndef PKIT_METRICS_HPP_
#define PKIT_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pkit/detail/parallel.hpp"
#include "pkit/detail/text.hpp"
#include "pkit/error.hpp"
#include "pkit/netdef.hpp"

namespace pkit {

struct MetricsOptions {
  // Count Conv inputs as the unrolled im2col matrix instead of the raw tensor.
  bool im2col = false;
  // Include bias additions in #OPs (Conv, FC, Scale).
  bool count_bias_ops = true;

  bool operator==(const MetricsOptions&) const = default;
};

struct ArchMetrics {
  std::string layer_name;
  LayerKind kind = LayerKind::kReLU;
  std::uint64_t n_weights = 0;
  std::uint64_t ops = 0;
  std::uint64_t mem_ops = 0;
  TensorShape out_shape;

  bool operator==(const ArchMetrics&) const = default;
};

namespace detail {

inline std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw DomainError("metric count overflows 64 bits");
  return r;
}

template <typename... Ts>
std::uint64_t mul(std::uint64_t a, std::uint64_t b, Ts... rest) {
  return mul(mul(a, b), static_cast<std::uint64_t>(rest)...);
}

inline std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw DomainError("metric count overflows 64 bits");
  return r;
}

inline void require_inputs(const LayerSpec& l, std::span<const TensorShape> in) {
  if (in.empty()) throw DomainError("layer " + l.name + " has no input shapes");
}

}  // namespace detail

inline std::uint64_t layer_weights(const LayerSpec& l, std::span<const TensorShape> in) {
  using detail::add;
  using detail::mul;
  detail::require_inputs(l, in);
  const auto& x = in.front();
  switch (l.kind) {
    case LayerKind::kConv: {
      if (l.groups == 0 || x.c % l.groups != 0) throw DomainError("layer " + l.name + ": bad groups");
      auto w = mul(l.kernel_h, l.kernel_w, x.c / l.groups, l.num_kernels);
      return l.has_bias ? add(w, l.num_kernels) : w;
    }
    case LayerKind::kFC: {
      auto w = mul(x.elements(), l.out_features);
      return l.has_bias ? add(w, l.out_features) : w;
    }
    case LayerKind::kBatchNorm: return mul(2, x.c);
    case LayerKind::kScale: return l.has_bias ? mul(2, x.c) : x.c;
    default: return 0;
  }
}

inline std::uint64_t layer_ops(const LayerSpec& l, std::span<const TensorShape> in,
                               const TensorShape& out, const MetricsOptions& opts = {}) {
  using detail::add;
  using detail::mul;
  detail::require_inputs(l, in);
  const auto& x = in.front();
  const bool bias = l.has_bias && opts.count_bias_ops;
  switch (l.kind) {
    case LayerKind::kConv: {
      if (l.groups == 0 || x.c % l.groups != 0) throw DomainError("layer " + l.name + ": bad groups");
      auto macs = mul(l.kernel_h, l.kernel_w, x.c / l.groups, out.h, out.w, out.c);
      return bias ? add(macs, mul(out.h, out.w, out.c)) : macs;
    }
    case LayerKind::kFC: {
      auto macs = mul(x.elements(), l.out_features);
      return bias ? add(macs, l.out_features) : macs;
    }
    case LayerKind::kPool:
      if (l.global_pool) return x.elements();
      return mul(l.kernel_h, l.kernel_w, out.h, out.w, out.c);
    case LayerKind::kReLU: return x.elements();
    case LayerKind::kBatchNorm: return mul(2, x.elements());
    case LayerKind::kScale: return bias ? mul(2, x.elements()) : x.elements();
    case LayerKind::kEltwise: return mul(in.size() - 1, out.elements());
    case LayerKind::kConcat: return 0;
    // exp, accumulate, divide per element
    case LayerKind::kSoftmax: return mul(3, x.elements());
  }
  return 0;
}

inline std::uint64_t layer_mem_ops(const LayerSpec& l, std::span<const TensorShape> in,
                                   const TensorShape& out, std::uint64_t n_weights,
                                   const MetricsOptions& opts = {}) {
  using detail::add;
  using detail::mul;
  detail::require_inputs(l, in);
  std::uint64_t reads = 0;
  if (opts.im2col && l.kind == LayerKind::kConv) {
    // One unrolled (k_h*k_w*C_in/g) x (H_out*W_out) matrix per group.
    const auto per_group = in.front().c / l.groups;
    reads = mul(l.kernel_h, l.kernel_w, per_group, out.h, out.w, l.groups);
  } else {
    for (const auto& s : in) reads = add(reads, s.elements());
  }
  return add(add(reads, n_weights), out.elements());
}

inline ArchMetrics layer_metrics(const LayerSpec& l, const LayerShapes& shapes,
                                 const MetricsOptions& opts = {}) {
  ArchMetrics m;
  m.layer_name = l.name;
  m.kind = l.kind;
  m.out_shape = shapes.output;
  m.n_weights = layer_weights(l, shapes.inputs);
  m.ops = layer_ops(l, shapes.inputs, shapes.output, opts);
  m.mem_ops = layer_mem_ops(l, shapes.inputs, shapes.output, m.n_weights, opts);
  return m;
}

// One entry per layer in topological order. Layers are independent, so the
// work may be spread over `jobs` threads without changing the result.
inline std::vector<ArchMetrics> network_metrics(const ShapedNetwork& sn, const MetricsOptions& opts = {},
                                                unsigned jobs = 1) {
  std::vector<ArchMetrics> out(sn.order.size());
  std::unordered_map<std::string, const LayerSpec*> by_name;
  for (const auto& l : sn.net.layers) by_name.emplace(l.name, &l);
  detail::parallel_for(out.size(), jobs, [&](std::size_t i) {
    const auto& name = sn.order[i];
    out[i] = layer_metrics(*by_name.at(name), sn.shapes_of(name), opts);
  });
  return out;
}

struct MetricsTotals {
  std::uint64_t n_weights = 0;
  std::uint64_t ops = 0;
  std::uint64_t mem_ops = 0;
};

inline MetricsTotals totals(std::span<const ArchMetrics> ms) {
  MetricsTotals t;
  for (const auto& m : ms) {
    t.n_weights = detail::add(t.n_weights, m.n_weights);
    t.ops = detail::add(t.ops, m.ops);
    t.mem_ops = detail::add(t.mem_ops, m.mem_ops);
  }
  return t;
}

// ---------------------------------------------------------------------------
// CSV: layer,kind,h_out,w_out,c_out,n_weights,ops,mem_ops plus a TOTAL row.

inline constexpr std::string_view kMetricsHeader = "layer,kind,h_out,w_out,c_out,n_weights,ops,mem_ops";

struct MetricsTable {
  std::string network;
  MetricsOptions options;
  std::vector<ArchMetrics> rows;
};

inline std::string write_metrics_csv(const MetricsTable& t) {
  std::string s(kCsvVersionLine);
  s += "\n# network=" + t.network + " im2col=" + (t.options.im2col ? "true" : "false") +
       " count_bias_ops=" + (t.options.count_bias_ops ? "true" : "false") + "\n";
  s += kMetricsHeader;
  s += '\n';
  for (const auto& m : t.rows) {
    s += m.layer_name + "," + std::string(kind_name(m.kind)) + "," + std::to_string(m.out_shape.h) + "," +
         std::to_string(m.out_shape.w) + "," + std::to_string(m.out_shape.c) + "," +
         std::to_string(m.n_weights) + "," + std::to_string(m.ops) + "," + std::to_string(m.mem_ops) + "\n";
  }
  auto tot = totals(t.rows);
  s += "TOTAL,,,,," + std::to_string(tot.n_weights) + "," + std::to_string(tot.ops) + "," +
       std::to_string(tot.mem_ops) + "\n";
  return s;
}

namespace detail {

inline std::uint64_t parse_count(std::string_view s, std::string_view what) {
  auto v = parse_int(s, what);
  if (v < 0) throw ParseError("negative count for " + std::string(what));
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail

// Reads a metrics CSV written by write_metrics_csv. The TOTAL row is
// checked against the layer rows.
inline MetricsTable read_metrics_csv(std::string_view text, std::string_view source = "metrics") {
  MetricsTable t;
  // Options come from the "# network=... im2col=... count_bias_ops=..." line.
  bool have_opts = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.rfind("# network=", 0) != 0) continue;
    for (auto tok : detail::split(line.substr(2), ' ')) {
      auto eq = tok.find('=');
      if (eq == std::string_view::npos) continue;
      auto key = tok.substr(0, eq);
      auto val = tok.substr(eq + 1);
      if (key == "network") t.network = std::string(val);
      else if (key == "im2col") t.options.im2col = (val == "true");
      else if (key == "count_bias_ops") t.options.count_bias_ops = (val == "true");
    }
    have_opts = true;
    break;
  }
  if (!have_opts) throw ParseError(std::string(source) + ": missing '# network=' options line");
  bool saw_total = false;
  MetricsTotals declared;
  for (const auto& row : detail::parse_csv(text, kMetricsHeader, source)) {
    const auto& c = row.cells;
    auto ctx = detail::where(source, row);
    if (c[0] == "TOTAL" && c[1].empty()) {
      declared = {detail::parse_count(c[5], ctx), detail::parse_count(c[6], ctx),
                  detail::parse_count(c[7], ctx)};
      saw_total = true;
      continue;
    }
    auto kind = kind_from_name(c[1]);
    if (!kind) throw ParseError(ctx + ": unknown layer kind '" + c[1] + "'");
    ArchMetrics m;
    m.layer_name = c[0];
    m.kind = *kind;
    m.out_shape = {detail::parse_count(c[2], ctx), detail::parse_count(c[3], ctx),
                   detail::parse_count(c[4], ctx)};
    m.n_weights = detail::parse_count(c[5], ctx);
    m.ops = detail::parse_count(c[6], ctx);
    m.mem_ops = detail::parse_count(c[7], ctx);
    t.rows.push_back(std::move(m));
  }
  if (saw_total) {
    auto actual = totals(t.rows);
    if (actual.n_weights != declared.n_weights || actual.ops != declared.ops ||
        actual.mem_ops != declared.mem_ops)
      throw ParseError(std::string(source) + ": TOTAL row does not match layer rows");
  }
  return t;
}

}  // namespace pkit

#endif  // PKIT_METRICS_HPP_
