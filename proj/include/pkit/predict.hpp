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

// Applying a fitted bundle to a network: per-layer predictions, the scaled
// network total c * sum, hot-layer ranking and error reports.

#ifndef PKIT_PREDICT_HPP_
#define PKIT_PREDICT_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
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

namespace pkit {

struct LayerRow {
  std::string layer;
  LayerKind kind = LayerKind::kConv;
  double predicted = 0.0;
  bool clamped = false;
  std::optional<double> measured;
  std::optional<double> error_pct;

  bool operator==(const LayerRow&) const = default;
};

struct PredictionReport {
  std::string network;
  Target target = Target::kRuntime;
  double c_used = 1.0;
  double sum_layers = 0.0;
  double network_total = 0.0;
  std::vector<LayerRow> per_layer;  // topological order
  std::vector<std::string> hot_layers;
  std::optional<double> sum_measured;
  std::optional<double> sum_error_pct;
  std::optional<double> network_measured;
  std::optional<double> network_error_pct;

  bool operator==(const PredictionReport&) const = default;
};

// (predicted - measured) / measured * 100
inline double signed_error_pct(double predicted, double measured) {
  if (measured == 0.0 || !std::isfinite(measured)) throw DomainError("measured value must be non-zero");
  return (predicted - measured) / measured * 100.0;
}

// Descending by predicted value; equal values keep row order.
inline std::vector<std::string> rank_hot_layers(const std::vector<LayerRow>& rows) {
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return rows[a].predicted > rows[b].predicted; });
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (auto i : idx) out.push_back(rows[i].layer);
  return out;
}

inline PredictionReport predict_per_layer(const ModelBundle& bundle, const ShapedNetwork& sn, Target target,
                                          unsigned jobs = 1) {
  const auto metrics = network_metrics(sn, bundle.metrics_options(), jobs);
  // Fail on the first layer (topological order) whose kind is missing.
  for (const auto& m : metrics) {
    if (!bundle.models.count({m.kind, target}))
      throw DomainError("no " + std::string(target_name(target)) + " model for kind " +
                        std::string(kind_name(m.kind)) + " (layer " + m.layer_name + ")");
  }
  PredictionReport r;
  r.network = sn.net.name;
  r.target = target;
  r.c_used = bundle.c(target);
  r.per_layer.resize(metrics.size());
  detail::parallel_for(metrics.size(), jobs, [&](std::size_t i) {
    const auto& m = metrics[i];
    auto p = predict_layer(bundle.model(m.kind, target), m);
    r.per_layer[i] = LayerRow{m.layer_name, m.kind, p.value, p.clamped, std::nullopt, std::nullopt};
  });
  for (const auto& row : r.per_layer) r.sum_layers += row.predicted;
  r.network_total = r.c_used * r.sum_layers;
  r.hot_layers = rank_hot_layers(r.per_layer);
  return r;
}

// Fills measured and error columns. The sum-level error compares the
// predictions of measured layers with their measured sum. With no layer
// measurements an existing sum_measured (e.g. from a stored report) is kept.
inline PredictionReport error_report(PredictionReport report, const std::map<std::string, double>& measurements,
                                     std::optional<double> network_measured = std::nullopt) {
  std::map<std::string, LayerRow*> by_name;
  for (auto& row : report.per_layer) by_name.emplace(row.layer, &row);
  for (const auto& [layer, v] : measurements) {
    if (!by_name.count(layer)) throw DomainError("measurement for unknown layer " + layer);
    if (!(v > 0.0)) throw DomainError("measurement for layer " + layer + " must be positive");
  }
  if (!measurements.empty()) {
    double pred = 0.0, meas = 0.0;
    for (auto& row : report.per_layer) {
      auto it = measurements.find(row.layer);
      if (it == measurements.end()) {
        row.measured.reset();
        row.error_pct.reset();
        continue;
      }
      row.measured = it->second;
      row.error_pct = signed_error_pct(row.predicted, it->second);
      pred += row.predicted;
      meas += it->second;
    }
    report.sum_measured = meas;
    report.sum_error_pct = signed_error_pct(pred, meas);
  } else if (report.sum_measured) {
    report.sum_error_pct = signed_error_pct(report.sum_layers, *report.sum_measured);
  }
  if (network_measured) {
    if (!(*network_measured > 0.0)) throw DomainError("network measurement must be positive");
    report.network_measured = network_measured;
  }
  if (report.network_measured)
    report.network_error_pct = signed_error_pct(report.network_total, *report.network_measured);
  return report;
}

// Mean absolute per-layer error; nullopt when no layer is measured.
inline std::optional<double> per_layer_mape(const PredictionReport& r) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& row : r.per_layer) {
    if (!row.error_pct) continue;
    s += std::abs(*row.error_pct);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

struct ReportSummary {
  std::size_t n_reports = 0;
  std::optional<double> avg_abs_sum_error_pct;   // over reports with a sum-level error
  std::optional<double> network_mape_pct;        // over reports with a network-level error
  std::optional<double> avg_per_layer_mape_pct;  // over reports with layer errors
};

inline ReportSummary summarize(const std::vector<PredictionReport>& reports) {
  ReportSummary s;
  s.n_reports = reports.size();
  auto mean_abs = [](const std::vector<double>& v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    double t = 0.0;
    for (double x : v) t += std::abs(x);
    return t / static_cast<double>(v.size());
  };
  std::vector<double> sums, nets, layers;
  for (const auto& r : reports) {
    if (r.sum_error_pct) sums.push_back(*r.sum_error_pct);
    if (r.network_error_pct) nets.push_back(*r.network_error_pct);
    if (auto m = per_layer_mape(r)) layers.push_back(*m);
  }
  s.avg_abs_sum_error_pct = mean_abs(sums);
  s.network_mape_pct = mean_abs(nets);
  s.avg_per_layer_mape_pct = mean_abs(layers);
  return s;
}

// ---------------------------------------------------------------------------
// Serialization.

namespace detail {

inline void put_optional(nlohmann::ordered_json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}

inline std::optional<double> optional_number(const nlohmann::json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) throw ParseError(ctx + ": field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

inline std::string optional_decimal(const std::optional<double>& v) { return v ? format_decimal(*v) : ""; }

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const PredictionReport& r) {
  nlohmann::ordered_json j;
  j["network"] = r.network;
  j["target"] = target_name(r.target);
  j["unit"] = target_unit(r.target);
  j["c_used"] = r.c_used;
  j["sum_layers"] = r.sum_layers;
  j["network_total"] = r.network_total;
  detail::put_optional(j, "sum_measured", r.sum_measured);
  detail::put_optional(j, "sum_error_pct", r.sum_error_pct);
  detail::put_optional(j, "network_measured", r.network_measured);
  detail::put_optional(j, "network_error_pct", r.network_error_pct);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.per_layer) {
    nlohmann::ordered_json rj;
    rj["layer"] = row.layer;
    rj["kind"] = kind_name(row.kind);
    rj["predicted"] = row.predicted;
    rj["clamped"] = row.clamped;
    detail::put_optional(rj, "measured", row.measured);
    detail::put_optional(rj, "error_pct", row.error_pct);
    rows.push_back(rj);
  }
  j["per_layer"] = rows;
  j["hot_layers"] = r.hot_layers;
  return j;
}

inline std::string reports_to_json(const std::vector<PredictionReport>& reports) {
  nlohmann::ordered_json j;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  j["reports"] = arr;
  return j.dump(2) + "\n";
}

inline PredictionReport report_from_json(const nlohmann::json& j, const std::string& ctx = "report") {
  if (!j.is_object()) throw ParseError(ctx + ": expected an object");
  PredictionReport r;
  if (!j.contains("network") || !j.at("network").is_string()) throw ParseError(ctx + ": missing 'network'");
  r.network = j.at("network").get<std::string>();
  if (!j.contains("target") || !j.at("target").is_string()) throw ParseError(ctx + ": missing 'target'");
  auto t = target_from_name(j.at("target").get<std::string>());
  if (!t) throw ParseError(ctx + ": unknown target");
  r.target = *t;
  r.c_used = detail::number_at(j, "c_used", ctx);
  r.sum_layers = detail::number_at(j, "sum_layers", ctx);
  r.network_total = detail::number_at(j, "network_total", ctx);
  r.sum_measured = detail::optional_number(j, "sum_measured", ctx);
  r.sum_error_pct = detail::optional_number(j, "sum_error_pct", ctx);
  r.network_measured = detail::optional_number(j, "network_measured", ctx);
  r.network_error_pct = detail::optional_number(j, "network_error_pct", ctx);
  if (j.contains("per_layer")) {
    if (!j.at("per_layer").is_array()) throw ParseError(ctx + ": 'per_layer' must be an array");
    for (const auto& rj : j.at("per_layer")) {
      LayerRow row;
      if (!rj.is_object() || !rj.contains("layer") || !rj.at("layer").is_string() || !rj.contains("kind") ||
          !rj.at("kind").is_string())
        throw ParseError(ctx + ": per_layer rows need 'layer' and 'kind'");
      row.layer = rj.at("layer").get<std::string>();
      auto k = kind_from_name(rj.at("kind").get<std::string>());
      if (!k) throw ParseError(ctx + ": unknown kind in layer " + row.layer);
      row.kind = *k;
      row.predicted = detail::number_at(rj, "predicted", ctx);
      row.clamped = rj.contains("clamped") && rj.at("clamped").is_boolean() && rj.at("clamped").get<bool>();
      row.measured = detail::optional_number(rj, "measured", ctx);
      row.error_pct = detail::optional_number(rj, "error_pct", ctx);
      r.per_layer.push_back(std::move(row));
    }
  }
  if (j.contains("hot_layers") && j.at("hot_layers").is_array()) {
    for (const auto& h : j.at("hot_layers"))
      if (h.is_string()) r.hot_layers.push_back(h.get<std::string>());
  } else {
    r.hot_layers = rank_hot_layers(r.per_layer);
  }
  return r;
}

// Accepts a single report object or {"reports": [...]}.
inline std::vector<PredictionReport> reports_from_json(std::string_view text, const std::string& source = "report") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + ": syntax error at byte " + std::to_string(e.byte));
  }
  std::vector<PredictionReport> out;
  if (j.is_object() && j.contains("reports")) {
    if (!j.at("reports").is_array()) throw ParseError(source + ": 'reports' must be an array");
    std::size_t i = 0;
    for (const auto& rj : j.at("reports")) out.push_back(report_from_json(rj, source + "[" + std::to_string(i++) + "]"));
  } else {
    out.push_back(report_from_json(j, source));
  }
  return out;
}

inline constexpr std::string_view kReportHeader = "layer,kind,predicted,clamped,measured,error_pct";

inline std::string report_to_csv(const PredictionReport& r) {
  using detail::format_decimal;
  using detail::optional_decimal;
  std::string s(kCsvVersionLine);
  s += "\n# network=" + r.network + " target=" + std::string(target_name(r.target)) +
       " unit=" + std::string(target_unit(r.target)) + " c_used=" + format_decimal(r.c_used) + "\n";
  s += kReportHeader;
  s += '\n';
  for (const auto& row : r.per_layer) {
    s += row.layer + "," + std::string(kind_name(row.kind)) + "," + format_decimal(row.predicted) + "," +
         (row.clamped ? "true" : "false") + "," + optional_decimal(row.measured) + "," +
         optional_decimal(row.error_pct) + "\n";
  }
  s += "SUM,," + format_decimal(r.sum_layers) + ",," + optional_decimal(r.sum_measured) + "," +
       optional_decimal(r.sum_error_pct) + "\n";
  s += "NETWORK,," + format_decimal(r.network_total) + ",," + optional_decimal(r.network_measured) + "," +
       optional_decimal(r.network_error_pct) + "\n";
  return s;
}

// (measured, predicted) pairs of measured layers, for scatter plots.
inline std::string plot_data_csv(const std::vector<PredictionReport>& reports) {
  std::string s(kCsvVersionLine);
  s += "\nnetwork,target,layer,measured,predicted\n";
  for (const auto& r : reports)
    for (const auto& row : r.per_layer)
      if (row.measured)
        s += r.network + "," + std::string(target_name(r.target)) + "," + row.layer + "," +
             detail::format_decimal(*row.measured) + "," + detail::format_decimal(row.predicted) + "\n";
  return s;
}

}  // namespace pkit

#endif  // PKIT_PREDICT_HPP_
