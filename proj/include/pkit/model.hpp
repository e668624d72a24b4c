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

// Per-layer-kind linear cost models.
//
// Each model is a standardized Ridge regression of a layer's runtime (ms) or
// energy (mJ) on three architectural predictors [n_weights, ops, mem_ops]:
//
//   z_j   = (x_j - mean_j) / std_j          (sample std, n - 1)
//   w     = argmin ||y - mean(y) - Z w||^2 + lambda ||w||^2
//   y_hat = mean(y) + sum_j w_j z_j
//
// The intercept is not penalized. Constant predictor columns get std = 1 and
// w_j = 0. A network total is c * sum(y_hat_l), with c fitted through the
// origin against whole-network measurements.

#ifndef PKIT_MODEL_HPP_
#define PKIT_MODEL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pkit/error.hpp"
#include "pkit/metrics.hpp"
#include "pkit/netdef.hpp"

namespace pkit {

enum class Target { kRuntime, kEnergy };

inline std::string_view target_name(Target t) { return t == Target::kRuntime ? "runtime" : "energy"; }

inline std::optional<Target> target_from_name(std::string_view s) {
  if (s == "runtime") return Target::kRuntime;
  if (s == "energy") return Target::kEnergy;
  return std::nullopt;
}

inline std::string_view target_unit(Target t) { return t == Target::kRuntime ? "ms" : "mJ"; }

inline constexpr std::size_t kNumPredictors = 3;
using Predictors = std::array<double, kNumPredictors>;
inline constexpr std::array<std::string_view, kNumPredictors> kPredictorNames = {"n_weights", "ops",
                                                                                "mem_ops"};

inline Predictors predictors_of(const ArchMetrics& m) {
  return {static_cast<double>(m.n_weights), static_cast<double>(m.ops), static_cast<double>(m.mem_ops)};
}

// Design matrix and response for one (layer kind, target) pair.
struct ObservationSet {
  LayerKind kind = LayerKind::kConv;
  Target target = Target::kRuntime;
  std::vector<std::string> sources;  // "<network>/<layer>" per row
  std::vector<Predictors> x;
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
};

// ---------------------------------------------------------------------------
// Standardization.

struct Standardized {
  std::vector<Predictors> z;
  Predictors mean{};
  Predictors std{};
  std::array<bool, kNumPredictors> constant{};
};

inline Standardized standardize(std::span<const Predictors> x) {
  if (x.empty()) throw DomainError("standardize needs at least one row");
  Standardized s;
  const auto n = x.size();
  for (std::size_t j = 0; j < kNumPredictors; ++j) {
    bool constant = true;
    double sum = 0.0;
    for (const auto& row : x) {
      sum += row[j];
      constant = constant && row[j] == x.front()[j];
    }
    const double mean = constant ? x.front()[j] : sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& row : x) ss += (row[j] - mean) * (row[j] - mean);
    s.mean[j] = mean;
    s.constant[j] = constant || ss == 0.0;
    s.std[j] = s.constant[j] ? 1.0 : std::sqrt(ss / static_cast<double>(n - 1));
  }
  s.z.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < kNumPredictors; ++j)
      s.z[i][j] = s.constant[j] ? 0.0 : (x[i][j] - s.mean[j]) / s.std[j];
  return s;
}

// ---------------------------------------------------------------------------
// Small symmetric eigensolver (cyclic Jacobi).

namespace detail {

template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;

template <std::size_t N>
struct SymEigen {
  std::array<double, N> values{};
  Mat<N> vectors{};  // column k is the eigenvector of values[k]
};

template <std::size_t N>
SymEigen<N> symmetric_eigen(Mat<N> a) {
  SymEigen<N> r;
  for (std::size_t i = 0; i < N; ++i) r.vectors[i][i] = 1.0;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = p + 1; q < N; ++q) off += a[p][q] * a[p][q];
    if (off == 0.0) break;
    for (std::size_t p = 0; p < N; ++p) {
      for (std::size_t q = p + 1; q < N; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < N; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < N; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < N; ++k) {
          const double vkp = r.vectors[k][p], vkq = r.vectors[k][q];
          r.vectors[k][p] = c * vkp - s * vkq;
          r.vectors[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  for (std::size_t i = 0; i < N; ++i) r.values[i] = a[i][i];
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ridge fit.

struct RidgeModel {
  LayerKind kind = LayerKind::kConv;
  Target target = Target::kRuntime;
  Predictors coef{};  // standardized space
  double intercept = 0.0;
  Predictors pred_mean{};
  Predictors pred_std{1.0, 1.0, 1.0};
  double lambda = 1.0;
  std::size_t n_obs = 0;

  bool operator==(const RidgeModel&) const = default;
};

struct FitOptions {
  // At lambda = 0, solve rank-deficient systems in the minimum-norm sense
  // instead of throwing. Structurally collinear predictors (ReLU: mem_ops =
  // 2 * ops) make this the common case for activation layers.
  bool allow_rank_deficient = true;
  // Eigenvalues of Z'Z below rank_tol * max eigenvalue count as zero.
  double rank_tol = 1e-10;
};

inline RidgeModel fit_ridge(const ObservationSet& obs, double lambda = 1.0, const FitOptions& opts = {}) {
  const auto n = obs.size();
  const std::string what = std::string(kind_name(obs.kind)) + "/" + std::string(target_name(obs.target));
  if (n == 0) throw DomainError("no observations for " + what);
  if (obs.x.size() != n) throw DomainError("design matrix and response differ in length for " + what);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and >= 0");
  for (double v : obs.y)
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("non-positive response in " + what);

  auto st = standardize(obs.x);
  double ymean = 0.0;
  for (double v : obs.y) ymean += v;
  ymean /= static_cast<double>(n);

  detail::Mat<kNumPredictors> gram{};
  Predictors rhs{};
  for (std::size_t i = 0; i < n; ++i) {
    const double yc = obs.y[i] - ymean;
    for (std::size_t a = 0; a < kNumPredictors; ++a) {
      rhs[a] += st.z[i][a] * yc;
      for (std::size_t b = 0; b < kNumPredictors; ++b) gram[a][b] += st.z[i][a] * st.z[i][b];
    }
  }
  auto eig = detail::symmetric_eigen(gram);
  const double dmax = std::max(0.0, *std::max_element(eig.values.begin(), eig.values.end()));

  RidgeModel m;
  m.kind = obs.kind;
  m.target = obs.target;
  m.intercept = ymean;
  m.pred_mean = st.mean;
  m.pred_std = st.std;
  m.lambda = lambda;
  m.n_obs = n;
  // Constant columns contribute zero rows to Z'Z; any further null direction
  // means the varying predictors are collinear.
  std::size_t n_null = 0, n_const = 0;
  for (std::size_t k = 0; k < kNumPredictors; ++k)
    if (std::max(0.0, eig.values[k]) <= opts.rank_tol * dmax || dmax == 0.0) ++n_null;
  for (bool c : st.constant) n_const += c ? 1 : 0;
  if (lambda == 0.0 && n_null > n_const && !opts.allow_rank_deficient)
    throw DomainError("singular system fitting " + what + " at lambda = 0");

  for (std::size_t k = 0; k < kNumPredictors; ++k) {
    const double d = std::max(0.0, eig.values[k]);
    // Null directions of Z carry no signal; with lambda = 0 dropping them
    // yields the minimum-norm solution.
    if (d <= opts.rank_tol * dmax || dmax == 0.0) continue;
    double proj = 0.0;
    for (std::size_t j = 0; j < kNumPredictors; ++j) proj += eig.vectors[j][k] * rhs[j];
    const double scale = proj / (d + lambda);
    for (std::size_t j = 0; j < kNumPredictors; ++j) m.coef[j] += scale * eig.vectors[j][k];
  }
  for (std::size_t j = 0; j < kNumPredictors; ++j)
    if (st.constant[j]) m.coef[j] = 0.0;
  return m;
}

struct LayerPrediction {
  double value = 0.0;
  bool clamped = false;  // raw prediction was negative and was set to 0
};

inline LayerPrediction predict_layer(const RidgeModel& m, const ArchMetrics& metrics) {
  if (m.kind != metrics.kind)
    throw DomainError("model for " + std::string(kind_name(m.kind)) + " applied to " +
                      std::string(kind_name(metrics.kind)) + " layer " + metrics.layer_name);
  const auto x = predictors_of(metrics);
  double y = m.intercept;
  for (std::size_t j = 0; j < kNumPredictors; ++j) y += m.coef[j] * (x[j] - m.pred_mean[j]) / m.pred_std[j];
  if (y < 0.0) return {0.0, true};
  return {y, false};
}

// Sample Pearson correlation. Throws on constant input.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("pearson: length mismatch");
  if (x.size() < 2) throw DomainError("pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DomainError("pearson: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Correlation of each predictor with the response; nullopt where undefined.
inline std::array<std::optional<double>, kNumPredictors> predictor_correlations(const ObservationSet& obs) {
  std::array<std::optional<double>, kNumPredictors> r;
  if (obs.size() < 2) return r;
  for (std::size_t j = 0; j < kNumPredictors; ++j) {
    std::vector<double> col(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) col[i] = obs.x[i][j];
    try {
      r[j] = pearson(col, obs.y);
    } catch (const DomainError&) {
    }
  }
  return r;
}

// Least squares through the origin: c = sum(m_i s_i) / sum(s_i^2).
inline double fit_network_coefficient(std::span<const double> sums, std::span<const double> measured) {
  if (sums.size() != measured.size()) throw DomainError("network coefficient: length mismatch");
  if (sums.empty()) throw DomainError("network coefficient: no networks");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (!(sums[i] > 0.0) || !(measured[i] > 0.0))
      throw DomainError("network coefficient: values must be positive");
    num += measured[i] * sums[i];
    den += sums[i] * sums[i];
  }
  if (den == 0.0) throw DomainError("network coefficient: zero-norm sums");
  return num / den;
}

// ---------------------------------------------------------------------------
// Bundle.

struct Provenance {
  bool im2col = false;
  bool count_bias_ops = true;
  bool subtract_baseline = false;
  bool c_runtime_fitted = false;
  bool c_energy_fitted = false;
  std::string suite;

  bool operator==(const Provenance&) const = default;
};

struct ModelBundle {
  std::string system_id;
  std::map<std::pair<LayerKind, Target>, RidgeModel> models;
  double c_runtime = 1.0;
  double c_energy = 1.0;
  Provenance provenance;

  double c(Target t) const { return t == Target::kRuntime ? c_runtime : c_energy; }

  const RidgeModel& model(LayerKind k, Target t) const {
    auto it = models.find({k, t});
    if (it == models.end())
      throw DomainError("bundle '" + system_id + "' has no " + std::string(target_name(t)) + " model for kind " +
                        std::string(kind_name(k)));
    return it->second;
  }

  MetricsOptions metrics_options() const { return {provenance.im2col, provenance.count_bias_ops}; }

  bool operator==(const ModelBundle&) const = default;
};

namespace detail {

inline nlohmann::ordered_json predictors_json(const Predictors& p) {
  auto a = nlohmann::ordered_json::array();
  for (double v : p) a.push_back(v);
  return a;
}

inline Predictors predictors_from_json(const nlohmann::json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != kNumPredictors) throw ParseError(ctx + ": expected an array of 3 numbers");
  Predictors p{};
  for (std::size_t i = 0; i < kNumPredictors; ++i) {
    if (!j[i].is_number()) throw ParseError(ctx + ": expected numbers");
    p[i] = j[i].get<double>();
  }
  return p;
}

inline double number_at(const nlohmann::json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ParseError(ctx + ": missing numeric field '" + key + "'");
  return j.at(key).get<double>();
}

inline bool bool_at(const nlohmann::json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || !j.at(key).is_boolean())
    throw ParseError(ctx + ": missing boolean field '" + key + "'");
  return j.at(key).get<bool>();
}

}  // namespace detail

inline std::string bundle_to_json(const ModelBundle& b) {
  nlohmann::ordered_json j;
  j["format"] = "previous-kit bundle v1";
  j["system_id"] = b.system_id;
  nlohmann::ordered_json prov;
  prov["im2col"] = b.provenance.im2col;
  prov["count_bias_ops"] = b.provenance.count_bias_ops;
  prov["subtract_baseline"] = b.provenance.subtract_baseline;
  prov["c_runtime_fitted"] = b.provenance.c_runtime_fitted;
  prov["c_energy_fitted"] = b.provenance.c_energy_fitted;
  prov["suite"] = b.provenance.suite;
  prov["standardization"] = "sample-std";
  prov["intercept"] = "unpenalized-mean";
  j["provenance"] = prov;
  auto models = nlohmann::ordered_json::array();
  for (const auto& [key, m] : b.models) {
    nlohmann::ordered_json mj;
    mj["kind"] = kind_name(m.kind);
    mj["target"] = target_name(m.target);
    mj["coef"] = detail::predictors_json(m.coef);
    mj["intercept"] = m.intercept;
    mj["mean"] = detail::predictors_json(m.pred_mean);
    mj["std"] = detail::predictors_json(m.pred_std);
    mj["lambda"] = m.lambda;
    mj["n_obs"] = m.n_obs;
    models.push_back(mj);
  }
  j["models"] = models;
  j["c_runtime"] = b.c_runtime;
  j["c_energy"] = b.c_energy;
  return j.dump(2) + "\n";
}

inline ModelBundle bundle_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("bundle: syntax error at byte " + std::to_string(e.byte));
  }
  if (!j.is_object()) throw ParseError("bundle: expected an object");
  ModelBundle b;
  if (!j.contains("system_id") || !j.at("system_id").is_string())
    throw ParseError("bundle: missing 'system_id'");
  b.system_id = j.at("system_id").get<std::string>();
  if (!j.contains("provenance") || !j.at("provenance").is_object())
    throw ParseError("bundle: missing 'provenance'");
  const auto& p = j.at("provenance");
  b.provenance.im2col = detail::bool_at(p, "im2col", "provenance");
  b.provenance.count_bias_ops = detail::bool_at(p, "count_bias_ops", "provenance");
  b.provenance.subtract_baseline = detail::bool_at(p, "subtract_baseline", "provenance");
  b.provenance.c_runtime_fitted = detail::bool_at(p, "c_runtime_fitted", "provenance");
  b.provenance.c_energy_fitted = detail::bool_at(p, "c_energy_fitted", "provenance");
  if (p.contains("suite") && p.at("suite").is_string()) b.provenance.suite = p.at("suite").get<std::string>();
  b.c_runtime = detail::number_at(j, "c_runtime", "bundle");
  b.c_energy = detail::number_at(j, "c_energy", "bundle");
  if (!(b.c_runtime > 0.0) || !(b.c_energy > 0.0)) throw ParseError("bundle: c values must be positive");
  if (!j.contains("models") || !j.at("models").is_array()) throw ParseError("bundle: missing 'models'");
  for (const auto& mj : j.at("models")) {
    if (!mj.is_object() || !mj.contains("kind") || !mj.contains("target"))
      throw ParseError("bundle: model entries need 'kind' and 'target'");
    auto kind = kind_from_name(mj.at("kind").get<std::string>());
    auto target = target_from_name(mj.at("target").get<std::string>());
    if (!kind || !target) throw ParseError("bundle: unknown model kind or target");
    const std::string ctx = "model " + mj.at("kind").get<std::string>() + "/" + mj.at("target").get<std::string>();
    RidgeModel m;
    m.kind = *kind;
    m.target = *target;
    m.coef = detail::predictors_from_json(mj.at("coef"), ctx);
    m.intercept = detail::number_at(mj, "intercept", ctx);
    m.pred_mean = detail::predictors_from_json(mj.at("mean"), ctx);
    m.pred_std = detail::predictors_from_json(mj.at("std"), ctx);
    for (double s : m.pred_std)
      if (!(s > 0.0)) throw ParseError(ctx + ": std entries must be positive");
    m.lambda = detail::number_at(mj, "lambda", ctx);
    m.n_obs = static_cast<std::size_t>(detail::number_at(mj, "n_obs", ctx));
    if (!b.models.emplace(std::pair{m.kind, m.target}, m).second) throw ParseError(ctx + ": duplicated");
  }
  return b;
}

}  // namespace pkit

#endif  // PKIT_MODEL_HPP_
