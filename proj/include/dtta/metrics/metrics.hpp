// Copyright 2026 The dtta Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DTTA_METRICS_METRICS_HPP_
#define DTTA_METRICS_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dtta/error.hpp"
#include "dtta/metrics/metric_kind.hpp"

namespace dtta {

enum class EvalMode { kF, kTta };

inline std::string_view to_string(EvalMode m) { return m == EvalMode::kF ? "F" : "TTA"; }

inline EvalMode parse_eval_mode(std::string_view s) {
  if (s == "F" || s == "f") return EvalMode::kF;
  if (s == "TTA" || s == "tta") return EvalMode::kTta;
  fail(ErrorKind::kInvalidArgument, "unknown evaluation mode '" + std::string(s) + "'");
}

// One eval(train, eval) number. `value` is a percentage: accuracy in
// [0, 100], MCC in [-100, 100].
struct EvalResult {
  std::string task;
  std::string train_dialect;
  std::string eval_dialect;
  EvalMode mode = EvalMode::kF;
  MetricKind metric = MetricKind::kAccuracy;
  double value = 0.0;

  void validate() const {
    const double lo = metric == MetricKind::kMcc ? -100.0 : 0.0;
    require(std::isfinite(value) && value >= lo && value <= 100.0, ErrorKind::kInvalidArgument,
            "eval result " + task + "/" + train_dialect + "->" + eval_dialect + ": value " +
                std::to_string(value) + " outside the " + std::string(to_string(metric)) +
                " range");
  }
};

namespace detail {

inline void check_pairs(std::span<const std::uint32_t> predictions,
                        std::span<const std::uint32_t> labels, const char* who) {
  require(!labels.empty(), ErrorKind::kInvalidArgument, std::string(who) + ": empty input");
  require(predictions.size() == labels.size(), ErrorKind::kShapeMismatch,
          std::string(who) + ": predictions and labels differ in length");
}

}  // namespace detail

inline double accuracy(std::span<const std::uint32_t> predictions,
                       std::span<const std::uint32_t> labels) {
  detail::check_pairs(predictions, labels, "accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(labels.size());
}

// Binary Matthews correlation in [-1, 1]; 0 when any marginal is empty.
inline double mcc(std::span<const std::uint32_t> predictions,
                  std::span<const std::uint32_t> labels) {
  detail::check_pairs(predictions, labels, "mcc");
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] <= 1 && predictions[i] <= 1, ErrorKind::kInvalidArgument,
            "mcc: example " + std::to_string(i) + " is not binary");
    if (predictions[i] == 1) (labels[i] == 1 ? tp : fp) += 1;
    else (labels[i] == 0 ? tn : fn) += 1;
  }
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

inline double rescale_mcc(double m) {
  require(m >= -1.0 && m <= 1.0, ErrorKind::kInvalidArgument,
          "rescale_mcc: " + std::to_string(m) + " outside [-1, 1]");
  return (m + 1.0) / 2.0;
}

// Percentage value mapped onto the scale gaps are measured on: MCC
// percentages are rescaled to [0, 100], accuracy passes through.
inline double gap_scale(double value, MetricKind kind) {
  return kind == MetricKind::kMcc ? 100.0 * rescale_mcc(value / 100.0) : value;
}

struct GapResult {
  std::vector<double> gaps;  // percentage points, one per cross value
  double average = 0.0;
};

inline GapResult dialectal_gap(double self_perf, std::span<const double> cross_perfs,
                               MetricKind kind) {
  require(!cross_perfs.empty(), ErrorKind::kInvalidArgument, "dialectal_gap: no cross values");
  GapResult out;
  const double self = gap_scale(self_perf, kind);
  for (double c : cross_perfs) out.gaps.push_back(self - gap_scale(c, kind));
  double sum = 0.0;
  for (double g : out.gaps) sum += g;
  out.average = sum / static_cast<double>(out.gaps.size());
  return out;
}

inline GapResult dialectal_gap(const EvalResult& self, std::span<const EvalResult> cross) {
  std::vector<double> values;
  for (const auto& c : cross) {
    require(c.metric == self.metric, ErrorKind::kInvalidArgument,
            "dialectal_gap: metric kind mismatch (" + std::string(to_string(self.metric)) +
                " vs " + std::string(to_string(c.metric)) + ")");
    require(c.task == self.task, ErrorKind::kInvalidArgument,
            "dialectal_gap: task mismatch (" + self.task + " vs " + c.task + ")");
    values.push_back(c.value);
  }
  return dialectal_gap(self.value, values, self.metric);
}

namespace detail {

// Continued fraction for the incomplete beta (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  fail(ErrorKind::kInternal, "incomplete beta: continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0 && x >= 0.0 && x <= 1.0, ErrorKind::kInvalidArgument,
          "incomplete_beta: arguments out of domain");
  if (x == 0.0 || x == 1.0) return x;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Two-sided P(|T| >= |t|) for Student's t with `df` degrees of freedom.
inline double student_t_two_sided(double t, double df) {
  require(df > 0.0, ErrorKind::kInvalidArgument, "student_t: df must be > 0");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

inline PearsonResult pearson(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), ErrorKind::kShapeMismatch, "pearson: length mismatch");
  require(xs.size() >= 3, ErrorKind::kInvalidArgument, "pearson: need at least 3 pairs");
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(xs[i]) && std::isfinite(ys[i]), ErrorKind::kNonFinite,
            "pearson: non-finite value at pair " + std::to_string(i));
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  require(sxx > 0.0 && syy > 0.0, ErrorKind::kUndefined,
          "pearson: zero variance, correlation undefined");
  PearsonResult out;
  out.n = n;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  const double one_minus = 1.0 - out.r * out.r;
  out.p = one_minus <= 0.0
              ? 0.0
              : student_t_two_sided(out.r * std::sqrt(df / one_minus), df);
  return out;
}

}  // namespace dtta

#endif  // DTTA_METRICS_METRICS_HPP_
