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

#ifndef DTTA_SHOT_LOSSES_HPP_
#define DTTA_SHOT_LOSSES_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "dtta/error.hpp"
#include "dtta/numerics/ops.hpp"
#include "dtta/numerics/tensor.hpp"
#include "dtta/shot/hyperparams.hpp"

namespace dtta {

// Scalar loss and its gradient with respect to the loss input (logits or
// probabilities, depending on the loss).
template <typename T>
struct LossResult {
  double value = 0.0;
  Tensor<T> grad;
};

inline constexpr double kRowSumTolerance = 1e-4;

template <typename T>
void check_probability_rows(const Tensor<T>& probs, const char* who) {
  require(probs.rank() == 2 && probs.dim(0) > 0, ErrorKind::kShapeMismatch,
          std::string(who) + ": expected non-empty [batch, K] probabilities");
  for (std::size_t i = 0; i < probs.dim(0); ++i) {
    double sum = 0.0;
    for (T p : probs.row(i)) {
      require(p >= T{0} && std::isfinite(p), ErrorKind::kInvalidArgument,
              std::string(who) + ": row " + std::to_string(i) + " has a negative or non-finite entry");
      sum += p;
    }
    require(std::abs(sum - 1.0) <= kRowSumTolerance, ErrorKind::kInvalidArgument,
            std::string(who) + ": row " + std::to_string(i) + " sums to " + std::to_string(sum));
  }
}

// Mean over the batch of -sum_k q_k log p_k with q = (1 - alpha) onehot +
// alpha / K and log p taken as a stable log-softmax of the logits.
// Gradient is with respect to the logits.
template <typename T>
LossResult<T> smoothed_cross_entropy(const Tensor<T>& logits, std::span<const std::uint32_t> labels,
                                     double alpha) {
  require(logits.rank() == 2 && logits.dim(0) > 0, ErrorKind::kShapeMismatch,
          "cross entropy: expected non-empty [batch, K] logits");
  const std::size_t nb = logits.dim(0), k = logits.dim(1);
  require(labels.size() == nb, ErrorKind::kShapeMismatch, "cross entropy: label count mismatch");
  require(alpha >= 0.0 && alpha < 1.0, ErrorKind::kInvalidArgument,
          "cross entropy: smoothing must lie in [0, 1)");
  for (std::size_t i = 0; i < nb; ++i) {
    require(labels[i] < k, ErrorKind::kInvalidArgument,
            "cross entropy: label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                " outside [0, " + std::to_string(k) + ")");
  }
  const Tensor<T> probs = softmax(logits);
  LossResult<T> out;
  out.grad = Tensor<T>(logits.shape());
  const double off = alpha / static_cast<double>(k);
  const double scale = 1.0 / static_cast<double>(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    auto z = logits.row(i);
    double mx = z[0];
    for (T v : z) mx = std::max(mx, static_cast<double>(v));
    double lse = 0.0;
    for (T v : z) lse += std::exp(static_cast<double>(v) - mx);
    lse = mx + std::log(lse);
    for (std::size_t j = 0; j < k; ++j) {
      const double q = off + (j == labels[i] ? 1.0 - alpha : 0.0);
      out.value -= q * (static_cast<double>(z[j]) - lse);
      out.grad(i, j) = static_cast<T>((static_cast<double>(probs(i, j)) - q) * scale);
    }
  }
  out.value *= scale;
  return out;
}

// Mean per-example entropy, -sum_k p_k log(p_k + eps). Gradient is with
// respect to the probabilities.
template <typename T>
LossResult<T> entropy_loss(const Tensor<T>& probs, double eps) {
  check_probability_rows(probs, "entropy loss");
  require(eps > 0.0, ErrorKind::kInvalidArgument, "entropy loss: epsilon must be > 0");
  const std::size_t nb = probs.dim(0);
  const double scale = 1.0 / static_cast<double>(nb);
  LossResult<T> out;
  out.grad = Tensor<T>(probs.shape());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    const double lg = std::log(p + eps);
    out.value -= p * lg;
    out.grad[i] = static_cast<T>(-(lg + p / (p + eps)) * scale);
  }
  out.value *= scale;
  return out;
}

// sum_k pbar_k log(pbar_k + eps) for the batch-mean prediction pbar.
// Minimal (-ln K) when the batch marginal is uniform.
template <typename T>
LossResult<T> diversity_loss(const Tensor<T>& probs, double eps) {
  check_probability_rows(probs, "diversity loss");
  require(eps > 0.0, ErrorKind::kInvalidArgument, "diversity loss: epsilon must be > 0");
  const std::size_t nb = probs.dim(0), k = probs.dim(1);
  const double scale = 1.0 / static_cast<double>(nb);
  std::vector<double> mean(k, 0.0);
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < k; ++j) mean[j] += probs(i, j);
  LossResult<T> out;
  out.grad = Tensor<T>(probs.shape());
  std::vector<double> dmean(k);
  for (std::size_t j = 0; j < k; ++j) {
    mean[j] *= scale;
    const double lg = std::log(mean[j] + eps);
    out.value += mean[j] * lg;
    dmean[j] = (lg + mean[j] / (mean[j] + eps)) * scale;
  }
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < k; ++j) out.grad(i, j) = static_cast<T>(dmean[j]);
  return out;
}

template <typename T>
struct TtaLossResult {
  double value = 0.0;
  double entropy = 0.0;
  double diversity = 0.0;
  double pseudo_ce = 0.0;
  Tensor<T> dlogits;
};

// im_multiplier * (entropy + diversity) + cls_multiplier * CE(pseudo labels).
// `probs` must be softmax(`logits`); the gradient is with respect to logits.
template <typename T>
TtaLossResult<T> tta_loss(const Tensor<T>& probs, const Tensor<T>& logits,
                          std::span<const std::uint32_t> pseudo_labels, const HyperParams& hp) {
  require(probs.shape() == logits.shape(), ErrorKind::kShapeMismatch,
          "tta loss: probabilities and logits disagree in shape");
  const LossResult<T> ent = entropy_loss(probs, hp.entropy_epsilon);
  const LossResult<T> div = diversity_loss(probs, hp.entropy_epsilon);
  const LossResult<T> ce = smoothed_cross_entropy(logits, pseudo_labels, hp.pseudo_label_smoothing);

  Tensor<T> dprobs(probs.shape());
  const T im = static_cast<T>(hp.im_multiplier);
  for (std::size_t i = 0; i < dprobs.size(); ++i) dprobs[i] = im * (ent.grad[i] + div.grad[i]);
  TtaLossResult<T> out;
  out.dlogits = softmax_backward(probs, dprobs);
  const T beta = static_cast<T>(hp.cls_multiplier);
  for (std::size_t i = 0; i < out.dlogits.size(); ++i) out.dlogits[i] += beta * ce.grad[i];
  out.entropy = ent.value;
  out.diversity = div.value;
  out.pseudo_ce = ce.value;
  out.value = hp.im_multiplier * (ent.value + div.value) + hp.cls_multiplier * ce.value;
  return out;
}

}  // namespace dtta

#endif  // DTTA_SHOT_LOSSES_HPP_
