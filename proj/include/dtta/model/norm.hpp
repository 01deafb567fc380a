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

#ifndef DTTA_MODEL_NORM_HPP_
#define DTTA_MODEL_NORM_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dtta/error.hpp"
#include "dtta/numerics/tensor.hpp"

namespace dtta {

enum class NormKind : std::uint32_t { kBatch = 0, kLayer = 1, kNone = 2 };

inline std::string_view to_string(NormKind k) {
  switch (k) {
    case NormKind::kBatch: return "batch";
    case NormKind::kLayer: return "layer";
    case NormKind::kNone: return "none";
  }
  return "unknown";
}

inline NormKind parse_norm_kind(std::string_view s) {
  if (s == "batch") return NormKind::kBatch;
  if (s == "layer") return NormKind::kLayer;
  if (s == "none") return NormKind::kNone;
  fail(ErrorKind::kInvalidArgument, "unknown normalization kind '" + std::string(s) + "'");
}

enum class Mode { kTrain, kEval };

inline constexpr double kNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

template <typename T>
struct NormCache {
  NormKind kind = NormKind::kNone;
  Mode mode = Mode::kEval;
  Tensor<T> xhat;                 // [B, F]
  std::vector<T> inv_std;         // per feature (batch) or per row (layer)
};

template <typename T>
struct RunningStats {
  const Tensor<T>* mean = nullptr;
  const Tensor<T>* var = nullptr;
  // Destinations for the updated statistics; required in training mode.
  Tensor<T>* mean_out = nullptr;
  Tensor<T>* var_out = nullptr;
};

// Normalizes x [B, F]. Batch norm in training mode uses batch statistics
// and folds them into the running buffers (unbiased variance, momentum
// 0.1); in evaluation mode it reads the running buffers only.
template <typename T>
Tensor<T> norm_forward(NormKind kind, Mode mode, const Tensor<T>& x, const Tensor<T>* gamma,
                       const Tensor<T>* beta, RunningStats<T> stats, NormCache<T>* cache) {
  if (cache) {
    cache->kind = kind;
    cache->mode = mode;
  }
  if (kind == NormKind::kNone) return x;

  const std::size_t batch = x.dim(0), f = x.dim(1);
  require(gamma && beta && gamma->shape() == Shape{f} && beta->shape() == Shape{f},
          ErrorKind::kShapeMismatch, "norm: affine parameters do not match feature dim");
  Tensor<T> xhat({batch, f});
  std::vector<T> inv_std;

  if (kind == NormKind::kBatch) {
    require(stats.mean && stats.var && stats.mean->shape() == Shape{f} &&
                stats.var->shape() == Shape{f},
            ErrorKind::kInvalidArgument, "batch norm: running statistics missing");
    require(mode == Mode::kEval || (stats.mean_out && stats.var_out), ErrorKind::kInvalidArgument,
            "batch norm: training mode needs writable running statistics");
    inv_std.resize(f);
    if (mode == Mode::kTrain) {
      require(batch >= 1, ErrorKind::kInvalidArgument, "batch norm: empty batch");
      for (std::size_t j = 0; j < f; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < batch; ++i) mean += x(i, j);
        mean /= static_cast<double>(batch);
        double var = 0.0;
        for (std::size_t i = 0; i < batch; ++i) {
          const double d = x(i, j) - mean;
          var += d * d;
        }
        const double biased = var / static_cast<double>(batch);
        const double is = 1.0 / std::sqrt(biased + kNormEps);
        inv_std[j] = static_cast<T>(is);
        for (std::size_t i = 0; i < batch; ++i)
          xhat(i, j) = static_cast<T>((x(i, j) - mean) * is);
        const double m = kBatchNormMomentum;
        (*stats.mean_out)[j] = static_cast<T>((1.0 - m) * (*stats.mean)[j] + m * mean);
        if (batch > 1) {
          const double unbiased = var / static_cast<double>(batch - 1);
          (*stats.var_out)[j] = static_cast<T>((1.0 - m) * (*stats.var)[j] + m * unbiased);
        }
      }
    } else {
      for (std::size_t j = 0; j < f; ++j) {
        const double is = 1.0 / std::sqrt(static_cast<double>((*stats.var)[j]) + kNormEps);
        inv_std[j] = static_cast<T>(is);
        for (std::size_t i = 0; i < batch; ++i)
          xhat(i, j) = static_cast<T>((x(i, j) - (*stats.mean)[j]) * is);
      }
    }
  } else {
    inv_std.resize(batch);
    for (std::size_t i = 0; i < batch; ++i) {
      double mean = 0.0;
      for (std::size_t j = 0; j < f; ++j) mean += x(i, j);
      mean /= static_cast<double>(f);
      double var = 0.0;
      for (std::size_t j = 0; j < f; ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
      const double is = 1.0 / std::sqrt(var / static_cast<double>(f) + kNormEps);
      inv_std[i] = static_cast<T>(is);
      for (std::size_t j = 0; j < f; ++j) xhat(i, j) = static_cast<T>((x(i, j) - mean) * is);
    }
  }

  Tensor<T> y({batch, f});
  for (std::size_t i = 0; i < batch; ++i)
    for (std::size_t j = 0; j < f; ++j) y(i, j) = (*gamma)[j] * xhat(i, j) + (*beta)[j];
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

// Returns dL/dx; accumulates dgamma/dbeta when given.
template <typename T>
Tensor<T> norm_backward(const NormCache<T>& cache, const Tensor<T>* gamma, const Tensor<T>& dy,
                        Tensor<T>* dgamma, Tensor<T>* dbeta) {
  if (cache.kind == NormKind::kNone) return dy;
  const std::size_t batch = dy.dim(0), f = dy.dim(1);
  require(cache.xhat.shape() == dy.shape(), ErrorKind::kShapeMismatch,
          "norm backward: gradient does not match cached batch");
  Tensor<T> dxhat({batch, f});
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < f; ++j) {
      if (dgamma) (*dgamma)[j] += dy(i, j) * cache.xhat(i, j);
      if (dbeta) (*dbeta)[j] += dy(i, j);
      dxhat(i, j) = dy(i, j) * (*gamma)[j];
    }
  }

  Tensor<T> dx({batch, f});
  const T nb = static_cast<T>(batch), nf = static_cast<T>(f);
  if (cache.kind == NormKind::kBatch && cache.mode == Mode::kEval) {
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t j = 0; j < f; ++j) dx(i, j) = dxhat(i, j) * cache.inv_std[j];
  } else if (cache.kind == NormKind::kBatch) {
    for (std::size_t j = 0; j < f; ++j) {
      T sum = 0, dot = 0;
      for (std::size_t i = 0; i < batch; ++i) {
        sum += dxhat(i, j);
        dot += dxhat(i, j) * cache.xhat(i, j);
      }
      for (std::size_t i = 0; i < batch; ++i)
        dx(i, j) = cache.inv_std[j] / nb * (nb * dxhat(i, j) - sum - cache.xhat(i, j) * dot);
    }
  } else {
    for (std::size_t i = 0; i < batch; ++i) {
      T sum = 0, dot = 0;
      for (std::size_t j = 0; j < f; ++j) {
        sum += dxhat(i, j);
        dot += dxhat(i, j) * cache.xhat(i, j);
      }
      for (std::size_t j = 0; j < f; ++j)
        dx(i, j) = cache.inv_std[i] / nf * (nf * dxhat(i, j) - sum - cache.xhat(i, j) * dot);
    }
  }
  return dx;
}

}  // namespace dtta

#endif  // DTTA_MODEL_NORM_HPP_
