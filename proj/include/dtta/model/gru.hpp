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

#ifndef DTTA_MODEL_GRU_HPP_
#define DTTA_MODEL_GRU_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dtta/error.hpp"
#include "dtta/numerics/ops.hpp"
#include "dtta/numerics/tensor.hpp"

namespace dtta {

// Gate layout inside the 3H axis is (reset, update, candidate):
//
//   r  = sigmoid(x W_ih[:, r] + b_ih[r] + h W_hh[:, r] + b_hh[r])
//   z  = sigmoid(x W_ih[:, z] + b_ih[z] + h W_hh[:, z] + b_hh[z])
//   n  = tanh(x W_ih[:, n] + b_ih[n] + r * (h W_hh[:, n] + b_hh[n]))
//   h' = (1 - z) * n + z * h
//
// W_ih is [in, 3H], W_hh is [H, 3H].
template <typename T>
struct GruWeights {
  const Tensor<T>& w_ih;
  const Tensor<T>& w_hh;
  const Tensor<T>& b_ih;
  const Tensor<T>& b_hh;

  std::size_t hidden() const { return w_hh.dim(0); }
  std::size_t input() const { return w_ih.dim(0); }
};

template <typename T>
struct GruGrads {
  Tensor<T>& w_ih;
  Tensor<T>& w_hh;
  Tensor<T>& b_ih;
  Tensor<T>& b_hh;
};

// Activations of one direction over a padded, time-major batch. All
// per-step tensors are [S, B, H].
template <typename T>
struct GruDirectionCache {
  bool reverse = false;
  Tensor<T> h_prev;
  Tensor<T> r;
  Tensor<T> z;
  Tensor<T> n;
  Tensor<T> hn;  // h W_hh[:, n] + b_hh[n], needed for dr
  std::vector<std::uint8_t> active;  // [S, B]
};

namespace detail {

template <typename T>
void check_gru_shapes(const Tensor<T>& x, std::span<const std::uint32_t> lengths,
                      const GruWeights<T>& w) {
  require(x.rank() == 3, ErrorKind::kShapeMismatch, "gru: input must be [S, B, in]");
  const std::size_t h = w.hidden();
  require(w.w_ih.shape() == Shape{x.dim(2), 3 * h} && w.w_hh.shape() == Shape{h, 3 * h} &&
              w.b_ih.shape() == Shape{3 * h} && w.b_hh.shape() == Shape{3 * h},
          ErrorKind::kShapeMismatch,
          "gru: weight shapes inconsistent with input dim " + std::to_string(x.dim(2)));
  require(lengths.size() == x.dim(1), ErrorKind::kShapeMismatch,
          "gru: lengths size does not match batch");
}

}  // namespace detail

// Runs one direction over x [S, B, in]. Row b only updates its state at
// positions t < lengths[b]; elsewhere the state is carried unchanged, so
// padding never influences the result. Returns the state after each
// position, [S, B, H].
template <typename T>
Tensor<T> gru_direction_forward(const Tensor<T>& x, std::span<const std::uint32_t> lengths,
                                const GruWeights<T>& w, bool reverse,
                                GruDirectionCache<T>* cache) {
  detail::check_gru_shapes(x, lengths, w);
  const std::size_t steps = x.dim(0), batch = x.dim(1), in = x.dim(2), h = w.hidden();
  const std::size_t g3 = 3 * h;

  // Input projections for every position at once: [S*B, 3H].
  std::vector<T> gi(steps * batch * g3);
  for (std::size_t row = 0; row < steps * batch; ++row)
    std::copy(w.b_ih.values().begin(), w.b_ih.values().end(), gi.begin() + row * g3);
  kernel::gemm_acc(steps * batch, in, g3, x.data(), w.w_ih.data(), gi.data());

  Tensor<T> out({steps, batch, h});
  if (cache) {
    cache->reverse = reverse;
    cache->h_prev = Tensor<T>({steps, batch, h});
    cache->r = Tensor<T>({steps, batch, h});
    cache->z = Tensor<T>({steps, batch, h});
    cache->n = Tensor<T>({steps, batch, h});
    cache->hn = Tensor<T>({steps, batch, h});
    cache->active.assign(steps * batch, 0);
  }

  std::vector<T> state(batch * h, T{0});
  std::vector<T> gh(batch * g3);
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    for (std::size_t b = 0; b < batch; ++b)
      std::copy(w.b_hh.values().begin(), w.b_hh.values().end(), gh.begin() + b * g3);
    kernel::gemm_acc(batch, h, g3, state.data(), w.w_hh.data(), gh.data());

    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = (t * batch + b) * h;
      T* hs = state.data() + b * h;
      if (cache) std::copy(hs, hs + h, cache->h_prev.data() + off);
      if (t >= lengths[b]) {
        std::copy(hs, hs + h, out.data() + off);
        continue;
      }
      const T* gir = gi.data() + (t * batch + b) * g3;
      const T* ghr = gh.data() + b * g3;
      for (std::size_t j = 0; j < h; ++j) {
        const T r = sigmoid(gir[j] + ghr[j]);
        const T z = sigmoid(gir[h + j] + ghr[h + j]);
        const T hn = ghr[2 * h + j];
        const T n = std::tanh(gir[2 * h + j] + r * hn);
        if (cache) {
          cache->r[off + j] = r;
          cache->z[off + j] = z;
          cache->n[off + j] = n;
          cache->hn[off + j] = hn;
        }
        hs[j] = (T{1} - z) * n + z * hs[j];
      }
      if (cache) cache->active[t * batch + b] = 1;
      std::copy(hs, hs + h, out.data() + off);
    }
  }
  return out;
}

// Backward pass of gru_direction_forward. `dout` is dL/d(out), [S, B, H].
// Accumulates weight gradients and returns dL/dx, [S, B, in].
template <typename T>
Tensor<T> gru_direction_backward(const Tensor<T>& x, const GruWeights<T>& w,
                                 const GruDirectionCache<T>& cache, const Tensor<T>& dout,
                                 GruGrads<T> grads) {
  const std::size_t steps = x.dim(0), batch = x.dim(1), in = x.dim(2), h = w.hidden();
  const std::size_t g3 = 3 * h;
  require(dout.shape() == Shape{steps, batch, h}, ErrorKind::kShapeMismatch,
          "gru backward: upstream gradient shape " + shape_string(dout.shape()));
  require(cache.active.size() == steps * batch, ErrorKind::kInvalidArgument,
          "gru backward: cache does not match this input");

  std::vector<T> dgi(steps * batch * g3, T{0});
  std::vector<T> dgh(batch * g3);
  std::vector<T> dh(batch * h, T{0});
  std::vector<T> dh_prev(batch * h);
  std::vector<T> w_hh_t(g3 * h);
  kernel::transpose(h, g3, w.w_hh.data(), w_hh_t.data());

  for (std::size_t k = 0; k < steps; ++k) {
    // Undo the forward visiting order.
    const std::size_t t = cache.reverse ? k : steps - 1 - k;
    std::fill(dgh.begin(), dgh.end(), T{0});
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t off = (t * batch + b) * h;
      T* dhb = dh.data() + b * h;
      T* dpb = dh_prev.data() + b * h;
      for (std::size_t j = 0; j < h; ++j) dhb[j] += dout[off + j];
      if (!cache.active[t * batch + b]) {
        std::copy(dhb, dhb + h, dpb);
        continue;
      }
      T* dgir = dgi.data() + (t * batch + b) * g3;
      T* dghr = dgh.data() + b * g3;
      for (std::size_t j = 0; j < h; ++j) {
        const T r = cache.r[off + j], z = cache.z[off + j], n = cache.n[off + j];
        const T hp = cache.h_prev[off + j];
        const T g = dhb[j];
        const T da_n = g * (T{1} - z) * (T{1} - n * n);
        const T da_z = g * (hp - n) * z * (T{1} - z);
        const T da_r = da_n * cache.hn[off + j] * r * (T{1} - r);
        dgir[j] = da_r;
        dgir[h + j] = da_z;
        dgir[2 * h + j] = da_n;
        dghr[j] = da_r;
        dghr[h + j] = da_z;
        dghr[2 * h + j] = da_n * r;
        dpb[j] = g * z;
      }
    }
    // dh_prev += dgh W_hh^T for active rows (inactive rows have dgh == 0).
    kernel::gemm_acc(batch, g3, h, dgh.data(), w_hh_t.data(), dh_prev.data());
    kernel::gemm_tn_acc(batch, h, g3, cache.h_prev.data() + t * batch * h, dgh.data(),
                        grads.w_hh.data());
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t j = 0; j < g3; ++j) grads.b_hh[j] += dgh[b * g3 + j];
    dh.swap(dh_prev);
  }

  kernel::gemm_tn_acc(steps * batch, in, g3, x.data(), dgi.data(), grads.w_ih.data());
  for (std::size_t row = 0; row < steps * batch; ++row)
    for (std::size_t j = 0; j < g3; ++j) grads.b_ih[j] += dgi[row * g3 + j];
  Tensor<T> dx({steps, batch, in});
  std::vector<T> scratch;
  kernel::gemm_nt_acc(steps * batch, g3, in, dgi.data(), w.w_ih.data(), dx.data(), scratch);
  return dx;
}

}  // namespace dtta

#endif  // DTTA_MODEL_GRU_HPP_
