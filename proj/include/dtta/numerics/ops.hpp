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

#ifndef DTTA_NUMERICS_OPS_HPP_
#define DTTA_NUMERICS_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dtta/error.hpp"
#include "dtta/numerics/tensor.hpp"

namespace dtta {

// Raw row-major kernels. All of them accumulate into C and keep the
// innermost loop contiguous so the compiler can vectorize without
// reassociating sums; results are bit-reproducible for a given build.
namespace kernel {

// C[m,n] += A[m,k] * B[k,n]
template <typename T>
void gemm_acc(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[k,n] += A[m,k]^T * B[m,n]
template <typename T>
void gemm_tn_acc(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    const T* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      T* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// out[n,k] = in[k,n]^T
template <typename T>
void transpose(std::size_t k, std::size_t n, const T* in, T* out) {
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t j = 0; j < n; ++j) out[j * k + p] = in[p * n + j];
}

// C[m,k] += A[m,n] * B[k,n]^T, via an explicit transpose of B.
template <typename T>
void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
                 std::vector<T>& scratch) {
  scratch.resize(n * k);
  transpose(k, n, b, scratch.data());
  gemm_acc(m, n, k, a, scratch.data(), c);
}

}  // namespace kernel

template <typename T>
T sigmoid(T x) {
  if (x >= T{0}) {
    const T e = std::exp(-x);
    return T{1} / (T{1} + e);
  }
  const T e = std::exp(x);
  return e / (T{1} + e);
}

// y = x W + b with x [B,in], W [in,out], b [out].
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  require(x.rank() == 2 && w.rank() == 2 && b.rank() == 1, ErrorKind::kShapeMismatch,
          "linear: expected x[B,in], W[in,out], b[out]");
  const std::size_t batch = x.dim(0), in = x.dim(1), out = w.dim(1);
  require(w.dim(0) == in && b.dim(0) == out, ErrorKind::kShapeMismatch,
          "linear: input dim " + std::to_string(in) + " vs weight " + shape_string(w.shape()));
  Tensor<T> y({batch, out});
  for (std::size_t i = 0; i < batch; ++i)
    std::copy(b.values().begin(), b.values().end(), y.row(i).begin());
  kernel::gemm_acc(batch, in, out, x.data(), w.data(), y.data());
  return y;
}

// Accumulates dW and db, returns dx.
template <typename T>
Tensor<T> linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy,
                          Tensor<T>& dw, Tensor<T>& db) {
  const std::size_t batch = x.dim(0), in = x.dim(1), out = w.dim(1);
  require(dy.shape() == Shape{batch, out}, ErrorKind::kShapeMismatch,
          "linear_backward: upstream gradient shape " + shape_string(dy.shape()));
  kernel::gemm_tn_acc(batch, in, out, x.data(), dy.data(), dw.data());
  for (std::size_t i = 0; i < batch; ++i)
    for (std::size_t j = 0; j < out; ++j) db[j] += dy(i, j);
  Tensor<T> dx({batch, in});
  std::vector<T> scratch;
  kernel::gemm_nt_acc(batch, out, in, dy.data(), w.data(), dx.data(), scratch);
  return dx;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.values()) v = v > T{0} ? v : T{0};
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& dy) {
  Tensor<T> dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(x[i] > T{0})) dx[i] = T{0};
  return dx;
}

// Row-wise softmax of logits [B,K].
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  require(logits.rank() == 2, ErrorKind::kShapeMismatch, "softmax: expected [batch, K]");
  logits.check_finite("softmax logits");
  Tensor<T> probs(logits.shape());
  const std::size_t k = logits.dim(1);
  for (std::size_t i = 0; i < logits.dim(0); ++i) {
    auto in = logits.row(i);
    auto out = probs.row(i);
    const T mx = *std::max_element(in.begin(), in.end());
    T sum = 0;
    for (std::size_t j = 0; j < k; ++j) {
      out[j] = std::exp(in[j] - mx);
      sum += out[j];
    }
    for (std::size_t j = 0; j < k; ++j) out[j] /= sum;
  }
  return probs;
}

// Given p = softmax(z) and dL/dp, returns dL/dz.
template <typename T>
Tensor<T> softmax_backward(const Tensor<T>& probs, const Tensor<T>& dprobs) {
  require(probs.shape() == dprobs.shape(), ErrorKind::kShapeMismatch,
          "softmax_backward: gradient shape mismatch");
  Tensor<T> dz(probs.shape());
  const std::size_t k = probs.dim(1);
  for (std::size_t i = 0; i < probs.dim(0); ++i) {
    T dot = 0;
    for (std::size_t j = 0; j < k; ++j) dot += probs(i, j) * dprobs(i, j);
    for (std::size_t j = 0; j < k; ++j) dz(i, j) = probs(i, j) * (dprobs(i, j) - dot);
  }
  return dz;
}

// Lowest index wins ties.
template <typename T>
std::vector<std::uint32_t> argmax_rows(const Tensor<T>& m) {
  std::vector<std::uint32_t> out(m.dim(0));
  for (std::size_t i = 0; i < m.dim(0); ++i) {
    auto r = m.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < r.size(); ++j)
      if (r[j] > r[best]) best = j;
    out[i] = static_cast<std::uint32_t>(best);
  }
  return out;
}

}  // namespace dtta

#endif  // DTTA_NUMERICS_OPS_HPP_
