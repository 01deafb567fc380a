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

#ifndef DTTA_SHOT_PSEUDO_LABEL_HPP_
#define DTTA_SHOT_PSEUDO_LABEL_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dtta/error.hpp"
#include "dtta/numerics/tensor.hpp"

namespace dtta {

struct PseudoLabelState {
  Tensor<double> centroids;           // [K, F]
  std::vector<std::uint32_t> labels;  // one per target example
  std::uint32_t round = 0;            // centroid rounds performed
};

// Distances closer than this are treated as ties and go to the lower class.
inline constexpr double kCentroidTieTolerance = 1e-12;

namespace detail {

// Nearest centroid by cosine distance 1 - <f, c> / (|f| |c|). A zero
// centroid has no direction and sits at distance 1 from everything.
inline std::vector<std::uint32_t> assign_nearest(const std::vector<double>& feats,
                                                 const std::vector<double>& feat_norms,
                                                 const Tensor<double>& centroids, std::size_t n,
                                                 std::size_t f) {
  const std::size_t k = centroids.dim(0);
  std::vector<double> cnorm(k);
  for (std::size_t c = 0; c < k; ++c) {
    double s = 0.0;
    for (std::size_t j = 0; j < f; ++j) s += centroids(c, j) * centroids(c, j);
    cnorm[c] = std::sqrt(s);
  }
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = 0.0;
    std::uint32_t arg = 0;
    for (std::size_t c = 0; c < k; ++c) {
      double dist = 1.0;
      if (cnorm[c] > 0.0) {
        double dot = 0.0;
        for (std::size_t j = 0; j < f; ++j) dot += feats[i * f + j] * centroids(c, j);
        dist = 1.0 - dot / (feat_norms[i] * cnorm[c]);
      }
      if (c == 0 || dist < best - kCentroidTieTolerance) {
        best = dist;
        arg = static_cast<std::uint32_t>(c);
      }
    }
    labels[i] = arg;
  }
  return labels;
}

}  // namespace detail

// Two-round centroid labeling: soft centroids weighted by the predicted
// probabilities, cosine assignment, then hard centroids from that
// assignment and a second assignment. A class that receives no example in
// the first assignment keeps its soft centroid.
template <typename T>
PseudoLabelState compute_pseudo_labels(const Tensor<T>& features, const Tensor<T>& probs) {
  require(features.rank() == 2 && probs.rank() == 2 && features.dim(0) == probs.dim(0),
          ErrorKind::kShapeMismatch, "pseudo labels: features [N, F] and probs [N, K] required");
  const std::size_t n = features.dim(0), f = features.dim(1), k = probs.dim(1);
  require(n > 0, ErrorKind::kInvalidArgument, "pseudo labels: empty target set");

  std::vector<double> feats(n * f);
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      feats[i * f + j] = static_cast<double>(features(i, j));
      s += feats[i * f + j] * feats[i * f + j];
    }
    norms[i] = std::sqrt(s);
    require(norms[i] > 0.0 && std::isfinite(norms[i]), ErrorKind::kInvalidArgument,
            "pseudo labels: example " + std::to_string(i) +
                " has an all-zero or non-finite feature vector (cosine undefined)");
  }

  PseudoLabelState st;
  st.centroids = Tensor<double>({k, f});
  std::vector<double> mass(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      const double w = static_cast<double>(probs(i, c));
      mass[c] += w;
      for (std::size_t j = 0; j < f; ++j) st.centroids(c, j) += w * feats[i * f + j];
    }
  }
  for (std::size_t c = 0; c < k; ++c)
    if (mass[c] > 0.0)
      for (std::size_t j = 0; j < f; ++j) st.centroids(c, j) /= mass[c];
  st.labels = detail::assign_nearest(feats, norms, st.centroids, n, f);
  st.round = 1;

  Tensor<double> hard({k, f});
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t c = st.labels[i];
    ++count[c];
    for (std::size_t j = 0; j < f; ++j) hard(c, j) += feats[i * f + j];
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < f; ++j) {
      hard(c, j) = count[c] ? hard(c, j) / static_cast<double>(count[c]) : st.centroids(c, j);
    }
  }
  st.centroids = std::move(hard);
  st.labels = detail::assign_nearest(feats, norms, st.centroids, n, f);
  st.round = 2;
  return st;
}

}  // namespace dtta

#endif  // DTTA_SHOT_PSEUDO_LABEL_HPP_
