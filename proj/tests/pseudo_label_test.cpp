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

#include <gtest/gtest.h>

#include <random>

#include "dtta/dtta.hpp"
#include "test_util.hpp"

namespace dtta {
namespace {

TEST(PseudoLabels, SeparatedClustersRecoverMembership) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.05);
  const std::size_t n = 40, f = 4;
  Tensor<double> feats({n, f}), probs({n, 2});
  std::vector<std::uint32_t> truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    truth[i] = i % 2;
    feats(i, 0) = truth[i] == 0 ? 5.0 : -5.0;
    feats(i, 1) = 1.0;
    for (std::size_t j = 0; j < f; ++j) feats(i, j) += noise(rng);
    probs(i, truth[i]) = 0.97;
    probs(i, 1 - truth[i]) = 0.03;
  }
  const auto st = compute_pseudo_labels(feats, probs);
  EXPECT_EQ(st.labels, truth);
  EXPECT_EQ(st.round, 2u);
  EXPECT_EQ(st.centroids.shape(), (Shape{2, f}));
}

// Noisy probabilities do not matter once the clusters are far apart.
TEST(PseudoLabels, CorrectsWrongPredictions) {
  Tensor<double> feats({4, 2}, {1, 0.1, 1, -0.1, -1, 0.1, -1, -0.1});
  Tensor<double> probs({4, 2}, {0.9, 0.1, 0.4, 0.6, 0.1, 0.9, 0.2, 0.8});
  EXPECT_EQ(compute_pseudo_labels(feats, probs).labels, (std::vector<std::uint32_t>{0, 0, 1, 1}));
}

TEST(PseudoLabels, IdenticalFeaturesTieToClassZero) {
  Tensor<double> feats({5, 3}, 1.0);
  Tensor<double> probs({5, 3});
  for (std::size_t i = 0; i < 5; ++i) probs(i, i % 3) = 1.0;
  for (auto l : compute_pseudo_labels(feats, probs).labels) EXPECT_EQ(l, 0u);
}

TEST(PseudoLabels, OneHotAssignmentIsFixedPoint) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto feats = testing::random_tensor<double>(rng, {30, 5});
    const auto probs = softmax(testing::random_tensor<double>(rng, {30, 3}, 2.0));
    const auto first = compute_pseudo_labels(feats, probs);
    Tensor<double> onehot({30, 3});
    for (std::size_t i = 0; i < 30; ++i) onehot(i, first.labels[i]) = 1.0;
    const auto again = compute_pseudo_labels(feats, onehot);
    const auto third = compute_pseudo_labels(feats, [&] {
      Tensor<double> t({30, 3});
      for (std::size_t i = 0; i < 30; ++i) t(i, again.labels[i]) = 1.0;
      return t;
    }());
    // A one-hot input whose hard assignment already matches is unchanged.
    if (again.labels == first.labels) {
      EXPECT_EQ(third.labels, again.labels);
    }
    for (auto l : first.labels) EXPECT_LT(l, 3u);
  }
}

TEST(PseudoLabels, EmptyClassKeepsSoftCentroid) {
  Tensor<double> feats({4, 2}, {1, 0, 1, 0.2, 0, 1, 0.2, 1});
  Tensor<double> probs({4, 3}, {0.8, 0.1, 0.1, 0.8, 0.1, 0.1, 0.1, 0.8, 0.1, 0.1, 0.8, 0.1});
  const auto st = compute_pseudo_labels(feats, probs);
  for (auto l : st.labels) EXPECT_NE(l, 2u);
  // Soft centroid of class 2: probability-weighted mean, weights all 0.1.
  EXPECT_NEAR(st.centroids(2, 0), (1 + 1 + 0 + 0.2) / 4.0, 1e-12);
  EXPECT_NEAR(st.centroids(2, 1), (0 + 0.2 + 1 + 1) / 4.0, 1e-12);
}

TEST(PseudoLabels, ZeroFeatureNamesExample) {
  Tensor<double> feats({3, 2}, {1, 1, 0, 0, 1, 2});
  Tensor<double> probs({3, 2}, 0.5);
  try {
    compute_pseudo_labels(feats, probs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("example 1"), std::string::npos);
  }
}

TEST(PseudoLabels, ShapeErrors) {
  EXPECT_THROW(compute_pseudo_labels(Tensor<double>({3, 2}, 1.0), Tensor<double>({2, 2}, 0.5)),
               Error);
}

}  // namespace
}  // namespace dtta
