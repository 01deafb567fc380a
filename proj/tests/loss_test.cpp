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

#include <cmath>

#include "dtta/dtta.hpp"
#include "test_util.hpp"

namespace dtta {
namespace {

const double kLn2 = std::log(2.0);

TEST(SmoothedCrossEntropy, HalfProbabilityNoSmoothing) {
  const std::vector<std::uint32_t> y{0};
  EXPECT_NEAR(smoothed_cross_entropy(Tensor<double>({1, 2}, {0.0, 0.0}), y, 0.0).value, kLn2,
              1e-12);
}

TEST(SmoothedCrossEntropy, UniformPredictionAnySmoothing) {
  const std::vector<std::uint32_t> y{1, 0};
  for (double alpha : {0.0, 0.1, 0.5, 0.9})
    EXPECT_NEAR(smoothed_cross_entropy(Tensor<double>({2, 2}), y, alpha).value, kLn2, 1e-12);
}

TEST(SmoothedCrossEntropy, SmoothedTargetMatchesPrediction) {
  const std::vector<std::uint32_t> y{0};
  const Tensor<double> z({1, 2}, {std::log(0.95), std::log(0.05)});
  EXPECT_NEAR(smoothed_cross_entropy(z, y, 0.1).value, 0.19851524334587256, 1e-12);
}

TEST(SmoothedCrossEntropy, Errors) {
  const Tensor<double> z({1, 2});
  EXPECT_THROW(smoothed_cross_entropy(z, std::vector<std::uint32_t>{2}, 0.1), Error);
  EXPECT_THROW(smoothed_cross_entropy(z, std::vector<std::uint32_t>{0, 1}, 0.1), Error);
  EXPECT_THROW(smoothed_cross_entropy(z, std::vector<std::uint32_t>{0}, 1.0), Error);
}

TEST(SmoothedCrossEntropy, ExtremeLogitsStayFinite) {
  const Tensor<float> z({1, 2}, {200.0f, -200.0f});
  const auto r = smoothed_cross_entropy(z, std::vector<std::uint32_t>{1}, 0.0);
  EXPECT_TRUE(std::isfinite(r.value));
  EXPECT_NEAR(r.value, 400.0, 1e-3);
}

TEST(EntropyLoss, UniformRows) {
  EXPECT_NEAR(entropy_loss(Tensor<double>({3, 2}, 0.5), 1e-5).value, kLn2, 1e-4);
}

TEST(EntropyLoss, OneHotRows) {
  const auto v = entropy_loss(Tensor<double>({2, 2}, {1, 0, 0, 1}), 1e-5).value;
  EXPECT_LE(std::abs(v), 2e-5);
}

TEST(EntropyLoss, SingleRow) {
  EXPECT_NEAR(entropy_loss(Tensor<double>({1, 2}, {0.75, 0.25}), 1e-5).value,
              0.5623151448854691, 1e-12);
}

TEST(EntropyLoss, RejectsInvalidRows) {
  EXPECT_THROW(entropy_loss(Tensor<double>({1, 2}, {0.7, 0.7}), 1e-5), Error);
  EXPECT_THROW(entropy_loss(Tensor<double>({1, 2}, {1.5, -0.5}), 1e-5), Error);
  EXPECT_THROW(entropy_loss(Tensor<double>({1, 2}, {0.5, 0.5}), 0.0), Error);
}

TEST(DiversityLoss, UniformMarginal) {
  EXPECT_NEAR(diversity_loss(Tensor<double>({2, 2}, {1, 0, 0, 1}), 1e-5).value, -kLn2, 1e-4);
}

TEST(DiversityLoss, AllMassOnOneClass) {
  EXPECT_LE(std::abs(diversity_loss(Tensor<double>({2, 2}, {1, 0, 1, 0}), 1e-5).value), 2e-5);
}

TEST(DiversityLoss, SkewedMarginal) {
  EXPECT_NEAR(diversity_loss(Tensor<double>({2, 2}, {1, 0, 0.5, 0.5}), 1e-5).value,
              -0.5623151448854691, 1e-12);
}

TEST(DiversityLoss, BoundsProperty) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = testing::uniform(rng, 2, 6);
    const auto p = softmax(testing::random_tensor<double>(rng, {testing::uniform(rng, 1, 8), k}, 3.0));
    const double v = diversity_loss(p, 1e-5).value;
    EXPECT_GE(v, -std::log(static_cast<double>(k)) - 1e-9);
    EXPECT_LE(v, 1e-4);
    const double e = entropy_loss(p, 1e-5).value;
    EXPECT_GE(e, -1e-4);
    EXPECT_LE(e, std::log(static_cast<double>(k)) + 1e-9);
  }
}

TEST(TtaLoss, HandBuiltBatch) {
  const Tensor<double> z({2, 2}, {1.0, 0.0, 0.2, 0.5});
  const std::vector<std::uint32_t> pseudo{0, 1};
  HyperParams hp;
  const auto r = tta_loss(softmax(z), z, pseudo, hp);
  EXPECT_NEAR(r.entropy, 0.6320927993860406, 1e-12);
  EXPECT_NEAR(r.diversity, -0.6808122492212440, 1e-12);
  EXPECT_NEAR(r.pseudo_ce, 0.4338084659933750, 1e-12);
  EXPECT_NEAR(r.value, 0.0814230899628091, 1e-12);
}

TEST(TtaLoss, ZeroPseudoWeightIsInformationMaximization) {
  std::mt19937_64 rng(6);
  const auto z = testing::random_tensor<double>(rng, {4, 3});
  const auto p = softmax(z);
  HyperParams hp;
  hp.cls_multiplier = 0.0;
  const auto r = tta_loss(p, z, std::vector<std::uint32_t>{0, 1, 2, 0}, hp);
  EXPECT_NEAR(r.value, entropy_loss(p, 1e-5).value + diversity_loss(p, 1e-5).value, 1e-12);
}

TEST(TtaLoss, PerfectPseudoFitWithoutInformationMaximization) {
  const Tensor<double> z({2, 2}, {40.0, 0.0, 0.0, 40.0});
  HyperParams hp;
  hp.im_multiplier = 0.0;
  EXPECT_NEAR(tta_loss(softmax(z), z, std::vector<std::uint32_t>{0, 1}, hp).value, 0.0, 1e-12);
}

}  // namespace
}  // namespace dtta
