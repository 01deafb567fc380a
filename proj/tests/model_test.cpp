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
#include <random>

#include "dtta/dtta.hpp"
#include "test_util.hpp"

namespace dtta {
namespace {

Architecture small_arch(NormKind norm = NormKind::kBatch) {
  Architecture a;
  a.input_dim = 3;
  a.gru_hidden = 4;
  a.classifier_hidden = 5;
  a.num_classes = 3;
  a.norm = norm;
  return a;
}

TEST(Model, OutputShapes) {
  std::mt19937_64 rng(1);
  const auto m = init_model<double>(small_arch(), 7);
  const auto x = testing::random_tensor<double>(rng, {6, 5, 3});
  const std::vector<std::uint32_t> lengths{5, 1, 3, 4, 2, 5};
  const auto f = bottleneck_forward(m, x, lengths);
  EXPECT_EQ(f.shape(), (Shape{6, 8}));
  EXPECT_EQ(classifier_forward(m, f).shape(), (Shape{6, 3}));
}

TEST(Model, InputErrors) {
  const auto m = init_model<double>(small_arch(), 7);
  const std::vector<std::uint32_t> ok{2};
  EXPECT_THROW(bottleneck_forward(m, Tensor<double>({1, 2, 4}), ok), Error);
  EXPECT_THROW(bottleneck_forward(m, Tensor<double>({1, 2, 3}), std::vector<std::uint32_t>{3}),
               Error);
  EXPECT_THROW(bottleneck_forward(m, Tensor<double>({1, 2, 3}), std::vector<std::uint32_t>{0}),
               Error);
  EXPECT_THROW(classifier_forward(m, Tensor<double>({1, 7})), Error);
}

TEST(Model, InitIsSeeded) {
  EXPECT_TRUE(init_model<float>(small_arch(), 3) == init_model<float>(small_arch(), 3));
  EXPECT_FALSE(init_model<float>(small_arch(), 3) == init_model<float>(small_arch(), 4));
}

TEST(Model, ZeroClassifierGivesUniformPrediction) {
  auto m = init_model<double>(small_arch(), 1);
  for (auto& [name, t] : m.params.values)
    if (is_classifier_param(name)) t.fill(0.0);
  std::mt19937_64 rng(2);
  const auto logits = classifier_forward(m, testing::random_tensor<double>(rng, {4, 8}));
  for (double v : logits.values()) EXPECT_EQ(v, 0.0);
  const auto probs = softmax(logits);
  for (double v : probs.values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Model, HandComputedClassifier) {
  Architecture a;
  a.input_dim = 1;
  a.gru_hidden = 1;
  a.classifier_hidden = 2;
  a.num_classes = 2;
  a.norm = NormKind::kNone;
  auto m = init_model<double>(a, 1);
  m.params.at("classifier.fc1.weight") = Tensor<double>({2, 2}, {0.5, -1.0, 0.25, 2.0});
  m.params.at("classifier.fc1.bias") = Tensor<double>({2}, {0.1, 0.0});
  m.params.at("classifier.fc2.weight") = Tensor<double>({2, 2}, {2.0, -1.0, 1.0, 1.0});
  m.params.at("classifier.fc2.bias") = Tensor<double>({2}, {0.0, 0.5});
  // hidden = relu([0.35, -3]) = [0.35, 0]; logits = [0.7, -0.35 + 0.5]
  const auto logits = classifier_forward(m, Tensor<double>({1, 2}, {1.0, -1.0}));
  EXPECT_NEAR(logits(0, 0), 0.7, 1e-15);
  EXPECT_NEAR(logits(0, 1), 0.15, 1e-15);
}

// Reference GRU cell from the zero state, written out gate by gate.
std::vector<double> reference_cell(const std::vector<double>& x, const Tensor<double>& w_ih,
                                   const Tensor<double>& b_ih, const Tensor<double>& b_hh) {
  const std::size_t h = b_ih.size() / 3;
  auto gate = [&](std::size_t g, std::size_t j) {
    double s = b_ih[g * h + j];
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * w_ih(i, g * h + j);
    return s;
  };
  std::vector<double> out(h);
  for (std::size_t j = 0; j < h; ++j) {
    const double r = 1.0 / (1.0 + std::exp(-(gate(0, j) + b_hh[j])));
    const double z = 1.0 / (1.0 + std::exp(-(gate(1, j) + b_hh[h + j])));
    const double n = std::tanh(gate(2, j) + r * b_hh[2 * h + j]);
    out[j] = (1.0 - z) * n;
  }
  return out;
}

TEST(Model, LengthOneIsOneCellPerLayerAndDirection) {
  auto m = init_model<double>(small_arch(NormKind::kNone), 9);
  std::mt19937_64 rng(9);
  for (auto& [name, t] : m.params.values)
    if (name.find("b_") != std::string::npos) t = testing::random_tensor<double>(rng, t.shape(), 0.5);
  const auto x = testing::random_tensor<double>(rng, {1, 4, 3});
  const auto f = bottleneck_forward(m, x, std::vector<std::uint32_t>{1});

  const std::vector<double> x0(x.data(), x.data() + 3);
  auto cell = [&](const std::vector<double>& in, std::size_t layer, bool reverse) {
    const std::string p = gru_prefix(layer, reverse);
    return reference_cell(in, m.params.at(p + "w_ih"), m.params.at(p + "b_ih"),
                          m.params.at(p + "b_hh"));
  };
  std::vector<double> l0 = cell(x0, 0, false);
  const auto l0b = cell(x0, 0, true);
  l0.insert(l0.end(), l0b.begin(), l0b.end());
  std::vector<double> expected = cell(l0, 1, false);
  const auto l1b = cell(l0, 1, true);
  expected.insert(expected.end(), l1b.begin(), l1b.end());
  ASSERT_EQ(f.size(), expected.size());
  for (std::size_t j = 0; j < expected.size(); ++j) EXPECT_NEAR(f[j], expected[j], 1e-12);
}

TEST(Model, PaddingDoesNotChangeFeatures) {
  std::mt19937_64 rng(4);
  for (NormKind norm : {NormKind::kBatch, NormKind::kLayer, NormKind::kNone}) {
    const auto m = init_model<float>(small_arch(norm), 5);
    for (std::uint32_t len = 1; len <= 4; ++len) {
      const auto tight = testing::random_tensor<float>(rng, {1, len, 3});
      auto padded = testing::random_tensor<float>(rng, {1, 7, 3}, 10.0);
      std::copy_n(tight.data(), tight.size(), padded.data());
      const std::vector<std::uint32_t> l{len};
      const auto a = bottleneck_forward(m, tight, l);
      const auto b = bottleneck_forward(m, padded, l);
      for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a[j], b[j], 1e-6);
    }
  }
}

TEST(Model, EvalForwardDoesNotMutate) {
  const auto m = init_model<float>(small_arch(), 5);
  const auto copy = m;
  std::mt19937_64 rng(4);
  bottleneck_forward(m, testing::random_tensor<float>(rng, {3, 2, 3}),
                     std::vector<std::uint32_t>{1, 2, 2});
  EXPECT_TRUE(m == copy);
}

TEST(Model, TrainingForwardUpdatesRunningStatistics) {
  auto m = init_model<float>(small_arch(), 5);
  const auto before = m.buffers;
  std::mt19937_64 rng(4);
  bottleneck_forward_train(m, testing::random_tensor<float>(rng, {3, 2, 3}),
                           std::vector<std::uint32_t>{1, 2, 2});
  EXPECT_FALSE(m.buffers == before);
}

TEST(Model, ZeroUpstreamGradientGivesZeroGradients) {
  auto m = init_model<double>(small_arch(), 5);
  std::mt19937_64 rng(4);
  ForwardCache<double> cache;
  const auto f = bottleneck_forward_train(m, testing::random_tensor<double>(rng, {3, 2, 3}),
                                          std::vector<std::uint32_t>{1, 2, 2}, &cache);
  classifier_forward(m, f, &cache);
  const auto g = model_backward(m, cache, Tensor<double>({3, 3}));
  EXPECT_EQ(g.size(), m.params.values.size());
  for (const auto& [name, t] : g)
    for (double v : t.values()) EXPECT_EQ(v, 0.0) << name;
}

TEST(Model, FrozenClassifierHasNoGradients) {
  auto m = init_model<double>(small_arch(), 5);
  std::mt19937_64 rng(4);
  ForwardCache<double> cache;
  const auto f = bottleneck_forward_train(m, testing::random_tensor<double>(rng, {3, 2, 3}),
                                          std::vector<std::uint32_t>{1, 2, 2}, &cache);
  classifier_forward(m, f, &cache);
  const auto g = model_backward(m, cache, testing::random_tensor<double>(rng, {3, 3}),
                                FreezeSpec{.classifier = true});
  for (const auto& [name, t] : m.params.values)
    EXPECT_EQ(g.count(name), is_classifier_param(name) ? 0u : 1u) << name;
}

TEST(Model, BackwardWithoutForwardIsAnError) {
  const auto m = init_model<double>(small_arch(), 5);
  EXPECT_THROW(model_backward(m, ForwardCache<double>{}, Tensor<double>({1, 3})), Error);
}

}  // namespace
}  // namespace dtta
