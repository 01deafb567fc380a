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

#include <sstream>

#include "dtta/dtta.hpp"
#include "test_util.hpp"

namespace dtta {
namespace {

using testing::error_kind;
using testing::toy_dataset;

HyperParams small(std::uint32_t epochs = 4, std::uint32_t adapt_epochs = 4) {
  HyperParams hp;
  hp.epochs = epochs;
  hp.adapt_epochs = adapt_epochs;
  hp.gru_hidden = 8;
  hp.classifier_hidden = 8;
  hp.seed = 7;
  return hp;
}

ShiftConfig small_shift(std::uint64_t seed, double magnitude = 1.0) {
  ShiftConfig c;
  c.n_source = 400;
  c.n_target = 400;
  c.d = 8;
  c.s = 6;
  c.seed = seed;
  c.magnitude = magnitude;
  return c;
}

TEST(TrainSource, ZeroEpochsIsTheInitialization) {
  const EmbeddedDataset ds = toy_dataset(40, 5, 4, 3, 1);
  const HyperParams hp = small(0);
  const auto model = train_source(ds, hp);
  const auto init = init_model<float>(hp.architecture(4, 3), hp.seed);
  EXPECT_EQ(encode_checkpoint(model), encode_checkpoint(init));
}

TEST(TrainSource, SameSeedIsBitIdentical) {
  const EmbeddedDataset ds = toy_dataset(70, 5, 4, 3, 2);
  const HyperParams hp = small(2);
  EXPECT_EQ(encode_checkpoint(train_source(ds, hp)), encode_checkpoint(train_source(ds, hp)));
  HyperParams other = hp;
  other.seed = 8;
  EXPECT_NE(encode_checkpoint(train_source(ds, hp)), encode_checkpoint(train_source(ds, other)));
}

TEST(TrainSource, FitsASeparableSet) {
  const EmbeddedDataset ds = toy_dataset(240, 6, 8, 3, 3);
  HyperParams hp = small(15);
  hp.gru_hidden = 16;
  hp.classifier_hidden = 16;
  const auto model = train_source(ds, hp);
  EXPECT_GE(evaluate(model, ds), 95.0);
}

TEST(TrainSource, EveryNormKindTrains) {
  const EmbeddedDataset ds = toy_dataset(65, 4, 4, 2, 4);  // trailing batch of one
  for (NormKind kind : {NormKind::kBatch, NormKind::kLayer, NormKind::kNone}) {
    HyperParams hp = small(3);
    hp.norm = kind;
    MetricsLog log;
    const auto model = train_source(ds, hp, &log);
    ASSERT_EQ(log.epochs.size(), 3u);
    EXPECT_EQ(log.epochs[0].batches, kind == NormKind::kBatch ? 2u : 3u) << to_string(kind);
    for (const auto& [name, t] : model.params.values)
      for (float v : t.values()) ASSERT_TRUE(std::isfinite(v)) << name;
  }
}

TEST(TrainSource, RejectsUnlabeledData) {
  EmbeddedDataset ds = toy_dataset(10, 3, 4, 2, 5);
  ds.labels.reset();
  EXPECT_EQ(error_kind([&] { train_source(ds, small(1)); }), ErrorKind::kInvalidArgument);
}

TEST(Adapt, ClassifierIsUntouched) {
  const auto [source, target] = gen_synthetic_shift(small_shift(11));
  const HyperParams hp = small(3, 3);
  const auto model = train_source(source, hp);
  const auto adapted = adapt(model, target, hp);
  EXPECT_EQ(classifier_digest(adapted), classifier_digest(model));
  bool moved = false;
  for (const auto& [name, t] : model.params.values) {
    if (is_classifier_param(name)) {
      EXPECT_EQ(t, adapted.params.at(name)) << name;
    } else if (!(t == adapted.params.at(name))) {
      moved = true;
    }
  }
  EXPECT_TRUE(moved);
}

TEST(Adapt, ZeroLearningRateChangesNoParameter) {
  const auto [source, target] = gen_synthetic_shift(small_shift(12));
  HyperParams hp = small(2, 2);
  const auto model = train_source(source, hp);
  hp.eta0 = 0.0;
  const auto adapted = adapt(model, target, hp);
  for (const auto& [name, t] : model.params.values)
    EXPECT_EQ(t, adapted.params.at(name)) << name;
}

TEST(Adapt, NeverReadsTargetLabels) {
  auto [source, target] = gen_synthetic_shift(small_shift(13));
  const HyperParams hp = small(2, 2);
  const auto model = train_source(source, hp);
  const auto with_labels = adapt(model, target, hp);
  target.labels.reset();
  EXPECT_EQ(encode_checkpoint(adapt(model, target, hp)), encode_checkpoint(with_labels));
}

TEST(Adapt, DeterministicPerSeed) {
  const auto [source, target] = gen_synthetic_shift(small_shift(14));
  const HyperParams hp = small(2, 2);
  const auto model = train_source(source, hp);
  EXPECT_EQ(encode_checkpoint(adapt(model, target, hp)), encode_checkpoint(adapt(model, target, hp)));
}

TEST(Adapt, RejectsMismatchedDataset) {
  const EmbeddedDataset ds = toy_dataset(20, 3, 4, 2, 6);
  const auto model = train_source(ds, small(1));
  std::string msg;
  EXPECT_EQ(error_kind([&] { adapt(model, toy_dataset(20, 3, 5, 2, 6), small(1)); }, &msg),
            ErrorKind::kInvalidArgument);
  EXPECT_NE(msg.find("D=5"), std::string::npos) << msg;
  EXPECT_EQ(error_kind([&] { adapt(model, toy_dataset(20, 3, 4, 3, 6), small(1)); }, &msg),
            ErrorKind::kInvalidArgument);
  EXPECT_NE(msg.find("K=3"), std::string::npos) << msg;
}

TEST(Shift, LowersTargetAccuracy) {
  const auto [source, target] = gen_synthetic_shift(small_shift(15));
  HyperParams hp = small(8);
  hp.gru_hidden = 16;
  hp.classifier_hidden = 16;
  const auto model = train_source(source, hp);
  EXPECT_GT(evaluate(model, source), evaluate(model, target) + 5.0);
}

TEST(Adapt, SameDistributionCostsAtMostAPoint) {
  ShiftConfig c;
  c.seed = 100;
  c.magnitude = 0.0;
  const auto [source, target] = gen_synthetic_shift(c);
  HyperParams hp = small(10, 10);
  hp.gru_hidden = 16;
  hp.classifier_hidden = 16;
  hp.seed = 0;
  const auto model = train_source(source, hp);
  const double before = evaluate(model, target);
  const double after = evaluate(adapt(model, target, hp), target);
  EXPECT_GE(after, before - 1.0) << before << " -> " << after;
}

TEST(MetricsLog, OneRowPerEpoch) {
  const auto [source, target] = gen_synthetic_shift(small_shift(17));
  const HyperParams hp = small(3, 2);
  MetricsLog log;
  const auto model = train_source(source, hp, &log);
  adapt(model, target, hp, &log);
  const std::string csv = log.to_csv();
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "phase,epoch,loss,cross_entropy,entropy,diversity,pseudo_ce,lr");
  EXPECT_EQ(lines[1].rfind("train,0,", 0), 0u);
  EXPECT_EQ(lines[5].rfind("adapt,1,", 0), 0u);
  for (const auto& r : log.epochs) {
    EXPECT_TRUE(std::isfinite(r.loss));
    EXPECT_GT(r.lr, 0.0);
    EXPECT_LE(r.lr, hp.eta0);
    if (r.phase == "adapt") {
      EXPECT_LE(r.diversity, 0.0);
      EXPECT_NEAR(r.loss, r.entropy + r.diversity + hp.cls_multiplier * r.pseudo_ce, 1e-4);
    }
  }
}

}  // namespace
}  // namespace dtta
