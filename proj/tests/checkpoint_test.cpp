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

#include "dtta/dtta.hpp"
#include "test_util.hpp"

namespace dtta {
namespace {

ModelState<float> trained_like_model() {
  Architecture a;
  a.input_dim = 4;
  a.gru_hidden = 3;
  a.classifier_hidden = 5;
  a.num_classes = 2;
  auto m = init_model<float>(a, 17);
  m.buffers.at("norm.running_mean")[1] = 0.25f;
  return m;
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  testing::TempDir tmp;
  for (NormKind norm : {NormKind::kBatch, NormKind::kLayer, NormKind::kNone}) {
    Architecture a = trained_like_model().arch;
    a.norm = norm;
    const auto m = init_model<float>(a, 3);
    save_checkpoint(m, tmp / "m.ckpt");
    EXPECT_TRUE(load_checkpoint(tmp / "m.ckpt") == m);
    EXPECT_EQ(stored_classifier_digest(tmp / "m.ckpt"), classifier_digest(m));
  }
}

TEST(Checkpoint, EncodingIsDeterministic) {
  EXPECT_EQ(encode_checkpoint(trained_like_model()), encode_checkpoint(trained_like_model()));
}

TEST(Checkpoint, CorruptPayloadByteIsDigestError) {
  Bytes bytes = encode_checkpoint(trained_like_model());
  bytes[bytes.size() / 2] ^= 0x40;
  try {
    decode_checkpoint(bytes, "mem");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDigest);
  }
}

TEST(Checkpoint, TruncationIsFormatError) {
  Bytes bytes = encode_checkpoint(trained_like_model());
  bytes.resize(bytes.size() - 10);
  try {
    decode_checkpoint(bytes, "mem");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
}

TEST(Checkpoint, WrongMagicIsRejected) {
  Bytes bytes = encode_checkpoint(trained_like_model());
  bytes[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bytes, "mem"), Error);
}

TEST(Checkpoint, DeclaredClassCountMismatchNamesTheTensor) {
  auto m = trained_like_model();
  m.arch.num_classes = 3;
  try {
    decode_checkpoint(encode_checkpoint(m), "mem");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("classifier.fc2"), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, SaveRejectsInconsistentState) {
  testing::TempDir tmp;
  auto m = trained_like_model();
  m.params.values.erase("classifier.fc1.bias");
  EXPECT_THROW(save_checkpoint(m, tmp / "m.ckpt"), Error);
}

TEST(Checkpoint, MissingFileIsIoError) {
  try {
    load_checkpoint("/nonexistent/dir/m.ckpt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(Checkpoint, ClassifierDigestIgnoresBottleneck) {
  auto a = trained_like_model();
  auto b = a;
  b.params.at("bottleneck.l0.fwd.w_ih")[0] += 1.0f;
  EXPECT_EQ(classifier_digest(a), classifier_digest(b));
  b.params.at("classifier.fc2.bias")[0] += 1.0f;
  EXPECT_NE(classifier_digest(a), classifier_digest(b));
}

}  // namespace
}  // namespace dtta
