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

#ifndef DTTA_MODEL_CHECKPOINT_HPP_
#define DTTA_MODEL_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "dtta/error.hpp"
#include "dtta/model/model.hpp"
#include "dtta/util/binary_io.hpp"
#include "dtta/util/sha256.hpp"

namespace dtta {

// Checkpoint layout (little-endian):
//
//   "DTTACKPT"                       8 bytes
//   u32 version                      = 1
//   u64 body length                  bytes between this field and the digests
//   body:
//     u32 input_dim, u32 gru_hidden, u32 classifier_hidden,
//     u32 num_classes, u32 norm kind, u32 gru layers
//     u32 tensor count
//     per tensor (name order): u32 name length, name bytes,
//                              u32 rank, rank x u32 dims, f32 values
//   32 bytes  SHA-256 of the classifier tensor records
//   32 bytes  SHA-256 of every preceding byte
//
// Running statistics are stored as ordinary tensors named norm.running_*.
inline constexpr char kCheckpointMagic[] = "DTTACKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_tensor_record(ByteWriter& w, const std::string& name, const Tensor<float>& t) {
  w.str(name);
  w.u32(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
  w.array(t.values());
}

}  // namespace detail

// SHA-256 over the classifier's tensor records, exactly as they appear in
// a checkpoint. Adaptation must leave this unchanged.
inline Digest classifier_digest(const ModelState<float>& state) {
  ByteWriter w;
  for (const auto& [name, t] : state.params.values)
    if (is_classifier_param(name)) detail::write_tensor_record(w, name, t);
  return sha256(w.bytes());
}

// Serializes without validating; save_checkpoint is the checked entry point.
inline Bytes encode_checkpoint(const ModelState<float>& state) {
  ByteWriter body;
  const Architecture& a = state.arch;
  body.u32(a.input_dim);
  body.u32(a.gru_hidden);
  body.u32(a.classifier_hidden);
  body.u32(a.num_classes);
  body.u32(static_cast<std::uint32_t>(a.norm));
  body.u32(static_cast<std::uint32_t>(kGruLayers));
  TensorMap<float> all;
  for (const auto& [name, t] : state.params.values) all.emplace(name, t);
  for (const auto& [name, t] : state.buffers) all.emplace(name, t);
  body.u32(static_cast<std::uint32_t>(all.size()));
  for (const auto& [name, t] : all) detail::write_tensor_record(body, name, t);

  ByteWriter out;
  out.magic(std::string_view(kCheckpointMagic, 8));
  out.u32(kCheckpointVersion);
  const std::uint64_t body_len = body.bytes().size();
  out.raw(&body_len, sizeof body_len);
  out.raw(body.bytes().data(), body.bytes().size());
  const Digest cls = classifier_digest(state);
  out.raw(cls.data(), cls.size());
  const Digest file = sha256(out.bytes());
  out.raw(file.data(), file.size());
  return std::move(out.bytes());
}

inline ModelState<float> decode_checkpoint(std::span<const std::uint8_t> bytes,
                                           const std::string& source) {
  ByteReader r(bytes, source);
  r.expect_magic(std::string_view(kCheckpointMagic, 8));
  const std::uint32_t version = r.u32("version");
  require(version == kCheckpointVersion, ErrorKind::kFormat,
          source + ": unsupported checkpoint version " + std::to_string(version) +
              " (expected " + std::to_string(kCheckpointVersion) + ")");
  std::uint64_t body_len = 0;
  r.raw(&body_len, sizeof body_len, "body length");
  const std::size_t header = r.position();
  if (bytes.size() < header + body_len + 64) {
    fail(ErrorKind::kFormat, source + ": truncated checkpoint (" + std::to_string(bytes.size()) +
                                 " bytes, header declares " +
                                 std::to_string(header + body_len + 64) + ")");
  }
  require(bytes.size() == header + body_len + 64, ErrorKind::kFormat,
          source + ": trailing bytes after checkpoint digests");
  const auto stored_file = bytes.subspan(header + body_len + 32, 32);
  const Digest actual_file = sha256(bytes.first(header + body_len + 32));
  if (!std::equal(stored_file.begin(), stored_file.end(), actual_file.begin())) {
    fail(ErrorKind::kDigest, source + ": checkpoint digest mismatch (file is corrupt)");
  }

  ModelState<float> state;
  Architecture& a = state.arch;
  a.input_dim = r.u32("input_dim");
  a.gru_hidden = r.u32("gru_hidden");
  a.classifier_hidden = r.u32("classifier_hidden");
  a.num_classes = r.u32("num_classes");
  const std::uint32_t norm = r.u32("norm kind");
  require(norm <= static_cast<std::uint32_t>(NormKind::kNone), ErrorKind::kFormat,
          source + ": unknown norm kind " + std::to_string(norm));
  a.norm = static_cast<NormKind>(norm);
  const std::uint32_t layers = r.u32("gru layers");
  require(layers == kGruLayers, ErrorKind::kFormat,
          source + ": unsupported gru layer count " + std::to_string(layers));
  const std::uint32_t count = r.u32("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str("tensor name");
    const std::uint32_t rank = r.u32(name + " rank");
    require(rank <= 4, ErrorKind::kFormat, source + ": " + name + " has implausible rank");
    Shape shape(rank);
    for (auto& d : shape) d = r.u32(name + " dims");
    Tensor<float> t(shape);
    r.array(t.values(), name + " values");
    auto& dest = name.starts_with("norm.running_") ? state.buffers : state.params.values;
    require(dest.emplace(name, std::move(t)).second, ErrorKind::kFormat,
            source + ": duplicate tensor " + name);
  }
  require(r.position() == header + body_len, ErrorKind::kFormat,
          source + ": body length does not match its contents");
  state.validate();

  const auto stored_cls = bytes.subspan(header + body_len, 32);
  const Digest actual_cls = classifier_digest(state);
  if (!std::equal(stored_cls.begin(), stored_cls.end(), actual_cls.begin())) {
    fail(ErrorKind::kDigest, source + ": classifier digest mismatch");
  }
  return state;
}

inline void save_checkpoint(const ModelState<float>& state, const std::filesystem::path& path) {
  state.validate();
  write_file(path, encode_checkpoint(state));
}

inline ModelState<float> load_checkpoint(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  return decode_checkpoint(bytes, path.string());
}

// Classifier digest of a checkpoint file; loading verifies it against the
// stored copy.
inline Digest stored_classifier_digest(const std::filesystem::path& path) {
  return classifier_digest(load_checkpoint(path));
}

}  // namespace dtta

#endif  // DTTA_MODEL_CHECKPOINT_HPP_
