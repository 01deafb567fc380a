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

#ifndef DTTA_DATA_DATASET_HPP_
#define DTTA_DATA_DATASET_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dtta/error.hpp"
#include "dtta/metrics/metric_kind.hpp"
#include "dtta/numerics/tensor.hpp"
#include "dtta/util/binary_io.hpp"
#include "dtta/util/sha256.hpp"
#include "json.hpp"

namespace dtta {

// A dataset is a directory:
//
//   manifest.json   metadata plus the SHA-256 of every payload file
//   embeddings.bin  "EMB1", u32 N, u32 S, u32 D, N*S*D f32
//                   (example-major, then position, then dim)
//   labels.bin      "LBL1", u32 N, N x u32          (absent for target-only)
//   lengths.bin     "LEN1", u32 N, N x u32          (absent => every length is S)
//
// All integers and floats are little-endian. Positions at or beyond an
// example's length are padding.
inline constexpr char kEmbeddingsFile[] = "embeddings.bin";
inline constexpr char kLabelsFile[] = "labels.bin";
inline constexpr char kLengthsFile[] = "lengths.bin";
inline constexpr char kManifestFile[] = "manifest.json";
inline constexpr int kDatasetFormatVersion = 1;

struct DatasetManifest {
  std::string name;
  std::string dialect;
  std::string task;
  MetricKind metric = MetricKind::kAccuracy;
  std::uint32_t n = 0;  // examples
  std::uint32_t s = 0;  // positions per example
  std::uint32_t d = 0;  // embedding width
  std::uint32_t k = 0;  // classes
  // Producer-specific keys (encoder name, max length, ...) preserved as-is.
  nlohmann::json extra = nlohmann::json::object();
};

struct EmbeddedDataset {
  DatasetManifest manifest;
  Tensor<float> embeddings;                          // [N, S, D]
  std::vector<std::uint32_t> lengths;                // [N]
  std::optional<std::vector<std::uint32_t>> labels;  // [N] when labeled

  std::size_t size() const { return manifest.n; }
  bool labeled() const { return labels.has_value(); }

  void validate() const {
    const auto& m = manifest;
    require(m.n > 0 && m.s > 0 && m.d > 0, ErrorKind::kFormat,
            "dataset '" + m.name + "': N, S and D must be positive");
    require(m.k >= 2, ErrorKind::kFormat, "dataset '" + m.name + "': K must be >= 2");
    require(embeddings.shape() == Shape{m.n, m.s, m.d}, ErrorKind::kFormat,
            "dataset '" + m.name + "': embeddings shape " + shape_string(embeddings.shape()) +
                " does not match manifest");
    require(lengths.size() == m.n, ErrorKind::kFormat,
            "dataset '" + m.name + "': lengths count does not match N");
    for (std::size_t i = 0; i < m.n; ++i) {
      require(lengths[i] >= 1 && lengths[i] <= m.s, ErrorKind::kFormat,
              "dataset '" + m.name + "': example " + std::to_string(i) + " has length " +
                  std::to_string(lengths[i]) + " outside [1, " + std::to_string(m.s) + "]");
    }
    if (labels) {
      require(labels->size() == m.n, ErrorKind::kFormat,
              "dataset '" + m.name + "': labels count does not match N");
      for (std::size_t i = 0; i < m.n; ++i) {
        require((*labels)[i] < m.k, ErrorKind::kFormat,
                "dataset '" + m.name + "': example " + std::to_string(i) + " has label " +
                    std::to_string((*labels)[i]) + " outside [0, " + std::to_string(m.k) + ")");
      }
    }
    const std::size_t per = static_cast<std::size_t>(m.s) * m.d;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
      if (!std::isfinite(embeddings[i])) {
        fail(ErrorKind::kFormat, "dataset '" + m.name + "': example " + std::to_string(i / per) +
                                     " has a non-finite embedding value");
      }
    }
  }
};

namespace detail {

inline Bytes encode_embeddings(const EmbeddedDataset& ds) {
  ByteWriter w;
  w.magic("EMB1");
  w.u32(ds.manifest.n);
  w.u32(ds.manifest.s);
  w.u32(ds.manifest.d);
  w.array(ds.embeddings.values());
  return std::move(w.bytes());
}

inline Bytes encode_u32_file(std::string_view magic, const std::vector<std::uint32_t>& v) {
  ByteWriter w;
  w.magic(magic);
  w.u32(static_cast<std::uint32_t>(v.size()));
  w.array(std::span<const std::uint32_t>(v));
  return std::move(w.bytes());
}

inline std::vector<std::uint32_t> decode_u32_file(const Bytes& bytes, std::string_view magic,
                                                  std::uint32_t n, const std::string& source,
                                                  const char* what) {
  ByteReader r(bytes, source);
  r.expect_magic(magic);
  const std::uint32_t count = r.u32("count");
  require(count == n, ErrorKind::kFormat,
          source + ": manifest declares N=" + std::to_string(n) + " but file header has " +
              std::to_string(count));
  if (r.remaining() < static_cast<std::size_t>(n) * 4) {
    fail(ErrorKind::kFormat, source + ": truncated: declared N=" + std::to_string(n) + " but " +
                                 std::to_string(r.remaining() / 4) + " " + what +
                                 " present");
  }
  std::vector<std::uint32_t> out(n);
  r.array(std::span(out), what);
  require(r.remaining() == 0, ErrorKind::kFormat, source + ": trailing bytes");
  return out;
}

}  // namespace detail

inline void save_dataset(const EmbeddedDataset& ds, const std::filesystem::path& dir) {
  ds.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::object();

  const Bytes emb = detail::encode_embeddings(ds);
  write_file(dir / kEmbeddingsFile, emb);
  files[kEmbeddingsFile] = to_hex(sha256(emb));

  std::filesystem::remove(dir / kLabelsFile);
  if (ds.labels) {
    const Bytes lab = detail::encode_u32_file("LBL1", *ds.labels);
    write_file(dir / kLabelsFile, lab);
    files[kLabelsFile] = to_hex(sha256(lab));
  }
  std::filesystem::remove(dir / kLengthsFile);
  const bool all_full = std::all_of(ds.lengths.begin(), ds.lengths.end(),
                                    [&](std::uint32_t l) { return l == ds.manifest.s; });
  if (!all_full) {
    const Bytes len = detail::encode_u32_file("LEN1", ds.lengths);
    write_file(dir / kLengthsFile, len);
    files[kLengthsFile] = to_hex(sha256(len));
  }

  const auto& m = ds.manifest;
  nlohmann::json j = m.extra;
  j["format_version"] = kDatasetFormatVersion;
  j["name"] = m.name;
  j["dialect"] = m.dialect;
  j["task"] = m.task;
  j["metric"] = std::string(to_string(m.metric));
  j["n"] = m.n;
  j["s"] = m.s;
  j["d"] = m.d;
  j["k"] = m.k;
  j["files"] = files;
  write_text(dir / kManifestFile, j.dump(2) + "\n");
}

inline EmbeddedDataset load_dataset(const std::filesystem::path& dir) {
  const std::string where = dir.string();
  require(std::filesystem::is_directory(dir), ErrorKind::kIo,
          "dataset '" + where + "' is not a directory");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(dir / kManifestFile));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, where + "/manifest.json: " + e.what());
  }

  EmbeddedDataset ds;
  DatasetManifest& m = ds.manifest;
  nlohmann::json files;
  try {
    const int version = j.at("format_version").get<int>();
    require(version == kDatasetFormatVersion, ErrorKind::kFormat,
            where + ": unsupported dataset format version " + std::to_string(version));
    m.name = j.at("name").get<std::string>();
    m.dialect = j.at("dialect").get<std::string>();
    m.task = j.at("task").get<std::string>();
    m.metric = parse_metric_kind(j.at("metric").get<std::string>());
    m.n = j.at("n").get<std::uint32_t>();
    m.s = j.at("s").get<std::uint32_t>();
    m.d = j.at("d").get<std::uint32_t>();
    m.k = j.at("k").get<std::uint32_t>();
    files = j.at("files");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, where + "/manifest.json: " + e.what());
  }
  for (const char* key : {"format_version", "name", "dialect", "task", "metric", "n", "s", "d",
                          "k", "files"})
    j.erase(key);
  m.extra = std::move(j);
  require(m.n > 0 && m.s > 0 && m.d > 0, ErrorKind::kFormat,
          where + ": N, S and D must be positive");

  auto checked_read = [&](const char* file) {
    require(files.contains(file), ErrorKind::kFormat,
            where + ": manifest has no digest for " + file);
    Bytes bytes = read_file(dir / file);
    const std::string actual = to_hex(sha256(bytes));
    require(files.at(file).get<std::string>() == actual, ErrorKind::kDigest,
            where + "/" + file + ": digest mismatch");
    return bytes;
  };
  for (const auto& [file, _] : files.items()) {
    require(file == kEmbeddingsFile || file == kLabelsFile || file == kLengthsFile,
            ErrorKind::kFormat, where + ": manifest lists unknown payload '" + file + "'");
  }

  {
    const Bytes bytes = checked_read(kEmbeddingsFile);
    ByteReader r(bytes, where + "/" + kEmbeddingsFile);
    r.expect_magic("EMB1");
    const std::uint32_t n = r.u32("N"), s = r.u32("S"), d = r.u32("D");
    require(n == m.n && s == m.s && d == m.d, ErrorKind::kFormat,
            r.source() + ": header (N=" + std::to_string(n) + ", S=" + std::to_string(s) +
                ", D=" + std::to_string(d) + ") does not match manifest");
    const std::size_t row_bytes = static_cast<std::size_t>(s) * d * sizeof(float);
    if (r.remaining() < row_bytes * n) {
      fail(ErrorKind::kFormat, r.source() + ": truncated: declared N=" + std::to_string(n) +
                                   " but " + std::to_string(r.remaining() / row_bytes) +
                                   " rows present");
    }
    require(r.remaining() == row_bytes * n, ErrorKind::kFormat, r.source() + ": trailing bytes");
    ds.embeddings = Tensor<float>({n, s, d});
    r.array(ds.embeddings.values(), "embeddings");
  }

  if (files.contains(kLabelsFile)) {
    ds.labels = detail::decode_u32_file(checked_read(kLabelsFile), "LBL1", m.n,
                                        where + "/" + kLabelsFile, "labels");
  } else {
    require(!std::filesystem::exists(dir / kLabelsFile), ErrorKind::kFormat,
            where + ": labels.bin present but not listed in manifest");
  }
  if (files.contains(kLengthsFile)) {
    ds.lengths = detail::decode_u32_file(checked_read(kLengthsFile), "LEN1", m.n,
                                         where + "/" + kLengthsFile, "lengths");
  } else {
    ds.lengths.assign(m.n, m.s);
  }
  ds.validate();
  return ds;
}

}  // namespace dtta

#endif  // DTTA_DATA_DATASET_HPP_
