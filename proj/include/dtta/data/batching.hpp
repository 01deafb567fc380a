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

#ifndef DTTA_DATA_BATCHING_HPP_
#define DTTA_DATA_BATCHING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "dtta/data/dataset.hpp"
#include "dtta/error.hpp"
#include "dtta/numerics/tensor.hpp"

namespace dtta {

// Seeded engine for a (seed, stream, epoch) triple so that every epoch's
// order is reproducible on its own.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t epoch = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(epoch),
                    static_cast<std::uint32_t>(epoch >> 32)};
  return std::mt19937_64(seq);
}

inline constexpr std::uint64_t kShuffleStream = 0x5348u;
inline constexpr std::uint64_t kAdaptShuffleStream = 0x414450u;

// Index batches covering [0, n) exactly once. The last batch may be short.
inline std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size,
                                                           bool shuffle, std::uint64_t seed,
                                                           std::uint64_t epoch = 0,
                                                           std::uint64_t stream = kShuffleStream) {
  require(n > 0, ErrorKind::kInvalidArgument, "batching: empty dataset");
  require(batch_size >= 1, ErrorKind::kInvalidArgument, "batching: batch_size must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    auto rng = make_engine(seed, stream, epoch);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

inline std::vector<std::vector<std::size_t>> batch_iter(const EmbeddedDataset& ds,
                                                        std::size_t batch_size, std::uint64_t seed,
                                                        bool shuffle, std::uint64_t epoch = 0) {
  return batch_indices(ds.size(), batch_size, shuffle, seed, epoch);
}

template <typename T>
struct Batch {
  Tensor<T> x;                          // [B, S, D]
  std::vector<std::uint32_t> lengths;
  std::vector<std::uint32_t> labels;    // empty when gathered without labels
  std::vector<std::size_t> indices;     // positions in the source dataset
};

template <typename T>
Batch<T> gather(const EmbeddedDataset& ds, std::span<const std::size_t> indices,
                bool with_labels) {
  const std::size_t s = ds.manifest.s, d = ds.manifest.d;
  Batch<T> b;
  b.x = Tensor<T>({indices.size(), s, d});
  b.indices.assign(indices.begin(), indices.end());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    require(src < ds.size(), ErrorKind::kInvalidArgument, "gather: index out of range");
    const float* from = ds.embeddings.data() + src * s * d;
    std::transform(from, from + s * d, b.x.data() + i * s * d,
                   [](float v) { return static_cast<T>(v); });
    b.lengths.push_back(ds.lengths[src]);
    if (with_labels) {
      require(ds.labeled(), ErrorKind::kInvalidArgument,
              "gather: dataset '" + ds.manifest.name + "' has no labels");
      b.labels.push_back((*ds.labels)[src]);
    }
  }
  return b;
}

inline EmbeddedDataset subset(const EmbeddedDataset& ds, std::span<const std::size_t> indices,
                              std::string name) {
  EmbeddedDataset out;
  out.manifest = ds.manifest;
  out.manifest.name = std::move(name);
  out.manifest.n = static_cast<std::uint32_t>(indices.size());
  const std::size_t row = static_cast<std::size_t>(ds.manifest.s) * ds.manifest.d;
  out.embeddings = Tensor<float>({indices.size(), ds.manifest.s, ds.manifest.d});
  if (ds.labels) out.labels.emplace();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(ds.embeddings.data() + indices[i] * row, row, out.embeddings.data() + i * row);
    out.lengths.push_back(ds.lengths[indices[i]]);
    if (ds.labels) out.labels->push_back((*ds.labels)[indices[i]]);
  }
  return out;
}

// Per-class stratified split. Each class's examples are shuffled with the
// seed and dealt out by largest remainder; every split keeps file order.
inline std::vector<EmbeddedDataset> split(const EmbeddedDataset& ds, std::span<const double> fractions,
                                          std::uint64_t seed) {
  require(!fractions.empty(), ErrorKind::kInvalidArgument, "split: no fractions given");
  require(ds.labeled(), ErrorKind::kInvalidArgument, "split: stratification needs labels");
  double total = 0.0;
  for (double f : fractions) {
    require(f > 0.0, ErrorKind::kInvalidArgument, "split: fractions must be positive");
    total += f;
  }
  require(std::abs(total - 1.0) <= 1e-9, ErrorKind::kInvalidArgument,
          "split: fractions sum to " + std::to_string(total) + ", expected 1");

  const std::uint32_t k = ds.manifest.k;
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[(*ds.labels)[i]].push_back(i);

  auto rng = make_engine(seed, 0x53504cu);
  std::vector<std::vector<std::size_t>> parts(fractions.size());
  for (std::uint32_t c = 0; c < k; ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t m = members.size();
    std::vector<std::size_t> counts(fractions.size());
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t assigned = 0;
    for (std::size_t p = 0; p < fractions.size(); ++p) {
      const double exact = fractions[p] * static_cast<double>(m);
      counts[p] = static_cast<std::size_t>(std::floor(exact));
      assigned += counts[p];
      rema.emplace_back(exact - std::floor(exact), p);
    }
    std::stable_sort(rema.begin(), rema.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < m; ++r, ++assigned) ++counts[rema[r % rema.size()].second];
    std::size_t pos = 0;
    for (std::size_t p = 0; p < fractions.size(); ++p) {
      require(counts[p] > 0, ErrorKind::kInvalidArgument,
              "split: part " + std::to_string(p) + " would receive no examples of class " +
                  std::to_string(c));
      parts[p].insert(parts[p].end(), members.begin() + static_cast<std::ptrdiff_t>(pos),
                      members.begin() + static_cast<std::ptrdiff_t>(pos + counts[p]));
      pos += counts[p];
    }
  }

  std::vector<EmbeddedDataset> out;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    std::sort(parts[p].begin(), parts[p].end());
    out.push_back(subset(ds, parts[p], ds.manifest.name + ".part" + std::to_string(p)));
  }
  return out;
}

}  // namespace dtta

#endif  // DTTA_DATA_BATCHING_HPP_
