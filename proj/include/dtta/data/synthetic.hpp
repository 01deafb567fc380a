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

#ifndef DTTA_DATA_SYNTHETIC_HPP_
#define DTTA_DATA_SYNTHETIC_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dtta/data/batching.hpp"
#include "dtta/data/dataset.hpp"
#include "dtta/error.hpp"
#include "json.hpp"

namespace dtta {

enum class ShiftKind { kRotation, kTranslation, kMixed };

inline std::string_view to_string(ShiftKind k) {
  switch (k) {
    case ShiftKind::kRotation: return "rotation";
    case ShiftKind::kTranslation: return "translation";
    case ShiftKind::kMixed: return "mixed";
  }
  return "unknown";
}

inline ShiftKind parse_shift_kind(std::string_view s) {
  if (s == "rotation") return ShiftKind::kRotation;
  if (s == "translation") return ShiftKind::kTranslation;
  if (s == "mixed") return ShiftKind::kMixed;
  fail(ErrorKind::kInvalidArgument, "unknown shift kind '" + std::string(s) + "'");
}

// Class-conditional sequences: x_t = mu_y + e_t for t < length, where e is
// an AR(1) Gaussian process with stationary per-dimension scale `noise`.
// The target split draws from the same classes and then applies a
// label-preserving map x -> R x + translation * noise * u, with R a
// rotation in the plane of the discriminative direction u and a random
// orthogonal direction. `magnitude` scales both the angle and the offset.
struct ShiftConfig {
  std::uint32_t k = 2;
  std::uint32_t d = 16;
  std::uint32_t s = 8;
  std::uint32_t n_source = 2000;
  std::uint32_t n_target = 2000;
  std::uint32_t min_length = 4;
  double separation = 1.5;
  double noise = 1.0;
  double temporal_correlation = 0.5;
  ShiftKind kind = ShiftKind::kMixed;
  double rotation_degrees = 30.0;
  double translation = 1.0;  // in units of `noise`
  double magnitude = 1.0;
  std::uint64_t seed = 42;
  std::string task = "synthetic";
  std::string source_dialect = "source";
  std::string target_dialect = "target";

  void validate() const {
    require(k >= 2, ErrorKind::kInvalidArgument, "shift config: k must be >= 2");
    require(d >= 2, ErrorKind::kInvalidArgument, "shift config: d must be >= 2");
    require(s >= 1 && n_source > 0 && n_target > 0, ErrorKind::kInvalidArgument,
            "shift config: s and split sizes must be positive");
    require(min_length >= 1 && min_length <= s, ErrorKind::kInvalidArgument,
            "shift config: min_length must lie in [1, s]");
    require(noise > 0.0 && std::isfinite(noise), ErrorKind::kInvalidArgument,
            "shift config: degenerate covariance (noise must be > 0)");
    require(temporal_correlation >= 0.0 && temporal_correlation < 1.0,
            ErrorKind::kInvalidArgument,
            "shift config: degenerate covariance (temporal_correlation must lie in [0, 1))");
    require(magnitude >= 0.0 && separation >= 0.0, ErrorKind::kInvalidArgument,
            "shift config: magnitude and separation must be >= 0");
  }
};

inline nlohmann::json to_json(const ShiftConfig& c) {
  return {{"k", c.k},
          {"d", c.d},
          {"s", c.s},
          {"n_source", c.n_source},
          {"n_target", c.n_target},
          {"min_length", c.min_length},
          {"separation", c.separation},
          {"noise", c.noise},
          {"temporal_correlation", c.temporal_correlation},
          {"kind", std::string(to_string(c.kind))},
          {"rotation_degrees", c.rotation_degrees},
          {"translation", c.translation},
          {"magnitude", c.magnitude},
          {"seed", c.seed},
          {"task", c.task},
          {"source_dialect", c.source_dialect},
          {"target_dialect", c.target_dialect}};
}

// Unknown keys are rejected.
inline ShiftConfig shift_config_from_json(const nlohmann::json& j) {
  ShiftConfig c;
  require(j.is_object(), ErrorKind::kInvalidArgument, "shift config must be a JSON object");
  const nlohmann::json defaults = to_json(c);
  for (const auto& [key, _] : j.items()) {
    require(defaults.contains(key), ErrorKind::kInvalidArgument,
            "shift config: unknown key '" + key + "'");
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("k", c.k);
    get("d", c.d);
    get("s", c.s);
    get("n_source", c.n_source);
    get("n_target", c.n_target);
    get("min_length", c.min_length);
    get("separation", c.separation);
    get("noise", c.noise);
    get("temporal_correlation", c.temporal_correlation);
    if (j.contains("kind")) c.kind = parse_shift_kind(j.at("kind").get<std::string>());
    get("rotation_degrees", c.rotation_degrees);
    get("translation", c.translation);
    get("magnitude", c.magnitude);
    get("seed", c.seed);
    get("task", c.task);
    get("source_dialect", c.source_dialect);
    get("target_dialect", c.target_dialect);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("shift config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace detail {

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(d);
  double norm = 0.0;
  while (norm < 1e-6) {
    norm = 0.0;
    for (auto& x : v) {
      x = gauss(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
  }
  for (auto& x : v) x /= norm;
  return v;
}

inline EmbeddedDataset draw_split(const ShiftConfig& c, const std::vector<std::vector<double>>& means,
                                  std::uint32_t n, std::mt19937_64& rng, const std::string& dialect,
                                  const std::string& name) {
  EmbeddedDataset ds;
  ds.manifest.name = name;
  ds.manifest.dialect = dialect;
  ds.manifest.task = c.task;
  ds.manifest.metric = MetricKind::kAccuracy;
  ds.manifest.n = n;
  ds.manifest.s = c.s;
  ds.manifest.d = c.d;
  ds.manifest.k = c.k;
  ds.embeddings = Tensor<float>({n, c.s, c.d});
  ds.labels.emplace(n);
  ds.lengths.resize(n);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> length_dist(c.min_length, c.s);
  const double rho = c.temporal_correlation;
  const double innov = std::sqrt(1.0 - rho * rho);
  std::vector<double> e(c.d);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t y = i % c.k;
    (*ds.labels)[i] = y;
    ds.lengths[i] = length_dist(rng);
    for (std::uint32_t t = 0; t < c.s; ++t) {
      for (std::uint32_t j = 0; j < c.d; ++j) {
        const double z = gauss(rng);
        e[j] = t == 0 ? z : rho * e[j] + innov * z;
      }
      if (t >= ds.lengths[i]) continue;
      float* out = ds.embeddings.data() + (static_cast<std::size_t>(i) * c.s + t) * c.d;
      for (std::uint32_t j = 0; j < c.d; ++j)
        out[j] = static_cast<float>(means[y][j] + c.noise * e[j]);
    }
  }
  return ds;
}

}  // namespace detail

// Returns (source, target); both labeled, target labels are for scoring only.
inline std::pair<EmbeddedDataset, EmbeddedDataset> gen_synthetic_shift(const ShiftConfig& c) {
  c.validate();
  auto geometry_rng = make_engine(c.seed, 0x47454fu);
  auto source_rng = make_engine(c.seed, 0x535243u);
  auto target_rng = make_engine(c.seed, 0x545247u);

  // Class means: antipodal for two classes, random directions otherwise.
  std::vector<std::vector<double>> means(c.k);
  const std::vector<double> axis = detail::random_unit(geometry_rng, c.d);
  for (std::uint32_t y = 0; y < c.k; ++y) {
    std::vector<double> dir = c.k == 2 ? axis : detail::random_unit(geometry_rng, c.d);
    const double sign = (c.k == 2 && y == 1) ? -1.0 : 1.0;
    means[y].resize(c.d);
    for (std::uint32_t j = 0; j < c.d; ++j) means[y][j] = sign * 0.5 * c.separation * dir[j];
  }

  // Discriminative direction u and an orthogonal partner w for the rotation plane.
  std::vector<double> u(c.d);
  if (c.k == 2) {
    u = axis;
  } else {
    double norm = 0.0;
    for (std::uint32_t j = 0; j < c.d; ++j) {
      u[j] = means[0][j] - means[1][j];
      norm += u[j] * u[j];
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) u = axis;
    else for (auto& x : u) x /= norm;
  }
  std::vector<double> w = detail::random_unit(geometry_rng, c.d);
  double dot = 0.0;
  for (std::uint32_t j = 0; j < c.d; ++j) dot += w[j] * u[j];
  double wn = 0.0;
  for (std::uint32_t j = 0; j < c.d; ++j) {
    w[j] -= dot * u[j];
    wn += w[j] * w[j];
  }
  wn = std::sqrt(wn);
  for (auto& x : w) x /= wn;

  EmbeddedDataset source = detail::draw_split(c, means, c.n_source, source_rng, c.source_dialect,
                                              c.task + "." + c.source_dialect);
  EmbeddedDataset target = detail::draw_split(c, means, c.n_target, target_rng, c.target_dialect,
                                              c.task + "." + c.target_dialect);

  const bool rotate = c.kind != ShiftKind::kTranslation;
  const bool translate = c.kind != ShiftKind::kRotation;
  const double theta = rotate ? c.magnitude * c.rotation_degrees * std::numbers::pi / 180.0 : 0.0;
  const double offset = translate ? c.magnitude * c.translation * c.noise : 0.0;
  const double cs = std::cos(theta), sn = std::sin(theta);
  if (theta != 0.0 || offset != 0.0) {
    for (std::uint32_t i = 0; i < target.manifest.n; ++i) {
      for (std::uint32_t t = 0; t < target.lengths[i]; ++t) {
        float* x = target.embeddings.data() + (static_cast<std::size_t>(i) * c.s + t) * c.d;
        double a = 0.0, b = 0.0;
        for (std::uint32_t j = 0; j < c.d; ++j) {
          a += x[j] * u[j];
          b += x[j] * w[j];
        }
        const double ra = cs * a - sn * b, rb = sn * a + cs * b;
        for (std::uint32_t j = 0; j < c.d; ++j) {
          const double rotated = x[j] + (ra - a) * u[j] + (rb - b) * w[j];
          x[j] = static_cast<float>(rotated + offset * u[j]);
        }
      }
    }
  }
  source.manifest.extra = {{"generator", "synthetic_shift"}, {"shift", to_json(c)}};
  target.manifest.extra = source.manifest.extra;
  return {std::move(source), std::move(target)};
}

}  // namespace dtta

#endif  // DTTA_DATA_SYNTHETIC_HPP_
