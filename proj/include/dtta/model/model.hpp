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

#ifndef DTTA_MODEL_MODEL_HPP_
#define DTTA_MODEL_MODEL_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dtta/error.hpp"
#include "dtta/model/gru.hpp"
#include "dtta/model/norm.hpp"
#include "dtta/numerics/ops.hpp"
#include "dtta/numerics/optim.hpp"
#include "dtta/numerics/tensor.hpp"

namespace dtta {

inline constexpr std::size_t kGruLayers = 2;

struct Architecture {
  std::uint32_t input_dim = 0;            // D, width of the frozen embeddings
  std::uint32_t gru_hidden = 256;         // H, per direction
  std::uint32_t classifier_hidden = 256;
  std::uint32_t num_classes = 2;          // K
  NormKind norm = NormKind::kBatch;

  std::size_t feature_dim() const { return 2 * static_cast<std::size_t>(gru_hidden); }

  void validate() const {
    require(input_dim > 0, ErrorKind::kInvalidArgument, "architecture: input_dim must be > 0");
    require(gru_hidden > 0, ErrorKind::kInvalidArgument, "architecture: gru_hidden must be > 0");
    require(classifier_hidden > 0, ErrorKind::kInvalidArgument,
            "architecture: classifier_hidden must be > 0");
    require(num_classes >= 2, ErrorKind::kInvalidArgument,
            "architecture: num_classes must be >= 2");
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

inline std::string gru_prefix(std::size_t layer, bool reverse) {
  return "bottleneck.l" + std::to_string(layer) + (reverse ? ".bwd." : ".fwd.");
}

// Name -> shape of every trainable tensor, in map (checkpoint) order.
inline std::map<std::string, Shape> parameter_shapes(const Architecture& a) {
  std::map<std::string, Shape> out;
  const std::size_t h = a.gru_hidden;
  for (std::size_t layer = 0; layer < kGruLayers; ++layer) {
    const std::size_t in = layer == 0 ? a.input_dim : 2 * h;
    for (bool reverse : {false, true}) {
      const std::string p = gru_prefix(layer, reverse);
      out[p + "w_ih"] = {in, 3 * h};
      out[p + "w_hh"] = {h, 3 * h};
      out[p + "b_ih"] = {3 * h};
      out[p + "b_hh"] = {3 * h};
    }
  }
  if (a.norm != NormKind::kNone) {
    out["norm.weight"] = {a.feature_dim()};
    out["norm.bias"] = {a.feature_dim()};
  }
  out["classifier.fc1.weight"] = {a.feature_dim(), a.classifier_hidden};
  out["classifier.fc1.bias"] = {a.classifier_hidden};
  out["classifier.fc2.weight"] = {a.classifier_hidden, a.num_classes};
  out["classifier.fc2.bias"] = {a.num_classes};
  return out;
}

inline std::map<std::string, Shape> buffer_shapes(const Architecture& a) {
  std::map<std::string, Shape> out;
  if (a.norm == NormKind::kBatch) {
    out["norm.running_mean"] = {a.feature_dim()};
    out["norm.running_var"] = {a.feature_dim()};
  }
  return out;
}

inline bool is_classifier_param(std::string_view name) { return name.starts_with("classifier."); }
inline bool is_norm_param(std::string_view name) { return name.starts_with("norm."); }
inline bool is_bottleneck_param(std::string_view name) { return name.starts_with("bottleneck."); }

// Trainable head B∘C plus normalization buffers. The encoder is not part of
// the model: its output arrives as precomputed embeddings.
template <typename T>
struct ModelState {
  Architecture arch;
  ParamSet<T> params;
  TensorMap<T> buffers;

  // Checks names and shapes against the architecture descriptor.
  void validate() const {
    arch.validate();
    const auto ps = parameter_shapes(arch);
    require(params.values.size() == ps.size(), ErrorKind::kFormat,
            "model: expected " + std::to_string(ps.size()) + " parameters, found " +
                std::to_string(params.values.size()));
    for (const auto& [name, shape] : ps) {
      auto it = params.values.find(name);
      require(it != params.values.end(), ErrorKind::kFormat, "model: missing parameter " + name);
      require(it->second.shape() == shape, ErrorKind::kFormat,
              "model: " + name + " has shape " + shape_string(it->second.shape()) +
                  " inconsistent with architecture (expected " + shape_string(shape) + ")");
    }
    const auto bs = buffer_shapes(arch);
    require(buffers.size() == bs.size(), ErrorKind::kFormat, "model: unexpected buffer set");
    for (const auto& [name, shape] : bs) {
      auto it = buffers.find(name);
      require(it != buffers.end(), ErrorKind::kFormat, "model: missing buffer " + name);
      require(it->second.shape() == shape, ErrorKind::kFormat,
              "model: " + name + " has shape " + shape_string(it->second.shape()) +
                  " inconsistent with architecture (expected " + shape_string(shape) + ")");
      it->second.check_finite("model buffer " + name);
    }
  }

  template <typename U>
  ModelState<U> cast() const {
    ModelState<U> out;
    out.arch = arch;
    for (const auto& [name, t] : params.values) out.params.values.emplace(name, t.template cast<U>());
    for (const auto& [name, t] : buffers) out.buffers.emplace(name, t.template cast<U>());
    return out;
  }

  friend bool operator==(const ModelState& a, const ModelState& b) {
    return a.arch == b.arch && a.params.values == b.params.values && a.buffers == b.buffers;
  }
};

// Glorot-uniform weights (fan_in = rows, fan_out = columns), zero biases,
// unit norm scale, running variance 1.
template <typename T>
ModelState<T> init_model(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  ModelState<T> state;
  state.arch = arch;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x1A17u};
  std::mt19937_64 rng(seq);
  for (const auto& [name, shape] : parameter_shapes(arch)) {
    Tensor<T> t(shape);
    if (name == "norm.weight") {
      t.fill(T{1});
    } else if (shape.size() == 2) {
      const double limit = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (auto& v : t.values()) v = static_cast<T>(dist(rng));
    }
    state.params.values.emplace(name, std::move(t));
  }
  for (const auto& [name, shape] : buffer_shapes(arch)) {
    Tensor<T> t(shape);
    if (name == "norm.running_var") t.fill(T{1});
    state.buffers.emplace(name, std::move(t));
  }
  return state;
}

template <typename T>
struct ForwardCache {
  bool has_bottleneck = false;
  bool has_classifier = false;
  std::vector<std::uint32_t> lengths;
  Tensor<T> layer_input[kGruLayers];             // time-major [S, B, in]
  GruDirectionCache<T> direction[kGruLayers][2];
  Tensor<T> raw_features;                        // [B, 2H], before normalization
  NormCache<T> norm;
  Tensor<T> features;                            // [B, 2H], classifier input
  Tensor<T> hidden_pre;                          // fc1 output before the rectifier
  Tensor<T> hidden;
};

struct FreezeSpec {
  bool bottleneck = false;
  bool norm = false;
  bool classifier = false;

  bool frozen(std::string_view name) const {
    if (is_classifier_param(name)) return classifier;
    if (is_norm_param(name)) return norm;
    return bottleneck;
  }
};

namespace detail {

template <typename T>
GruWeights<T> gru_weights(const ParamSet<T>& p, std::size_t layer, bool reverse) {
  const std::string pre = gru_prefix(layer, reverse);
  return {p.at(pre + "w_ih"), p.at(pre + "w_hh"), p.at(pre + "b_ih"), p.at(pre + "b_hh")};
}

template <typename T>
Tensor<T> to_time_major(const Tensor<T>& x) {
  const std::size_t b = x.dim(0), s = x.dim(1), d = x.dim(2);
  Tensor<T> out({s, b, d});
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t t = 0; t < s; ++t)
      std::copy_n(x.data() + (i * s + t) * d, d, out.data() + (t * b + i) * d);
  return out;
}

template <typename T>
Tensor<T> features_impl(const ModelState<T>& state, const Tensor<T>& batch,
                        std::span<const std::uint32_t> lengths, Mode mode,
                        RunningStats<T> stats, ForwardCache<T>* cache) {
  const Architecture& a = state.arch;
  require(batch.rank() == 3, ErrorKind::kShapeMismatch, "bottleneck: batch must be [B, S, D]");
  const std::size_t nb = batch.dim(0), steps = batch.dim(1);
  require(batch.dim(2) == a.input_dim, ErrorKind::kShapeMismatch,
          "bottleneck: embedding dim " + std::to_string(batch.dim(2)) +
              " does not match model input dim " + std::to_string(a.input_dim));
  require(lengths.size() == nb, ErrorKind::kShapeMismatch, "bottleneck: lengths size mismatch");
  for (std::size_t i = 0; i < nb; ++i) {
    require(lengths[i] >= 1, ErrorKind::kInvalidArgument,
            "bottleneck: example " + std::to_string(i) + " has zero length");
    require(lengths[i] <= steps, ErrorKind::kInvalidArgument,
            "bottleneck: example " + std::to_string(i) + " length exceeds sequence width");
  }
  const std::size_t h = a.gru_hidden;

  Tensor<T> input = to_time_major(batch);
  Tensor<T> out_dir[2];
  for (std::size_t layer = 0; layer < kGruLayers; ++layer) {
    for (int dir = 0; dir < 2; ++dir) {
      out_dir[dir] = gru_direction_forward(input, lengths, gru_weights(state.params, layer, dir == 1),
                                           dir == 1, cache ? &cache->direction[layer][dir] : nullptr);
    }
    if (layer + 1 < kGruLayers) {
      Tensor<T> next({steps, nb, 2 * h});
      for (std::size_t row = 0; row < steps * nb; ++row) {
        std::copy_n(out_dir[0].data() + row * h, h, next.data() + row * 2 * h);
        std::copy_n(out_dir[1].data() + row * h, h, next.data() + row * 2 * h + h);
      }
      if (cache) cache->layer_input[layer] = std::move(input);
      input = std::move(next);
    } else if (cache) {
      cache->layer_input[layer] = std::move(input);
    }
  }

  // Forward state at the last valid position, backward state at position 0.
  Tensor<T> raw({nb, 2 * h});
  for (std::size_t i = 0; i < nb; ++i) {
    const std::size_t last = lengths[i] - 1;
    std::copy_n(out_dir[0].data() + (last * nb + i) * h, h, raw.data() + i * 2 * h);
    std::copy_n(out_dir[1].data() + i * h, h, raw.data() + i * 2 * h + h);
  }

  const Tensor<T>* gamma = nullptr;
  const Tensor<T>* beta = nullptr;
  if (a.norm != NormKind::kNone) {
    gamma = &state.params.at("norm.weight");
    beta = &state.params.at("norm.bias");
  }
  if (a.norm == NormKind::kBatch) {
    stats.mean = &state.buffers.at("norm.running_mean");
    stats.var = &state.buffers.at("norm.running_var");
  }
  Tensor<T> features =
      norm_forward(a.norm, mode, raw, gamma, beta, stats, cache ? &cache->norm : nullptr);
  if (cache) {
    cache->has_bottleneck = true;
    cache->has_classifier = false;
    cache->lengths.assign(lengths.begin(), lengths.end());
    cache->raw_features = std::move(raw);
    cache->features = features;
  }
  return features;
}

}  // namespace detail

// Features for a padded batch [B, S, D] in evaluation mode. Never mutates
// the model.
template <typename T>
Tensor<T> bottleneck_forward(const ModelState<T>& state, const Tensor<T>& batch,
                             std::span<const std::uint32_t> lengths,
                             ForwardCache<T>* cache = nullptr) {
  return detail::features_impl(state, batch, lengths, Mode::kEval, RunningStats<T>{}, cache);
}

// Training-mode variant: batch normalization uses batch statistics and
// updates the model's running buffers.
template <typename T>
Tensor<T> bottleneck_forward_train(ModelState<T>& state, const Tensor<T>& batch,
                                   std::span<const std::uint32_t> lengths,
                                   ForwardCache<T>* cache = nullptr) {
  RunningStats<T> stats;
  Tensor<T> new_mean, new_var;
  if (state.arch.norm == NormKind::kBatch) {
    new_mean = state.buffers.at("norm.running_mean");
    new_var = state.buffers.at("norm.running_var");
    stats.mean_out = &new_mean;
    stats.var_out = &new_var;
  }
  Tensor<T> f = detail::features_impl(state, batch, lengths, Mode::kTrain, stats, cache);
  if (state.arch.norm == NormKind::kBatch) {
    state.buffers.at("norm.running_mean") = std::move(new_mean);
    state.buffers.at("norm.running_var") = std::move(new_var);
  }
  return f;
}

// Two affine layers with a rectifier between them; raw logits out.
template <typename T>
Tensor<T> classifier_forward(const ModelState<T>& state, const Tensor<T>& features,
                             ForwardCache<T>* cache = nullptr) {
  require(features.rank() == 2 && features.dim(1) == state.arch.feature_dim(),
          ErrorKind::kShapeMismatch,
          "classifier: feature dim " + (features.rank() == 2 ? std::to_string(features.dim(1))
                                                            : shape_string(features.shape())) +
              " does not match " + std::to_string(state.arch.feature_dim()));
  const auto& p = state.params;
  Tensor<T> pre = linear(features, p.at("classifier.fc1.weight"), p.at("classifier.fc1.bias"));
  Tensor<T> hid = relu(pre);
  Tensor<T> logits = linear(hid, p.at("classifier.fc2.weight"), p.at("classifier.fc2.bias"));
  if (cache) {
    if (!cache->has_bottleneck || !(cache->features == features)) {
      cache->has_bottleneck = false;
      cache->features = features;
    }
    cache->hidden_pre = std::move(pre);
    cache->hidden = std::move(hid);
    cache->has_classifier = true;
  }
  return logits;
}

// Gradients of every non-frozen trainable tensor given dL/dlogits. The
// cache must come from a bottleneck + classifier forward on the same batch.
// Frozen tensors get no entry in the returned map.
template <typename T>
TensorMap<T> model_backward(const ModelState<T>& state, const ForwardCache<T>& cache,
                            const Tensor<T>& dlogits, const FreezeSpec& freeze = {}) {
  require(cache.has_bottleneck && cache.has_classifier, ErrorKind::kInvalidArgument,
          "model_backward: no matching forward pass cached");
  const std::size_t nb = cache.features.dim(0);
  require(dlogits.shape() == Shape{nb, state.arch.num_classes}, ErrorKind::kInvalidArgument,
          "model_backward: upstream gradient " + shape_string(dlogits.shape()) +
              " does not match cached forward batch of " + std::to_string(nb));
  const Architecture& a = state.arch;
  const auto& p = state.params;

  TensorMap<T> g;
  for (const auto& [name, t] : p.values) g.emplace(name, Tensor<T>(t.shape()));

  Tensor<T> dhid = linear_backward(cache.hidden, p.at("classifier.fc2.weight"), dlogits,
                                   g.at("classifier.fc2.weight"), g.at("classifier.fc2.bias"));
  Tensor<T> dpre = relu_backward(cache.hidden_pre, dhid);
  Tensor<T> dfeat = linear_backward(cache.features, p.at("classifier.fc1.weight"), dpre,
                                    g.at("classifier.fc1.weight"), g.at("classifier.fc1.bias"));

  Tensor<T> draw;
  if (a.norm == NormKind::kNone) {
    draw = std::move(dfeat);
  } else {
    draw = norm_backward(cache.norm, &p.at("norm.weight"), dfeat, &g.at("norm.weight"),
                         &g.at("norm.bias"));
  }

  const std::size_t h = a.gru_hidden;
  const std::size_t steps = cache.layer_input[0].dim(0);
  Tensor<T> dout[2] = {Tensor<T>({steps, nb, h}), Tensor<T>({steps, nb, h})};
  for (std::size_t i = 0; i < nb; ++i) {
    const std::size_t last = cache.lengths[i] - 1;
    for (std::size_t j = 0; j < h; ++j) {
      dout[0][(last * nb + i) * h + j] = draw(i, j);
      dout[1][i * h + j] = draw(i, h + j);
    }
  }

  for (std::size_t layer = kGruLayers; layer-- > 0;) {
    const Tensor<T>& input = cache.layer_input[layer];
    Tensor<T> dinput(input.shape());
    for (int dir = 0; dir < 2; ++dir) {
      const std::string pre = gru_prefix(layer, dir == 1);
      Tensor<T> dx = gru_direction_backward(
          input, detail::gru_weights(p, layer, dir == 1), cache.direction[layer][dir], dout[dir],
          GruGrads<T>{g.at(pre + "w_ih"), g.at(pre + "w_hh"), g.at(pre + "b_ih"),
                      g.at(pre + "b_hh")});
      for (std::size_t k = 0; k < dx.size(); ++k) dinput[k] += dx[k];
    }
    if (layer == 0) break;
    // Split the layer input gradient back into the two directions below.
    for (int dir = 0; dir < 2; ++dir) dout[dir] = Tensor<T>({steps, nb, h});
    for (std::size_t row = 0; row < steps * nb; ++row) {
      std::copy_n(dinput.data() + row * 2 * h, h, dout[0].data() + row * h);
      std::copy_n(dinput.data() + row * 2 * h + h, h, dout[1].data() + row * h);
    }
  }

  for (auto it = g.begin(); it != g.end();) {
    it = freeze.frozen(it->first) ? g.erase(it) : std::next(it);
  }
  return g;
}

}  // namespace dtta

#endif  // DTTA_MODEL_MODEL_HPP_
