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

#ifndef DTTA_SHOT_HYPERPARAMS_HPP_
#define DTTA_SHOT_HYPERPARAMS_HPP_

#include <cmath>
#include <cstdint>
#include <string>

#include "dtta/error.hpp"
#include "dtta/model/model.hpp"
#include "dtta/numerics/optim.hpp"
#include "json.hpp"

namespace dtta {

// Defaults for source finetuning and adaptation. Epoch count, batch size,
// label smoothing, loss multipliers, entropy epsilon and the base learning
// rate are the published settings; the rest fill gaps.
struct HyperParams {
  std::uint32_t epochs = 30;
  std::uint32_t adapt_epochs = 30;
  std::uint32_t batch_size = 32;
  double label_smoothing = 0.1;
  double im_multiplier = 1.0;
  double cls_multiplier = 0.3;
  double entropy_epsilon = 1e-5;
  double pseudo_label_smoothing = 0.0;
  double eta0 = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.01;
  std::uint32_t gru_hidden = 256;
  std::uint32_t classifier_hidden = 256;
  NormKind norm = NormKind::kBatch;
  std::uint64_t seed = 42;

  void validate() const {
    require(batch_size >= 1, ErrorKind::kInvalidArgument, "hyperparams: batch_size must be >= 1");
    require(label_smoothing >= 0.0 && label_smoothing < 1.0, ErrorKind::kInvalidArgument,
            "hyperparams: label_smoothing must lie in [0, 1)");
    require(pseudo_label_smoothing >= 0.0 && pseudo_label_smoothing < 1.0,
            ErrorKind::kInvalidArgument, "hyperparams: pseudo_label_smoothing must lie in [0, 1)");
    require(cls_multiplier >= 0.0, ErrorKind::kInvalidArgument,
            "hyperparams: cls_multiplier must be >= 0");
    require(im_multiplier >= 0.0, ErrorKind::kInvalidArgument,
            "hyperparams: im_multiplier must be >= 0");
    require(entropy_epsilon > 0.0, ErrorKind::kInvalidArgument,
            "hyperparams: entropy_epsilon must be > 0");
    require(eta0 >= 0.0 && std::isfinite(eta0), ErrorKind::kInvalidArgument,
            "hyperparams: eta0 must be >= 0");
    require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
            ErrorKind::kInvalidArgument, "hyperparams: betas must lie in [0, 1)");
    require(adam_eps > 0.0 && weight_decay >= 0.0, ErrorKind::kInvalidArgument,
            "hyperparams: adam_eps must be > 0 and weight_decay >= 0");
    require(gru_hidden > 0 && classifier_hidden > 0, ErrorKind::kInvalidArgument,
            "hyperparams: hidden sizes must be > 0");
  }

  OptimState optim() const {
    OptimState o;
    o.eta0 = eta0;
    o.beta1 = beta1;
    o.beta2 = beta2;
    o.eps = adam_eps;
    o.weight_decay = weight_decay;
    return o;
  }

  Architecture architecture(std::uint32_t input_dim, std::uint32_t num_classes) const {
    Architecture a;
    a.input_dim = input_dim;
    a.gru_hidden = gru_hidden;
    a.classifier_hidden = classifier_hidden;
    a.num_classes = num_classes;
    a.norm = norm;
    return a;
  }
};

inline nlohmann::json to_json(const HyperParams& h) {
  return {{"epochs", h.epochs},
          {"adapt_epochs", h.adapt_epochs},
          {"batch_size", h.batch_size},
          {"label_smoothing", h.label_smoothing},
          {"im_multiplier", h.im_multiplier},
          {"cls_multiplier", h.cls_multiplier},
          {"entropy_epsilon", h.entropy_epsilon},
          {"pseudo_label_smoothing", h.pseudo_label_smoothing},
          {"eta0", h.eta0},
          {"beta1", h.beta1},
          {"beta2", h.beta2},
          {"adam_eps", h.adam_eps},
          {"weight_decay", h.weight_decay},
          {"gru_hidden", h.gru_hidden},
          {"classifier_hidden", h.classifier_hidden},
          {"norm", std::string(to_string(h.norm))},
          {"seed", h.seed}};
}

// Missing keys keep their defaults; unknown keys are rejected.
inline HyperParams hyperparams_from_json(const nlohmann::json& j, HyperParams h = {}) {
  require(j.is_object(), ErrorKind::kInvalidArgument, "hyperparams must be a JSON object");
  const nlohmann::json known = to_json(h);
  for (const auto& [key, _] : j.items()) {
    require(known.contains(key), ErrorKind::kInvalidArgument,
            "hyperparams: unknown key '" + key + "'");
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("epochs", h.epochs);
    get("adapt_epochs", h.adapt_epochs);
    get("batch_size", h.batch_size);
    get("label_smoothing", h.label_smoothing);
    get("im_multiplier", h.im_multiplier);
    get("cls_multiplier", h.cls_multiplier);
    get("entropy_epsilon", h.entropy_epsilon);
    get("pseudo_label_smoothing", h.pseudo_label_smoothing);
    get("eta0", h.eta0);
    get("beta1", h.beta1);
    get("beta2", h.beta2);
    get("adam_eps", h.adam_eps);
    get("weight_decay", h.weight_decay);
    get("gru_hidden", h.gru_hidden);
    get("classifier_hidden", h.classifier_hidden);
    if (j.contains("norm")) h.norm = parse_norm_kind(j.at("norm").get<std::string>());
    get("seed", h.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("hyperparams: ") + e.what());
  }
  h.validate();
  return h;
}

}  // namespace dtta

#endif  // DTTA_SHOT_HYPERPARAMS_HPP_
