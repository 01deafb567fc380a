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

#ifndef DTTA_NUMERICS_OPTIM_HPP_
#define DTTA_NUMERICS_OPTIM_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "dtta/error.hpp"
#include "dtta/numerics/tensor.hpp"

namespace dtta {

// Annealed learning rate eta0 / (1 + 10 p)^0.75 for training progress p.
// eta0 == 0 is accepted and freezes every parameter.
inline double lr_at(double progress, double eta0) {
  require(progress >= 0.0 && progress <= 1.0, ErrorKind::kInvalidArgument,
          "lr_at: progress " + std::to_string(progress) + " outside [0, 1]");
  require(eta0 >= 0.0 && std::isfinite(eta0), ErrorKind::kInvalidArgument,
          "lr_at: eta0 must be a finite non-negative rate");
  return eta0 / std::pow(1.0 + 10.0 * progress, 0.75);
}

struct OptimState {
  double eta0 = 1e-3;
  double progress = 0.0;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

template <typename T>
struct MomentSlot {
  Tensor<T> m;
  Tensor<T> v;
  std::uint64_t step = 0;
};

// Named trainable tensors with their AdamW slots. Slots are created
// lazily on the first update of a parameter.
template <typename T>
struct ParamSet {
  TensorMap<T> values;
  std::map<std::string, MomentSlot<T>, std::less<>> slots;

  Tensor<T>& at(std::string_view name) {
    auto it = values.find(name);
    require(it != values.end(), ErrorKind::kInvalidArgument,
            "unknown parameter '" + std::string(name) + "'");
    return it->second;
  }
  const Tensor<T>& at(std::string_view name) const {
    auto it = values.find(name);
    require(it != values.end(), ErrorKind::kInvalidArgument,
            "unknown parameter '" + std::string(name) + "'");
    return it->second;
  }
};

// One decoupled-weight-decay Adam update over every parameter that has a
// gradient entry. Parameters without an entry are left untouched. All
// gradients are validated before anything is modified.
template <typename T>
void adamw_step(ParamSet<T>& params, const TensorMap<T>& grads, OptimState& opt) {
  for (const auto& [name, g] : grads) {
    auto it = params.values.find(name);
    require(it != params.values.end(), ErrorKind::kInvalidArgument,
            "adamw_step: gradient for unknown parameter '" + name + "'");
    require_shape(g, it->second.shape(), "adamw_step: gradient '" + name + "'");
    g.check_finite("adamw_step: gradient '" + name + "'");
  }
  const double lr = lr_at(opt.progress, opt.eta0);
  ++opt.step;
  for (const auto& [name, g] : grads) {
    Tensor<T>& p = params.values.find(name)->second;
    auto [slot_it, inserted] = params.slots.try_emplace(name);
    MomentSlot<T>& slot = slot_it->second;
    if (inserted || slot.m.shape() != p.shape()) {
      slot.m = Tensor<T>(p.shape());
      slot.v = Tensor<T>(p.shape());
      slot.step = 0;
    }
    ++slot.step;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(slot.step));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(slot.step));
    const T decay = static_cast<T>(1.0 - lr * opt.weight_decay);
    const T b1 = static_cast<T>(opt.beta1), b2 = static_cast<T>(opt.beta2);
    const T step_size = static_cast<T>(lr / bc1);
    const T bc2_sqrt = static_cast<T>(std::sqrt(bc2));
    const T eps = static_cast<T>(opt.eps);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] *= decay;
      slot.m[i] = b1 * slot.m[i] + (T{1} - b1) * g[i];
      slot.v[i] = b2 * slot.v[i] + (T{1} - b2) * g[i] * g[i];
      p[i] -= step_size * slot.m[i] / (std::sqrt(slot.v[i]) / bc2_sqrt + eps);
    }
  }
}

}  // namespace dtta

#endif  // DTTA_NUMERICS_OPTIM_HPP_
