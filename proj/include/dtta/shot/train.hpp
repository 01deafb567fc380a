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

#ifndef DTTA_SHOT_TRAIN_HPP_
#define DTTA_SHOT_TRAIN_HPP_

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "dtta/data/batching.hpp"
#include "dtta/data/dataset.hpp"
#include "dtta/error.hpp"
#include "dtta/metrics/metrics.hpp"
#include "dtta/model/model.hpp"
#include "dtta/numerics/ops.hpp"
#include "dtta/numerics/optim.hpp"
#include "dtta/shot/hyperparams.hpp"
#include "dtta/shot/losses.hpp"
#include "dtta/shot/pseudo_label.hpp"

namespace dtta {

struct EpochRecord {
  std::string phase;  // "train" or "adapt"
  std::uint32_t epoch = 0;
  double loss = 0.0;  // batch-mean total loss
  double cross_entropy = 0.0;
  double entropy = 0.0;
  double diversity = 0.0;
  double pseudo_ce = 0.0;
  double lr = 0.0;  // rate at the epoch's last step
  std::uint32_t batches = 0;
};

struct MetricsLog {
  std::vector<EpochRecord> epochs;

  std::string to_csv() const {
    std::ostringstream os;
    os << "phase,epoch,loss,cross_entropy,entropy,diversity,pseudo_ce,lr\n";
    os << std::setprecision(9);
    for (const auto& r : epochs) {
      os << r.phase << ',' << r.epoch << ',' << r.loss << ',' << r.cross_entropy << ','
         << r.entropy << ',' << r.diversity << ',' << r.pseudo_ce << ',' << r.lr << '\n';
    }
    return os.str();
  }
};

namespace detail {

inline void check_model_matches(const Architecture& arch, const EmbeddedDataset& ds,
                                const char* who) {
  require(ds.manifest.k == arch.num_classes, ErrorKind::kInvalidArgument,
          std::string(who) + ": dataset '" + ds.manifest.name + "' declares K=" +
              std::to_string(ds.manifest.k) + " but the model has K=" +
              std::to_string(arch.num_classes));
  require(ds.manifest.d == arch.input_dim, ErrorKind::kInvalidArgument,
          std::string(who) + ": dataset '" + ds.manifest.name + "' has D=" +
              std::to_string(ds.manifest.d) + " but the model expects " +
              std::to_string(arch.input_dim));
}

// Batch normalization has no batch statistics for a single example, so
// such a batch is skipped while training.
inline bool trainable_batch(NormKind norm, std::size_t batch) {
  return norm != NormKind::kBatch || batch > 1;
}

inline std::uint64_t total_steps(std::size_t n, const HyperParams& hp, std::uint32_t epochs) {
  const std::uint64_t per_epoch = (n + hp.batch_size - 1) / hp.batch_size;
  return per_epoch * epochs;
}

}  // namespace detail

// Evaluation-mode features and probabilities for every example, in order.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> features_and_probs(const ModelState<T>& model,
                                                   const EmbeddedDataset& ds,
                                                   std::size_t batch_size) {
  detail::check_model_matches(model.arch, ds, "predict");
  const std::size_t n = ds.size(), f = model.arch.feature_dim(), k = model.arch.num_classes;
  Tensor<T> feats({n, f});
  Tensor<T> probs({n, k});
  for (const auto& idx : batch_indices(n, batch_size, false, 0)) {
    const Batch<T> b = gather<T>(ds, idx, false);
    const Tensor<T> bf = bottleneck_forward(model, b.x, b.lengths);
    const Tensor<T> bp = softmax(classifier_forward(model, bf));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::copy_n(bf.data() + i * f, f, feats.data() + idx[i] * f);
      std::copy_n(bp.data() + i * k, k, probs.data() + idx[i] * k);
    }
  }
  return {std::move(feats), std::move(probs)};
}

template <typename T>
std::vector<std::uint32_t> predict(const ModelState<T>& model, const EmbeddedDataset& ds,
                                   std::size_t batch_size = 256) {
  return argmax_rows(features_and_probs(model, ds, batch_size).second);
}

// Task metric as a percentage (MCC scaled by 100).
template <typename T>
double evaluate(const ModelState<T>& model, const EmbeddedDataset& ds,
                std::size_t batch_size = 256) {
  require(ds.labeled(), ErrorKind::kInvalidArgument,
          "evaluate: dataset '" + ds.manifest.name + "' has no labels");
  const auto preds = predict(model, ds, batch_size);
  if (ds.manifest.metric == MetricKind::kMcc) return 100.0 * mcc(preds, *ds.labels);
  return accuracy(preds, *ds.labels);
}

// Joint training of bottleneck and classifier on labeled source data with
// smoothed cross-entropy.
inline ModelState<float> train_source(const EmbeddedDataset& ds, const HyperParams& hp,
                                      MetricsLog* log = nullptr) {
  hp.validate();
  ds.validate();
  require(ds.labeled(), ErrorKind::kInvalidArgument,
          "train_source: dataset '" + ds.manifest.name + "' has no labels");
  ModelState<float> model = init_model<float>(hp.architecture(ds.manifest.d, ds.manifest.k), hp.seed);
  OptimState opt = hp.optim();
  const std::uint64_t total = detail::total_steps(ds.size(), hp, hp.epochs);
  std::uint64_t step = 0;
  for (std::uint32_t epoch = 0; epoch < hp.epochs; ++epoch) {
    EpochRecord rec{"train", epoch};
    for (const auto& idx : batch_indices(ds.size(), hp.batch_size, true, hp.seed, epoch)) {
      opt.progress = static_cast<double>(step) / static_cast<double>(total);
      ++step;
      if (!detail::trainable_batch(model.arch.norm, idx.size())) continue;
      const Batch<float> b = gather<float>(ds, idx, true);
      ForwardCache<float> cache;
      const Tensor<float> feats = bottleneck_forward_train(model, b.x, b.lengths, &cache);
      const Tensor<float> logits = classifier_forward(model, feats, &cache);
      const LossResult<float> ce = smoothed_cross_entropy(logits, b.labels, hp.label_smoothing);
      adamw_step(model.params, model_backward(model, cache, ce.grad), opt);
      rec.loss += ce.value;
      rec.cross_entropy += ce.value;
      rec.lr = lr_at(opt.progress, opt.eta0);
      ++rec.batches;
    }
    if (rec.batches) {
      rec.loss /= rec.batches;
      rec.cross_entropy /= rec.batches;
    }
    if (log) log->epochs.push_back(rec);
  }
  return model;
}

// Source-free adaptation to an unlabeled target set. The classifier is
// frozen; bottleneck, normalization parameters and running statistics
// adapt. Target labels are never read.
inline ModelState<float> adapt(const ModelState<float>& source, const EmbeddedDataset& target,
                               const HyperParams& hp, MetricsLog* log = nullptr) {
  hp.validate();
  source.validate();
  require(target.size() > 0, ErrorKind::kInvalidArgument, "adapt: empty target set");
  detail::check_model_matches(source.arch, target, "adapt");

  ModelState<float> model = source;
  model.params.slots.clear();
  OptimState opt = hp.optim();
  const FreezeSpec freeze{.classifier = true};
  const std::uint64_t total = detail::total_steps(target.size(), hp, hp.adapt_epochs);
  std::uint64_t step = 0;
  for (std::uint32_t epoch = 0; epoch < hp.adapt_epochs; ++epoch) {
    auto [all_feats, all_probs] = features_and_probs(model, target, 256);
    const PseudoLabelState pl = compute_pseudo_labels(all_feats, all_probs);

    EpochRecord rec{"adapt", epoch};
    for (const auto& idx : batch_indices(target.size(), hp.batch_size, true, hp.seed, epoch,
                                         kAdaptShuffleStream)) {
      opt.progress = static_cast<double>(step) / static_cast<double>(total);
      ++step;
      if (!detail::trainable_batch(model.arch.norm, idx.size())) continue;
      const Batch<float> b = gather<float>(target, idx, false);
      std::vector<std::uint32_t> pseudo(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) pseudo[i] = pl.labels[idx[i]];
      ForwardCache<float> cache;
      const Tensor<float> feats = bottleneck_forward_train(model, b.x, b.lengths, &cache);
      const Tensor<float> logits = classifier_forward(model, feats, &cache);
      const TtaLossResult<float> loss = tta_loss(softmax(logits), logits, pseudo, hp);
      adamw_step(model.params, model_backward(model, cache, loss.dlogits, freeze), opt);
      rec.loss += loss.value;
      rec.entropy += loss.entropy;
      rec.diversity += loss.diversity;
      rec.pseudo_ce += loss.pseudo_ce;
      rec.lr = lr_at(opt.progress, opt.eta0);
      ++rec.batches;
    }
    if (rec.batches) {
      rec.loss /= rec.batches;
      rec.entropy /= rec.batches;
      rec.diversity /= rec.batches;
      rec.pseudo_ce /= rec.batches;
    }
    if (log) log->epochs.push_back(rec);
  }
  model.params.slots.clear();
  return model;
}

}  // namespace dtta

#endif  // DTTA_SHOT_TRAIN_HPP_
