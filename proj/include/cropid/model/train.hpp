/*
 * Copyright 2026 The cropid Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cropid/datagen/datagen.hpp"
#include "cropid/model/model.hpp"
#include "cropid/model/probe.hpp"

namespace cropid::model {

/// Non-owning view over labeled inputs.
struct LabeledView {
  std::vector<const rsd::PaddedSeries*> series;
  std::vector<int> labels;

  std::size_t size() const { return series.size(); }
};

LabeledView view_of(std::span<const datagen::InSeasonExample> examples);
std::vector<const rsd::PaddedSeries*> series_of(std::span<const datagen::UnlabeledExample> examples);

struct TrainOptions {
  int steps = 0;
  int batch_size = 64;
  int validate_every = 250;
  int threads = 1;
  /// Fine-tuning stops after the first validation reaching this macro-F1 (disabled when <= 0).
  double stop_at_f1 = 0.0;
  /// Called after every validation with (step, score, train loss of the last batch).
  std::function<void(int, double, double)> on_validate;
};

struct HistoryEntry {
  int step = 0;
  double score = 0.0;        // probe macro-F1 (pre-training) or validation macro-F1 (fine-tuning)
  double train_loss = 0.0;   // mean loss of the most recent batch (NaN at step 0)
  double heldout_mse = 0.0;  // pre-training only: masked-reconstruction MSE on held-out inputs
};

struct TrainResult {
  ad::ParameterSet best_params;
  int best_step = 0;
  double best_score = 0.0;
  std::vector<HistoryEntry> history;

  /// First validated step whose score reaches `threshold`, or -1.
  int first_step_reaching(double threshold) const;
};

/// Gradient batches are split into this many fixed shards; per-shard sums are added in shard order,
/// so results do not depend on the worker count.
inline constexpr int kGradientShards = 8;

/// MAE pre-training on unlabeled inputs with k-NN probe checkpoint selection (the initial
/// parameters are a candidate). Leaves the model holding the selected parameters.
TrainResult pretrain(Model& model, const std::vector<const rsd::PaddedSeries*>& unlabeled,
                     const LabeledView& probe_train, const LabeledView& probe_val,
                     const std::vector<const rsd::PaddedSeries*>& heldout, const TrainOptions& options);

/// Focal-loss fine-tuning of encoder and classifier with validation macro-F1 checkpoint selection.
/// Leaves the model holding the selected parameters.
TrainResult finetune(Model& model, const LabeledView& train, const LabeledView& val, const TrainOptions& options);

/// Pooled embeddings, computed in parallel with results in input order.
Embeddings embed_all(const Model& model, const std::vector<const rsd::PaddedSeries*>& series, int threads = 1);
std::vector<std::array<double, kNumClasses>> predict_all(const Model& model,
                                                         const std::vector<const rsd::PaddedSeries*>& series,
                                                         int threads = 1);
/// Macro-F1 of argmax predictions.
double evaluate_f1(const Model& model, const LabeledView& data, int threads = 1);

/// Mean masked-reconstruction MSE over inputs with masks drawn from (seed, index).
double heldout_mae(const Model& model, const std::vector<const rsd::PaddedSeries*>& series, std::uint64_t seed,
                   int threads = 1);

/// Draws per-satellite MAE masks and forces at least one masked valid token.
void draw_mae_masks(std::vector<TokenSequence>& tokens, const ModelConfig& config, Rng& rng);

}  // namespace cropid::model
