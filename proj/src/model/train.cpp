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

#include "cropid/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cropid/core/error.hpp"
#include "cropid/eval/metrics.hpp"
#include "cropid/model/losses.hpp"
#include "cropid/model/optimizer.hpp"

namespace cropid::model {

namespace {

constexpr std::uint64_t kPretrainStream = 0x707265ULL;
constexpr std::uint64_t kFinetuneStream = 0x66696eULL;
constexpr std::uint64_t kHeldoutStream = 0x686c64ULL;

/// Epoch-wise shuffled index stream.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    reshuffle();
  }

  std::vector<std::size_t> next(int batch) {
    std::vector<std::size_t> out;
    out.reserve(static_cast<std::size_t>(batch));
    while (out.size() < static_cast<std::size_t>(batch)) {
      if (cursor_ == order_.size()) reshuffle();
      out.push_back(order_[cursor_++]);
    }
    return out;
  }

 private:
  void reshuffle() {
    // Fisher-Yates with explicit draws; std::shuffle's use of the engine is implementation-defined.
    for (std::size_t i = order_.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng_() % i);
      std::swap(order_[i - 1], order_[j]);
    }
    cursor_ = 0;
  }

  std::vector<std::size_t> order_;
  Rng rng_;
  std::size_t cursor_ = 0;
};

/// Runs per_example(position, grads) over the batch in fixed shards and returns the mean loss.
double accumulate_batch(const ad::ParameterSet& params, std::size_t batch, int threads, ad::Gradients& total,
                        std::vector<ad::Gradients>& shard_grads,
                        const std::function<double(std::size_t, ad::Gradients&)>& per_example) {
  const std::size_t shards = std::min<std::size_t>(kGradientShards, batch);
  if (shard_grads.size() < shards) {
    while (shard_grads.size() < shards) shard_grads.push_back(ad::Gradients::zeros_like(params));
  }
  std::vector<double> shard_loss(shards, 0.0);
  parallel_for(shards, threads, [&](std::size_t s) {
    shard_grads[s].set_zero();
    const std::size_t lo = s * batch / shards;
    const std::size_t hi = (s + 1) * batch / shards;
    for (std::size_t i = lo; i < hi; ++i) shard_loss[s] += per_example(i, shard_grads[s]);
  });
  total.set_zero();
  double loss = 0.0;
  for (std::size_t s = 0; s < shards; ++s) {
    total += shard_grads[s];
    loss += shard_loss[s];
  }
  total.scale(1.0 / static_cast<double>(batch));
  return loss / static_cast<double>(batch);
}

double probe_score(const Model& model, const LabeledView& train, const LabeledView& val, int threads) {
  if (train.size() == 0 || val.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  const auto tr = embed_all(model, train.series, threads);
  const auto va = embed_all(model, val.series, threads);
  return knn_probe(tr, train.labels, va, val.labels, model.config().knn_k);
}

bool better(double score, double best) {
  if (std::isnan(score)) return false;
  return std::isnan(best) || score > best;
}

}  // namespace

LabeledView view_of(std::span<const datagen::InSeasonExample> examples) {
  LabeledView v;
  v.series.reserve(examples.size());
  v.labels.reserve(examples.size());
  for (const auto& ex : examples) {
    v.series.push_back(&ex.series);
    v.labels.push_back(class_index(ex.label));
  }
  return v;
}

std::vector<const rsd::PaddedSeries*> series_of(std::span<const datagen::UnlabeledExample> examples) {
  std::vector<const rsd::PaddedSeries*> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(&ex.series);
  return out;
}

int TrainResult::first_step_reaching(double threshold) const {
  for (const auto& h : history) {
    if (!std::isnan(h.score) && h.score >= threshold) return h.step;
  }
  return -1;
}

void draw_mae_masks(std::vector<TokenSequence>& tokens, const ModelConfig& config, Rng& rng) {
  for (auto& ts : tokens) mae_mask(ts, ts.satellite == rsd::kSentinel1 ? config.mask_prob_s1 : config.mask_prob_s2, rng);
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    for (std::size_t t = 0; t < tokens[s].valid.size(); ++t) {
      if (tokens[s].masked[t]) return;
      if (tokens[s].valid[t]) candidates.emplace_back(s, t);
    }
  }
  if (candidates.empty()) return;
  const auto pick = candidates[static_cast<std::size_t>(rng() % candidates.size())];
  tokens[pick.first].masked[pick.second] = true;
}

Embeddings embed_all(const Model& model, const std::vector<const rsd::PaddedSeries*>& series, int threads) {
  Embeddings out(series.size());
  parallel_for(series.size(), threads, [&](std::size_t i) { out[i] = model.embed(*series[i]); });
  return out;
}

std::vector<std::array<double, kNumClasses>> predict_all(const Model& model,
                                                         const std::vector<const rsd::PaddedSeries*>& series,
                                                         int threads) {
  std::vector<std::array<double, kNumClasses>> out(series.size());
  parallel_for(series.size(), threads, [&](std::size_t i) { out[i] = model.predict_proba(*series[i]); });
  return out;
}

double evaluate_f1(const Model& model, const LabeledView& data, int threads) {
  const auto probs = predict_all(model, data.series, threads);
  std::vector<int> pred;
  pred.reserve(probs.size());
  for (const auto& p : probs) pred.push_back(eval::predicted_class(p));
  return eval::macro_f1(data.labels, pred);
}

double heldout_mae(const Model& model, const std::vector<const rsd::PaddedSeries*>& series, std::uint64_t seed,
                   int threads) {
  if (series.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> losses(series.size());
  parallel_for(series.size(), threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, kHeldoutStream, i));
    auto tokens = tokenize(*series[i], model.config());
    draw_mae_masks(tokens, model.config(), rng);
    Graph g(false);
    const auto enc = model.encode(g, tokens);
    const auto rec = model.decode(g, enc.pooled);
    std::vector<Mat> values;
    for (Var v : rec) values.push_back(g.value(v));
    losses[i] = mae_loss_value(values, *series[i], tokens, model.config().steps_per_token);
  });
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(losses.size());
}

TrainResult pretrain(Model& model, const std::vector<const rsd::PaddedSeries*>& unlabeled,
                     const LabeledView& probe_train, const LabeledView& probe_val,
                     const std::vector<const rsd::PaddedSeries*>& heldout, const TrainOptions& options) {
  if (unlabeled.empty()) throw Error(ErrorCode::EmptyInput, "no unlabeled examples for pre-training");
  const ModelConfig& cfg = model.config();
  ad::ParameterSet& params = model.params();
  Adam adam(params, AdamOptions{cfg.learning_rate});
  BatchSampler sampler(unlabeled.size(), derive_seed(cfg.seed, kPretrainStream));
  ad::Gradients total = ad::Gradients::zeros_like(params);
  std::vector<ad::Gradients> shard_grads;

  TrainResult result;
  auto validate = [&](int step, double loss) {
    const double score = probe_score(model, probe_train, probe_val, options.threads);
    const double mse = heldout_mae(model, heldout, cfg.seed, options.threads);
    result.history.push_back({step, score, loss, mse});
    if (result.history.size() == 1 || better(score, result.best_score)) {
      result.best_params = params;
      result.best_step = step;
      result.best_score = score;
    }
    if (options.on_validate) options.on_validate(step, score, loss);
  };

  validate(0, std::numeric_limits<double>::quiet_NaN());
  double loss = 0.0;
  for (int step = 1; step <= options.steps; ++step) {
    const auto batch = sampler.next(options.batch_size);
    loss = accumulate_batch(params, batch.size(), options.threads, total, shard_grads,
                            [&](std::size_t pos, ad::Gradients& grads) {
                              Rng rng(derive_seed(cfg.seed ^ kPretrainStream, static_cast<std::uint64_t>(step), pos));
                              const rsd::PaddedSeries& series = *unlabeled[batch[pos]];
                              auto tokens = tokenize(series, cfg);
                              draw_mae_masks(tokens, cfg, rng);
                              Graph g;
                              const auto enc = model.encode(g, tokens);
                              const Var l = mae_loss(g, model.decode(g, enc.pooled), series, tokens, cfg.steps_per_token);
                              g.backward(l);
                              g.accumulate(grads);
                              return g.scalar(l);
                            });
    adam.step(params, total);
    if (step % options.validate_every == 0 || step == options.steps) validate(step, loss);
  }
  params = result.best_params;
  return result;
}

TrainResult finetune(Model& model, const LabeledView& train, const LabeledView& val, const TrainOptions& options) {
  if (train.size() == 0) throw Error(ErrorCode::EmptyInput, "no labeled examples for fine-tuning");
  const ModelConfig& cfg = model.config();
  ad::ParameterSet& params = model.params();
  Adam adam(params, AdamOptions{cfg.learning_rate});
  BatchSampler sampler(train.size(), derive_seed(cfg.seed, kFinetuneStream));
  ad::Gradients total = ad::Gradients::zeros_like(params);
  std::vector<ad::Gradients> shard_grads;

  TrainResult result;
  bool reached = false;
  auto validate = [&](int step, double loss) {
    const double score = val.size() > 0 ? evaluate_f1(model, val, options.threads)
                                        : std::numeric_limits<double>::quiet_NaN();
    result.history.push_back({step, score, loss, std::numeric_limits<double>::quiet_NaN()});
    if (result.history.size() == 1 || better(score, result.best_score)) {
      result.best_params = params;
      result.best_step = step;
      result.best_score = score;
    }
    if (options.on_validate) options.on_validate(step, score, loss);
    reached = options.stop_at_f1 > 0.0 && !std::isnan(score) && score >= options.stop_at_f1;
  };

  validate(0, std::numeric_limits<double>::quiet_NaN());
  for (int step = 1; step <= options.steps && !reached; ++step) {
    const auto batch = sampler.next(options.batch_size);
    const double loss = accumulate_batch(
        params, batch.size(), options.threads, total, shard_grads, [&](std::size_t pos, ad::Gradients& grads) {
          Rng rng(derive_seed(cfg.seed ^ kFinetuneStream, static_cast<std::uint64_t>(step), pos));
          const std::size_t idx = batch[pos];
          Graph g;
          const auto enc = model.encode(g, tokenize(*train.series[idx], cfg));
          const Var logits = model.classify_logits(g, enc.pooled, &rng);
          const Var l = focal_loss(g, logits, train.labels[idx], cfg.focal_gamma);
          g.backward(l);
          g.accumulate(grads);
          return g.scalar(l);
        });
    adam.step(params, total);
    if (step % options.validate_every == 0 || step == options.steps) validate(step, loss);
  }
  params = result.best_params;
  return result;
}

}  // namespace cropid::model
