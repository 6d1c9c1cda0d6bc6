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

#include <array>
#include <string>
#include <vector>

#include "cropid/core/crop.hpp"
#include "cropid/core/parallel.hpp"
#include "cropid/model/autodiff.hpp"
#include "cropid/model/config.hpp"
#include "cropid/rsd/rsd.hpp"

namespace cropid::model {

using ad::Graph;
using ad::Mat;
using ad::ParameterSet;
using ad::Var;

/// One satellite's tokens. Row i of `inputs` concatenates steps [i*k, (i+1)*k) across features,
/// with invalid steps zeroed.
struct TokenSequence {
  std::string satellite;
  Mat inputs;
  std::vector<bool> valid;   // any constituent step valid
  std::vector<bool> masked;  // MAE mask flags (only ever set on valid tokens)

  int size() const { return static_cast<int>(valid.size()); }
};

/// Throws Error(ConfigError) when a channel length is not divisible by steps_per_token.
std::vector<TokenSequence> tokenize(const rsd::PaddedSeries& series, const ModelConfig& config);

/// Flags each valid token independently with probability mask_prob.
void mae_mask(TokenSequence& tokens, double mask_prob, Rng& rng);

struct Encoded {
  Var pooled;   // 1 x token_dim
  Var latents;  // (sum of tokens) x token_dim, satellites concatenated in layout order
  std::vector<bool> valid;
};

class Model {
 public:
  /// Parameters are drawn from config.seed.
  Model(ModelConfig config, rsd::SensorLayout layout);

  const ModelConfig& config() const { return config_; }
  const rsd::SensorLayout& layout() const { return layout_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  /// Throws Error(EmptyInput) when no token of any satellite is valid.
  Encoded encode(Graph& g, const std::vector<TokenSequence>& tokens) const;
  /// Per-satellite reconstruction, each pad_length x feature_count.
  std::vector<Var> decode(Graph& g, Var pooled) const;
  /// 1 x 13 logits. Dropout is applied only when dropout_rng is given.
  Var classify_logits(Graph& g, Var pooled, Rng* dropout_rng = nullptr) const;

  std::vector<double> embed(const rsd::PaddedSeries& series) const;
  std::array<double, kNumClasses> predict_proba(const rsd::PaddedSeries& series) const;

  /// Re-draws the classifier head (used when fine-tuning from a pre-trained encoder).
  void reset_classifier(std::uint64_t seed);

 private:
  struct Block {
    std::size_t ln1_g, ln1_b, w_qkv, b_qkv, w_o, b_o, ln2_g, ln2_b, w1, b1, w2, b2;
  };
  struct Satellite {
    std::string id;
    int features = 0;
    std::size_t tok_w, tok_b, mask, pre_pos;
    std::vector<Block> pre;
    std::size_t dec_pos, dec_out_w, dec_out_b;
    std::vector<std::array<std::size_t, 4>> dec;  // w1, b1, w2, b2
  };

  Block add_block(const std::string& prefix, Rng& rng);
  Var block_forward(Graph& g, const Block& b, Var x, const Mat& key_mask) const;
  Var p(Graph& g, std::size_t index) const { return g.param(params_, index); }

  ModelConfig config_;
  rsd::SensorLayout layout_;
  ParameterSet params_;
  std::vector<Satellite> sats_;
  std::size_t post_pos_ = 0;
  std::vector<Block> post_;
  std::size_t final_g_ = 0, final_b_ = 0;
  std::vector<std::pair<std::size_t, std::size_t>> cls_hidden_;
  std::size_t cls_out_w_ = 0, cls_out_b_ = 0;
};

}  // namespace cropid::model
