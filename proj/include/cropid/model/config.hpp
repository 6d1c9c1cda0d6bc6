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

#include <cstdint>
#include <map>
#include <string>

namespace cropid::model {

struct ModelConfig {
  int token_dim = 64;
  int steps_per_token = 4;
  int pre_fusion_layers = 2;
  int post_fusion_layers = 2;
  int decoder_layers_s1 = 2;
  int decoder_layers_s2 = 2;
  int attention_heads = 4;
  int attention_size = 32;  // total query/key/value width, split across heads
  int ffn_multiplier = 2;
  int classifier_depth = 2;
  int classifier_width = 64;
  double classifier_dropout = 0.0;
  double mask_prob_s1 = 0.75;
  double mask_prob_s2 = 0.75;
  double focal_gamma = 2.0;
  double learning_rate = 2e-4;
  std::uint64_t seed = 0;
  int pad_length = 80;
  int batch_size = 64;
  int pretrain_steps = 5000;
  int finetune_steps = 5000;
  int validate_every = 250;
  int knn_k = 3;

  int tokens_per_satellite() const { return pad_length / steps_per_token; }
  int head_dim() const { return attention_size / attention_heads; }

  /// Structural checks only (divisibility, positivity, probability ranges). Throws ConfigError.
  void validate() const;
  /// Additionally requires every explored hyper-parameter to lie in its published value set.
  void validate_domains() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// key=value echo of every field, in a fixed order.
std::map<std::string, std::string> to_key_values(const ModelConfig& config);

/// Applies one key=value pair. Returns false when the key is not a model key.
/// Throws ConfigError on a malformed value.
bool apply_key_value(ModelConfig& config, const std::string& key, const std::string& value);

}  // namespace cropid::model
