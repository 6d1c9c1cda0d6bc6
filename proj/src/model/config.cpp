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

#include "cropid/model/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <sstream>
#include <vector>

#include "cropid/core/error.hpp"

namespace cropid::model {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::ConfigError, message);
}

template <typename T>
void require_in(const std::string& key, T value, std::initializer_list<T> allowed) {
  for (T a : allowed) {
    if constexpr (std::is_floating_point_v<T>) {
      if (std::abs(a - value) < 1e-12) return;
    } else {
      if (a == value) return;
    }
  }
  std::ostringstream ss;
  ss << key << "=" << value << " outside {";
  bool first = true;
  for (T a : allowed) {
    ss << (first ? "" : ", ") << a;
    first = false;
  }
  ss << "}";
  throw Error(ErrorCode::ConfigError, ss.str());
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::ConfigError, key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::ConfigError, key + ": expected an unsigned integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) {
    throw Error(ErrorCode::ConfigError, key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

struct Field {
  const char* key;
  std::function<void(ModelConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ModelConfig&)> get;
};

#define CROPID_INT_FIELD(name, member)                                                                       \
  Field {                                                                                                    \
    name, [](ModelConfig& c, const std::string& k, const std::string& v) { c.member = parse_int(k, v); },    \
        [](const ModelConfig& c) { return std::to_string(c.member); }                                      \
  }
#define CROPID_DOUBLE_FIELD(name, member)                                                                    \
  Field {                                                                                                    \
    name, [](ModelConfig& c, const std::string& k, const std::string& v) { c.member = parse_double(k, v); }, \
        [](const ModelConfig& c) { return fmt(c.member); }                                                 \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = {
      CROPID_INT_FIELD("token_dimension", token_dim),
      CROPID_INT_FIELD("tokenizer_num_time_steps", steps_per_token),
      CROPID_INT_FIELD("num_pre_fusion_encoder_layers", pre_fusion_layers),
      CROPID_INT_FIELD("num_post_fusion_encoder_layers", post_fusion_layers),
      CROPID_INT_FIELD("num_sentinel1_decoder_layers", decoder_layers_s1),
      CROPID_INT_FIELD("num_sentinel2_decoder_layers", decoder_layers_s2),
      CROPID_DOUBLE_FIELD("mask_probability_sentinel1", mask_prob_s1),
      CROPID_DOUBLE_FIELD("mask_probability_sentinel2", mask_prob_s2),
      CROPID_INT_FIELD("attention_num_heads", attention_heads),
      CROPID_INT_FIELD("attention_size", attention_size),
      CROPID_INT_FIELD("classifier_mlp_depth", classifier_depth),
      CROPID_INT_FIELD("classifier_mlp_width", classifier_width),
      CROPID_DOUBLE_FIELD("classifier_dropout", classifier_dropout),
      CROPID_DOUBLE_FIELD("focal_loss_gamma", focal_gamma),
      CROPID_DOUBLE_FIELD("adam_learning_rate", learning_rate),
      CROPID_INT_FIELD("ffn_multiplier", ffn_multiplier),
      CROPID_INT_FIELD("pad_length", pad_length),
      CROPID_INT_FIELD("batch_size", batch_size),
      CROPID_INT_FIELD("pretrain_steps", pretrain_steps),
      CROPID_INT_FIELD("finetune_steps", finetune_steps),
      CROPID_INT_FIELD("validate_every", validate_every),
      CROPID_INT_FIELD("knn_k", knn_k),
      Field{"model_seed",
            [](ModelConfig& c, const std::string& k, const std::string& v) { c.seed = parse_u64(k, v); },
            [](const ModelConfig& c) { return std::to_string(c.seed); }},
  };
  return kFields;
}

#undef CROPID_INT_FIELD
#undef CROPID_DOUBLE_FIELD

}  // namespace

void ModelConfig::validate() const {
  require(token_dim > 0, "token_dimension must be positive");
  require(steps_per_token > 0, "tokenizer_num_time_steps must be positive");
  require(pad_length > 0 && pad_length % steps_per_token == 0,
          "pad_length " + std::to_string(pad_length) + " is not divisible by tokenizer_num_time_steps " +
              std::to_string(steps_per_token));
  require(pre_fusion_layers >= 0 && post_fusion_layers >= 0, "encoder layer counts must be >= 0");
  require(decoder_layers_s1 >= 0 && decoder_layers_s2 >= 0, "decoder layer counts must be >= 0");
  require(attention_heads > 0 && attention_size > 0 && attention_size % attention_heads == 0,
          "attention_size must be a positive multiple of attention_num_heads");
  require(ffn_multiplier > 0, "ffn_multiplier must be positive");
  require(classifier_depth >= 0 && classifier_width > 0, "classifier depth >= 0 and width > 0 required");
  require(classifier_dropout >= 0.0 && classifier_dropout < 1.0, "classifier_dropout must lie in [0, 1)");
  require(mask_prob_s1 >= 0.0 && mask_prob_s1 < 1.0, "mask_probability_sentinel1 must lie in [0, 1)");
  require(mask_prob_s2 >= 0.0 && mask_prob_s2 < 1.0, "mask_probability_sentinel2 must lie in [0, 1)");
  require(focal_gamma >= 0.0, "focal_loss_gamma must be >= 0");
  require(learning_rate > 0.0, "adam_learning_rate must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(pretrain_steps >= 0 && finetune_steps >= 0, "step counts must be >= 0");
  require(validate_every > 0, "validate_every must be positive");
  require(knn_k > 0, "knn_k must be positive");
}

void ModelConfig::validate_domains() const {
  validate();
  require_in("token_dimension", token_dim, {16, 64});
  require_in("tokenizer_num_time_steps", steps_per_token, {4, 8});
  require_in("num_pre_fusion_encoder_layers", pre_fusion_layers, {2, 4, 6});
  require_in("num_post_fusion_encoder_layers", post_fusion_layers, {2, 4, 6});
  require_in("num_sentinel1_decoder_layers", decoder_layers_s1, {2, 4, 6});
  require_in("num_sentinel2_decoder_layers", decoder_layers_s2, {2, 4, 6});
  require_in("mask_probability_sentinel1", mask_prob_s1, {0.5, 0.75});
  require_in("mask_probability_sentinel2", mask_prob_s2, {0.5, 0.75});
  require_in("attention_num_heads", attention_heads, {4});
  require_in("attention_size", attention_size, {32});
  require_in("classifier_mlp_depth", classifier_depth, {2, 4, 6});
  require_in("classifier_mlp_width", classifier_width, {64, 512, 1024});
  require_in("classifier_dropout", classifier_dropout, {0.0, 0.1, 0.2});
  require_in("focal_loss_gamma", focal_gamma, {0.0, 1.5, 2.0});
  require_in("adam_learning_rate", learning_rate, {0.0002});
}

std::map<std::string, std::string> to_key_values(const ModelConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& f : fields()) out[f.key] = f.get(config);
  return out;
}

bool apply_key_value(ModelConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, key, value);
      return true;
    }
  }
  return false;
}

}  // namespace cropid::model
