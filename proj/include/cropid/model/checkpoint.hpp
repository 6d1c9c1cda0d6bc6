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

#include <filesystem>
#include <string>

#include "json.hpp"

#include "cropid/model/model.hpp"

namespace cropid::model {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  std::string kind;  // "pretrain" or "finetune"
  ModelConfig config;
  rsd::SensorLayout layout;
  int step = 0;
  double selection_score = 0.0;  // NaN is stored as null
  rsd::NormStats norm_stats;
  ad::ParameterSet params;
};

Checkpoint make_checkpoint(const Model& model, std::string kind, int step, double score, rsd::NormStats stats);
/// Rebuilds the model and copies parameters. Throws Error(ConfigError) on a shape mismatch.
Model model_from_checkpoint(const Checkpoint& ckpt);
/// Copies every parameter with a matching name and shape (used to start fine-tuning from a
/// pre-trained encoder). Returns the number copied.
std::size_t load_matching(ad::ParameterSet& into, const ad::ParameterSet& from);

nlohmann::json to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cropid::model
