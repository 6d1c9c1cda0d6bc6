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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cropid/census/census.hpp"
#include "cropid/datagen/datagen.hpp"
#include "cropid/eval/metrics.hpp"
#include "cropid/model/config.hpp"
#include "cropid/synth/synth.hpp"

namespace cropid::pipeline {

struct PipelineConfig {
  std::uint64_t seed = 0;

  // Empty paths mean "the synth stage outputs".
  std::string fields_path;
  std::string observations_path;
  std::string labels_path;
  std::string census_path;

  synth::SynthWorldConfig synth;
  datagen::DatagenParams datagen;
  model::ModelConfig model;

  int runs = 3;
  bool finetune_from_pretrained = true;

  eval::SeasonRule eval_season_rule = eval::SeasonRule::JunOct;
  eval::SeasonRule census_season_rule = eval::SeasonRule::MayOct;
  std::vector<double> confidence_thresholds;

  Day infer_first_month = make_day(2022, 1, 1);
  Day infer_last_month = make_day(2024, 12, 1);
  Day census_year_start = make_day(2023, 5, 1);
  census::CosineForm cosine_form = census::CosineForm::Euclidean;
  bool charts = true;

  PipelineConfig();

  /// Seeds derived from `seed` for each consumer.
  std::uint64_t dataset_seed(int run) const;
  std::uint64_t model_seed(int run) const;

  /// Structural checks plus the published hyper-parameter domains. Throws ConfigError.
  void validate() const;
};

/// Applies one key. Throws ConfigError for unknown keys and malformed values.
void apply_key_value(PipelineConfig& config, const std::string& key, const std::string& value);

/// Parses key=value lines ('#' starts a comment). Unknown or repeated keys are rejected;
/// the result is validated.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Every key with its current value, sorted by key.
std::map<std::string, std::string> to_key_values(const PipelineConfig& config);

}  // namespace cropid::pipeline
