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
#include <iosfwd>
#include <string>
#include <vector>

#include "cropid/pipeline/config.hpp"
#include "cropid/pipeline/manifest.hpp"
#include "cropid/synth/synth.hpp"

namespace cropid::pipeline {

struct StageContext {
  fs::path out = "out";
  int threads = 1;
  std::ostream* log = nullptr;
  /// detect-seasons: explicit seasons.jsonl destination (default <out>/seasons/seasons.jsonl).
  std::string seasons_output;
  /// census-report: directory or file holding monthly predictions (default <out>/infer).
  std::string predictions;
};

const std::vector<std::string>& stage_names();
/// Directory below the output root that holds a stage's outputs and manifest.
std::string stage_dir(const std::string& stage);

/// Runs one stage and writes its manifest. Throws Error(DependencyError) naming the missing
/// upstream stage when a required manifest is absent, Error(ConfigError) for unknown stages.
RunManifest run_stage(const std::string& stage, const PipelineConfig& config, const StageContext& context);

// truth.jsonl: one {"type":"field"} record per field with its true seasons, then one
// {"type":"label"} record per label with its noise tag.
void write_truth(const fs::path& path, const synth::SynthWorld& world);
synth::SynthTruth read_truth(const fs::path& path);

}  // namespace cropid::pipeline
