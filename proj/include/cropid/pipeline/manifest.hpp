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
#include <utility>
#include <vector>

#include "json.hpp"

namespace cropid::pipeline {

namespace fs = std::filesystem;

struct FileDigest {
  std::string path;  // relative to the output root when inside it
  std::string sha256;
};

/// Reproducibility record written next to every stage's outputs. Wall-clock timings live in a
/// separate sidecar so that the manifest itself is byte-identical across reruns.
struct RunManifest {
  std::string stage;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> params;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::vector<FileDigest> upstream;  // manifests of the stages this one consumed
  std::vector<std::pair<std::string, long>> stage_counts;
  nlohmann::json summary = nlohmann::json::object();
  std::map<std::string, double> timings_s;
};

/// Path relative to `root` when it lies below it, otherwise the path as given.
std::string display_path(const fs::path& path, const fs::path& root);
FileDigest digest_of(const fs::path& path, const fs::path& root);

nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& doc);

/// Writes manifest.json and manifest.timings.json into `dir`.
void write_manifest(const fs::path& dir, const RunManifest& manifest);
RunManifest read_manifest(const fs::path& dir);

}  // namespace cropid::pipeline
