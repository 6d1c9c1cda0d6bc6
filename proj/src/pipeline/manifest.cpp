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

#include "cropid/pipeline/manifest.hpp"

#include "cropid/datagen/io.hpp"

namespace cropid::pipeline {

using nlohmann::json;

namespace {

json digests_json(const std::vector<FileDigest>& files) {
  json out = json::array();
  for (const auto& f : files) out.push_back({{"path", f.path}, {"sha256", f.sha256}});
  return out;
}

std::vector<FileDigest> digests_from(const json& doc) {
  std::vector<FileDigest> out;
  for (const auto& f : doc) out.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

std::string display_path(const fs::path& path, const fs::path& root) {
  const fs::path abs = fs::weakly_canonical(fs::absolute(path));
  const fs::path base = fs::weakly_canonical(fs::absolute(root));
  const fs::path rel = abs.lexically_relative(base);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return path.generic_string();
}

FileDigest digest_of(const fs::path& path, const fs::path& root) {
  return {display_path(path, root), io::sha256_file(path)};
}

json to_json(const RunManifest& m) {
  json counts = json::array();
  for (const auto& [name, n] : m.stage_counts) counts.push_back({{"stage", name}, {"count", n}});
  return {
      {"stage", m.stage},
      {"seed", m.seed},
      {"params", m.params},
      {"inputs", digests_json(m.inputs)},
      {"outputs", digests_json(m.outputs)},
      {"upstream", digests_json(m.upstream)},
      {"stage_counts", counts},
      {"summary", m.summary},
  };
}

RunManifest manifest_from_json(const json& doc) {
  RunManifest m;
  m.stage = doc.at("stage").get<std::string>();
  m.seed = doc.at("seed").get<std::uint64_t>();
  m.params = doc.at("params").get<std::map<std::string, std::string>>();
  m.inputs = digests_from(doc.at("inputs"));
  m.outputs = digests_from(doc.at("outputs"));
  m.upstream = digests_from(doc.at("upstream"));
  for (const auto& c : doc.at("stage_counts")) {
    m.stage_counts.emplace_back(c.at("stage").get<std::string>(), c.at("count").get<long>());
  }
  m.summary = doc.value("summary", json::object());
  return m;
}

void write_manifest(const fs::path& dir, const RunManifest& manifest) {
  io::write_json(dir / "manifest.json", to_json(manifest));
  io::write_json(dir / "manifest.timings.json", json(manifest.timings_s));
}

RunManifest read_manifest(const fs::path& dir) {
  RunManifest m = manifest_from_json(io::read_json(dir / "manifest.json"));
  const fs::path timings = dir / "manifest.timings.json";
  if (fs::exists(timings)) m.timings_s = io::read_json(timings).get<std::map<std::string, double>>();
  return m;
}

}  // namespace cropid::pipeline
