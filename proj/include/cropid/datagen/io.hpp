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
#include <functional>
#include <memory>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "cropid/datagen/datagen.hpp"

namespace cropid::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

/// Reads a whole file; throws Error(IoError) when it cannot be opened.
std::string read_text(const fs::path& path);
/// Writes atomically enough for a desk pipeline: truncate + write, parent directories created.
void write_text(const fs::path& path, const std::string& text);
Json read_json(const fs::path& path);
/// Pretty-printed with sorted keys so equal documents are equal bytes.
void write_json(const fs::path& path, const Json& doc);

/// Calls fn(record, line_number) for every non-blank line.
void for_each_jsonl(const fs::path& path, const std::function<void(const Json&, std::size_t)>& fn);

/// Values are rounded to 1e-6 before serialization so shards are short and stable.
double round6(double v);

// fields.json: {"fields": [{"field_id", "region", "area_ha", "polygon": [[lat, lng], ...]}]}
std::vector<datagen::FieldBoundary> read_fields(const fs::path& path);
void write_fields(const fs::path& path, const std::vector<datagen::FieldBoundary>& fields);

// labels.jsonl: {"label_id", "crop", "lat", "lng", "date"}
std::vector<datagen::GroundTruthLabel> read_labels(const fs::path& path);
void write_labels(const fs::path& path, const std::vector<datagen::GroundTruthLabel>& labels);

// observations.jsonl: {"field_id", "point", "lat", "lng", "satellite", "date", "values", "cloud_score"?}
datagen::ObservationStore read_observations(const fs::path& path, const rsd::SensorLayout& layout);

/// Streaming writer so large worlds never sit in memory as text.
class ObservationWriter {
 public:
  ObservationWriter(const fs::path& path, rsd::SensorLayout layout);
  ~ObservationWriter();
  ObservationWriter(const ObservationWriter&) = delete;
  ObservationWriter& operator=(const ObservationWriter&) = delete;

  void write_field(const std::string& field_id, const std::vector<rsd::RsdSeries>& points);
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

void write_observations(const fs::path& path, const datagen::ObservationStore& store, const rsd::SensorLayout& layout);

// seasons.jsonl: {"field_id", "season_index", "start", "end"}
struct FieldSeasons {
  std::string field_id;
  std::vector<season::CropSeason> seasons;
};
void write_seasons(const fs::path& path, const std::vector<FieldSeasons>& seasons);
std::vector<FieldSeasons> read_seasons(const fs::path& path);

Json to_json(const rsd::NormStats& stats);
rsd::NormStats norm_stats_from_json(const Json& doc);

Json to_json(const rsd::PaddedSeries& series);
rsd::PaddedSeries padded_series_from_json(const Json& doc);

Json to_json(const datagen::InSeasonExample& ex);
datagen::InSeasonExample example_from_json(const Json& doc);
Json to_json(const datagen::UnlabeledExample& ex);
datagen::UnlabeledExample unlabeled_from_json(const Json& doc);

void write_examples(const fs::path& path, const std::vector<datagen::InSeasonExample>& examples);
std::vector<datagen::InSeasonExample> read_examples(const fs::path& path);
void write_unlabeled(const fs::path& path, const std::vector<datagen::UnlabeledExample>& examples);
std::vector<datagen::UnlabeledExample> read_unlabeled(const fs::path& path);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);
std::string sha256_hex(const std::string& bytes);

}  // namespace cropid::io
