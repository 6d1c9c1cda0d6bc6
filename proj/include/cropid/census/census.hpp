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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cropid/datagen/datagen.hpp"
#include "cropid/eval/metrics.hpp"
#include "cropid/model/model.hpp"

namespace cropid::census {

using eval::Probs;
using eval::SeasonRule;
using eval::SeasonTag;
using season::CropSeason;

struct FieldPrediction {
  std::string field_id;
  std::string region;
  double area_ha = 0.0;
  Day inference_date = 0;  // first of a month
  Probs probs{};           // ensemble mean
  CropSeason season;

  int crop_index() const { return eval::predicted_class(probs); }
};

/// A trained model with the normalization statistics its inputs must use.
struct EnsembleMember {
  const model::Model* model = nullptr;
  const rsd::NormStats* stats = nullptr;
};

struct InferenceOptions {
  Day first_month = make_day(2022, 1, 1);
  Day last_month = make_day(2024, 12, 1);
  season::DetectionParams detection;
  double inset_m = 10.0;
  int pad_length = rsd::kDefaultPadLength;
  /// A season is still active when it ended at most this many days before the last observation.
  int active_gap_days = 30;
  int threads = 1;
};

/// Observations strictly before `date`.
rsd::RsdSeries truncate_before(const rsd::RsdSeries& series, Day date);

/// Arithmetic mean of the members' probability vectors for one model input.
Probs ensemble_proba(std::span<const EnsembleMember> ensemble, const rsd::PaddedSeries& raw_input);

/// Runs season detection and classification for one field as of `date`, seeing only
/// observations dated before it. Returns nothing when no season is active.
std::optional<FieldPrediction> predict_field_at(const datagen::FieldBoundary& field,
                                                std::span<const rsd::RsdSeries> interior_points,
                                                const rsd::SensorLayout& layout,
                                                std::span<const EnsembleMember> ensemble, Day date,
                                                const InferenceOptions& options);

/// Predictions for every field on the first of each month in [first_month, last_month],
/// ordered by field (input order) then date.
std::vector<FieldPrediction> monthly_inference(std::span<const datagen::FieldBoundary> fields,
                                               const datagen::ObservationStore& observations,
                                               const rsd::SensorLayout& layout,
                                               std::span<const EnsembleMember> ensemble,
                                               const InferenceOptions& options);

/// Transitively groups overlapping season estimates of one field and keeps the prediction
/// with the latest inference date from each group. Output is ordered by season start.
std::vector<FieldPrediction> group_seasons(std::span<const FieldPrediction> field_predictions);

/// group_seasons applied per field. Input order across fields is preserved.
std::vector<FieldPrediction> final_predictions(std::span<const FieldPrediction> predictions);

SeasonTag assign_agricultural_season(Day season_start, SeasonRule rule);

using CropAreas = std::array<double, kNumClasses>;

/// Sum of field areas (ha) by argmax crop over predictions of the region whose season start
/// maps to `season`.
CropAreas aggregate_area(std::span<const FieldPrediction> finals, const std::string& region, SeasonTag season,
                         SeasonRule rule);

enum class CosineForm { Euclidean, SumProduct };

/// Euclidean form: dot / (|a| |b|). SumProduct form: dot / (sum a * sum b). 0 when a
/// denominator vanishes.
double cosine_similarity(std::span<const double> predicted, std::span<const double> census,
                         CosineForm form = CosineForm::Euclidean);

/// min(pred / census, census / pred); 0 when exactly one is 0, 1 when both are.
double area_ratio(double predicted, double census);

struct CensusEntry {
  std::string region;
  SeasonTag season = SeasonTag::Winter;
  CropLabel crop = CropLabel::Others;
  double area_kha = 0.0;
};

struct CensusTable {
  std::vector<CensusEntry> entries;
  std::vector<std::string> warnings;
};

/// Parses "region,season,crop,area_kha" CSV. Crops outside the vocabulary are folded into
/// Others with a warning.
CensusTable parse_census_csv(const std::string& text);
CensusTable read_census_csv(const std::filesystem::path& path);

std::string to_jsonl(std::span<const FieldPrediction> predictions);
void write_predictions(const std::filesystem::path& path, std::span<const FieldPrediction> predictions);
std::vector<FieldPrediction> read_predictions(const std::filesystem::path& path);

}  // namespace cropid::census
