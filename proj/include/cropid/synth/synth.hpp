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
#include <cstdint>
#include <string>
#include <vector>

#include "cropid/census/census.hpp"
#include "cropid/core/crop.hpp"
#include "cropid/datagen/datagen.hpp"
#include "cropid/eval/metrics.hpp"

namespace cropid::synth {

/// Phenology and radar signature of one crop class.
struct CropTemplate {
  int length_min = 100;
  int length_max = 130;
  double peak_ndvi = 0.8;
  double vv_gain_db = 3.0;  // Sentinel-1 in-season backscatter rise
  double vh_gain_db = 4.0;
  double blue_gain = 0.02;
  double green_gain = 0.05;
};

struct SynthWorldConfig {
  std::uint64_t seed = 1;
  int num_fields = 200;
  double lat_origin = 28.0;
  double lng_origin = 74.0;
  double lat_span = 4.0;
  double lng_span = 4.0;
  double site_spacing_deg = 0.005;
  int regions_lat = 2;
  int regions_lng = 2;
  Day span_start = make_day(2022, 1, 1);
  Day span_end = make_day(2024, 12, 31);
  std::array<double, kNumClasses> crop_mix{};  // defaults to a long-tailed mix in class order
  std::array<CropTemplate, kNumClasses> templates{};
  double fallow_probability = 0.1;
  int min_gap_days = 45;
  int points_per_field = 2;
  double cloud_probability = 0.15;
  double noise_std = 0.01;    // reflectance units
  double s1_noise_db = 0.3;
  double off_field_fraction = 0.0;
  double off_season_fraction = 0.0;
  /// Fields whose label seasons start at least this many days after span_start.
  int label_history_days = 365;

  SynthWorldConfig();
  /// Throws Error(ConfigError) for probabilities outside [0,1], empty mixes or lengths over the
  /// crop's bound.
  void validate() const;
};

struct TrueSeason {
  CropLabel crop = CropLabel::Others;
  std::string crop_name;
  Day start = 0;  // sowing: NDVI crosses the vegetation threshold
  Day end = 0;    // harvest
};

enum class LabelTag { Clean, OffField, OffSeason };
std::string_view to_string(LabelTag tag);
LabelTag parse_label_tag(std::string_view text);

struct LabelTruth {
  std::string label_id;
  std::string field_id;
  int season_index = 0;
  LabelTag tag = LabelTag::Clean;
};

struct FieldTruth {
  std::string field_id;
  std::vector<TrueSeason> seasons;  // non-overlapping, ascending
  std::vector<rsd::GeoPoint> points;
};

struct SynthTruth {
  std::vector<FieldTruth> fields;  // aligned with the field list
  std::vector<LabelTruth> labels;  // aligned with the label list
};

struct SynthWorld {
  std::vector<datagen::FieldBoundary> fields;
  SynthTruth truth;
};

std::string field_id_for(int index);

SynthWorld generate_world(const SynthWorldConfig& config);

/// Per-point observation series keyed by field id. Noise and clouds follow the config.
datagen::ObservationStore generate_observations(const SynthWorld& world, const SynthWorldConfig& config,
                                                int threads = 1);

/// One label per season that has a full year of history; fills world.truth.labels.
std::vector<datagen::GroundTruthLabel> generate_labels(SynthWorld& world, const SynthWorldConfig& config);

/// Noise-free NDVI of a field at a day (the template curve).
double true_ndvi(const FieldTruth& field, const SynthWorldConfig& config, Day day);

struct CensusRow {
  std::string region;
  eval::SeasonTag season = eval::SeasonTag::Winter;
  std::string crop;
  double area_kha = 0.0;
};

/// Sums field areas by region, season tag of the true sowing date and crop, over seasons that
/// start in [year_start, year_start + 1 year). Unassigned seasons are skipped.
std::vector<CensusRow> census_from_truth(const SynthWorld& world, eval::SeasonRule rule, Day year_start);

std::string census_csv(const std::vector<CensusRow>& rows);

/// One-hot predictions reproducing the true calendar: one per season, dated the month after it ends.
std::vector<census::FieldPrediction> perfect_predictions(const SynthWorld& world);

}  // namespace cropid::synth
