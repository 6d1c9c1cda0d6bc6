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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cropid/core/crop.hpp"
#include "cropid/datagen/geometry.hpp"
#include "cropid/rsd/rsd.hpp"
#include "cropid/season/season.hpp"

namespace cropid::datagen {

using season::CropSeason;

struct GroundTruthLabel {
  std::string label_id;
  std::string crop_name;  // raw survey name
  CropLabel crop = CropLabel::Others;
  GeoPoint location;
  Day day = 0;
};

/// Point series per field id. A series without a location is treated as already field-level.
using ObservationStore = std::map<std::string, std::vector<rsd::RsdSeries>>;

/// Bounding-box bucketed lookup of the field containing a point.
class FieldIndex {
 public:
  explicit FieldIndex(std::span<const FieldBoundary> fields, double bucket_deg = 0.01);
  /// Index of the first field (input order) containing p.
  std::optional<std::size_t> find(GeoPoint p) const;

 private:
  std::span<const FieldBoundary> fields_;
  std::vector<std::vector<Vec2>> local_;
  double bucket_deg_;
  std::map<std::pair<long, long>, std::vector<std::size_t>> buckets_;
};

struct LabeledField {
  std::size_t field_index = 0;
  std::vector<std::size_t> label_indices;
};

struct LabelJoin {
  std::vector<LabeledField> fields;  // in field input order
  std::vector<std::size_t> unmatched;
};

/// Point-in-polygon join of labels onto fields; labels outside every field are listed as unmatched.
LabelJoin assign_labels_to_fields(std::span<const GroundTruthLabel> labels, std::span<const FieldBoundary> fields);

enum class RejectReason {
  NoField,
  EmptyInterior,
  NoSeason,
  AmbiguousSeason,
  ConflictingLabels,
  TooLong,
  EmptySlice,
};

std::string_view to_string(RejectReason reason);

struct AttachOutcome {
  std::optional<CropSeason> season;
  std::optional<RejectReason> reason;
};

/// For each label of one field: accept iff exactly one season contains its day, no other label of
/// the field with a different crop falls in that season, and the season passes the crop's
/// length bound (Others has no bound).
std::vector<AttachOutcome> attach_seasons(std::span<const GroundTruthLabel> field_labels,
                                          std::span<const CropSeason> seasons);

/// Prediction dates start, start+30, ... <= end.
std::vector<Day> temporal_augment(const CropSeason& season, int interval_days = 30);

inline constexpr int kSliceDays = 365;

/// Observations with day in (t_end - 365, t_end]. Throws Error(EmptySlice) if any stream is empty.
rsd::RsdSeries slice_in_season(const rsd::RsdSeries& field_series, Day t_end);

/// The 5-day grid ending exactly at t_end inside the one-year slice.
rsd::Window anchored_window(Day t_end);

/// Field-level composite used for season detection. Points sharing acquisition days are
/// composited directly; otherwise each is first resampled to a common 5-day grid.
rsd::RsdSeries field_detection_series(std::span<const rsd::RsdSeries> points);

/// Unnormalized model input ending at t_end: each point is sliced, resampled onto the anchored
/// grid, median-composited, then left-padded to `length`.
rsd::PaddedSeries build_input_series(std::span<const rsd::RsdSeries> points, Day t_end,
                                     int length = rsd::kDefaultPadLength);

/// Equal-angle tile used as the spatial shard key.
struct CellId {
  long lat_index = 0;
  long lng_index = 0;

  std::string key() const;
  static CellId parse(const std::string& key);
  friend auto operator<=>(const CellId&, const CellId&) = default;
};

inline constexpr double kCellSizeDeg = 0.15;
CellId cell_of(GeoPoint p, double cell_size_deg = kCellSizeDeg);

enum class Split { Train, Validation, Test };
std::string_view to_string(Split split);

struct SplitRatios {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

/// Seeded hash draw per cell; every sample of a cell follows the cell.
Split assign_cell_split(const CellId& cell, std::uint64_t seed, const SplitRatios& ratios = {});

struct InSeasonExample {
  std::string field_id;
  std::string label_id;
  CropLabel label = CropLabel::Others;
  Day label_day = 0;
  Day t_end = 0;
  CropSeason season;
  int days_after_start = 0;
  CellId cell;
  std::string region;
  rsd::PaddedSeries series;
};

struct UnlabeledExample {
  std::string field_id;
  Day t_end = 0;
  CellId cell;
  Split split = Split::Train;
  rsd::PaddedSeries series;
};

struct LabelOutcome {
  std::string label_id;
  std::optional<RejectReason> reason;
};

struct DatasetSplits {
  std::uint64_t seed = 0;
  SplitRatios ratios;
  std::vector<InSeasonExample> train;
  std::vector<InSeasonExample> validation;
  std::vector<InSeasonExample> test;
  std::vector<UnlabeledExample> unlabeled;
  std::vector<std::pair<std::string, long>> stage_counts;
  std::vector<LabelOutcome> label_outcomes;  // one per input label, input order
  rsd::NormStats norm_stats;

  long stage_count(const std::string& name) const;
};

DatasetSplits split_by_cell(std::vector<InSeasonExample> samples, std::uint64_t seed,
                            const SplitRatios& ratios = {});

struct DatagenParams {
  std::uint64_t seed = 0;
  int pad_length = rsd::kDefaultPadLength;
  double grid_resolution_m = 10.0;
  double inset_m = 10.0;
  int augment_interval_days = 30;
  double cell_size_deg = kCellSizeDeg;
  SplitRatios ratios;
  season::DetectionParams detection;
  /// Unlabeled pre-training examples per field (0 disables).
  int unlabeled_per_field = 0;
  int threads = 1;
};

/// Steps 1-6 of training-data generation plus the spatial split. Normalization statistics come
/// from the train split only and are applied to every split (and to unlabeled examples).
DatasetSplits build_dataset(std::span<const GroundTruthLabel> labels, std::span<const FieldBoundary> fields,
                            const ObservationStore& observations, const rsd::SensorLayout& layout,
                            const DatagenParams& params);

/// Interior point series of a field (series without location pass through).
std::vector<rsd::RsdSeries> interior_series(const FieldBoundary& field, std::span<const rsd::RsdSeries> points,
                                            double inset_m = 10.0);

rsd::NormStats compute_norm_stats(std::span<const InSeasonExample> train, const rsd::SensorLayout& layout);

}  // namespace cropid::datagen
