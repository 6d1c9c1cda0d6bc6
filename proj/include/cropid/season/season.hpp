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

#include <map>
#include <optional>
#include <vector>

#include "cropid/core/crop.hpp"
#include "cropid/core/date.hpp"
#include "cropid/rsd/rsd.hpp"

namespace cropid::season {

struct NdviSample {
  Day day = 0;
  double ndvi = 0.0;
  std::optional<double> cloud_score;
};

/// NDVI samples of one field, strictly increasing in day.
using NdviTrace = std::vector<NdviSample>;

struct CropSeason {
  Day start = 0;
  Day end = 0;

  int length() const { return end - start; }
  bool contains(Day day) const { return start <= day && day <= end; }
  bool overlaps(const CropSeason& other) const { return start <= other.end && other.start <= end; }
  friend bool operator==(const CropSeason&, const CropSeason&) = default;
};

struct DetectionParams {
  double cloud_threshold = 0.6;
  int smoothing_window_days = 20;
  double vegetation_threshold = 0.4;
  int merge_gap_days = 30;
};

/// Builds the NDVI trace from the Sentinel-2 stream of a (composited) field series.
NdviTrace ndvi_trace(const rsd::RsdSeries& field_series, const rsd::SensorLayout& layout);

/// Drops samples whose cloud score is strictly below the threshold; samples without one are kept.
NdviTrace mask_clouds(const NdviTrace& trace, double threshold = 0.6);

/// Centered moving average over samples within +-window/2 days (inclusive). Throws EmptyTrace.
NdviTrace smooth(const NdviTrace& trace, int window_days = 20);

/// Maximal runs of samples with ndvi >= threshold as (first day, last day). Single-sample runs
/// come out as (t, t).
std::vector<CropSeason> segment_seasons(const NdviTrace& trace, double threshold = 0.4);

/// Merges consecutive seasons separated by fewer than min_gap days, cascading left to right.
std::vector<CropSeason> merge_adjacent(std::vector<CropSeason> seasons, int min_gap = 30);

/// NDVI -> cloud mask -> smoothing -> segmentation -> zero-length removal -> merge.
/// Throws Error(EmptyTrace) if nothing survives cloud masking.
std::vector<CropSeason> detect_seasons(const rsd::RsdSeries& field_series, const rsd::SensorLayout& layout,
                                       const DetectionParams& params = {});
std::vector<CropSeason> detect_seasons_from_trace(const NdviTrace& trace, const DetectionParams& params = {});

/// True iff the season is no longer than the crop's bound. Throws Error(UnknownCrop) for Others.
bool check_max_length(const CropSeason& season, CropLabel crop);

struct LengthPercentiles {
  int p25 = 0;
  int p50 = 0;
  int p75 = 0;
  int count = 0;
};

/// Nearest-rank percentile: the value at 1-based rank ceil(p/100 * n) of the sorted list.
int nearest_rank_percentile(std::vector<int> values, double p);

/// Per-crop nearest-rank quartiles; crops with no lengths are omitted.
std::map<CropLabel, LengthPercentiles> season_length_percentiles(
    const std::map<CropLabel, std::vector<int>>& lengths_by_crop);

}  // namespace cropid::season
