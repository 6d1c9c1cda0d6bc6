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

#include "cropid/season/season.hpp"

#include <algorithm>
#include <cmath>

#include "cropid/core/error.hpp"

namespace cropid::season {

NdviTrace ndvi_trace(const rsd::RsdSeries& field_series, const rsd::SensorLayout& layout) {
  const auto& spec = layout.at(rsd::kSentinel2);
  const auto& stream = field_series.stream(rsd::kSentinel2);
  const int nir = spec.band_index("B8");
  const int red = spec.band_index("B4");
  if (nir < 0 || red < 0) throw Error(ErrorCode::ConfigError, "Sentinel-2 layout lacks B8/B4");
  NdviTrace trace;
  trace.reserve(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto v = stream.values(i);
    trace.push_back({stream.day(i), rsd::ndvi(v[static_cast<std::size_t>(nir)], v[static_cast<std::size_t>(red)]),
                     stream.cloud_score(i)});
  }
  return trace;
}

NdviTrace mask_clouds(const NdviTrace& trace, double threshold) {
  NdviTrace out;
  out.reserve(trace.size());
  for (const auto& s : trace) {
    if (s.cloud_score && *s.cloud_score < threshold) continue;
    out.push_back(s);
  }
  return out;
}

NdviTrace smooth(const NdviTrace& trace, int window_days) {
  if (trace.empty()) throw Error(ErrorCode::EmptyTrace, "cannot smooth an empty NDVI trace");
  const int half = window_days / 2;
  NdviTrace out = trace;
  std::size_t lo = 0;
  std::size_t hi = 0;  // exclusive
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Day t = trace[i].day;
    while (hi < trace.size() && trace[hi].day <= t + half) ++hi;
    while (trace[lo].day < t - half) ++lo;
    // Summed afresh per window so the value never depends on earlier windows' rounding.
    double sum = 0.0;
    for (std::size_t k = lo; k < hi; ++k) sum += trace[k].ndvi;
    out[i].ndvi = sum / static_cast<double>(hi - lo);
  }
  return out;
}

std::vector<CropSeason> segment_seasons(const NdviTrace& trace, double threshold) {
  std::vector<CropSeason> out;
  bool in_run = false;
  CropSeason current;
  for (const auto& s : trace) {
    if (s.ndvi >= threshold) {
      if (!in_run) {
        current.start = s.day;
        in_run = true;
      }
      current.end = s.day;
    } else if (in_run) {
      out.push_back(current);
      in_run = false;
    }
  }
  if (in_run) out.push_back(current);
  return out;
}

std::vector<CropSeason> merge_adjacent(std::vector<CropSeason> seasons, int min_gap) {
  std::vector<CropSeason> out;
  out.reserve(seasons.size());
  for (const auto& s : seasons) {
    if (!out.empty() && s.start - out.back().end < min_gap) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

std::vector<CropSeason> detect_seasons_from_trace(const NdviTrace& trace, const DetectionParams& params) {
  const NdviTrace clear = mask_clouds(trace, params.cloud_threshold);
  if (clear.empty()) throw Error(ErrorCode::EmptyTrace, "no cloud-free NDVI samples");
  const NdviTrace smoothed = smooth(clear, params.smoothing_window_days);
  std::vector<CropSeason> runs = segment_seasons(smoothed, params.vegetation_threshold);
  std::erase_if(runs, [](const CropSeason& s) { return s.start >= s.end; });
  return merge_adjacent(std::move(runs), params.merge_gap_days);
}

std::vector<CropSeason> detect_seasons(const rsd::RsdSeries& field_series, const rsd::SensorLayout& layout,
                                       const DetectionParams& params) {
  return detect_seasons_from_trace(ndvi_trace(field_series, layout), params);
}

bool check_max_length(const CropSeason& season, CropLabel crop) {
  return season.length() <= max_season_length(crop);
}

int nearest_rank_percentile(std::vector<int> values, double p) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "percentile of an empty list");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::map<CropLabel, LengthPercentiles> season_length_percentiles(
    const std::map<CropLabel, std::vector<int>>& lengths_by_crop) {
  std::map<CropLabel, LengthPercentiles> out;
  for (const auto& [crop, lengths] : lengths_by_crop) {
    if (lengths.empty()) continue;
    out[crop] = LengthPercentiles{nearest_rank_percentile(lengths, 25), nearest_rank_percentile(lengths, 50),
                                  nearest_rank_percentile(lengths, 75), static_cast<int>(lengths.size())};
  }
  return out;
}

}  // namespace cropid::season
