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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cropid/core/date.hpp"

namespace cropid::rsd {

inline constexpr int kCadenceDays = 5;
inline constexpr int kDefaultPadLength = 80;

struct SatelliteSpec {
  std::string id;
  std::vector<std::string> bands;
  bool has_cloud_score = false;

  int band_count() const { return static_cast<int>(bands.size()); }
  /// Model input channels: bands plus the cloud-score channel when present.
  int feature_count() const { return band_count() + (has_cloud_score ? 1 : 0); }
  int band_index(const std::string& band) const;
};

/// Ordered satellite list. Every RsdSeries / PaddedSeries stores one stream per entry, same order.
struct SensorLayout {
  std::vector<SatelliteSpec> satellites;

  /// Sentinel-2 {B2,B3,B4,B8} + cs_cdf, Sentinel-1 {VV,VH}.
  static SensorLayout defaults();

  std::size_t size() const { return satellites.size(); }
  int index_of(const std::string& satellite_id) const;
  const SatelliteSpec& at(const std::string& satellite_id) const;
};

inline const std::string kSentinel2 = "S2";
inline const std::string kSentinel1 = "S1";

struct BandObservation {
  Day day = 0;
  std::vector<double> values;
  std::optional<double> cloud_score;
};

/// Observations of one satellite, stored column-wise. Days are strictly increasing.
class SatelliteStream {
 public:
  SatelliteStream() = default;
  SatelliteStream(std::string satellite, int band_count, bool has_cloud_score);
  explicit SatelliteStream(const SatelliteSpec& spec)
      : SatelliteStream(spec.id, spec.band_count(), spec.has_cloud_score) {}

  /// Throws Error(AlignmentError) when the day does not increase or the band count is wrong.
  void push_back(const BandObservation& obs);
  void reserve(std::size_t n);

  const std::string& satellite() const { return satellite_; }
  int band_count() const { return band_count_; }
  bool has_cloud_score() const { return has_cloud_score_; }
  std::size_t size() const { return days_.size(); }
  bool empty() const { return days_.empty(); }

  Day day(std::size_t i) const { return days_[i]; }
  std::span<const double> values(std::size_t i) const {
    return {values_.data() + i * static_cast<std::size_t>(band_count_), static_cast<std::size_t>(band_count_)};
  }
  std::optional<double> cloud_score(std::size_t i) const {
    if (!has_cloud_score_) return std::nullopt;
    return cloud_[i];
  }
  BandObservation observation(std::size_t i) const;
  const std::vector<Day>& days() const { return days_; }

 private:
  std::string satellite_;
  int band_count_ = 0;
  bool has_cloud_score_ = false;
  std::vector<Day> days_;
  std::vector<double> values_;
  std::vector<double> cloud_;
};

struct GeoPoint {
  double lat = 0.0;
  double lng = 0.0;
};

struct RsdSeries {
  std::vector<SatelliteStream> streams;  // aligned with SensorLayout order
  std::optional<GeoPoint> location;

  static RsdSeries empty_for(const SensorLayout& layout);
  const SatelliteStream& stream(const std::string& satellite) const;
  SatelliteStream& stream(const std::string& satellite);
};

struct Window {
  Day first = 0;
  Day last = 0;
};

/// Per-satellite, per-feature z-score statistics (features include the cloud-score channel).
struct NormStats {
  struct Satellite {
    std::string id;
    std::vector<double> mean;
    std::vector<double> stddev;
  };
  std::vector<Satellite> satellites;

  const Satellite* find(const std::string& id) const;
};

/// Fixed-length grid per satellite at 5-day cadence. values is row-major [length x features].
struct PaddedChannel {
  std::string satellite;
  int length = 0;
  int features = 0;
  std::vector<double> values;
  std::vector<bool> valid;

  double& at(int step, int feature) { return values[static_cast<std::size_t>(step * features + feature)]; }
  double at(int step, int feature) const { return values[static_cast<std::size_t>(step * features + feature)]; }
  int valid_count() const;
};

struct PaddedSeries {
  std::vector<PaddedChannel> channels;  // aligned with SensorLayout order

  const PaddedChannel& channel(const std::string& satellite) const;
};

/// Resamples each stream onto window.first, window.first + cadence, ... <= window.last.
/// Linear between bracketing observations, nearest value held outside the observed range.
/// Throws Error(EmptyStream) naming the satellite when a stream has no observations.
RsdSeries interpolate_to_cadence(const RsdSeries& series, Window window, int cadence = kCadenceDays);

/// Per-timestamp, per-band median across point series. Even counts average the middle two.
/// Throws Error(EmptyField) for an empty list, Error(AlignmentError) when timestamps or band
/// layouts differ.
RsdSeries median_composite(std::span<const RsdSeries> point_series);

/// (NIR - Red) / (NIR + Red) clamped to [-1, 1]; 0 when the denominator vanishes.
double ndvi(double nir, double red);
/// NDVI of a Sentinel-2 observation from bands B8 and B4.
double compute_ndvi(const BandObservation& obs, const SatelliteSpec& spec);

/// Left-pads each stream so its last observation lands at index length-1.
/// Throws Error(LengthOverflow) when a stream is longer than `length`.
PaddedSeries pad_to_length(const RsdSeries& series, int length = kDefaultPadLength);

/// (v - mean) / max(std, 1e-6) on valid steps; padded steps stay 0.
/// Throws Error(StatsMismatch) when a satellite or feature has no statistics.
PaddedSeries zscore_normalize(const PaddedSeries& series, const NormStats& stats);
/// Inverse of zscore_normalize on valid steps.
PaddedSeries zscore_denormalize(const PaddedSeries& series, const NormStats& stats);

/// Accumulates mean / population std over valid steps using sums and sums of squares.
class NormStatsAccumulator {
 public:
  explicit NormStatsAccumulator(const SensorLayout& layout);
  void add(const PaddedSeries& series);
  NormStats finish() const;

 private:
  struct Sums {
    std::string id;
    std::vector<double> sum;
    std::vector<double> sum_sq;
    double count = 0.0;
  };
  std::vector<Sums> sums_;
};

}  // namespace cropid::rsd
