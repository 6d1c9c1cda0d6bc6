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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cropid/core/crop.hpp"
#include "cropid/core/date.hpp"

namespace cropid::eval {

enum class SeasonTag { Winter, Monsoon, Unassigned };
std::string_view to_string(SeasonTag tag);

/// Which months count as monsoon: June-October (evaluation default) or May-October.
enum class SeasonRule { JunOct, MayOct };
std::string_view to_string(SeasonRule rule);
/// Accepts "jun-oct" / "may-oct". Throws Error(ConfigError).
SeasonRule parse_season_rule(std::string_view text);

/// Month lookup: monsoon months per rule, November-March winter, everything else unassigned.
SeasonTag season_tag(Day day, SeasonRule rule = SeasonRule::JunOct);

using Probs = std::array<double, kNumClasses>;

struct PredictionRecord {
  std::string field_id;
  Probs probs{};
  CropLabel truth = CropLabel::Others;
  int days_after_start = 0;
  SeasonTag season = SeasonTag::Unassigned;
};

/// Index of the largest probability; ties go to the lowest index.
int predicted_class(std::span<const double> probs);

struct MetricCell {
  CropLabel crop = CropLabel::Others;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  double precision = 0.0;  // NaN when nothing was predicted as this crop
  double recall = 0.0;     // NaN when the crop has no support

  long support() const { return tp + fn; }
  /// NaN without support; 0 when support exists but precision is undefined.
  double f1() const;
};

using ClassMetrics = std::array<MetricCell, kNumClasses>;

/// Per-class counts from true/predicted indices. A predicted index of -1 means "abstained" and
/// counts only as a false negative for the true class.
ClassMetrics confusion_metrics(std::span<const int> truth, std::span<const int> predicted);

ClassMetrics precision_recall(std::span<const PredictionRecord> records);

/// Fraction of each class's records whose true class is among the k most probable classes
/// (ties ranked by ascending class index). NaN for classes without support.
std::array<double, kNumClasses> topk_recall(std::span<const PredictionRecord> records, int k);

/// Unweighted mean F1 over classes with support; NaN when no class has support.
double macro_f1(const ClassMetrics& metrics);
double macro_f1(std::span<const int> truth, std::span<const int> predicted);

inline constexpr int kBucketStep = 30;
inline constexpr int kMaxBucket = 180;

struct Buckets {
  std::map<int, std::vector<PredictionRecord>> by_days;  // 0, 30, ..., 180
  std::vector<PredictionRecord> overflow;                // beyond 180
};

/// Exact bucket assignment. Throws Error(BucketError) for negative values or non-multiples of 30.
Buckets bucket_by_days(std::span<const PredictionRecord> records);

struct SweepPoint {
  double threshold = 0.0;
  double macro_precision = 0.0;  // mean over classes with defined precision, NaN if none
  double macro_recall = 0.0;     // mean over classes with support, NaN if none
  long predicted = 0;
};

/// At threshold t only records with max probability >= t are predicted; the rest count as misses.
std::vector<SweepPoint> confidence_sweep(std::span<const PredictionRecord> records,
                                         std::span<const double> thresholds);

double macro_precision(const ClassMetrics& metrics);
double macro_recall(const ClassMetrics& metrics);

}  // namespace cropid::eval
