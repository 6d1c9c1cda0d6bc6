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
#include <span>
#include <string>
#include <vector>

#include "cropid/eval/metrics.hpp"

namespace cropid::eval {

enum class TableMetric { Precision, Recall, Top2Recall };
std::string_view to_string(TableMetric metric);

inline constexpr int kNumBuckets = kMaxBucket / kBucketStep + 1;

/// One run's metric per crop (rows) and days-after-start bucket (columns). NaN where undefined.
using MetricGrid = std::array<std::array<double, kNumBuckets>, kNumClasses>;

/// Buckets the records and evaluates the metric inside each bucket. Overflow records are ignored.
MetricGrid metric_grid(std::span<const PredictionRecord> records, TableMetric metric);

/// "mean (std)" with two decimals and population std over the runs that are not NaN;
/// "NaN" when every run is NaN.
std::string format_cell(std::span<const double> runs);

/// CSV with a header row of bucket labels and one row per crop.
std::string metric_table_csv(std::span<const MetricGrid> runs);

struct ReportTable {
  std::string name;  // e.g. "precision_winter.csv"
  std::string csv;
};

/// One table per metric for records of the given season, aggregated over the runs.
std::vector<ReportTable> report_tables(const std::vector<std::vector<PredictionRecord>>& runs, SeasonTag season);

/// threshold, macro precision, macro recall, predicted count.
std::string sweep_csv(std::span<const SweepPoint> sweep);

}  // namespace cropid::eval
