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

#include "cropid/eval/report.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cropid::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fixed4(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string_view to_string(TableMetric metric) {
  switch (metric) {
    case TableMetric::Precision: return "precision";
    case TableMetric::Recall: return "recall";
    case TableMetric::Top2Recall: return "top2_recall";
  }
  return "?";
}

MetricGrid metric_grid(std::span<const PredictionRecord> records, TableMetric metric) {
  MetricGrid grid;
  for (auto& row : grid) row.fill(kNaN);
  const Buckets buckets = bucket_by_days(records);
  for (const auto& [days, recs] : buckets.by_days) {
    const int col = days / kBucketStep;
    if (metric == TableMetric::Top2Recall) {
      const auto recall = topk_recall(recs, 2);
      for (int c = 0; c < kNumClasses; ++c) grid[c][col] = recall[c];
    } else {
      const ClassMetrics m = precision_recall(recs);
      for (int c = 0; c < kNumClasses; ++c) {
        grid[c][col] = metric == TableMetric::Precision ? m[c].precision : m[c].recall;
      }
    }
  }
  return grid;
}

std::string format_cell(std::span<const double> runs) {
  double sum = 0.0;
  int n = 0;
  for (double v : runs) {
    if (std::isnan(v)) continue;
    sum += v;
    ++n;
  }
  if (n == 0) return "NaN";
  const double mean = sum / n;
  double var = 0.0;
  for (double v : runs) {
    if (!std::isnan(v)) var += (v - mean) * (v - mean);
  }
  return fixed2(mean) + " (" + fixed2(std::sqrt(var / n)) + ")";
}

std::string metric_table_csv(std::span<const MetricGrid> runs) {
  std::ostringstream out;
  out << "crop";
  for (int b = 0; b < kNumBuckets; ++b) out << "," << b * kBucketStep << " Days";
  out << "\n";
  std::vector<double> cell(runs.size());
  for (int c = 0; c < kNumClasses; ++c) {
    out << crop_name(crop_from_index(c));
    for (int b = 0; b < kNumBuckets; ++b) {
      for (std::size_t r = 0; r < runs.size(); ++r) cell[r] = runs[r][c][b];
      out << "," << format_cell(cell);
    }
    out << "\n";
  }
  return out.str();
}

std::vector<ReportTable> report_tables(const std::vector<std::vector<PredictionRecord>>& runs, SeasonTag season) {
  std::vector<std::vector<PredictionRecord>> filtered;
  for (const auto& run : runs) {
    std::vector<PredictionRecord> keep;
    for (const auto& r : run) {
      if (r.season == season) keep.push_back(r);
    }
    filtered.push_back(std::move(keep));
  }
  std::vector<ReportTable> tables;
  for (TableMetric metric : {TableMetric::Precision, TableMetric::Recall, TableMetric::Top2Recall}) {
    std::vector<MetricGrid> grids;
    for (const auto& run : filtered) grids.push_back(metric_grid(run, metric));
    std::string name = std::string(to_string(metric)) + "_" + std::string(to_string(season)) + ".csv";
    for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    tables.push_back({std::move(name), metric_table_csv(grids)});
  }
  return tables;
}

std::string sweep_csv(std::span<const SweepPoint> sweep) {
  std::ostringstream out;
  out << "threshold,macro_precision,macro_recall,predicted\n";
  for (const auto& p : sweep) {
    out << fixed4(p.threshold) << "," << fixed4(p.macro_precision) << "," << fixed4(p.macro_recall) << ","
        << p.predicted << "\n";
  }
  return out.str();
}

}  // namespace cropid::eval
