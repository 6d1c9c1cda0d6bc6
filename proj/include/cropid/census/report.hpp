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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cropid/census/census.hpp"

namespace cropid::census {

struct AreaReport {
  std::string region;
  SeasonTag season = SeasonTag::Winter;
  CropAreas predicted_ha{};
  CropAreas census_ha{};
  double cosine = 0.0;
  std::array<double, kNumClasses> ratio{};

  double predicted_total_ha() const;
  double census_total_ha() const;
};

struct ReportOptions {
  SeasonRule rule = SeasonRule::MayOct;
  /// Agricultural year [year_start, year_start + 1 year) selected by season start.
  Day year_start = make_day(2023, 5, 1);
  CosineForm cosine_form = CosineForm::Euclidean;
  bool charts = true;
};

/// Final predictions whose season starts inside the agricultural year.
std::vector<FieldPrediction> in_year(std::span<const FieldPrediction> finals, Day year_start);

/// One report per (region, season) present in the census or the predictions, sorted by
/// season then region.
std::vector<AreaReport> build_reports(std::span<const FieldPrediction> finals, const CensusTable& census,
                                      const ReportOptions& options);

/// region, census and predicted totals in thousand hectares, cosine similarity.
std::string report_csv(std::span<const AreaReport> reports, SeasonTag season);
/// region, crop, census and predicted areas, ratio.
std::string ratios_csv(std::span<const AreaReport> reports, SeasonTag season);

/// Cumulative identified area (ha) per crop as of each inference month, for one region.
std::string timeline_csv(std::span<const FieldPrediction> monthly, const std::string& region,
                         const ReportOptions& options);

/// Nearest-rank quartiles of predicted season length per crop and season.
std::string season_length_csv(std::span<const FieldPrediction> finals, SeasonRule rule);

/// Horizontal bar chart of per-crop ratios for every region of one season.
std::string ratio_chart_svg(std::span<const AreaReport> reports, SeasonTag season);

struct ReportFiles {
  std::vector<std::string> written;  // relative names, sorted
  std::vector<std::string> warnings;
};

/// Writes report_<season>.csv, ratios_<season>.csv, timeline_<region>.csv, season_lengths.csv
/// and, when enabled, ratios_<season>.svg into `dir`.
ReportFiles emit_census_report(std::span<const FieldPrediction> monthly, const CensusTable& census,
                               const ReportOptions& options, const std::filesystem::path& dir);

}  // namespace cropid::census
