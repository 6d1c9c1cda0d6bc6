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

#include "cropid/census/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "cropid/datagen/io.hpp"
#include "cropid/season/season.hpp"

namespace cropid::census {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string season_file_tag(SeasonTag s) { return s == SeasonTag::Winter ? "winter" : "monsoon"; }

Day year_end_of(Day year_start) {
  return add_months(first_of_month(year_start), 12) + (year_start - first_of_month(year_start));
}

}  // namespace

double AreaReport::predicted_total_ha() const {
  double t = 0.0;
  for (double v : predicted_ha) t += v;
  return t;
}

double AreaReport::census_total_ha() const {
  double t = 0.0;
  for (double v : census_ha) t += v;
  return t;
}

std::vector<FieldPrediction> in_year(std::span<const FieldPrediction> finals, Day year_start) {
  const Day year_end = year_end_of(year_start);
  std::vector<FieldPrediction> out;
  for (const auto& p : finals) {
    if (p.season.start >= year_start && p.season.start < year_end) out.push_back(p);
  }
  return out;
}

std::vector<AreaReport> build_reports(std::span<const FieldPrediction> finals, const CensusTable& census,
                                      const ReportOptions& options) {
  std::map<std::pair<int, std::string>, AreaReport> reports;
  auto slot = [&](SeasonTag s, const std::string& region) -> AreaReport& {
    auto [it, fresh] = reports.try_emplace({static_cast<int>(s), region});
    if (fresh) {
      it->second.region = region;
      it->second.season = s;
    }
    return it->second;
  };
  for (const auto& e : census.entries) {
    slot(e.season, e.region).census_ha[static_cast<std::size_t>(class_index(e.crop))] += e.area_kha * 1000.0;
  }
  for (const auto& p : in_year(finals, options.year_start)) {
    const SeasonTag s = assign_agricultural_season(p.season.start, options.rule);
    if (s == SeasonTag::Unassigned) continue;
    slot(s, p.region).predicted_ha[static_cast<std::size_t>(p.crop_index())] += p.area_ha;
  }
  std::vector<AreaReport> out;
  for (auto& [key, r] : reports) {
    r.cosine = cosine_similarity(r.predicted_ha, r.census_ha, options.cosine_form);
    for (int c = 0; c < kNumClasses; ++c) r.ratio[c] = area_ratio(r.predicted_ha[c], r.census_ha[c]);
    out.push_back(r);
  }
  return out;
}

std::string report_csv(std::span<const AreaReport> reports, SeasonTag season) {
  std::ostringstream out;
  out << "region,census_kha,predicted_kha,cosine_sim\n";
  for (const auto& r : reports) {
    if (r.season != season) continue;
    out << r.region << "," << fmt("%.3f", r.census_total_ha() / 1000.0) << ","
        << fmt("%.3f", r.predicted_total_ha() / 1000.0) << "," << fmt("%.4f", r.cosine) << "\n";
  }
  return out.str();
}

std::string ratios_csv(std::span<const AreaReport> reports, SeasonTag season) {
  std::ostringstream out;
  out << "region,crop,census_kha,predicted_kha,ratio\n";
  for (const auto& r : reports) {
    if (r.season != season) continue;
    for (int c = 0; c < kNumClasses; ++c) {
      if (r.census_ha[c] == 0.0 && r.predicted_ha[c] == 0.0) continue;
      out << r.region << "," << crop_name(crop_from_index(c)) << "," << fmt("%.3f", r.census_ha[c] / 1000.0) << ","
          << fmt("%.3f", r.predicted_ha[c] / 1000.0) << "," << fmt("%.4f", r.ratio[c]) << "\n";
    }
  }
  return out.str();
}

std::string timeline_csv(std::span<const FieldPrediction> monthly, const std::string& region,
                         const ReportOptions& options) {
  std::vector<FieldPrediction> mine;
  std::set<Day> months;
  for (const auto& p : monthly) {
    if (p.region != region) continue;
    mine.push_back(p);
    months.insert(p.inference_date);
  }
  std::ostringstream out;
  out << "month,season";
  for (CropLabel c : all_crops()) out << "," << crop_name(c);
  out << "\n";
  for (Day m : months) {
    std::vector<FieldPrediction> seen;
    for (const auto& p : mine) {
      if (p.inference_date <= m) seen.push_back(p);
    }
    const auto finals = in_year(final_predictions(seen), options.year_start);
    for (SeasonTag s : {SeasonTag::Winter, SeasonTag::Monsoon}) {
      const CropAreas areas = aggregate_area(finals, region, s, options.rule);
      out << format_iso_date(m) << "," << eval::to_string(s);
      for (double a : areas) out << "," << fmt("%.4f", a);
      out << "\n";
    }
  }
  return out.str();
}

std::string season_length_csv(std::span<const FieldPrediction> finals, SeasonRule rule) {
  std::ostringstream out;
  out << "season,crop,p25,p50,p75,num_fields\n";
  for (SeasonTag s : {SeasonTag::Winter, SeasonTag::Monsoon}) {
    std::map<CropLabel, std::vector<int>> lengths;
    for (const auto& p : finals) {
      if (assign_agricultural_season(p.season.start, rule) == s) {
        lengths[crop_from_index(p.crop_index())].push_back(p.season.length());
      }
    }
    for (const auto& [crop, q] : season::season_length_percentiles(lengths)) {
      out << eval::to_string(s) << "," << crop_name(crop) << "," << q.p25 << "," << q.p50 << "," << q.p75 << ","
          << q.count << "\n";
    }
  }
  return out.str();
}

std::string ratio_chart_svg(std::span<const AreaReport> reports, SeasonTag season) {
  constexpr int kBarHeight = 14;
  constexpr int kLabelWidth = 180;
  constexpr int kBarWidth = 400;
  std::ostringstream body;
  int y = 30;
  for (const auto& r : reports) {
    if (r.season != season) continue;
    body << "<text x=\"4\" y=\"" << y + 11 << "\" font-weight=\"bold\">" << r.region << " (cosine "
         << fmt("%.2f", r.cosine) << ")</text>\n";
    y += kBarHeight + 4;
    for (int c = 0; c < kNumClasses; ++c) {
      if (r.census_ha[c] == 0.0 && r.predicted_ha[c] == 0.0) continue;
      const char* color = r.predicted_ha[c] < r.census_ha[c] ? "#3b6fb6" : "#c8423b";
      body << "<text x=\"16\" y=\"" << y + 11 << "\">" << crop_name(crop_from_index(c)) << "</text>"
           << "<rect x=\"" << kLabelWidth << "\" y=\"" << y << "\" width=\"" << fmt("%.1f", r.ratio[c] * kBarWidth)
           << "\" height=\"" << kBarHeight << "\" fill=\"" << color << "\"/>"
           << "<text x=\"" << kLabelWidth + kBarWidth + 8 << "\" y=\"" << y + 11 << "\">" << fmt("%.2f", r.ratio[c])
           << "</text>\n";
      y += kBarHeight + 2;
    }
    y += 8;
  }
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kLabelWidth + kBarWidth + 60 << "\" height=\""
      << y + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<text x=\"4\" y=\"16\" font-size=\"13\">Predicted vs census area ratio, " << eval::to_string(season)
      << "</text>\n"
      << body.str() << "</svg>\n";
  return svg.str();
}

ReportFiles emit_census_report(std::span<const FieldPrediction> monthly, const CensusTable& census,
                               const ReportOptions& options, const std::filesystem::path& dir) {
  ReportFiles files;
  files.warnings = census.warnings;
  const auto finals = final_predictions(monthly);
  const auto reports = build_reports(finals, census, options);
  auto write = [&](const std::string& name, const std::string& text) {
    io::write_text(dir / name, text);
    files.written.push_back(name);
  };
  for (SeasonTag s : {SeasonTag::Winter, SeasonTag::Monsoon}) {
    write("report_" + season_file_tag(s) + ".csv", report_csv(reports, s));
    write("ratios_" + season_file_tag(s) + ".csv", ratios_csv(reports, s));
    if (options.charts) write("ratios_" + season_file_tag(s) + ".svg", ratio_chart_svg(reports, s));
  }
  std::set<std::string> regions;
  for (const auto& r : reports) regions.insert(r.region);
  for (const auto& p : monthly) regions.insert(p.region);
  for (const auto& region : regions) write("timeline_" + region + ".csv", timeline_csv(monthly, region, options));
  write("season_lengths.csv", season_length_csv(in_year(finals, options.year_start), options.rule));
  std::sort(files.written.begin(), files.written.end());
  return files;
}

}  // namespace cropid::census
