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

#include "cropid/census/census.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "cropid/core/error.hpp"
#include "cropid/core/parallel.hpp"
#include "cropid/datagen/io.hpp"

namespace cropid::census {

rsd::RsdSeries truncate_before(const rsd::RsdSeries& series, Day date) {
  rsd::RsdSeries out;
  out.location = series.location;
  for (const auto& st : series.streams) {
    rsd::SatelliteStream cut(st.satellite(), st.band_count(), st.has_cloud_score());
    const auto end = std::lower_bound(st.days().begin(), st.days().end(), date) - st.days().begin();
    cut.reserve(static_cast<std::size_t>(end));
    for (std::size_t i = 0; i < static_cast<std::size_t>(end); ++i) cut.push_back(st.observation(i));
    out.streams.push_back(std::move(cut));
  }
  return out;
}

Probs ensemble_proba(std::span<const EnsembleMember> ensemble, const rsd::PaddedSeries& raw_input) {
  if (ensemble.empty()) throw Error(ErrorCode::EmptyInput, "inference needs at least one model");
  Probs mean{};
  for (const auto& m : ensemble) {
    const auto p = m.model->predict_proba(rsd::zscore_normalize(raw_input, *m.stats));
    for (int c = 0; c < kNumClasses; ++c) mean[c] += p[c];
  }
  for (double& v : mean) v /= static_cast<double>(ensemble.size());
  return mean;
}

std::optional<FieldPrediction> predict_field_at(const datagen::FieldBoundary& field,
                                                std::span<const rsd::RsdSeries> interior_points,
                                                const rsd::SensorLayout& layout,
                                                std::span<const EnsembleMember> ensemble, Day date,
                                                const InferenceOptions& options) {
  if (interior_points.empty()) return std::nullopt;
  std::vector<rsd::RsdSeries> cut;
  cut.reserve(interior_points.size());
  for (const auto& p : interior_points) cut.push_back(truncate_before(p, date));

  std::vector<CropSeason> seasons;
  Day last_observed = 0;
  try {
    const rsd::RsdSeries composite = datagen::field_detection_series(cut);
    seasons = season::detect_seasons(composite, layout, options.detection);
    last_observed = composite.stream(rsd::kSentinel2).days().back();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyTrace || e.code() == ErrorCode::EmptyStream) return std::nullopt;
    throw;
  }
  if (seasons.empty()) return std::nullopt;
  const CropSeason& active = seasons.back();
  if (active.end < last_observed - options.active_gap_days) return std::nullopt;

  rsd::PaddedSeries input;
  try {
    input = datagen::build_input_series(cut, active.end, options.pad_length);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptySlice || e.code() == ErrorCode::EmptyStream) return std::nullopt;
    throw;
  }
  FieldPrediction pred;
  pred.field_id = field.field_id;
  pred.region = field.region;
  pred.area_ha = field.area_ha;
  pred.inference_date = date;
  pred.season = active;
  pred.probs = ensemble_proba(ensemble, input);
  return pred;
}

std::vector<FieldPrediction> monthly_inference(std::span<const datagen::FieldBoundary> fields,
                                               const datagen::ObservationStore& observations,
                                               const rsd::SensorLayout& layout,
                                               std::span<const EnsembleMember> ensemble,
                                               const InferenceOptions& options) {
  std::vector<Day> months;
  for (Day m = first_of_month(options.first_month); m <= options.last_month; m = add_months(m, 1)) months.push_back(m);

  std::vector<std::vector<FieldPrediction>> per_field(fields.size());
  parallel_for(fields.size(), options.threads, [&](std::size_t i) {
    const auto it = observations.find(fields[i].field_id);
    if (it == observations.end()) return;
    const auto points = datagen::interior_series(fields[i], it->second, options.inset_m);
    for (Day m : months) {
      if (auto p = predict_field_at(fields[i], points, layout, ensemble, m, options)) {
        per_field[i].push_back(std::move(*p));
      }
    }
  });
  std::vector<FieldPrediction> out;
  for (auto& v : per_field) {
    for (auto& p : v) out.push_back(std::move(p));
  }
  return out;
}

std::vector<FieldPrediction> group_seasons(std::span<const FieldPrediction> field_predictions) {
  const std::size_t n = field_predictions.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (field_predictions[i].season.overlaps(field_predictions[j].season)) parent[find(i)] = find(j);
    }
  }
  std::map<std::size_t, std::size_t> latest;  // root -> index
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    auto it = latest.find(r);
    if (it == latest.end() || field_predictions[i].inference_date >= field_predictions[it->second].inference_date) {
      latest[r] = i;
    }
  }
  std::vector<FieldPrediction> out;
  for (const auto& [root, idx] : latest) out.push_back(field_predictions[idx]);
  std::sort(out.begin(), out.end(), [](const FieldPrediction& a, const FieldPrediction& b) {
    return std::tie(a.season.start, a.inference_date) < std::tie(b.season.start, b.inference_date);
  });
  return out;
}

std::vector<FieldPrediction> final_predictions(std::span<const FieldPrediction> predictions) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<FieldPrediction>> by_field;
  for (const auto& p : predictions) {
    auto [it, fresh] = by_field.try_emplace(p.field_id);
    if (fresh) order.push_back(p.field_id);
    it->second.push_back(p);
  }
  std::vector<FieldPrediction> out;
  for (const auto& id : order) {
    for (auto& p : group_seasons(by_field[id])) out.push_back(std::move(p));
  }
  return out;
}

SeasonTag assign_agricultural_season(Day season_start, SeasonRule rule) { return eval::season_tag(season_start, rule); }

CropAreas aggregate_area(std::span<const FieldPrediction> finals, const std::string& region, SeasonTag season,
                         SeasonRule rule) {
  CropAreas areas{};
  for (const auto& p : finals) {
    if (p.region != region || assign_agricultural_season(p.season.start, rule) != season) continue;
    areas[static_cast<std::size_t>(p.crop_index())] += p.area_ha;
  }
  return areas;
}

double cosine_similarity(std::span<const double> predicted, std::span<const double> census, CosineForm form) {
  if (predicted.size() != census.size()) throw Error(ErrorCode::ConfigError, "cosine over different crop sets");
  double dot = 0.0, a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    dot += predicted[i] * census[i];
    if (form == CosineForm::Euclidean) {
      a += predicted[i] * predicted[i];
      b += census[i] * census[i];
    } else {
      a += predicted[i];
      b += census[i];
    }
  }
  const double denom = form == CosineForm::Euclidean ? std::sqrt(a) * std::sqrt(b) : a * b;
  return denom > 0.0 ? dot / denom : 0.0;
}

double area_ratio(double predicted, double census) {
  if (predicted == 0.0 && census == 0.0) return 1.0;
  if (predicted == 0.0 || census == 0.0) return 0.0;
  return std::min(predicted / census, census / predicted);
}

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

SeasonTag parse_season_name(const std::string& text, std::size_t line) {
  const std::string s = lower(text);
  if (s == "winter" || s == "rabi") return SeasonTag::Winter;
  if (s == "monsoon" || s == "kharif") return SeasonTag::Monsoon;
  throw Error(ErrorCode::ParseError, "census line " + std::to_string(line) + ": unknown season '" + text + "'");
}

}  // namespace

CensusTable parse_census_csv(const std::string& text) {
  CensusTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(trim(col));
    if (!header) {
      if (cols.size() != 4 || lower(cols[0]) != "region" || lower(cols[1]) != "season" || lower(cols[2]) != "crop" ||
          lower(cols[3]) != "area_kha") {
        throw Error(ErrorCode::ParseError, "census header must be region,season,crop,area_kha");
      }
      header = true;
      continue;
    }
    if (cols.size() != 4) {
      throw Error(ErrorCode::ParseError, "census line " + std::to_string(line_no) + ": expected 4 columns");
    }
    CensusEntry e;
    e.region = cols[0];
    e.season = parse_season_name(cols[1], line_no);
    e.crop = group_crop(cols[2]);
    if (e.crop == CropLabel::Others && !parse_crop(cols[2])) {
      table.warnings.push_back("census crop '" + cols[2] + "' is not in the prediction vocabulary; counted under Others");
    }
    try {
      std::size_t used = 0;
      e.area_kha = std::stod(cols[3], &used);
      if (used != cols[3].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "census line " + std::to_string(line_no) + ": bad area '" + cols[3] + "'");
    }
    if (!(e.area_kha >= 0.0)) {
      throw Error(ErrorCode::ParseError, "census line " + std::to_string(line_no) + ": negative area");
    }
    table.entries.push_back(std::move(e));
  }
  if (!header) throw Error(ErrorCode::ParseError, "census file is empty");
  return table;
}

CensusTable read_census_csv(const std::filesystem::path& path) { return parse_census_csv(io::read_text(path)); }

std::string to_jsonl(std::span<const FieldPrediction> predictions) {
  std::string out;
  for (const auto& p : predictions) {
    io::Json j{{"field_id", p.field_id},
               {"region", p.region},
               {"area_ha", p.area_ha},
               {"inference_date", format_iso_date(p.inference_date)},
               {"season_start", format_iso_date(p.season.start)},
               {"season_end", format_iso_date(p.season.end)},
               {"probs", p.probs}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_predictions(const std::filesystem::path& path, std::span<const FieldPrediction> predictions) {
  io::write_text(path, to_jsonl(predictions));
}

std::vector<FieldPrediction> read_predictions(const std::filesystem::path& path) {
  std::vector<FieldPrediction> out;
  io::for_each_jsonl(path, [&](const io::Json& j, std::size_t line) {
    try {
      FieldPrediction p;
      p.field_id = j.at("field_id").get<std::string>();
      p.region = j.at("region").get<std::string>();
      p.area_ha = j.at("area_ha").get<double>();
      p.inference_date = parse_iso_date(j.at("inference_date").get<std::string>());
      p.season = {parse_iso_date(j.at("season_start").get<std::string>()),
                  parse_iso_date(j.at("season_end").get<std::string>())};
      const auto probs = j.at("probs").get<std::vector<double>>();
      if (probs.size() != kNumClasses) throw Error(ErrorCode::ParseError, "expected 13 probabilities");
      std::copy(probs.begin(), probs.end(), p.probs.begin());
      out.push_back(std::move(p));
    } catch (const io::Json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace cropid::census
