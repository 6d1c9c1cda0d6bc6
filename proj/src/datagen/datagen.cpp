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

#include "cropid/datagen/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <random>

#include "cropid/core/error.hpp"
#include "cropid/core/parallel.hpp"

namespace cropid::datagen {

namespace {

struct BBox {
  double min_lat, min_lng, max_lat, max_lng;
};

BBox bbox_of(const FieldBoundary& f) {
  BBox b{f.polygon[0].lat, f.polygon[0].lng, f.polygon[0].lat, f.polygon[0].lng};
  for (const auto& p : f.polygon) {
    b.min_lat = std::min(b.min_lat, p.lat);
    b.min_lng = std::min(b.min_lng, p.lng);
    b.max_lat = std::max(b.max_lat, p.lat);
    b.max_lng = std::max(b.max_lng, p.lng);
  }
  return b;
}

std::uint64_t string_key(const std::string& s) {
  // FNV-1a; stable across platforms unlike std::hash.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

FieldIndex::FieldIndex(std::span<const FieldBoundary> fields, double bucket_deg)
    : fields_(fields), bucket_deg_(bucket_deg) {
  local_.reserve(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    local_.push_back(fields[i].local_polygon());
    if (fields[i].polygon.size() < 3) continue;
    const BBox b = bbox_of(fields[i]);
    const long i0 = static_cast<long>(std::floor(b.min_lat / bucket_deg_));
    const long i1 = static_cast<long>(std::floor(b.max_lat / bucket_deg_));
    const long j0 = static_cast<long>(std::floor(b.min_lng / bucket_deg_));
    const long j1 = static_cast<long>(std::floor(b.max_lng / bucket_deg_));
    for (long a = i0; a <= i1; ++a) {
      for (long c = j0; c <= j1; ++c) buckets_[{a, c}].push_back(i);
    }
  }
}

std::optional<std::size_t> FieldIndex::find(GeoPoint p) const {
  const auto key = std::make_pair(static_cast<long>(std::floor(p.lat / bucket_deg_)),
                                  static_cast<long>(std::floor(p.lng / bucket_deg_)));
  const auto it = buckets_.find(key);
  if (it == buckets_.end()) return std::nullopt;
  for (std::size_t idx : it->second) {
    const auto& f = fields_[idx];
    if (point_in_polygon(f.projection().to_local(p), local_[idx])) return idx;
  }
  return std::nullopt;
}

LabelJoin assign_labels_to_fields(std::span<const GroundTruthLabel> labels, std::span<const FieldBoundary> fields) {
  const FieldIndex index(fields);
  std::map<std::size_t, std::vector<std::size_t>> by_field;
  LabelJoin join;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (auto f = index.find(labels[i].location)) {
      by_field[*f].push_back(i);
    } else {
      join.unmatched.push_back(i);
    }
  }
  for (auto& [field, idx] : by_field) join.fields.push_back(LabeledField{field, std::move(idx)});
  return join;
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::NoField: return "NoField";
    case RejectReason::EmptyInterior: return "EmptyInterior";
    case RejectReason::NoSeason: return "NoSeason";
    case RejectReason::AmbiguousSeason: return "AmbiguousSeason";
    case RejectReason::ConflictingLabels: return "ConflictingLabels";
    case RejectReason::TooLong: return "TooLong";
    case RejectReason::EmptySlice: return "EmptySlice";
  }
  return "Unknown";
}

std::vector<AttachOutcome> attach_seasons(std::span<const GroundTruthLabel> field_labels,
                                          std::span<const CropSeason> seasons) {
  std::vector<AttachOutcome> out(field_labels.size());
  std::vector<int> season_of(field_labels.size(), -1);
  for (std::size_t i = 0; i < field_labels.size(); ++i) {
    int hits = 0;
    for (std::size_t s = 0; s < seasons.size(); ++s) {
      if (seasons[s].contains(field_labels[i].day)) {
        ++hits;
        season_of[i] = static_cast<int>(s);
      }
    }
    if (hits == 0) {
      out[i].reason = RejectReason::NoSeason;
    } else if (hits > 1) {
      out[i].reason = RejectReason::AmbiguousSeason;
      season_of[i] = -1;
    }
  }
  for (std::size_t i = 0; i < field_labels.size(); ++i) {
    if (out[i].reason) continue;
    bool conflict = false;
    for (std::size_t j = 0; j < field_labels.size(); ++j) {
      if (j != i && season_of[j] == season_of[i] && field_labels[j].crop != field_labels[i].crop) conflict = true;
    }
    if (conflict) {
      out[i].reason = RejectReason::ConflictingLabels;
      continue;
    }
    const CropSeason& s = seasons[static_cast<std::size_t>(season_of[i])];
    if (field_labels[i].crop != CropLabel::Others && !season::check_max_length(s, field_labels[i].crop)) {
      out[i].reason = RejectReason::TooLong;
      continue;
    }
    out[i].season = s;
  }
  return out;
}

std::vector<Day> temporal_augment(const CropSeason& season, int interval_days) {
  std::vector<Day> out;
  for (Day t = season.start; t <= season.end; t += interval_days) out.push_back(t);
  return out;
}

rsd::RsdSeries slice_in_season(const rsd::RsdSeries& field_series, Day t_end) {
  rsd::RsdSeries out;
  out.location = field_series.location;
  const Day first_excluded = t_end - kSliceDays;
  for (const auto& s : field_series.streams) {
    rsd::SatelliteStream res(s.satellite(), s.band_count(), s.has_cloud_score());
    const auto& days = s.days();
    const auto lo = static_cast<std::size_t>(std::upper_bound(days.begin(), days.end(), first_excluded) - days.begin());
    const auto hi = static_cast<std::size_t>(std::upper_bound(days.begin(), days.end(), t_end) - days.begin());
    if (lo >= hi) {
      throw Error(ErrorCode::EmptySlice, s.satellite() + ": no observations in the year ending " + format_iso_date(t_end));
    }
    res.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) res.push_back(s.observation(i));
    out.streams.push_back(std::move(res));
  }
  return out;
}

rsd::Window anchored_window(Day t_end) {
  const int steps = (kSliceDays - 1) / rsd::kCadenceDays;  // 72 -> 73 grid points
  return rsd::Window{t_end - steps * rsd::kCadenceDays, t_end};
}

rsd::RsdSeries field_detection_series(std::span<const rsd::RsdSeries> points) {
  if (points.empty()) throw Error(ErrorCode::EmptyField, "no point series for field");
  bool aligned = true;
  for (const auto& p : points) {
    for (std::size_t s = 0; s < p.streams.size(); ++s) {
      if (p.streams[s].days() != points.front().streams[s].days()) aligned = false;
    }
  }
  if (aligned) return rsd::median_composite(points);
  // Resample each satellite onto a shared 5-day grid covering every point.
  std::vector<rsd::RsdSeries> resampled(points.size());
  const std::size_t n_sat = points.front().streams.size();
  for (std::size_t s = 0; s < n_sat; ++s) {
    Day first = std::numeric_limits<Day>::max();
    Day last = std::numeric_limits<Day>::min();
    for (const auto& p : points) {
      if (p.streams[s].empty()) continue;
      first = std::min(first, p.streams[s].day(0));
      last = std::max(last, p.streams[s].day(p.streams[s].size() - 1));
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      rsd::RsdSeries single;
      single.streams.push_back(points[i].streams[s]);
      auto r = rsd::interpolate_to_cadence(single, {first, last});
      resampled[i].streams.push_back(std::move(r.streams.front()));
    }
  }
  return rsd::median_composite(resampled);
}

rsd::PaddedSeries build_input_series(std::span<const rsd::RsdSeries> points, Day t_end, int length) {
  if (points.empty()) throw Error(ErrorCode::EmptyField, "no point series for field");
  std::vector<rsd::RsdSeries> gridded;
  gridded.reserve(points.size());
  const rsd::Window window = anchored_window(t_end);
  for (const auto& p : points) gridded.push_back(rsd::interpolate_to_cadence(slice_in_season(p, t_end), window));
  return rsd::pad_to_length(rsd::median_composite(gridded), length);
}

std::string CellId::key() const { return std::to_string(lat_index) + "_" + std::to_string(lng_index); }

CellId CellId::parse(const std::string& key) {
  const auto pos = key.find('_', 1);
  if (pos == std::string::npos) throw Error(ErrorCode::ParseError, "bad cell id '" + key + "'");
  return CellId{std::stol(key.substr(0, pos)), std::stol(key.substr(pos + 1))};
}

CellId cell_of(GeoPoint p, double cell_size_deg) {
  return CellId{static_cast<long>(std::floor(p.lat / cell_size_deg)),
                static_cast<long>(std::floor(p.lng / cell_size_deg))};
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "unknown";
}

Split assign_cell_split(const CellId& cell, std::uint64_t seed, const SplitRatios& ratios) {
  const double total = ratios.train + ratios.validation + ratios.test;
  const std::uint64_t key = derive_seed(seed, static_cast<std::uint64_t>(cell.lat_index),
                                        static_cast<std::uint64_t>(cell.lng_index));
  const double u = hash_uniform(key) * total;
  if (u < ratios.train) return Split::Train;
  if (u < ratios.train + ratios.validation) return Split::Validation;
  return Split::Test;
}

long DatasetSplits::stage_count(const std::string& name) const {
  for (const auto& [k, v] : stage_counts) {
    if (k == name) return v;
  }
  throw Error(ErrorCode::ConfigError, "no stage count '" + name + "'");
}

DatasetSplits split_by_cell(std::vector<InSeasonExample> samples, std::uint64_t seed, const SplitRatios& ratios) {
  DatasetSplits out;
  out.seed = seed;
  out.ratios = ratios;
  for (auto& s : samples) {
    switch (assign_cell_split(s.cell, seed, ratios)) {
      case Split::Train: out.train.push_back(std::move(s)); break;
      case Split::Validation: out.validation.push_back(std::move(s)); break;
      case Split::Test: out.test.push_back(std::move(s)); break;
    }
  }
  return out;
}

std::vector<rsd::RsdSeries> interior_series(const FieldBoundary& field, std::span<const rsd::RsdSeries> points,
                                            double inset_m) {
  std::vector<rsd::RsdSeries> out;
  for (const auto& p : points) {
    if (!p.location || is_interior_point(field, *p.location, inset_m)) out.push_back(p);
  }
  return out;
}

rsd::NormStats compute_norm_stats(std::span<const InSeasonExample> train, const rsd::SensorLayout& layout) {
  rsd::NormStatsAccumulator acc(layout);
  for (const auto& ex : train) acc.add(ex.series);
  return acc.finish();
}

namespace {

struct FieldResult {
  std::vector<std::pair<std::size_t, std::optional<RejectReason>>> outcomes;  // label index -> reason
  long step2 = 0;
  long step3 = 0;
  long step4 = 0;
  std::vector<InSeasonExample> examples;
};

FieldResult process_field(const LabeledField& lf, std::span<const GroundTruthLabel> labels,
                          std::span<const FieldBoundary> fields, const ObservationStore& observations,
                          const rsd::SensorLayout& layout, const DatagenParams& params) {
  FieldResult res;
  const FieldBoundary& field = fields[lf.field_index];
  auto reject_all = [&](RejectReason r) {
    for (std::size_t li : lf.label_indices) res.outcomes.emplace_back(li, r);
  };

  std::vector<rsd::RsdSeries> points;
  if (auto it = observations.find(field.field_id); it != observations.end()) {
    points = interior_series(field, it->second, params.inset_m);
  }
  if (points.empty()) {
    reject_all(RejectReason::EmptyInterior);
    return res;
  }
  res.step2 = static_cast<long>(lf.label_indices.size());

  std::vector<CropSeason> seasons;
  try {
    seasons = season::detect_seasons(field_detection_series(points), layout, params.detection);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyTrace && e.code() != ErrorCode::EmptyStream) throw;
  }

  std::vector<GroundTruthLabel> field_labels;
  for (std::size_t li : lf.label_indices) field_labels.push_back(labels[li]);
  const auto attached = attach_seasons(field_labels, seasons);

  const CellId cell = cell_of(field.centroid(), params.cell_size_deg);
  for (std::size_t k = 0; k < attached.size(); ++k) {
    const std::size_t li = lf.label_indices[k];
    if (attached[k].reason) {
      res.outcomes.emplace_back(li, attached[k].reason);
      continue;
    }
    ++res.step3;
    const CropSeason s = *attached[k].season;
    const auto t_ends = temporal_augment(s, params.augment_interval_days);
    res.step4 += static_cast<long>(t_ends.size());
    bool sliced_any = false;
    for (Day t_end : t_ends) {
      InSeasonExample ex;
      try {
        ex.series = build_input_series(points, t_end, params.pad_length);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptySlice) throw;
        continue;
      }
      sliced_any = true;
      ex.field_id = field.field_id;
      ex.label_id = labels[li].label_id;
      ex.label = labels[li].crop;
      ex.label_day = labels[li].day;
      ex.t_end = t_end;
      ex.season = s;
      ex.days_after_start = t_end - s.start;
      ex.cell = cell;
      ex.region = field.region;
      res.examples.push_back(std::move(ex));
    }
    res.outcomes.emplace_back(li, sliced_any ? std::nullopt : std::optional<RejectReason>(RejectReason::EmptySlice));
  }
  return res;
}

std::vector<UnlabeledExample> build_unlabeled(std::span<const FieldBoundary> fields,
                                              const ObservationStore& observations, const DatagenParams& params) {
  std::vector<std::vector<UnlabeledExample>> per_field(fields.size());
  parallel_for(fields.size(), params.threads, [&](std::size_t i) {
    const auto& field = fields[i];
    auto it = observations.find(field.field_id);
    if (it == observations.end()) return;
    const auto points = interior_series(field, it->second, params.inset_m);
    if (points.empty()) return;
    Day first = std::numeric_limits<Day>::min();
    Day last = std::numeric_limits<Day>::max();
    for (const auto& p : points) {
      for (const auto& s : p.streams) {
        if (s.empty()) return;
        first = std::max(first, s.day(0));
        last = std::min(last, s.day(s.size() - 1));
      }
    }
    const Day lo = first + kSliceDays;
    if (last < lo) return;
    const int slots = (last - lo) / rsd::kCadenceDays + 1;
    Rng rng(derive_seed(params.seed, string_key(field.field_id), 0x756e6c));
    std::uniform_int_distribution<int> pick(0, slots - 1);
    const CellId cell = cell_of(field.centroid(), params.cell_size_deg);
    for (int k = 0; k < params.unlabeled_per_field; ++k) {
      UnlabeledExample ex;
      ex.field_id = field.field_id;
      ex.t_end = lo + pick(rng) * rsd::kCadenceDays;
      ex.cell = cell;
      ex.split = assign_cell_split(cell, params.seed, params.ratios);
      try {
        ex.series = build_input_series(points, ex.t_end, params.pad_length);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptySlice) throw;
        continue;
      }
      per_field[i].push_back(std::move(ex));
    }
  });
  std::vector<UnlabeledExample> out;
  for (auto& v : per_field) {
    for (auto& ex : v) out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

DatasetSplits build_dataset(std::span<const GroundTruthLabel> labels, std::span<const FieldBoundary> fields,
                            const ObservationStore& observations, const rsd::SensorLayout& layout,
                            const DatagenParams& params) {
  for (const auto& f : fields) f.validate();
  const LabelJoin join = assign_labels_to_fields(labels, fields);

  std::vector<std::optional<RejectReason>> reasons(labels.size());
  for (std::size_t li : join.unmatched) reasons[li] = RejectReason::NoField;

  std::vector<FieldResult> results(join.fields.size());
  parallel_for(join.fields.size(), params.threads, [&](std::size_t i) {
    results[i] = process_field(join.fields[i], labels, fields, observations, layout, params);
  });

  long step1 = 0, step2 = 0, step3 = 0, step4 = 0;
  std::vector<InSeasonExample> examples;
  for (const auto& lf : join.fields) step1 += static_cast<long>(lf.label_indices.size());
  for (auto& r : results) {
    step2 += r.step2;
    step3 += r.step3;
    step4 += r.step4;
    for (const auto& [li, reason] : r.outcomes) reasons[li] = reason;
    for (auto& ex : r.examples) examples.push_back(std::move(ex));
  }
  const long step5 = static_cast<long>(examples.size());

  DatasetSplits out = split_by_cell(std::move(examples), params.seed, params.ratios);
  out.norm_stats = compute_norm_stats(out.train, layout);
  for (auto* split : {&out.train, &out.validation, &out.test}) {
    for (auto& ex : *split) ex.series = rsd::zscore_normalize(ex.series, out.norm_stats);
  }
  if (params.unlabeled_per_field > 0) {
    out.unlabeled = build_unlabeled(fields, observations, params);
    for (auto& ex : out.unlabeled) ex.series = rsd::zscore_normalize(ex.series, out.norm_stats);
  }

  out.stage_counts = {
      {"labels", static_cast<long>(labels.size())},
      {"step1_field_join", step1},
      {"step2_rsd_join", step2},
      {"step3_season_detection", step3},
      {"step4_augmented", step4},
      {"step5_in_season", step5},
      {"step6_standardized", step5},
      {"unlabeled", static_cast<long>(out.unlabeled.size())},
  };
  for (std::size_t i = 0; i < labels.size(); ++i) out.label_outcomes.push_back({labels[i].label_id, reasons[i]});
  return out;
}

}  // namespace cropid::datagen
