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

#include "cropid/datagen/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cropid/core/error.hpp"

namespace cropid::io {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

void for_each_jsonl(const fs::path& path, const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
    try {
      fn(rec, n);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

double round6(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no "-0.0" in output
}

std::vector<datagen::FieldBoundary> read_fields(const fs::path& path) {
  const Json doc = read_json(path);
  std::vector<datagen::FieldBoundary> out;
  try {
    for (const auto& f : doc.at("fields")) {
      datagen::FieldBoundary fb;
      fb.field_id = f.at("field_id").get<std::string>();
      fb.region = f.value("region", std::string{});
      for (const auto& v : f.at("polygon")) fb.polygon.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      fb.area_ha = f.contains("area_ha") ? f.at("area_ha").get<double>() : datagen::polygon_area_ha(fb.polygon);
      out.push_back(std::move(fb));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return out;
}

void write_fields(const fs::path& path, const std::vector<datagen::FieldBoundary>& fields) {
  Json arr = Json::array();
  for (const auto& f : fields) {
    Json poly = Json::array();
    for (const auto& p : f.polygon) poly.push_back({p.lat, p.lng});
    arr.push_back({{"field_id", f.field_id}, {"region", f.region}, {"area_ha", round6(f.area_ha)}, {"polygon", poly}});
  }
  write_text(path, Json{{"fields", arr}}.dump() + "\n");
}

std::vector<datagen::GroundTruthLabel> read_labels(const fs::path& path) {
  std::vector<datagen::GroundTruthLabel> out;
  for_each_jsonl(path, [&](const Json& r, std::size_t line) {
    datagen::GroundTruthLabel l;
    l.label_id = r.contains("label_id") ? r.at("label_id").get<std::string>() : "L" + std::to_string(line);
    l.crop_name = r.at("crop").get<std::string>();
    l.crop = group_crop(l.crop_name);
    l.location = {r.at("lat").get<double>(), r.at("lng").get<double>()};
    l.day = parse_iso_date(r.at("date").get<std::string>());
    out.push_back(std::move(l));
  });
  return out;
}

void write_labels(const fs::path& path, const std::vector<datagen::GroundTruthLabel>& labels) {
  std::string text;
  for (const auto& l : labels) {
    const Json r{{"label_id", l.label_id},
                 {"crop", l.crop_name.empty() ? std::string(crop_name(l.crop)) : l.crop_name},
                 {"lat", l.location.lat},
                 {"lng", l.location.lng},
                 {"date", format_iso_date(l.day)}};
    text += r.dump() + "\n";
  }
  write_text(path, text);
}

datagen::ObservationStore read_observations(const fs::path& path, const rsd::SensorLayout& layout) {
  struct PointBuf {
    std::optional<rsd::GeoPoint> location;
    std::vector<std::vector<rsd::BandObservation>> per_sat;
  };
  std::map<std::string, std::map<long, PointBuf>> buf;
  for_each_jsonl(path, [&](const Json& r, std::size_t) {
    const std::string sat = r.at("satellite").get<std::string>();
    const int si = layout.index_of(sat);
    if (si < 0) throw Error(ErrorCode::ParseError, "unknown satellite '" + sat + "'");
    auto& pb = buf[r.at("field_id").get<std::string>()][r.value("point", 0L)];
    if (pb.per_sat.empty()) pb.per_sat.resize(layout.size());
    if (r.contains("lat") && r.contains("lng")) pb.location = rsd::GeoPoint{r.at("lat").get<double>(), r.at("lng").get<double>()};
    rsd::BandObservation obs;
    obs.day = parse_iso_date(r.at("date").get<std::string>());
    obs.values = r.at("values").get<std::vector<double>>();
    if (r.contains("cloud_score") && !r.at("cloud_score").is_null()) obs.cloud_score = r.at("cloud_score").get<double>();
    pb.per_sat[static_cast<std::size_t>(si)].push_back(std::move(obs));
  });
  datagen::ObservationStore store;
  for (auto& [field_id, points] : buf) {
    auto& out = store[field_id];
    for (auto& [idx, pb] : points) {
      rsd::RsdSeries series = rsd::RsdSeries::empty_for(layout);
      series.location = pb.location;
      for (std::size_t s = 0; s < layout.size(); ++s) {
        auto& obs = pb.per_sat[s];
        std::stable_sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.day < b.day; });
        series.streams[s].reserve(obs.size());
        for (const auto& o : obs) series.streams[s].push_back(o);
      }
      out.push_back(std::move(series));
    }
  }
  return store;
}

struct ObservationWriter::Impl {
  std::ofstream out;
  fs::path path;
  rsd::SensorLayout layout;
};

ObservationWriter::ObservationWriter(const fs::path& path, rsd::SensorLayout layout) : impl_(std::make_unique<Impl>()) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  impl_->path = path;
  impl_->layout = std::move(layout);
}

ObservationWriter::~ObservationWriter() = default;

void ObservationWriter::write_field(const std::string& field_id, const std::vector<rsd::RsdSeries>& points) {
  std::string text;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (const auto& stream : points[p].streams) {
      for (std::size_t i = 0; i < stream.size(); ++i) {
        Json r{{"field_id", field_id}, {"point", p}, {"satellite", stream.satellite()},
               {"date", format_iso_date(stream.day(i))}};
        if (points[p].location) {
          r["lat"] = points[p].location->lat;
          r["lng"] = points[p].location->lng;
        }
        Json vals = Json::array();
        for (double v : stream.values(i)) vals.push_back(round6(v));
        r["values"] = std::move(vals);
        if (auto cs = stream.cloud_score(i)) r["cloud_score"] = round6(*cs);
        text += r.dump();
        text += '\n';
      }
    }
  }
  impl_->out << text;
}

void ObservationWriter::close() {
  impl_->out.close();
  if (!impl_->out) throw Error(ErrorCode::IoError, "write failed for " + impl_->path.string());
}

void write_observations(const fs::path& path, const datagen::ObservationStore& store, const rsd::SensorLayout& layout) {
  ObservationWriter w(path, layout);
  for (const auto& [id, points] : store) w.write_field(id, points);
  w.close();
}

void write_seasons(const fs::path& path, const std::vector<FieldSeasons>& seasons) {
  std::string text;
  for (const auto& fs_ : seasons) {
    for (std::size_t i = 0; i < fs_.seasons.size(); ++i) {
      const Json r{{"field_id", fs_.field_id},
                   {"season_index", i},
                   {"start", format_iso_date(fs_.seasons[i].start)},
                   {"end", format_iso_date(fs_.seasons[i].end)}};
      text += r.dump() + "\n";
    }
  }
  write_text(path, text);
}

std::vector<FieldSeasons> read_seasons(const fs::path& path) {
  std::vector<FieldSeasons> out;
  for_each_jsonl(path, [&](const Json& r, std::size_t) {
    const auto id = r.at("field_id").get<std::string>();
    if (out.empty() || out.back().field_id != id) out.push_back({id, {}});
    out.back().seasons.push_back(
        {parse_iso_date(r.at("start").get<std::string>()), parse_iso_date(r.at("end").get<std::string>())});
  });
  return out;
}

Json to_json(const rsd::NormStats& stats) {
  Json arr = Json::array();
  for (const auto& s : stats.satellites) arr.push_back({{"id", s.id}, {"mean", s.mean}, {"stddev", s.stddev}});
  return arr;
}

rsd::NormStats norm_stats_from_json(const Json& doc) {
  rsd::NormStats out;
  for (const auto& s : doc) {
    out.satellites.push_back(
        {s.at("id").get<std::string>(), s.at("mean").get<std::vector<double>>(), s.at("stddev").get<std::vector<double>>()});
  }
  return out;
}

Json to_json(const rsd::PaddedSeries& series) {
  Json out = Json::object();
  for (const auto& ch : series.channels) {
    std::string mask(ch.valid.size(), '0');
    for (std::size_t i = 0; i < ch.valid.size(); ++i) mask[i] = ch.valid[i] ? '1' : '0';
    Json vals = Json::array();
    for (double v : ch.values) vals.push_back(round6(v));
    out[ch.satellite] = {{"length", ch.length}, {"features", ch.features}, {"valid", mask}, {"values", vals}};
  }
  return out;
}

namespace {

// Channel order is not recoverable from a JSON object (keys sort); keep the default layout order.
std::vector<std::string> channel_order(const Json& doc) {
  std::vector<std::string> ids;
  for (const auto& spec : rsd::SensorLayout::defaults().satellites) {
    if (doc.contains(spec.id)) ids.push_back(spec.id);
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (std::find(ids.begin(), ids.end(), it.key()) == ids.end()) ids.push_back(it.key());
  }
  return ids;
}

}  // namespace

rsd::PaddedSeries padded_series_from_json(const Json& doc) {
  rsd::PaddedSeries out;
  for (const auto& id : channel_order(doc)) {
    const Json& c = doc.at(id);
    rsd::PaddedChannel ch;
    ch.satellite = id;
    ch.length = c.at("length").get<int>();
    ch.features = c.at("features").get<int>();
    ch.values = c.at("values").get<std::vector<double>>();
    const auto mask = c.at("valid").get<std::string>();
    ch.valid.resize(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) ch.valid[i] = mask[i] == '1';
    if (ch.values.size() != static_cast<std::size_t>(ch.length * ch.features) ||
        ch.valid.size() != static_cast<std::size_t>(ch.length)) {
      throw Error(ErrorCode::ParseError, "padded channel " + id + " has inconsistent sizes");
    }
    out.channels.push_back(std::move(ch));
  }
  return out;
}

Json to_json(const datagen::InSeasonExample& ex) {
  return Json{{"field_id", ex.field_id},
              {"label_id", ex.label_id},
              {"label", crop_name(ex.label)},
              {"label_date", format_iso_date(ex.label_day)},
              {"t_end", format_iso_date(ex.t_end)},
              {"season_start", format_iso_date(ex.season.start)},
              {"season_end", format_iso_date(ex.season.end)},
              {"days_after_start", ex.days_after_start},
              {"cell", ex.cell.key()},
              {"region", ex.region},
              {"series", to_json(ex.series)}};
}

datagen::InSeasonExample example_from_json(const Json& r) {
  datagen::InSeasonExample ex;
  ex.field_id = r.at("field_id").get<std::string>();
  ex.label_id = r.at("label_id").get<std::string>();
  const auto name = r.at("label").get<std::string>();
  const auto crop = parse_crop(name);
  if (!crop) throw Error(ErrorCode::ParseError, "unknown label '" + name + "'");
  ex.label = *crop;
  ex.label_day = parse_iso_date(r.at("label_date").get<std::string>());
  ex.t_end = parse_iso_date(r.at("t_end").get<std::string>());
  ex.season = {parse_iso_date(r.at("season_start").get<std::string>()),
               parse_iso_date(r.at("season_end").get<std::string>())};
  ex.days_after_start = r.at("days_after_start").get<int>();
  ex.cell = datagen::CellId::parse(r.at("cell").get<std::string>());
  ex.region = r.value("region", std::string{});
  ex.series = padded_series_from_json(r.at("series"));
  return ex;
}

Json to_json(const datagen::UnlabeledExample& ex) {
  return Json{{"field_id", ex.field_id},
              {"t_end", format_iso_date(ex.t_end)},
              {"cell", ex.cell.key()},
              {"split", datagen::to_string(ex.split)},
              {"series", to_json(ex.series)}};
}

datagen::UnlabeledExample unlabeled_from_json(const Json& r) {
  datagen::UnlabeledExample ex;
  ex.field_id = r.at("field_id").get<std::string>();
  ex.t_end = parse_iso_date(r.at("t_end").get<std::string>());
  ex.cell = datagen::CellId::parse(r.at("cell").get<std::string>());
  const auto split = r.at("split").get<std::string>();
  ex.split = split == "train" ? datagen::Split::Train
             : split == "validation" ? datagen::Split::Validation
                                     : datagen::Split::Test;
  ex.series = padded_series_from_json(r.at("series"));
  return ex;
}

void write_examples(const fs::path& path, const std::vector<datagen::InSeasonExample>& examples) {
  std::string text;
  for (const auto& ex : examples) text += to_json(ex).dump() + "\n";
  write_text(path, text);
}

std::vector<datagen::InSeasonExample> read_examples(const fs::path& path) {
  std::vector<datagen::InSeasonExample> out;
  for_each_jsonl(path, [&](const Json& r, std::size_t) { out.push_back(example_from_json(r)); });
  return out;
}

void write_unlabeled(const fs::path& path, const std::vector<datagen::UnlabeledExample>& examples) {
  std::string text;
  for (const auto& ex : examples) text += to_json(ex).dump() + "\n";
  write_text(path, text);
}

std::vector<datagen::UnlabeledExample> read_unlabeled(const fs::path& path) {
  std::vector<datagen::UnlabeledExample> out;
  for_each_jsonl(path, [&](const Json& r, std::size_t) { out.push_back(unlabeled_from_json(r)); });
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "sha256 failed");
  }
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return ss.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

}  // namespace cropid::io
