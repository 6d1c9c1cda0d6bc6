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

#include <cmath>
#include <map>

#include "support.hpp"

#include "cropid/datagen/datagen.hpp"
#include "cropid/season/season.hpp"
#include "cropid/synth/synth.hpp"

using namespace cropid;
using namespace cropid::synth;
using cropid::test::expect_error;

namespace {

SynthWorldConfig config_with(int fields, std::uint64_t seed) {
  SynthWorldConfig c;
  c.num_fields = fields;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("worlds are a pure function of the configuration") {
  const auto c = config_with(25, 4);
  const auto a = generate_world(c);
  const auto b = generate_world(c);
  REQUIRE(a.fields.size() == 25);
  for (std::size_t i = 0; i < a.fields.size(); ++i) {
    CHECK(a.fields[i].field_id == b.fields[i].field_id);
    CHECK(a.fields[i].area_ha == b.fields[i].area_ha);
    CHECK(a.truth.fields[i].seasons.size() == b.truth.fields[i].seasons.size());
    CHECK_NOTHROW(a.fields[i].validate());
  }
  const auto oa = generate_observations(a, c, 1);
  const auto ob = generate_observations(b, c, 3);
  REQUIRE(oa.size() == ob.size());
  for (const auto& [id, points] : oa) {
    const auto& other = ob.at(id);
    REQUIRE(points.size() == other.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
      for (std::size_t s = 0; s < points[p].streams.size(); ++s) {
        const auto& x = points[p].streams[s];
        const auto& y = other[p].streams[s];
        REQUIRE(x.size() == y.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
          CHECK(x.day(i) == y.day(i));
          CHECK(std::equal(x.values(i).begin(), x.values(i).end(), y.values(i).begin()));
        }
      }
    }
  }
  const auto d = generate_world(config_with(25, 5));
  bool differs = false;
  for (std::size_t i = 0; i < d.fields.size(); ++i) differs = differs || d.fields[i].area_ha != a.fields[i].area_ha;
  CHECK(differs);
}

TEST_CASE("true seasons respect the crop mix and length bounds") {
  auto c = config_with(150, 8);
  c.crop_mix.fill(0.0);
  c.crop_mix[static_cast<std::size_t>(class_index(CropLabel::Wheat))] = 1.0;
  const auto w = generate_world(c);
  std::size_t seasons = 0;
  for (const auto& f : w.truth.fields) {
    for (std::size_t s = 0; s < f.seasons.size(); ++s) {
      const auto& t = f.seasons[s];
      ++seasons;
      CHECK(t.crop == CropLabel::Wheat);
      const int len = t.end - t.start;
      CHECK(len >= c.templates[0].length_min);
      CHECK(len <= c.templates[0].length_max);
      CHECK(season::check_max_length({t.start, t.end}, t.crop));
      if (s > 0) CHECK(t.start - f.seasons[s - 1].end >= c.min_gap_days);
      CHECK(true_ndvi(f, c, t.start + len / 2) > 0.6);
    }
  }
  CHECK(seasons > 150);

  const auto mixed = generate_world(config_with(300, 9));
  for (const auto& f : mixed.truth.fields) {
    for (const auto& t : f.seasons) {
      if (t.crop == CropLabel::Others) continue;
      CHECK(t.end - t.start <= max_season_length(t.crop));
    }
  }
}

TEST_CASE("configuration validation") {
  auto c = config_with(10, 1);
  c.cloud_probability = 1.5;
  expect_error(ErrorCode::ConfigError, [&] { c.validate(); });
  c = config_with(10, 1);
  c.crop_mix.fill(0.0);
  expect_error(ErrorCode::ConfigError, [&] { c.validate(); });
  c = config_with(10, 1);
  c.templates[0].length_max = 241;
  expect_error(ErrorCode::ConfigError, [&] { c.validate(); });
  c = config_with(10, 1);
  c.off_field_fraction = 0.6;
  c.off_season_fraction = 0.6;
  expect_error(ErrorCode::ConfigError, [&] { c.validate(); });
  CHECK_NOTHROW(config_with(10, 1).validate());
}

TEST_CASE("a fully clouded world yields no detectable trace") {
  auto c = config_with(3, 2);
  c.cloud_probability = 1.0;
  const auto w = generate_world(c);
  const auto obs = generate_observations(w, c);
  const auto layout = rsd::SensorLayout::defaults();
  for (const auto& [id, points] : obs) {
    const auto composite = datagen::field_detection_series(points);
    expect_error(ErrorCode::EmptyTrace, [&] { season::detect_seasons(composite, layout); });
  }
}

TEST_CASE("label noise fractions and placement") {
  auto c = config_with(3000, 12);
  c.off_field_fraction = 0.3;
  c.off_season_fraction = 0.2;
  auto w = generate_world(c);
  const auto labels = generate_labels(w, c);
  REQUIRE(labels.size() == w.truth.labels.size());
  REQUIRE(labels.size() > 2000);
  std::map<LabelTag, double> counts;
  for (const auto& t : w.truth.labels) counts[t.tag] += 1.0;
  const double n = static_cast<double>(labels.size());
  CHECK(std::abs(counts[LabelTag::OffField] / n - 0.3) < 0.03);
  CHECK(std::abs(counts[LabelTag::OffSeason] / n - 0.2) < 0.03);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < w.fields.size(); ++i) index[w.fields[i].field_id] = i;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& t = w.truth.labels[i];
    const auto& field = w.fields[index.at(t.field_id)];
    const auto& season = w.truth.fields[index.at(t.field_id)].seasons[static_cast<std::size_t>(t.season_index)];
    CHECK(labels[i].crop == season.crop);
    CHECK(labels[i].day >= c.span_start + c.label_history_days - 2 * c.min_gap_days);
    const bool in_season = labels[i].day >= season.start && labels[i].day <= season.end;
    const bool inside = datagen::point_in_polygon(field.projection().to_local(labels[i].location), field.local_polygon());
    switch (t.tag) {
      case LabelTag::Clean:
        CHECK(inside);
        CHECK(in_season);
        break;
      case LabelTag::OffField:
        CHECK_FALSE(inside);
        CHECK(in_season);
        break;
      case LabelTag::OffSeason:
        CHECK(inside);
        CHECK_FALSE(in_season);
        break;
    }
  }
  CHECK(parse_label_tag(to_string(LabelTag::OffSeason)) == LabelTag::OffSeason);
}

TEST_CASE("census from truth sums field areas") {
  const auto w = generate_world(config_with(120, 21));
  const Day year = make_day(2023, 5, 1);
  const auto rows = census_from_truth(w, eval::SeasonRule::MayOct, year);
  double total_kha = 0.0;
  for (const auto& r : rows) total_kha += r.area_kha;
  double expected_ha = 0.0;
  for (std::size_t i = 0; i < w.fields.size(); ++i) {
    for (const auto& s : w.truth.fields[i].seasons) {
      if (s.start < year || s.start >= make_day(2024, 5, 1)) continue;
      if (eval::season_tag(s.start, eval::SeasonRule::MayOct) == eval::SeasonTag::Unassigned) continue;
      expected_ha += w.fields[i].area_ha;
    }
  }
  CHECK(total_kha * 1000.0 == doctest::Approx(expected_ha).epsilon(1e-9));
  CHECK(census_csv(rows).rfind("region,season,crop,area_kha\n", 0) == 0);
  const auto perfect = perfect_predictions(w);
  std::size_t seasons = 0;
  for (const auto& f : w.truth.fields) seasons += f.seasons.size();
  CHECK(perfect.size() == seasons);
}
