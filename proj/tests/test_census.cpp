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
#include <numeric>
#include <random>

#include "support.hpp"

#include "cropid/census/census.hpp"
#include "cropid/census/report.hpp"
#include "cropid/synth/synth.hpp"

using namespace cropid;
using namespace cropid::census;
using cropid::test::expect_error;

namespace {

FieldPrediction pred(const std::string& field, Day start, Day end, Day date, int crop = 0, double area = 1.0,
                     const std::string& region = "R0") {
  FieldPrediction p;
  p.field_id = field;
  p.region = region;
  p.area_ha = area;
  p.season = {start, end};
  p.inference_date = date;
  p.probs.fill(0.0);
  p.probs[static_cast<std::size_t>(crop)] = 1.0;
  return p;
}

rsd::NormStats identity_stats() {
  rsd::NormStats st;
  for (const auto& sat : rsd::SensorLayout::defaults().satellites) {
    st.satellites.push_back({sat.id, std::vector<double>(static_cast<std::size_t>(sat.feature_count()), 0.0),
                             std::vector<double>(static_cast<std::size_t>(sat.feature_count()), 1.0)});
  }
  return st;
}

model::ModelConfig small_model() {
  model::ModelConfig c;
  c.token_dim = 8;
  c.attention_heads = 2;
  c.attention_size = 8;
  c.pre_fusion_layers = 1;
  c.post_fusion_layers = 1;
  c.decoder_layers_s1 = 1;
  c.decoder_layers_s2 = 1;
  c.classifier_depth = 1;
  c.classifier_width = 8;
  return c;
}

}  // namespace

TEST_CASE("cosine similarity and ratio examples") {
  const std::vector<double> a = {3, 4, 0};
  const std::vector<double> b = {6, 8, 0};
  CHECK(cosine_similarity(a, b) == doctest::Approx(1.0));
  CHECK(cosine_similarity(a, std::vector<double>{0, 0, 5}) == 0.0);
  CHECK(cosine_similarity(a, std::vector<double>{0, 0, 0}) == 0.0);
  CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{1, 1}) == doctest::Approx(std::sqrt(0.5)));
  CHECK(cosine_similarity(std::vector<double>{1, 1}, std::vector<double>{1, 1}, CosineForm::SumProduct) ==
        doctest::Approx(0.5));
  expect_error(ErrorCode::ConfigError, [&] { cosine_similarity(a, std::vector<double>{1.0}); });

  CHECK(area_ratio(3280, 3634) == doctest::Approx(0.9026).epsilon(1e-4));
  CHECK(area_ratio(3634, 3280) == area_ratio(3280, 3634));
  CHECK(area_ratio(0, 5) == 0.0);
  CHECK(area_ratio(5, 0) == 0.0);
  CHECK(area_ratio(0, 0) == 1.0);
  CHECK(area_ratio(7.5, 7.5) == 1.0);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x(13), y(13);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const double c = cosine_similarity(x, y);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0 + 1e-12);
    std::vector<double> sx = x;
    for (auto& v : sx) v *= 3.7;
    CHECK(cosine_similarity(sx, y) == doctest::Approx(c).epsilon(1e-12));
    const double r = area_ratio(x[0], y[0]);
    CHECK(r > 0.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("agricultural season assignment") {
  CHECK(assign_agricultural_season(make_day(2023, 5, 10), SeasonRule::MayOct) == SeasonTag::Monsoon);
  CHECK(assign_agricultural_season(make_day(2023, 5, 10), SeasonRule::JunOct) == SeasonTag::Unassigned);
  CHECK(assign_agricultural_season(make_day(2023, 11, 10), SeasonRule::MayOct) == SeasonTag::Winter);
  CHECK(assign_agricultural_season(make_day(2024, 4, 10), SeasonRule::MayOct) == SeasonTag::Unassigned);
}

TEST_CASE("season grouping keeps the latest estimate per overlapping group") {
  const std::vector<FieldPrediction> ps = {
      pred("f", 100, 150, 160, 0), pred("f", 110, 200, 210, 1), pred("f", 195, 260, 270, 2),
      pred("f", 400, 500, 510, 3), pred("f", 405, 490, 500, 4),
  };
  const auto g = group_seasons(ps);
  REQUIRE(g.size() == 2);
  CHECK(g[0].inference_date == 270);
  CHECK(g[0].crop_index() == 2);
  CHECK(g[1].inference_date == 510);
  CHECK(group_seasons(g).size() == g.size());
  CHECK(group_seasons(std::vector<FieldPrediction>{}).empty());
}

TEST_CASE("season grouping matches a union-find oracle") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> start(0, 900);
  std::uniform_int_distribution<int> len(1, 120);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<FieldPrediction> ps;
    const int n = 1 + trial % 12;
    for (int i = 0; i < n; ++i) {
      const Day s = start(rng);
      const Day e = s + len(rng);
      ps.push_back(pred("f", s, e, e + 10 + i, i % kNumClasses));
    }
    // Oracle: repeated relabeling until connected components stabilise.
    std::vector<int> comp(static_cast<std::size_t>(n));
    std::iota(comp.begin(), comp.end(), 0);
    bool changed = true;
    while (changed) {
      changed = false;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (ps[i].season.overlaps(ps[j].season) && comp[j] < comp[i]) {
            comp[i] = comp[j];
            changed = true;
          }
        }
      }
    }
    std::map<int, Day> latest;
    for (int i = 0; i < n; ++i) latest[comp[i]] = std::max(latest[comp[i]], ps[i].inference_date);
    const auto g = group_seasons(ps);
    CHECK(g.size() == latest.size());
    for (std::size_t i = 1; i < g.size(); ++i) {
      CHECK(g[i - 1].season.start <= g[i].season.start);
      CHECK_FALSE(g[i - 1].season.overlaps(g[i].season));
    }
    for (const auto& p : g) {
      bool found = false;
      for (const auto& [c, d] : latest) found = found || d == p.inference_date;
      CHECK(found);
    }
  }
}

TEST_CASE("final predictions group per field in input order") {
  const std::vector<FieldPrediction> ps = {pred("b", 0, 50, 60), pred("a", 0, 50, 60), pred("b", 10, 40, 70)};
  const auto f = final_predictions(ps);
  REQUIRE(f.size() == 2);
  CHECK(f[0].field_id == "b");
  CHECK(f[0].inference_date == 70);
  CHECK(f[1].field_id == "a");
}

TEST_CASE("area aggregation") {
  const Day monsoon = make_day(2023, 7, 1);
  const Day winter = make_day(2023, 11, 15);
  const std::vector<FieldPrediction> ps = {
      pred("a", monsoon, monsoon + 90, 0, 5, 2.0), pred("b", monsoon, monsoon + 90, 0, 5, 3.0),
      pred("c", winter, winter + 120, 0, 0, 4.0), pred("d", monsoon, monsoon + 90, 0, 5, 8.0, "R1")};
  const auto m = aggregate_area(ps, "R0", SeasonTag::Monsoon, SeasonRule::MayOct);
  CHECK(m[5] == 5.0);
  CHECK(std::accumulate(m.begin(), m.end(), 0.0) == 5.0);
  CHECK(aggregate_area(ps, "R0", SeasonTag::Winter, SeasonRule::MayOct)[0] == 4.0);
}

TEST_CASE("census CSV parsing") {
  const auto t = parse_census_csv(
      "region,season,crop,area_kha\n"
      "# comment\n"
      "R0,rabi,Wheat,12.5\n"
      "R0,Monsoon,paddy,3\n"
      "R1,kharif,Soyabean,1.25\n"
      "R1,winter,Barley,0.5\n");
  REQUIRE(t.entries.size() == 4);
  CHECK(t.entries[0].season == SeasonTag::Winter);
  CHECK(t.entries[1].crop == CropLabel::Rice);
  CHECK(t.entries[2].crop == CropLabel::Soybeans);
  CHECK(t.entries[3].crop == CropLabel::Others);
  REQUIRE(t.warnings.size() == 1);
  CHECK(t.warnings[0].find("Barley") != std::string::npos);
  expect_error(ErrorCode::ParseError, [] { parse_census_csv(""); });
  expect_error(ErrorCode::ParseError, [] { parse_census_csv("region,crop\n"); });
  expect_error(ErrorCode::ParseError, [] { parse_census_csv("region,season,crop,area_kha\nR0,spring,Wheat,1\n"); });
  expect_error(ErrorCode::ParseError, [] { parse_census_csv("region,season,crop,area_kha\nR0,rabi,Wheat,-1\n"); });
  expect_error(ErrorCode::ParseError, [] { parse_census_csv("region,season,crop,area_kha\nR0,rabi,Wheat,1x\n"); });
}

TEST_CASE("prediction files round-trip") {
  auto p = pred("f1", make_day(2023, 6, 3), make_day(2023, 9, 30), make_day(2023, 10, 1), 4, 2.5, "R3");
  p.probs[0] = 0.25;
  p.probs[4] = 0.75;
  const std::vector<FieldPrediction> v = {p};
  const auto dir = std::filesystem::temp_directory_path() / "cropid_census_test";
  std::filesystem::create_directories(dir);
  write_predictions(dir / "p.jsonl", v);
  const auto back = read_predictions(dir / "p.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0].field_id == "f1");
  CHECK(back[0].region == "R3");
  CHECK(back[0].season == p.season);
  CHECK(back[0].inference_date == p.inference_date);
  CHECK(back[0].probs == p.probs);
  CHECK(back[0].area_ha == 2.5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("truncation keeps strictly earlier observations") {
  auto s = test::ndvi_series({{10, 0.2}, {20, 0.3}, {30, 0.4}});
  const auto t = truncate_before(s, 20);
  CHECK(t.stream(rsd::kSentinel2).size() == 1);
  CHECK(t.stream(rsd::kSentinel1).size() == 1);
  CHECK(truncate_before(s, 31).stream(rsd::kSentinel2).size() == 3);
}

TEST_CASE("inference never looks at observations from the inference date onward") {
  synth::SynthWorldConfig wc;
  wc.num_fields = 6;
  wc.points_per_field = 2;
  wc.seed = 5;
  const auto world = synth::generate_world(wc);
  const auto store = synth::generate_observations(world, wc);
  const auto layout = rsd::SensorLayout::defaults();
  const model::Model m(small_model(), layout);
  const auto stats = identity_stats();
  const std::vector<EnsembleMember> ensemble = {{&m, &stats}};
  InferenceOptions opt;
  int predicted = 0;
  for (const auto& field : world.fields) {
    const auto& points = store.at(field.field_id);
    for (Day date = make_day(2023, 1, 1); date <= make_day(2024, 12, 1); date = add_months(date, 5)) {
      auto altered = points;
      for (auto& series : altered) {
        for (auto& stream : series.streams) {
          rsd::SatelliteStream changed(stream.satellite(), stream.band_count(), stream.has_cloud_score());
          for (std::size_t i = 0; i < stream.size(); ++i) {
            auto o = stream.observation(i);
            if (o.day >= date) {
              for (auto& v : o.values) v = v * 3.0 + 1.0;
            }
            changed.push_back(o);
          }
          stream = changed;
        }
      }
      const auto a = predict_field_at(field, points, layout, ensemble, date, opt);
      const auto b = predict_field_at(field, altered, layout, ensemble, date, opt);
      REQUIRE(a.has_value() == b.has_value());
      if (!a) continue;
      ++predicted;
      CHECK(a->season == b->season);
      CHECK(a->probs == b->probs);
      CHECK(a->season.end < date);
    }
  }
  CHECK(predicted > 0);
}

TEST_CASE("perfect predictions reproduce the census") {
  synth::SynthWorldConfig wc;
  wc.num_fields = 80;
  wc.seed = 17;
  const auto world = synth::generate_world(wc);
  const ReportOptions opt;
  const auto census = parse_census_csv(synth::census_csv(synth::census_from_truth(world, opt.rule, opt.year_start)));
  const auto monthly = synth::perfect_predictions(world);
  const auto reports = build_reports(in_year(final_predictions(monthly), opt.year_start), census, opt);
  REQUIRE_FALSE(reports.empty());
  for (const auto& r : reports) {
    CHECK(r.cosine == doctest::Approx(1.0).epsilon(1e-9));
    for (int c = 0; c < kNumClasses; ++c) CHECK(r.ratio[c] == doctest::Approx(1.0).epsilon(1e-6));
  }
}
