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

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"

#include "cropid/eval/metrics.hpp"
#include "cropid/eval/report.hpp"

using namespace cropid;
using namespace cropid::eval;
using cropid::test::expect_error;

namespace {

PredictionRecord record(CropLabel truth, int predicted, int days = 0, double confidence = 0.9) {
  PredictionRecord r;
  r.truth = truth;
  r.days_after_start = days;
  const double rest = (1.0 - confidence) / (kNumClasses - 1);
  r.probs.fill(rest);
  r.probs[static_cast<std::size_t>(predicted)] = confidence;
  return r;
}

std::vector<PredictionRecord> random_records(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> cls(0, kNumClasses - 1);
  std::uniform_int_distribution<int> bucket(0, 7);
  std::gamma_distribution<double> gam(1.0, 1.0);
  std::vector<PredictionRecord> out;
  for (int i = 0; i < n; ++i) {
    PredictionRecord r;
    r.truth = crop_from_index(cls(rng));
    double sum = 0.0;
    for (auto& p : r.probs) sum += (p = gam(rng));
    for (auto& p : r.probs) p /= sum;
    // Bias toward the truth so that metrics are not all near chance.
    if (i % 3 != 0) r.probs[static_cast<std::size_t>(class_index(r.truth))] += 0.5;
    r.days_after_start = bucket(rng) * kBucketStep;
    out.push_back(r);
  }
  return out;
}

struct Oracle {
  std::array<long, kNumClasses> tp{}, fp{}, fn{};
};

Oracle brute_force(const std::vector<int>& truth, const std::vector<int>& pred) {
  Oracle o;
  for (int c = 0; c < kNumClasses; ++c) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (pred[i] == c && truth[i] == c) ++o.tp[c];
      if (pred[i] == c && truth[i] != c) ++o.fp[c];
      if (pred[i] != c && truth[i] == c) ++o.fn[c];
    }
  }
  return o;
}

}  // namespace

TEST_CASE("season tags by month") {
  CHECK(season_tag(make_day(2023, 6, 1)) == SeasonTag::Monsoon);
  CHECK(season_tag(make_day(2023, 10, 31)) == SeasonTag::Monsoon);
  CHECK(season_tag(make_day(2023, 11, 1)) == SeasonTag::Winter);
  CHECK(season_tag(make_day(2024, 3, 31)) == SeasonTag::Winter);
  CHECK(season_tag(make_day(2024, 4, 15)) == SeasonTag::Unassigned);
  CHECK(season_tag(make_day(2024, 5, 15)) == SeasonTag::Unassigned);
  CHECK(season_tag(make_day(2024, 5, 15), SeasonRule::MayOct) == SeasonTag::Monsoon);
  CHECK(parse_season_rule("may-oct") == SeasonRule::MayOct);
  expect_error(ErrorCode::ConfigError, [] { parse_season_rule("summer"); });
}

TEST_CASE("predicted class breaks ties toward the lower index") {
  const std::vector<double> p = {0.2, 0.4, 0.4};
  CHECK(predicted_class(p) == 1);
}

TEST_CASE("confusion metrics small example") {
  const std::vector<int> truth = {0, 0, 1, 1, 2};
  const std::vector<int> pred = {0, 1, 1, 1, -1};
  const auto m = confusion_metrics(truth, pred);
  CHECK(m[0].tp == 1);
  CHECK(m[0].fn == 1);
  CHECK(m[0].precision == 1.0);
  CHECK(m[0].recall == 0.5);
  CHECK(m[1].precision == doctest::Approx(2.0 / 3.0));
  CHECK(m[1].recall == 1.0);
  CHECK(std::isnan(m[2].precision));
  CHECK(m[2].recall == 0.0);
  CHECK(m[2].f1() == 0.0);
  CHECK(std::isnan(m[3].recall));
  CHECK(std::isnan(m[3].f1()));
  CHECK(macro_f1(m) == doctest::Approx((2.0 / 3.0 + 0.8 + 0.0) / 3.0));
  CHECK(std::isnan(macro_f1(std::vector<int>{}, std::vector<int>{})));
}

TEST_CASE("confusion metrics agree with a brute-force oracle") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> cls(-1, kNumClasses - 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> truth(500), pred(500);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      truth[i] = std::max(0, cls(rng));
      pred[i] = cls(rng);
    }
    const auto m = confusion_metrics(truth, pred);
    const auto o = brute_force(truth, pred);
    for (int c = 0; c < kNumClasses; ++c) {
      CHECK(m[c].tp == o.tp[c]);
      CHECK(m[c].fp == o.fp[c]);
      CHECK(m[c].fn == o.fn[c]);
      if (o.tp[c] + o.fp[c] > 0) CHECK(m[c].precision == doctest::Approx(double(o.tp[c]) / (o.tp[c] + o.fp[c])));
      else CHECK(std::isnan(m[c].precision));
    }
  }
}

TEST_CASE("top-k recall") {
  std::vector<PredictionRecord> recs;
  PredictionRecord r;
  r.truth = CropLabel::Rice;
  r.probs.fill(0.0);
  r.probs[0] = 0.6;
  r.probs[static_cast<std::size_t>(class_index(CropLabel::Rice))] = 0.3;
  recs.push_back(r);
  r.probs[1] = 0.35;
  recs.push_back(r);
  const auto top1 = topk_recall(recs, 1);
  const auto top2 = topk_recall(recs, 2);
  const auto rice = static_cast<std::size_t>(class_index(CropLabel::Rice));
  CHECK(top1[rice] == 0.0);
  CHECK(top2[rice] == 0.5);
  CHECK(std::isnan(top2[0]));
  const auto m = precision_recall(recs);
  CHECK(top1[rice] == m[rice].recall);

  // Equal probabilities rank the lower index first.
  PredictionRecord flat;
  flat.truth = crop_from_index(2);
  flat.probs.fill(1.0 / kNumClasses);
  const std::vector<PredictionRecord> one = {flat};
  CHECK(topk_recall(one, 2)[2] == 0.0);
  CHECK(topk_recall(one, 3)[2] == 1.0);

  std::mt19937_64 rng(5);
  const auto rand = random_records(rng, 2000);
  for (int k = 1; k < kNumClasses; ++k) {
    const auto a = topk_recall(rand, k);
    const auto b = topk_recall(rand, k + 1);
    for (int c = 0; c < kNumClasses; ++c) CHECK(a[c] <= b[c]);
  }
  const auto all = topk_recall(rand, kNumClasses);
  for (double v : all) CHECK(v == 1.0);
}

TEST_CASE("bucketing by days after start") {
  std::vector<PredictionRecord> recs = {record(CropLabel::Wheat, 0, 0), record(CropLabel::Wheat, 0, 30),
                                        record(CropLabel::Wheat, 0, 180), record(CropLabel::Wheat, 0, 210)};
  const auto b = bucket_by_days(recs);
  CHECK(b.by_days.size() == 7);
  CHECK(b.by_days.at(60).empty());
  CHECK(b.by_days.at(30).size() == 1);
  CHECK(b.overflow.size() == 1);
  recs.push_back(record(CropLabel::Wheat, 0, 45));
  expect_error(ErrorCode::BucketError, [&] { bucket_by_days(recs); });
  recs.back().days_after_start = -30;
  expect_error(ErrorCode::BucketError, [&] { bucket_by_days(recs); });
}

TEST_CASE("confidence sweep") {
  const std::vector<PredictionRecord> recs = {record(CropLabel::Wheat, 0, 0, 0.9), record(CropLabel::Wheat, 1, 0, 0.4),
                                              record(CropLabel::Sugarcane, 1, 0, 0.6)};
  const std::vector<double> thresholds = {0.0, 0.5, 0.95};
  const auto sweep = confidence_sweep(recs, thresholds);
  REQUIRE(sweep.size() == 3);
  CHECK(sweep[0].predicted == 3);
  CHECK(sweep[0].macro_precision == doctest::Approx(0.75));
  CHECK(sweep[0].macro_recall == doctest::Approx(0.75));
  CHECK(sweep[1].predicted == 2);
  CHECK(sweep[1].macro_precision == doctest::Approx(1.0));
  CHECK(sweep[1].macro_recall == doctest::Approx(0.75));
  CHECK(sweep[2].predicted == 0);
  CHECK(std::isnan(sweep[2].macro_precision));
  CHECK(sweep[2].macro_recall == 0.0);

  std::mt19937_64 rng(8);
  const auto rand = random_records(rng, 3000);
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(0.05 * i);
  const auto s = confidence_sweep(rand, grid);
  for (std::size_t i = 1; i < s.size(); ++i) {
    CHECK(s[i].predicted <= s[i - 1].predicted);
    CHECK(s[i].macro_recall <= s[i - 1].macro_recall + 1e-12);
  }
}

TEST_CASE("report cells and tables") {
  CHECK(format_cell(std::vector<double>{0.4, 0.6}) == "0.50 (0.10)");
  CHECK(format_cell(std::vector<double>{0.7, std::nan("")}) == "0.70 (0.00)");
  CHECK(format_cell(std::vector<double>{std::nan(""), std::nan("")}) == "NaN");

  std::vector<PredictionRecord> run = {record(CropLabel::Wheat, 0, 0), record(CropLabel::Wheat, 1, 30)};
  for (auto& r : run) r.season = SeasonTag::Winter;
  const auto tables = report_tables({run, run}, SeasonTag::Winter);
  REQUIRE(tables.size() == 3);
  CHECK(tables[0].name == "precision_winter.csv");
  CHECK(tables[2].name == "top2_recall_winter.csv");
  const std::string& recall = tables[1].csv;
  CHECK(recall.rfind("crop,0 Days,30 Days,60 Days,90 Days,120 Days,150 Days,180 Days\n", 0) == 0);
  CHECK(recall.find("\nWheat,1.00 (0.00),0.00 (0.00),NaN,NaN,NaN,NaN,NaN\n") != std::string::npos);
  CHECK(report_tables({run}, SeasonTag::Monsoon)[0].csv.find("Wheat,NaN,NaN") != std::string::npos);

  const std::vector<SweepPoint> sweep = {{0.5, 0.25, std::nan(""), 3}};
  CHECK(sweep_csv(sweep) == "threshold,macro_precision,macro_recall,predicted\n0.5000,0.2500,NaN,3\n");
}
