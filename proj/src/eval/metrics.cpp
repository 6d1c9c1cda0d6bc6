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

#include "cropid/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cropid/core/error.hpp"

namespace cropid::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio_or_nan(long num, long den) {
  return den == 0 ? kNaN : static_cast<double>(num) / static_cast<double>(den);
}

double mean_defined(const std::vector<double>& values) {
  double sum = 0.0;
  int n = 0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    sum += v;
    ++n;
  }
  return n == 0 ? kNaN : sum / n;
}

}  // namespace

std::string_view to_string(SeasonTag tag) {
  switch (tag) {
    case SeasonTag::Winter: return "Winter";
    case SeasonTag::Monsoon: return "Monsoon";
    case SeasonTag::Unassigned: return "Unassigned";
  }
  return "Unassigned";
}

std::string_view to_string(SeasonRule rule) { return rule == SeasonRule::JunOct ? "jun-oct" : "may-oct"; }

SeasonRule parse_season_rule(std::string_view text) {
  if (text == "jun-oct") return SeasonRule::JunOct;
  if (text == "may-oct") return SeasonRule::MayOct;
  throw Error(ErrorCode::ConfigError, "season rule must be jun-oct or may-oct, got '" + std::string(text) + "'");
}

SeasonTag season_tag(Day day, SeasonRule rule) {
  const unsigned m = month_of(day);
  const unsigned first_monsoon = rule == SeasonRule::JunOct ? 6 : 5;
  if (m >= first_monsoon && m <= 10) return SeasonTag::Monsoon;
  if (m >= 11 || m <= 3) return SeasonTag::Winter;
  return SeasonTag::Unassigned;
}

int predicted_class(std::span<const double> probs) {
  int best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

double MetricCell::f1() const {
  if (support() == 0) return kNaN;
  if (std::isnan(precision)) return 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

ClassMetrics confusion_metrics(std::span<const int> truth, std::span<const int> predicted) {
  ClassMetrics out;
  for (int c = 0; c < kNumClasses; ++c) out[static_cast<std::size_t>(c)].crop = crop_from_index(c);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (p == t) {
      ++out[static_cast<std::size_t>(t)].tp;
    } else {
      ++out[static_cast<std::size_t>(t)].fn;
      if (p >= 0) ++out[static_cast<std::size_t>(p)].fp;
    }
  }
  for (auto& cell : out) {
    cell.precision = ratio_or_nan(cell.tp, cell.tp + cell.fp);
    cell.recall = ratio_or_nan(cell.tp, cell.tp + cell.fn);
  }
  return out;
}

ClassMetrics precision_recall(std::span<const PredictionRecord> records) {
  std::vector<int> truth;
  std::vector<int> pred;
  truth.reserve(records.size());
  pred.reserve(records.size());
  for (const auto& r : records) {
    truth.push_back(class_index(r.truth));
    pred.push_back(predicted_class(r.probs));
  }
  return confusion_metrics(truth, pred);
}

std::array<double, kNumClasses> topk_recall(std::span<const PredictionRecord> records, int k) {
  if (k < 1) throw Error(ErrorCode::ConfigError, "top-k needs k >= 1");
  std::array<long, kNumClasses> hits{};
  std::array<long, kNumClasses> support{};
  for (const auto& r : records) {
    const int t = class_index(r.truth);
    ++support[static_cast<std::size_t>(t)];
    // Rank of the true class: classes strictly more probable, plus equal ones with a lower index.
    int rank = 0;
    const double pt = r.probs[static_cast<std::size_t>(t)];
    for (int c = 0; c < kNumClasses; ++c) {
      const double pc = r.probs[static_cast<std::size_t>(c)];
      if (pc > pt || (pc == pt && c < t)) ++rank;
    }
    if (rank < k) ++hits[static_cast<std::size_t>(t)];
  }
  std::array<double, kNumClasses> out{};
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = ratio_or_nan(hits[c], support[c]);
  return out;
}

double macro_f1(const ClassMetrics& metrics) {
  std::vector<double> f;
  for (const auto& cell : metrics) f.push_back(cell.f1());
  return mean_defined(f);
}

double macro_f1(std::span<const int> truth, std::span<const int> predicted) {
  return macro_f1(confusion_metrics(truth, predicted));
}

double macro_precision(const ClassMetrics& metrics) {
  std::vector<double> v;
  for (const auto& cell : metrics) v.push_back(cell.precision);
  return mean_defined(v);
}

double macro_recall(const ClassMetrics& metrics) {
  std::vector<double> v;
  for (const auto& cell : metrics) v.push_back(cell.recall);
  return mean_defined(v);
}

Buckets bucket_by_days(std::span<const PredictionRecord> records) {
  Buckets out;
  for (int b = 0; b <= kMaxBucket; b += kBucketStep) out.by_days[b];
  for (const auto& r : records) {
    if (r.days_after_start < 0 || r.days_after_start % kBucketStep != 0) {
      throw Error(ErrorCode::BucketError,
                  "days after season start " + std::to_string(r.days_after_start) + " is not a multiple of 30");
    }
    if (r.days_after_start > kMaxBucket) {
      out.overflow.push_back(r);
    } else {
      out.by_days[r.days_after_start].push_back(r);
    }
  }
  return out;
}

std::vector<SweepPoint> confidence_sweep(std::span<const PredictionRecord> records,
                                         std::span<const double> thresholds) {
  std::vector<int> truth;
  std::vector<int> argmax;
  std::vector<double> confidence;
  for (const auto& r : records) {
    truth.push_back(class_index(r.truth));
    argmax.push_back(predicted_class(r.probs));
    confidence.push_back(*std::max_element(r.probs.begin(), r.probs.end()));
  }
  std::vector<SweepPoint> out;
  for (double tau : thresholds) {
    std::vector<int> pred(truth.size());
    long predicted = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      pred[i] = confidence[i] >= tau ? argmax[i] : -1;
      predicted += pred[i] >= 0 ? 1 : 0;
    }
    const auto m = confusion_metrics(truth, pred);
    out.push_back({tau, macro_precision(m), macro_recall(m), predicted});
  }
  return out;
}

}  // namespace cropid::eval
