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

#include "cropid/pipeline/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "cropid/core/error.hpp"
#include "cropid/core/parallel.hpp"
#include "cropid/datagen/io.hpp"

namespace cropid::pipeline {

namespace {

constexpr std::uint64_t kModelSeedStream = 0x6d736565ULL;

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& what) {
  throw Error(ErrorCode::ConfigError, key + ": expected " + what + ", got '" + value + "'");
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, v, "an integer");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, v, "an unsigned integer");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) bad(key, v, "a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad(key, v, "true or false");
}

Day to_day(const std::string& key, const std::string& v) {
  try {
    return parse_iso_date(v);
  } catch (const Error&) {
    bad(key, v, "a YYYY-MM-DD date");
  }
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  if (out.empty()) bad(key, v, "a comma-separated list of numbers");
  return out;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

std::string fmt_list(const double* first, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? "," : "") + fmt(first[i]);
  return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string& key, const std::string& value)>;
using Getter = std::function<std::string(const PipelineConfig&)>;

struct Key {
  Setter set;
  Getter get;
};

#define INT_KEY(member) \
  Key { [](PipelineConfig& c, const std::string& k, const std::string& v) { c.member = static_cast<int>(to_int(k, v)); }, \
        [](const PipelineConfig& c) { return std::to_string(c.member); } }
#define DOUBLE_KEY(member) \
  Key { [](PipelineConfig& c, const std::string& k, const std::string& v) { c.member = to_double(k, v); }, \
        [](const PipelineConfig& c) { return fmt(c.member); } }
#define STRING_KEY(member) \
  Key { [](PipelineConfig& c, const std::string&, const std::string& v) { c.member = v; }, \
        [](const PipelineConfig& c) { return c.member; } }
#define DAY_KEY(member) \
  Key { [](PipelineConfig& c, const std::string& k, const std::string& v) { c.member = to_day(k, v); }, \
        [](const PipelineConfig& c) { return format_iso_date(c.member); } }
#define BOOL_KEY(member) \
  Key { [](PipelineConfig& c, const std::string& k, const std::string& v) { c.member = to_bool(k, v); }, \
        [](const PipelineConfig& c) { return std::string(c.member ? "true" : "false"); } }
#define RULE_KEY(member) \
  Key { [](PipelineConfig& c, const std::string&, const std::string& v) { c.member = eval::parse_season_rule(v); }, \
        [](const PipelineConfig& c) { return std::string(eval::to_string(c.member)); } }

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> kKeys = {
      {"seed", Key{[](PipelineConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); },
                   [](const PipelineConfig& c) { return std::to_string(c.seed); }}},
      {"fields_path", STRING_KEY(fields_path)},
      {"observations_path", STRING_KEY(observations_path)},
      {"labels_path", STRING_KEY(labels_path)},
      {"census_path", STRING_KEY(census_path)},

      {"synth_num_fields", INT_KEY(synth.num_fields)},
      {"synth_points_per_field", INT_KEY(synth.points_per_field)},
      {"synth_cloud_probability", DOUBLE_KEY(synth.cloud_probability)},
      {"synth_noise_std", DOUBLE_KEY(synth.noise_std)},
      {"synth_s1_noise_db", DOUBLE_KEY(synth.s1_noise_db)},
      {"synth_off_field_fraction", DOUBLE_KEY(synth.off_field_fraction)},
      {"synth_off_season_fraction", DOUBLE_KEY(synth.off_season_fraction)},
      {"synth_fallow_probability", DOUBLE_KEY(synth.fallow_probability)},
      {"synth_lat_span", DOUBLE_KEY(synth.lat_span)},
      {"synth_lng_span", DOUBLE_KEY(synth.lng_span)},
      {"synth_regions_lat", INT_KEY(synth.regions_lat)},
      {"synth_regions_lng", INT_KEY(synth.regions_lng)},
      {"synth_span_start", DAY_KEY(synth.span_start)},
      {"synth_span_end", DAY_KEY(synth.span_end)},
      {"synth_crop_mix",
       Key{[](PipelineConfig& c, const std::string& k, const std::string& v) {
             const auto list = to_list(k, v);
             if (list.size() != kNumClasses) bad(k, v, "13 weights");
             std::copy(list.begin(), list.end(), c.synth.crop_mix.begin());
           },
           [](const PipelineConfig& c) { return fmt_list(c.synth.crop_mix.data(), kNumClasses); }}},

      {"datagen_unlabeled_per_field", INT_KEY(datagen.unlabeled_per_field)},
      {"datagen_train_ratio", DOUBLE_KEY(datagen.ratios.train)},
      {"datagen_validation_ratio", DOUBLE_KEY(datagen.ratios.validation)},
      {"datagen_test_ratio", DOUBLE_KEY(datagen.ratios.test)},
      {"datagen_cell_size_deg", DOUBLE_KEY(datagen.cell_size_deg)},
      {"datagen_augment_interval_days", INT_KEY(datagen.augment_interval_days)},
      {"datagen_inset_m", DOUBLE_KEY(datagen.inset_m)},
      {"datagen_grid_resolution_m", DOUBLE_KEY(datagen.grid_resolution_m)},

      {"season_cloud_threshold", DOUBLE_KEY(datagen.detection.cloud_threshold)},
      {"season_smoothing_window_days", INT_KEY(datagen.detection.smoothing_window_days)},
      {"season_vegetation_threshold", DOUBLE_KEY(datagen.detection.vegetation_threshold)},
      {"season_merge_gap_days", INT_KEY(datagen.detection.merge_gap_days)},

      {"runs", INT_KEY(runs)},
      {"finetune_from_pretrained", BOOL_KEY(finetune_from_pretrained)},
      {"eval_season_rule", RULE_KEY(eval_season_rule)},
      {"census_season_rule", RULE_KEY(census_season_rule)},
      {"confidence_thresholds",
       Key{[](PipelineConfig& c, const std::string& k, const std::string& v) { c.confidence_thresholds = to_list(k, v); },
           [](const PipelineConfig& c) {
             return fmt_list(c.confidence_thresholds.data(), c.confidence_thresholds.size());
           }}},
      {"infer_first_month", DAY_KEY(infer_first_month)},
      {"infer_last_month", DAY_KEY(infer_last_month)},
      {"census_year_start", DAY_KEY(census_year_start)},
      {"cosine_form",
       Key{[](PipelineConfig& c, const std::string& k, const std::string& v) {
             if (v == "euclidean") c.cosine_form = census::CosineForm::Euclidean;
             else if (v == "sum") c.cosine_form = census::CosineForm::SumProduct;
             else bad(k, v, "euclidean or sum");
           },
           [](const PipelineConfig& c) {
             return std::string(c.cosine_form == census::CosineForm::Euclidean ? "euclidean" : "sum");
           }}},
      {"charts", BOOL_KEY(charts)},
  };
  return kKeys;
}

#undef INT_KEY
#undef DOUBLE_KEY
#undef STRING_KEY
#undef DAY_KEY
#undef BOOL_KEY
#undef RULE_KEY

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

PipelineConfig::PipelineConfig() {
  for (int i = 0; i <= 19; ++i) confidence_thresholds.push_back(i * 0.05);
  datagen.unlabeled_per_field = 1;
}

std::uint64_t PipelineConfig::dataset_seed(int run) const { return seed + static_cast<std::uint64_t>(run); }

std::uint64_t PipelineConfig::model_seed(int run) const {
  return derive_seed(seed ^ kModelSeedStream, model.seed, static_cast<std::uint64_t>(run));
}

void PipelineConfig::validate() const {
  model.validate_domains();
  synth.validate();
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorCode::ConfigError, msg);
  };
  require(runs >= 1, "runs must be >= 1");
  const auto& r = datagen.ratios;
  require(r.train >= 0 && r.validation >= 0 && r.test >= 0 && std::abs(r.train + r.validation + r.test - 1.0) < 1e-9,
          "split ratios must be non-negative and sum to 1");
  require(datagen.unlabeled_per_field >= 0, "datagen_unlabeled_per_field must be >= 0");
  require(datagen.augment_interval_days > 0, "datagen_augment_interval_days must be positive");
  require(datagen.cell_size_deg > 0 && datagen.inset_m >= 0 && datagen.grid_resolution_m > 0,
          "datagen geometry parameters must be positive");
  require(datagen.detection.smoothing_window_days >= 0 && datagen.detection.merge_gap_days >= 0,
          "season detection windows must be >= 0");
  for (double t : confidence_thresholds) require(t >= 0.0 && t <= 1.0, "confidence thresholds must lie in [0, 1]");
  require(infer_first_month <= infer_last_month, "infer_first_month is after infer_last_month");
}

void apply_key_value(PipelineConfig& config, const std::string& key, const std::string& value) {
  if (model::apply_key_value(config.model, key, value)) return;
  const auto& table = keys();
  const auto it = table.find(key);
  if (it == table.end()) throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  it->second.set(config, key, value);
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig config;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw Error(ErrorCode::ConfigError, "duplicate config key '" + key + "'");
    apply_key_value(config, key, value);
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) { return parse_config(io::read_text(path)); }

std::map<std::string, std::string> to_key_values(const PipelineConfig& config) {
  std::map<std::string, std::string> out = model::to_key_values(config.model);
  for (const auto& [key, k] : keys()) out[key] = k.get(config);
  return out;
}

}  // namespace cropid::pipeline
