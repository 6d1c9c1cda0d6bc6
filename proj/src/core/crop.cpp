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

#include "cropid/core/crop.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <utility>

#include "cropid/core/error.hpp"

namespace cropid {

namespace {

constexpr std::array<std::string_view, kNumClasses> kNames = {
    "Wheat", "Sugarcane", "Soybeans", "Mustard",   "Corn",   "Rice",  "Cotton",
    "Gram",  "Sorghum",   "Groundnut", "Chilli", "Bajra", "Others"};

// Maximum allowed season length per crop, days.
constexpr std::array<int, kNumNamedCrops> kMaxSeasonLength = {
    240,  // Wheat
    600,  // Sugarcane
    150,  // Soybeans
    150,  // Mustard
    180,  // Corn
    200,  // Rice
    300,  // Cotton
    180,  // Gram (Bengalgram)
    180,  // Sorghum
    180,  // Groundnut
    240,  // Chilli
    150,  // Bajra (Pearl Millet)
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

CropLabel crop_from_index(int index) {
  if (index < 0 || index >= kNumClasses) {
    throw Error(ErrorCode::UnknownCrop, "class index " + std::to_string(index));
  }
  return static_cast<CropLabel>(index);
}

std::string_view crop_name(CropLabel crop) { return kNames[static_cast<std::size_t>(class_index(crop))]; }

const std::array<CropLabel, kNumClasses>& all_crops() {
  static const std::array<CropLabel, kNumClasses> crops = [] {
    std::array<CropLabel, kNumClasses> out{};
    for (int i = 0; i < kNumClasses; ++i) out[static_cast<std::size_t>(i)] = static_cast<CropLabel>(i);
    return out;
  }();
  return crops;
}

std::optional<CropLabel> parse_crop(std::string_view name) {
  const std::string key = lower(name);
  for (int i = 0; i < kNumClasses; ++i) {
    if (lower(kNames[static_cast<std::size_t>(i)]) == key) return static_cast<CropLabel>(i);
  }
  return std::nullopt;
}

CropLabel group_crop(std::string_view raw_name) {
  if (auto crop = parse_crop(raw_name)) return *crop;
  static const std::pair<std::string_view, CropLabel> kAliases[] = {
      {"soybean", CropLabel::Soybeans},   {"soyabean", CropLabel::Soybeans},
      {"rapeseed", CropLabel::Mustard},   {"rapeseed & mustard", CropLabel::Mustard},
      {"maize", CropLabel::Corn},         {"paddy", CropLabel::Rice},
      {"gram (bengalgram)", CropLabel::Gram}, {"bengalgram", CropLabel::Gram},
      {"chickpea", CropLabel::Gram},      {"jowar", CropLabel::Sorghum},
      {"peanut", CropLabel::Groundnut},   {"chili", CropLabel::Chilli},
      {"chilli pepper", CropLabel::Chilli}, {"bajra (pearl millet)", CropLabel::Bajra},
      {"pearl millet", CropLabel::Bajra},
  };
  const std::string key = lower(raw_name);
  for (const auto& [alias, crop] : kAliases) {
    if (alias == key) return crop;
  }
  return CropLabel::Others;
}

int max_season_length(CropLabel crop) {
  if (crop == CropLabel::Others) {
    throw Error(ErrorCode::UnknownCrop, "no season-length bound for Others");
  }
  return kMaxSeasonLength[static_cast<std::size_t>(class_index(crop))];
}

}  // namespace cropid
