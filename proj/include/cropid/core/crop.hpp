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

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace cropid {

/// Model-level crop vocabulary: the twelve most frequent crops plus a catch-all.
/// Enumerator values double as class indices.
enum class CropLabel : int {
  Wheat = 0,
  Sugarcane,
  Soybeans,
  Mustard,
  Corn,
  Rice,
  Cotton,
  Gram,
  Sorghum,
  Groundnut,
  Chilli,
  Bajra,
  Others,
};

inline constexpr int kNumClasses = 13;
inline constexpr int kNumNamedCrops = 12;

inline constexpr int class_index(CropLabel crop) { return static_cast<int>(crop); }
CropLabel crop_from_index(int index);

std::string_view crop_name(CropLabel crop);
const std::array<CropLabel, kNumClasses>& all_crops();

/// Exact (case-insensitive) lookup of a model-level name. Returns nullopt for anything else.
std::optional<CropLabel> parse_crop(std::string_view name);

/// Maps a raw survey crop name onto the 13-class vocabulary. Recognises common aliases
/// ("Paddy", "Maize", "Bengalgram", "Pearl Millet", ...); every other crop becomes Others.
CropLabel group_crop(std::string_view raw_name);

/// Upper bound on a plausible season length in days. Throws Error(UnknownCrop) for Others.
int max_season_length(CropLabel crop);

}  // namespace cropid
