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

#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"

#include "cropid/core/error.hpp"
#include "cropid/rsd/rsd.hpp"

namespace cropid::test {

/// Asserts that `fn` throws cropid::Error with the given code.
inline void expect_error(ErrorCode code, const std::function<void()>& fn) {
  bool thrown = false;
  try {
    fn();
  } catch (const Error& e) {
    thrown = true;
    CHECK_MESSAGE(e.code() == code, "got " << to_string(e.code()) << ": " << std::string(e.what()));
  }
  CHECK_MESSAGE(thrown, "expected " << to_string(code));
}

/// One-band satellite layout used by the numeric tests.
inline rsd::SensorLayout single_band_layout() {
  return rsd::SensorLayout{{rsd::SatelliteSpec{"X", {"v"}, false}}};
}

/// Series of the single-band layout with (day, value) observations.
inline rsd::RsdSeries single_band(std::initializer_list<std::pair<Day, double>> obs) {
  rsd::RsdSeries s = rsd::RsdSeries::empty_for(single_band_layout());
  for (const auto& [d, v] : obs) s.streams[0].push_back({d, {v}, std::nullopt});
  return s;
}

/// Default-layout series: S2 observations with the given NDVI (via B8/B4) and cloud score,
/// and an S1 observation on the same days.
inline rsd::RsdSeries ndvi_series(const std::vector<std::pair<Day, double>>& ndvi, double cloud = 0.9) {
  const auto layout = rsd::SensorLayout::defaults();
  rsd::RsdSeries s = rsd::RsdSeries::empty_for(layout);
  for (const auto& [d, n] : ndvi) {
    const double nir = 0.4;
    const double red = nir * (1.0 - n) / (1.0 + n);
    s.stream(rsd::kSentinel2).push_back({d, {0.05, 0.07, red, nir}, cloud});
    s.stream(rsd::kSentinel1).push_back({d, {-14.0, -22.0}, std::nullopt});
  }
  return s;
}

}  // namespace cropid::test
