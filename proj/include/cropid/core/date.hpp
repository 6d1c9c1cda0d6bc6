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

#include <cstdint>
#include <string>
#include <string_view>

namespace cropid {

/// Days since 1970-01-01 (proleptic Gregorian).
using Day = std::int32_t;

Day make_day(int year, unsigned month, unsigned day);

/// Parses "YYYY-MM-DD". Throws Error(ParseError) on malformed input.
Day parse_iso_date(std::string_view text);
std::string format_iso_date(Day day);

int year_of(Day day);
/// 1..12
unsigned month_of(Day day);
Day first_of_month(Day day);
Day add_months(Day first_of_month_day, int months);

}  // namespace cropid
