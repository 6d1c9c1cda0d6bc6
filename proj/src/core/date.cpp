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

#include "cropid/core/date.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "cropid/core/error.hpp"

namespace cropid {

namespace {

std::chrono::year_month_day to_ymd(Day day) {
  return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{day}}};
}

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, "bad date '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Day make_day(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) {
    throw Error(ErrorCode::ParseError, "invalid calendar date " + std::to_string(year) + "-" +
                                           std::to_string(month) + "-" + std::to_string(day));
  }
  return static_cast<Day>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

Day parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw Error(ErrorCode::ParseError, "bad date '" + std::string(text) + "'");
  }
  const int y = parse_int(text.substr(0, 4), text);
  const int m = parse_int(text.substr(5, 2), text);
  const int d = parse_int(text.substr(8, 2), text);
  if (m < 1 || d < 1) throw Error(ErrorCode::ParseError, "bad date '" + std::string(text) + "'");
  return make_day(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string format_iso_date(Day day) {
  const auto ymd = to_ymd(day);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

int year_of(Day day) { return static_cast<int>(to_ymd(day).year()); }

unsigned month_of(Day day) { return static_cast<unsigned>(to_ymd(day).month()); }

Day first_of_month(Day day) {
  const auto ymd = to_ymd(day);
  return make_day(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()), 1);
}

Day add_months(Day first_of_month_day, int months) {
  const auto ymd = to_ymd(first_of_month_day);
  int total = static_cast<int>(ymd.year()) * 12 + static_cast<int>(static_cast<unsigned>(ymd.month())) - 1 +
              months;
  const int year = total >= 0 ? total / 12 : (total - 11) / 12;
  const int month = total - year * 12 + 1;
  return make_day(year, static_cast<unsigned>(month), 1);
}

}  // namespace cropid
