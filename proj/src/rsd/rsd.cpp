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

#include "cropid/rsd/rsd.hpp"

#include <algorithm>
#include <cmath>

#include "cropid/core/error.hpp"

namespace cropid::rsd {

namespace {

constexpr double kStdFloor = 1e-6;

double median_of(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double lerp_clamped(double a, double b, double w) {
  const double v = a + (b - a) * w;
  return std::clamp(v, std::min(a, b), std::max(a, b));
}

}  // namespace

int SatelliteSpec::band_index(const std::string& band) const {
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (bands[i] == band) return static_cast<int>(i);
  }
  return -1;
}

SensorLayout SensorLayout::defaults() {
  return SensorLayout{{SatelliteSpec{kSentinel2, {"B2", "B3", "B4", "B8"}, true},
                       SatelliteSpec{kSentinel1, {"VV", "VH"}, false}}};
}

int SensorLayout::index_of(const std::string& satellite_id) const {
  for (std::size_t i = 0; i < satellites.size(); ++i) {
    if (satellites[i].id == satellite_id) return static_cast<int>(i);
  }
  return -1;
}

const SatelliteSpec& SensorLayout::at(const std::string& satellite_id) const {
  const int i = index_of(satellite_id);
  if (i < 0) throw Error(ErrorCode::ConfigError, "unknown satellite '" + satellite_id + "'");
  return satellites[static_cast<std::size_t>(i)];
}

SatelliteStream::SatelliteStream(std::string satellite, int band_count, bool has_cloud_score)
    : satellite_(std::move(satellite)), band_count_(band_count), has_cloud_score_(has_cloud_score) {}

void SatelliteStream::push_back(const BandObservation& obs) {
  if (static_cast<int>(obs.values.size()) != band_count_) {
    throw Error(ErrorCode::AlignmentError, satellite_ + ": expected " + std::to_string(band_count_) +
                                               " bands, got " + std::to_string(obs.values.size()));
  }
  if (!days_.empty() && obs.day <= days_.back()) {
    throw Error(ErrorCode::AlignmentError,
                satellite_ + ": timestamps must be strictly increasing (" + format_iso_date(obs.day) + ")");
  }
  if (has_cloud_score_ != obs.cloud_score.has_value()) {
    throw Error(ErrorCode::AlignmentError, satellite_ + ": cloud score presence mismatch");
  }
  days_.push_back(obs.day);
  values_.insert(values_.end(), obs.values.begin(), obs.values.end());
  if (has_cloud_score_) cloud_.push_back(*obs.cloud_score);
}

void SatelliteStream::reserve(std::size_t n) {
  days_.reserve(n);
  values_.reserve(n * static_cast<std::size_t>(band_count_));
  if (has_cloud_score_) cloud_.reserve(n);
}

BandObservation SatelliteStream::observation(std::size_t i) const {
  const auto v = values(i);
  return BandObservation{days_[i], std::vector<double>(v.begin(), v.end()), cloud_score(i)};
}

RsdSeries RsdSeries::empty_for(const SensorLayout& layout) {
  RsdSeries out;
  for (const auto& spec : layout.satellites) out.streams.emplace_back(spec);
  return out;
}

const SatelliteStream& RsdSeries::stream(const std::string& satellite) const {
  for (const auto& s : streams) {
    if (s.satellite() == satellite) return s;
  }
  throw Error(ErrorCode::EmptyStream, "series has no stream for satellite " + satellite);
}

SatelliteStream& RsdSeries::stream(const std::string& satellite) {
  return const_cast<SatelliteStream&>(static_cast<const RsdSeries&>(*this).stream(satellite));
}

const NormStats::Satellite* NormStats::find(const std::string& id) const {
  for (const auto& s : satellites) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

int PaddedChannel::valid_count() const {
  return static_cast<int>(std::count(valid.begin(), valid.end(), true));
}

const PaddedChannel& PaddedSeries::channel(const std::string& satellite) const {
  for (const auto& c : channels) {
    if (c.satellite == satellite) return c;
  }
  throw Error(ErrorCode::EmptyStream, "padded series has no channel for satellite " + satellite);
}

RsdSeries interpolate_to_cadence(const RsdSeries& series, Window window, int cadence) {
  if (cadence <= 0) throw Error(ErrorCode::ConfigError, "cadence must be positive");
  RsdSeries out;
  out.location = series.location;
  for (const auto& in : series.streams) {
    if (in.empty()) throw Error(ErrorCode::EmptyStream, "no observations for satellite " + in.satellite());
    SatelliteStream res(in.satellite(), in.band_count(), in.has_cloud_score());
    if (window.last >= window.first) {
      res.reserve(static_cast<std::size_t>((window.last - window.first) / cadence + 1));
    }
    const auto& days = in.days();
    BandObservation obs;
    obs.values.resize(static_cast<std::size_t>(in.band_count()));
    for (Day t = window.first; t <= window.last; t += cadence) {
      obs.day = t;
      const auto hi_it = std::lower_bound(days.begin(), days.end(), t);
      if (hi_it == days.end() || *hi_it == t || hi_it == days.begin()) {
        // Exact hit, or outside the observed range: hold the nearest observation.
        const std::size_t idx = hi_it == days.end() ? days.size() - 1
                                                    : static_cast<std::size_t>(hi_it - days.begin());
        const auto v = in.values(idx);
        std::copy(v.begin(), v.end(), obs.values.begin());
        obs.cloud_score = in.cloud_score(idx);
      } else {
        const std::size_t hi = static_cast<std::size_t>(hi_it - days.begin());
        const std::size_t lo = hi - 1;
        const double w = static_cast<double>(t - days[lo]) / static_cast<double>(days[hi] - days[lo]);
        const auto a = in.values(lo);
        const auto b = in.values(hi);
        for (std::size_t k = 0; k < obs.values.size(); ++k) obs.values[k] = lerp_clamped(a[k], b[k], w);
        if (in.has_cloud_score()) {
          obs.cloud_score = lerp_clamped(*in.cloud_score(lo), *in.cloud_score(hi), w);
        } else {
          obs.cloud_score.reset();
        }
      }
      res.push_back(obs);
    }
    out.streams.push_back(std::move(res));
  }
  return out;
}

RsdSeries median_composite(std::span<const RsdSeries> point_series) {
  if (point_series.empty()) throw Error(ErrorCode::EmptyField, "no point series to composite");
  const RsdSeries& first = point_series.front();
  if (point_series.size() == 1) {
    RsdSeries copy = first;
    copy.location.reset();
    return copy;
  }
  for (const auto& p : point_series) {
    if (p.streams.size() != first.streams.size()) {
      throw Error(ErrorCode::AlignmentError, "point series have different satellite sets");
    }
    for (std::size_t s = 0; s < first.streams.size(); ++s) {
      const auto& a = first.streams[s];
      const auto& b = p.streams[s];
      if (a.satellite() != b.satellite() || a.band_count() != b.band_count() ||
          a.has_cloud_score() != b.has_cloud_score() || a.days() != b.days()) {
        throw Error(ErrorCode::AlignmentError, "point series misaligned for satellite " + a.satellite());
      }
    }
  }
  RsdSeries out;
  std::vector<double> scratch(point_series.size());
  for (std::size_t s = 0; s < first.streams.size(); ++s) {
    const auto& ref = first.streams[s];
    SatelliteStream res(ref.satellite(), ref.band_count(), ref.has_cloud_score());
    res.reserve(ref.size());
    BandObservation obs;
    obs.values.resize(static_cast<std::size_t>(ref.band_count()));
    for (std::size_t i = 0; i < ref.size(); ++i) {
      obs.day = ref.day(i);
      for (int b = 0; b < ref.band_count(); ++b) {
        for (std::size_t p = 0; p < point_series.size(); ++p) {
          scratch[p] = point_series[p].streams[s].values(i)[static_cast<std::size_t>(b)];
        }
        obs.values[static_cast<std::size_t>(b)] = median_of(scratch);
      }
      if (ref.has_cloud_score()) {
        for (std::size_t p = 0; p < point_series.size(); ++p) {
          scratch[p] = *point_series[p].streams[s].cloud_score(i);
        }
        obs.cloud_score = median_of(scratch);
      }
      res.push_back(obs);
    }
    out.streams.push_back(std::move(res));
  }
  return out;
}

double ndvi(double nir, double red) {
  const double denom = nir + red;
  if (denom == 0.0) return 0.0;
  return std::clamp((nir - red) / denom, -1.0, 1.0);
}

double compute_ndvi(const BandObservation& obs, const SatelliteSpec& spec) {
  const int nir = spec.band_index("B8");
  const int red = spec.band_index("B4");
  if (nir < 0 || red < 0) {
    throw Error(ErrorCode::ConfigError, "satellite " + spec.id + " lacks B8/B4 bands for NDVI");
  }
  return ndvi(obs.values.at(static_cast<std::size_t>(nir)), obs.values.at(static_cast<std::size_t>(red)));
}

PaddedSeries pad_to_length(const RsdSeries& series, int length) {
  PaddedSeries out;
  for (const auto& s : series.streams) {
    const int n = static_cast<int>(s.size());
    if (n > length) {
      throw Error(ErrorCode::LengthOverflow, s.satellite() + ": " + std::to_string(n) +
                                                 " steps exceed padded length " + std::to_string(length));
    }
    PaddedChannel ch;
    ch.satellite = s.satellite();
    ch.length = length;
    ch.features = s.band_count() + (s.has_cloud_score() ? 1 : 0);
    ch.values.assign(static_cast<std::size_t>(length * ch.features), 0.0);
    ch.valid.assign(static_cast<std::size_t>(length), false);
    const int offset = length - n;
    for (int i = 0; i < n; ++i) {
      const auto v = s.values(static_cast<std::size_t>(i));
      for (int b = 0; b < s.band_count(); ++b) ch.at(offset + i, b) = v[static_cast<std::size_t>(b)];
      if (s.has_cloud_score()) ch.at(offset + i, s.band_count()) = *s.cloud_score(static_cast<std::size_t>(i));
      ch.valid[static_cast<std::size_t>(offset + i)] = true;
    }
    out.channels.push_back(std::move(ch));
  }
  return out;
}

namespace {

template <typename Fn>
PaddedSeries transform_valid(const PaddedSeries& series, const NormStats& stats, Fn fn) {
  PaddedSeries out = series;
  for (auto& ch : out.channels) {
    const auto* st = stats.find(ch.satellite);
    if (st == nullptr) throw Error(ErrorCode::StatsMismatch, "no statistics for satellite " + ch.satellite);
    if (static_cast<int>(st->mean.size()) != ch.features || static_cast<int>(st->stddev.size()) != ch.features) {
      throw Error(ErrorCode::StatsMismatch, "statistics for " + ch.satellite + " cover " +
                                                std::to_string(st->mean.size()) + " features, series has " +
                                                std::to_string(ch.features));
    }
    for (int t = 0; t < ch.length; ++t) {
      if (!ch.valid[static_cast<std::size_t>(t)]) {
        for (int f = 0; f < ch.features; ++f) ch.at(t, f) = 0.0;
        continue;
      }
      for (int f = 0; f < ch.features; ++f) {
        const double sd = std::max(st->stddev[static_cast<std::size_t>(f)], kStdFloor);
        ch.at(t, f) = fn(ch.at(t, f), st->mean[static_cast<std::size_t>(f)], sd);
      }
    }
  }
  return out;
}

}  // namespace

PaddedSeries zscore_normalize(const PaddedSeries& series, const NormStats& stats) {
  return transform_valid(series, stats, [](double v, double mean, double sd) { return (v - mean) / sd; });
}

PaddedSeries zscore_denormalize(const PaddedSeries& series, const NormStats& stats) {
  return transform_valid(series, stats, [](double v, double mean, double sd) { return v * sd + mean; });
}

NormStatsAccumulator::NormStatsAccumulator(const SensorLayout& layout) {
  for (const auto& spec : layout.satellites) {
    const auto f = static_cast<std::size_t>(spec.feature_count());
    sums_.push_back(Sums{spec.id, std::vector<double>(f, 0.0), std::vector<double>(f, 0.0), 0.0});
  }
}

void NormStatsAccumulator::add(const PaddedSeries& series) {
  for (const auto& ch : series.channels) {
    auto it = std::find_if(sums_.begin(), sums_.end(), [&](const Sums& s) { return s.id == ch.satellite; });
    if (it == sums_.end() || static_cast<int>(it->sum.size()) != ch.features) {
      throw Error(ErrorCode::StatsMismatch, "unexpected channel " + ch.satellite);
    }
    for (int t = 0; t < ch.length; ++t) {
      if (!ch.valid[static_cast<std::size_t>(t)]) continue;
      for (int f = 0; f < ch.features; ++f) {
        const double v = ch.at(t, f);
        it->sum[static_cast<std::size_t>(f)] += v;
        it->sum_sq[static_cast<std::size_t>(f)] += v * v;
      }
      it->count += 1.0;
    }
  }
}

NormStats NormStatsAccumulator::finish() const {
  NormStats out;
  for (const auto& s : sums_) {
    NormStats::Satellite sat{s.id, {}, {}};
    for (std::size_t f = 0; f < s.sum.size(); ++f) {
      const double mean = s.count > 0 ? s.sum[f] / s.count : 0.0;
      const double var = s.count > 0 ? std::max(s.sum_sq[f] / s.count - mean * mean, 0.0) : 0.0;
      sat.mean.push_back(mean);
      sat.stddev.push_back(std::sqrt(var));
    }
    out.satellites.push_back(std::move(sat));
  }
  return out;
}

}  // namespace cropid::rsd
