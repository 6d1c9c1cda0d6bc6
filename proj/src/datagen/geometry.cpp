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

#include "cropid/datagen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cropid/core/error.hpp"

namespace cropid::datagen {

namespace {

// Slack for points that sit exactly on the inset line after a projection round trip.
constexpr double kInsetToleranceM = 1e-6;

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double qx = a.x + t * dx - p.x;
  const double qy = a.y + t * dy - p.y;
  return std::sqrt(qx * qx + qy * qy);
}

bool on_segment(Vec2 p, Vec2 a, Vec2 b) { return segment_distance(p, a, b) <= 1e-9; }

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(a, b, c);
  if (std::abs(v) <= 1e-12) return 0;
  return v > 0 ? 1 : -1;
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(q1, p1, p2)) return true;
  if (o2 == 0 && on_segment(q2, p1, p2)) return true;
  if (o3 == 0 && on_segment(p1, q1, q2)) return true;
  if (o4 == 0 && on_segment(p2, q1, q2)) return true;
  return false;
}

}  // namespace

LocalProjection::LocalProjection(GeoPoint origin)
    : origin_(origin),
      meters_per_deg_lat_(kEarthRadiusM * std::numbers::pi / 180.0),
      meters_per_deg_lng_(kEarthRadiusM * std::numbers::pi / 180.0 * std::cos(origin.lat * std::numbers::pi / 180.0)) {}

Vec2 LocalProjection::to_local(GeoPoint p) const {
  return {(p.lng - origin_.lng) * meters_per_deg_lng_, (p.lat - origin_.lat) * meters_per_deg_lat_};
}

GeoPoint LocalProjection::to_geo(Vec2 v) const {
  return {origin_.lat + v.y / meters_per_deg_lat_, origin_.lng + v.x / meters_per_deg_lng_};
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = polygon[i];
    const Vec2 b = polygon[j];
    if (on_segment(p, a, b)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double distance_to_boundary(Vec2 p, std::span<const Vec2> polygon) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
    best = std::min(best, segment_distance(p, polygon[j], polygon[i]));
  }
  return best;
}

double polygon_area_m2(std::span<const Vec2> polygon) {
  double twice = 0.0;
  for (std::size_t i = 0, j = polygon.size() - 1; i < polygon.size(); j = i++) {
    twice += polygon[j].x * polygon[i].y - polygon[i].x * polygon[j].y;
  }
  return std::abs(twice) / 2.0;
}

bool is_simple_polygon(std::span<const Vec2> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a1 = polygon[i];
    const Vec2 a2 = polygon[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share a vertex by construction.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(a1, a2, polygon[j], polygon[(j + 1) % n])) return false;
    }
  }
  return true;
}

GeoPoint FieldBoundary::centroid() const {
  GeoPoint c{0.0, 0.0};
  for (const auto& p : polygon) {
    c.lat += p.lat;
    c.lng += p.lng;
  }
  const double n = polygon.empty() ? 1.0 : static_cast<double>(polygon.size());
  return {c.lat / n, c.lng / n};
}

std::vector<Vec2> FieldBoundary::local_polygon() const {
  const LocalProjection proj = projection();
  std::vector<Vec2> out;
  out.reserve(polygon.size());
  for (const auto& p : polygon) out.push_back(proj.to_local(p));
  return out;
}

void FieldBoundary::validate() const {
  if (polygon.size() < 3) {
    throw Error(ErrorCode::InvalidPolygon, "field " + field_id + " has " + std::to_string(polygon.size()) +
                                               " vertices (need >= 3)");
  }
  const auto local = local_polygon();
  if (!is_simple_polygon(local)) throw Error(ErrorCode::InvalidPolygon, "field " + field_id + " self-intersects");
  if (!(area_ha > 0.0) || !(polygon_area_m2(local) > 0.0)) {
    throw Error(ErrorCode::InvalidPolygon, "field " + field_id + " has non-positive area");
  }
}

bool FieldBoundary::contains(GeoPoint p) const {
  if (polygon.size() < 3) return false;
  const auto local = local_polygon();
  return point_in_polygon(projection().to_local(p), local);
}

double polygon_area_ha(std::span<const GeoPoint> polygon) {
  if (polygon.size() < 3) return 0.0;
  FieldBoundary tmp;
  tmp.polygon.assign(polygon.begin(), polygon.end());
  return polygon_area_m2(tmp.local_polygon()) / 1e4;
}

bool is_interior_point(const FieldBoundary& field, GeoPoint p, double inset) {
  const auto local = field.local_polygon();
  const Vec2 q = field.projection().to_local(p);
  return point_in_polygon(q, local) && distance_to_boundary(q, local) >= inset - kInsetToleranceM;
}

std::vector<GeoPoint> sample_interior_points(const FieldBoundary& field, double resolution, double inset) {
  field.validate();
  const LocalProjection proj = field.projection();
  const auto local = field.local_polygon();
  double min_x = local[0].x, min_y = local[0].y, max_x = local[0].x, max_y = local[0].y;
  for (const auto& v : local) {
    min_x = std::min(min_x, v.x);
    min_y = std::min(min_y, v.y);
    max_x = std::max(max_x, v.x);
    max_y = std::max(max_y, v.y);
  }
  std::vector<GeoPoint> out;
  const int nx = static_cast<int>(std::floor((max_x - min_x) / resolution + 1e-9));
  const int ny = static_cast<int>(std::floor((max_y - min_y) / resolution + 1e-9));
  for (int iy = 0; iy <= ny; ++iy) {
    for (int ix = 0; ix <= nx; ++ix) {
      const Vec2 q{min_x + ix * resolution, min_y + iy * resolution};
      if (!point_in_polygon(q, local)) continue;
      if (distance_to_boundary(q, local) < inset - kInsetToleranceM) continue;
      out.push_back(proj.to_geo(q));
    }
  }
  if (out.empty()) throw Error(ErrorCode::EmptyInterior, "field " + field.field_id + " has no interior points");
  return out;
}

}  // namespace cropid::datagen
