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

#include <span>
#include <string>
#include <vector>

#include "cropid/rsd/rsd.hpp"

namespace cropid::datagen {

using rsd::GeoPoint;

/// Planar point in meters (x east, y north).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Equirectangular projection about an origin; adequate at field scale.
class LocalProjection {
 public:
  static constexpr double kEarthRadiusM = 6371008.8;

  explicit LocalProjection(GeoPoint origin);
  Vec2 to_local(GeoPoint p) const;
  GeoPoint to_geo(Vec2 v) const;

 private:
  GeoPoint origin_;
  double meters_per_deg_lat_;
  double meters_per_deg_lng_;
};

/// Even-odd ray casting; points on an edge count as inside.
bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon);
double distance_to_boundary(Vec2 p, std::span<const Vec2> polygon);
double polygon_area_m2(std::span<const Vec2> polygon);
/// No two non-adjacent edges intersect.
bool is_simple_polygon(std::span<const Vec2> polygon);

struct FieldBoundary {
  std::string field_id;
  std::vector<GeoPoint> polygon;
  double area_ha = 0.0;
  std::string region;

  /// Throws Error(InvalidPolygon) for < 3 vertices, self-intersection, or non-positive area.
  void validate() const;
  GeoPoint centroid() const;  // vertex mean
  LocalProjection projection() const { return LocalProjection(centroid()); }
  std::vector<Vec2> local_polygon() const;
  bool contains(GeoPoint p) const;
};

/// Area in hectares of a lat/lng polygon, measured in its local projection.
double polygon_area_ha(std::span<const GeoPoint> polygon);

/// Points of a `resolution`-meter grid anchored at the bounding-box minimum corner that lie
/// inside the field at least `inset` meters from its boundary.
/// Throws Error(InvalidPolygon) for invalid fields and Error(EmptyInterior) when none qualify.
std::vector<GeoPoint> sample_interior_points(const FieldBoundary& field, double resolution = 10.0,
                                             double inset = 10.0);

/// True when p lies inside the field at least `inset` meters from the boundary.
bool is_interior_point(const FieldBoundary& field, GeoPoint p, double inset = 10.0);

}  // namespace cropid::datagen
