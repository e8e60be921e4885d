// Copyright 2026 the microsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <vector>

namespace microsim {

using Vec2 = Eigen::Vector2d;

inline double normalize_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

inline Vec2 left_normal(const Vec2& dir) { return Vec2(-dir.y(), dir.x()); }

/// Piecewise-linear centerline with cumulative arc length.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  std::size_t segment_count() const { return points_.size() - 1; }

  Vec2 point_at(double s) const;
  /// Unit tangent of the segment containing s (lower segment at vertices).
  Vec2 direction_at(double s) const;
  double heading_at(double s) const;
  /// Heading with linear blending across a window around interior vertices,
  /// so reported vehicle headings do not jump at polyline corners.
  double heading_smoothed(double s, double blend = 0.5) const;

  struct Projection {
    double s = 0.0;
    double d = 0.0;       // signed, positive left of travel direction
    double distance = 0.0;
    bool ambiguous = false;  // equidistant segments; resolved toward smaller s
  };
  Projection project(const Vec2& p) const;

 private:
  std::size_t segment_index(double s) const;
  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

/// Vehicle footprint: axis-length rectangle centered on (center, heading).
struct OrientedBox {
  Vec2 center{0.0, 0.0};
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  std::array<Vec2, 4> corners() const;
};

/// Separating-axis overlap test for two oriented rectangles.
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

/// Squared distance between box centers; cheap proximity proxy.
inline double center_distance(const OrientedBox& a, const OrientedBox& b) {
  return (a.center - b.center).norm();
}

/// Returns true if the two polylines intersect (any segment pair crosses).
bool polylines_intersect(const Polyline& a, const Polyline& b);

}  // namespace microsim
