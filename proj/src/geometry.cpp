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

#include "microsim/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace microsim {

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("polyline needs at least 2 points");
  }
  // Drop zero-length segments so cumulative arc length is strictly increasing.
  std::vector<Vec2> cleaned;
  cleaned.reserve(points_.size());
  cleaned.push_back(points_.front());
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if ((points_[i] - cleaned.back()).norm() > 1e-12) cleaned.push_back(points_[i]);
  }
  points_ = std::move(cleaned);
  if (points_.size() < 2) {
    throw std::invalid_argument("polyline is degenerate (zero length)");
  }
  cumulative_.resize(points_.size());
  cumulative_[0] = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] + (points_[i] - points_[i - 1]).norm();
  }
}

std::size_t Polyline::segment_index(double s) const {
  // Lower segment owns shared vertices so frenet round trips are consistent.
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
  if (idx == 0) return 0;
  if (idx >= points_.size()) return points_.size() - 2;
  return idx - 1;
}

Vec2 Polyline::point_at(double s) const {
  s = std::clamp(s, 0.0, length());
  std::size_t i = segment_index(s);
  double t = s - cumulative_[i];
  Vec2 dir = (points_[i + 1] - points_[i]).normalized();
  return points_[i] + t * dir;
}

Vec2 Polyline::direction_at(double s) const {
  s = std::clamp(s, 0.0, length());
  std::size_t i = segment_index(s);
  return (points_[i + 1] - points_[i]).normalized();
}

double Polyline::heading_at(double s) const {
  Vec2 d = direction_at(s);
  return std::atan2(d.y(), d.x());
}

double Polyline::heading_smoothed(double s, double blend) const {
  s = std::clamp(s, 0.0, length());
  std::size_t i = segment_index(s);
  double h = heading_at(s);
  if (blend <= 0.0) return h;
  double local = s - cumulative_[i];
  double seg_len = cumulative_[i + 1] - cumulative_[i];
  if (i + 2 < points_.size() && seg_len - local < blend) {
    Vec2 next = (points_[i + 2] - points_[i + 1]).normalized();
    double hn = std::atan2(next.y(), next.x());
    double w = 0.5 * (1.0 - (seg_len - local) / blend);
    return normalize_angle(h + w * normalize_angle(hn - h));
  }
  if (i > 0 && local < blend) {
    Vec2 prev = (points_[i] - points_[i - 1]).normalized();
    double hp = std::atan2(prev.y(), prev.x());
    double w = 0.5 * (1.0 - local / blend);
    return normalize_angle(h + w * normalize_angle(hp - h));
  }
  return h;
}

Polyline::Projection Polyline::project(const Vec2& p) const {
  Projection best;
  double best_dist2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    Vec2 a = points_[i];
    Vec2 ab = points_[i + 1] - a;
    double len2 = ab.squaredNorm();
    double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    Vec2 foot = a + t * ab;
    double dist2 = (p - foot).squaredNorm();
    double s = cumulative_[i] + t * std::sqrt(len2);
    if (dist2 < best_dist2 - 1e-18) {
      best_dist2 = dist2;
      Vec2 dir = ab / std::sqrt(len2);
      double cross = dir.x() * (p - foot).y() - dir.y() * (p - foot).x();
      best.s = s;
      best.d = cross >= 0.0 ? std::sqrt(dist2) : -std::sqrt(dist2);
      best.ambiguous = false;
    } else if (dist2 < best_dist2 + 1e-18 && std::abs(s - best.s) > 1e-9) {
      best.ambiguous = true;  // equidistant; keep the smaller s already stored
    }
  }
  best.distance = std::sqrt(best_dist2);
  return best;
}

std::array<Vec2, 4> OrientedBox::corners() const {
  Vec2 ax(std::cos(heading), std::sin(heading));
  Vec2 ay = left_normal(ax);
  Vec2 dx = 0.5 * length * ax;
  Vec2 dy = 0.5 * width * ay;
  return {center + dx + dy, center + dx - dy, center - dx - dy, center - dx + dy};
}

namespace {
bool separated_on_axis(const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b,
                       const Vec2& axis) {
  double amin = std::numeric_limits<double>::infinity(), amax = -amin;
  double bmin = amin, bmax = amax;
  for (const Vec2& c : a) {
    double v = c.dot(axis);
    amin = std::min(amin, v);
    amax = std::max(amax, v);
  }
  for (const Vec2& c : b) {
    double v = c.dot(axis);
    bmin = std::min(bmin, v);
    bmax = std::max(bmax, v);
  }
  return amax < bmin || bmax < amin;
}
}  // namespace

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  // Quick reject: circumscribed circles.
  double ra = 0.5 * std::hypot(a.length, a.width);
  double rb = 0.5 * std::hypot(b.length, b.width);
  if ((a.center - b.center).squaredNorm() > (ra + rb) * (ra + rb)) return false;

  auto ca = a.corners();
  auto cb = b.corners();
  Vec2 axes[4] = {Vec2(std::cos(a.heading), std::sin(a.heading)),
                  left_normal(Vec2(std::cos(a.heading), std::sin(a.heading))),
                  Vec2(std::cos(b.heading), std::sin(b.heading)),
                  left_normal(Vec2(std::cos(b.heading), std::sin(b.heading)))};
  for (const Vec2& axis : axes) {
    if (separated_on_axis(ca, cb, axis)) return false;
  }
  return true;
}

namespace {
bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    double v = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (v > 1e-12) return 1;
    if (v < -1e-12) return -1;
    return 0;
  };
  int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  return o1 != o2 && o3 != o4;
}
}  // namespace

bool polylines_intersect(const Polyline& a, const Polyline& b) {
  const auto& pa = a.points();
  const auto& pb = b.points();
  for (std::size_t i = 0; i + 1 < pa.size(); ++i) {
    for (std::size_t j = 0; j + 1 < pb.size(); ++j) {
      if (segments_cross(pa[i], pa[i + 1], pb[j], pb[j + 1])) return true;
    }
  }
  return false;
}

}  // namespace microsim
