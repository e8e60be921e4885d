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

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "microsim/errors.hpp"
#include "microsim/geometry.hpp"

namespace microsim {

using LaneIndex = int;
using EdgeIndex = int;
inline constexpr LaneIndex kNoLane = -1;
inline constexpr EdgeIndex kNoEdge = -1;

struct Lane {
  std::string id;
  std::string edge_id;
  int index = 0;  // 0 = rightmost lane of the edge
  Polyline centerline;
  double width = 0.0;
  double speed_limit = 0.0;
  std::vector<std::string> successor_ids;
  std::optional<std::string> left_neighbor_id;
  std::optional<std::string> right_neighbor_id;

  // Resolved after parsing.
  EdgeIndex edge = kNoEdge;
  std::vector<LaneIndex> successors;
  LaneIndex left_neighbor = kNoLane;
  LaneIndex right_neighbor = kNoLane;

  double length() const { return centerline.length(); }
  bool dead_end() const { return successors.empty(); }
};

struct Edge {
  std::string id;
  std::vector<LaneIndex> lanes;  // ordered by lane index, rightmost first
  double mean_length = 0.0;
};

struct Junction {
  std::string id;
  std::vector<EdgeIndex> incoming;
  std::vector<EdgeIndex> outgoing;
  std::vector<EdgeIndex> internal_edges;
};

struct SignalPhase {
  bool green = false;
  double duration = 0.0;
};

struct SignalLaneSchedule {
  LaneIndex lane = kNoLane;
  std::vector<SignalPhase> phases;
  double cycle_length() const;
};

struct SignalSchedule {
  std::string junction_id;
  double offset = 0.0;  // cycle offset in seconds
  std::vector<SignalLaneSchedule> lanes;
};

/// Lane-relative pose: arc length s along the centerline, signed lateral
/// offset d (positive left of travel direction), optional derivatives.
struct FrenetPose {
  LaneIndex lane = kNoLane;
  double s = 0.0;
  double d = 0.0;
  double s_dot = 0.0;
  double d_dot = 0.0;
  double s_ddot = 0.0;
  double d_ddot = 0.0;
  bool ambiguous = false;  // projection tie resolved toward smaller s
};

struct Route {
  std::vector<EdgeIndex> edges;
  std::vector<std::vector<LaneIndex>> feasible_lanes;  // per route edge
  bool cyclic = false;
  double total_length = 0.0;

  int edge_position(EdgeIndex e) const {
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (edges[i] == e) return static_cast<int>(i);
    return -1;
  }
  bool lane_feasible(int route_pos, LaneIndex lane) const {
    if (route_pos < 0 || route_pos >= static_cast<int>(feasible_lanes.size())) return false;
    for (LaneIndex l : feasible_lanes[route_pos])
      if (l == lane) return true;
    return false;
  }
};

/// Immutable lane-level vector map: geometry, topology, optional signals.
class RoadNetwork {
 public:
  static RoadNetwork parse(const std::string& json_text);
  std::string serialize() const;  // canonical form, re-parseable

  int lane_count() const { return static_cast<int>(lanes_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const Lane& lane(LaneIndex i) const { return lanes_.at(static_cast<std::size_t>(i)); }
  const Edge& edge(EdgeIndex i) const { return edges_.at(static_cast<std::size_t>(i)); }
  const std::vector<Junction>& junctions() const { return junctions_; }
  const std::vector<SignalSchedule>& signals() const { return signals_; }

  LaneIndex lane_index(const std::string& id) const;
  EdgeIndex edge_index(const std::string& id) const;

  /// Signal state for a lane at time t; lanes without a schedule are green.
  bool is_green(LaneIndex lane, double t) const;
  bool signal_controlled(LaneIndex lane) const;

  FrenetPose cartesian_to_frenet(LaneIndex lane, const Vec2& point, double heading,
                                 double speed, double corridor_slack = 0.0) const;
  /// Inverse mapping; returns (point, lane heading at s). Throws on s out of range.
  std::pair<Vec2, double> frenet_to_cartesian(const FrenetPose& pose) const;

  /// Minimum-total-arc-length edge path with per-edge feasible lane sets.
  /// Only lane-traversable paths are considered. Throws NoRouteError.
  Route plan_route(EdgeIndex origin, EdgeIndex destination) const;

  /// Feasible lane sets for an explicit edge path (backward reachability).
  std::vector<std::vector<LaneIndex>> feasible_lanes_for(
      const std::vector<EdgeIndex>& edge_path, bool cyclic = false) const;

  /// Arc-length distance from (lane, s) to (to_lane, to_s) along successor
  /// chains; nullopt if not reachable within max_dist.
  std::optional<double> path_distance(LaneIndex lane, double s, LaneIndex to_lane,
                                      double to_s, double max_dist) const;

  /// Lanes of the junction's internal edges whose centerlines cross this
  /// lane's centerline (conflict candidates for crossing paths).
  std::vector<LaneIndex> crossing_lanes(LaneIndex internal_lane) const;

  const std::string& source_bytes() const { return source_bytes_; }

 private:
  std::vector<Lane> lanes_;
  std::vector<Edge> edges_;
  std::vector<Junction> junctions_;
  std::vector<SignalSchedule> signals_;
  std::unordered_map<std::string, LaneIndex> lane_by_id_;
  std::unordered_map<std::string, EdgeIndex> edge_by_id_;
  std::unordered_map<LaneIndex, const SignalLaneSchedule*> schedule_by_lane_;
  std::unordered_map<LaneIndex, EdgeIndex> junction_of_internal_lane_;
  std::string source_bytes_;
  std::vector<std::pair<LaneIndex, LaneIndex>> crossing_pairs_;

  void build_indexes();
};

}  // namespace microsim
