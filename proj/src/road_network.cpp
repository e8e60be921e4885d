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

#include "microsim/road_network.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <queue>
#include <set>

#include <nlohmann/json.hpp>

namespace microsim {

using json = nlohmann::ordered_json;

double SignalLaneSchedule::cycle_length() const {
  double c = 0.0;
  for (const auto& p : phases) c += p.duration;
  return c;
}

namespace {

const json& require_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing field '" + std::string(key) + "' in " + where);
  return *it;
}

double positive_number(const json& v, const char* key, const std::string& where) {
  if (!v.is_number()) throw ParseError("field '" + std::string(key) + "' in " + where + " must be a number");
  double x = v.get<double>();
  if (!(x > 0.0)) throw ParseError("field '" + std::string(key) + "' in " + where + " must be > 0");
  return x;
}

}  // namespace

RoadNetwork RoadNetwork::parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("network document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("network document root must be an object");

  RoadNetwork net;
  net.source_bytes_ = json_text;

  const json& edges = require_field(doc, "edges", "network document");
  if (!edges.is_array() || edges.empty()) throw ParseError("field 'edges' must be a non-empty array");

  for (const json& je : edges) {
    Edge e;
    e.id = require_field(je, "id", "edge").get<std::string>();
    if (net.edge_by_id_.count(e.id)) throw ParseError("duplicate edge id '" + e.id + "'");
    const json& lanes = require_field(je, "lanes", "edge '" + e.id + "'");
    if (!lanes.is_array() || lanes.empty())
      throw ParseError("edge '" + e.id + "' must have at least one lane");

    for (const json& jl : lanes) {
      Lane l;
      l.edge_id = e.id;
      l.id = require_field(jl, "id", "lane of edge '" + e.id + "'").get<std::string>();
      const std::string where = "lane '" + l.id + "'";
      if (net.lane_by_id_.count(l.id)) throw ParseError("duplicate lane id '" + l.id + "'");
      l.index = require_field(jl, "index", where).get<int>();
      const json& cl = require_field(jl, "centerline", where);
      if (!cl.is_array() || cl.size() < 2)
        throw ParseError("degenerate geometry: centerline of " + where + " has fewer than 2 points");
      std::vector<Vec2> pts;
      pts.reserve(cl.size());
      for (const json& jp : cl) {
        if (!jp.is_array() || jp.size() != 2)
          throw ParseError("field 'centerline' in " + where + " must contain [x, y] pairs");
        pts.emplace_back(jp[0].get<double>(), jp[1].get<double>());
      }
      try {
        l.centerline = Polyline(std::move(pts));
      } catch (const std::invalid_argument& e2) {
        throw ParseError("degenerate geometry in " + where + ": " + e2.what());
      }
      l.width = positive_number(require_field(jl, "width", where), "width", where);
      l.speed_limit =
          positive_number(require_field(jl, "speed_limit", where), "speed_limit", where);
      const json& succ = require_field(jl, "successors", where);
      if (!succ.is_array()) throw ParseError("field 'successors' in " + where + " must be an array");
      for (const json& s : succ) l.successor_ids.push_back(s.get<std::string>());
      if (jl.contains("left_neighbor") && !jl["left_neighbor"].is_null())
        l.left_neighbor_id = jl["left_neighbor"].get<std::string>();
      if (jl.contains("right_neighbor") && !jl["right_neighbor"].is_null())
        l.right_neighbor_id = jl["right_neighbor"].get<std::string>();

      net.lane_by_id_[l.id] = static_cast<LaneIndex>(net.lanes_.size());
      e.lanes.push_back(static_cast<LaneIndex>(net.lanes_.size()));
      net.lanes_.push_back(std::move(l));
    }
    net.edge_by_id_[e.id] = static_cast<EdgeIndex>(net.edges_.size());
    net.edges_.push_back(std::move(e));
  }

  // Resolve references; a missing id is a dangling-reference error.
  for (Lane& l : net.lanes_) {
    l.edge = net.edge_by_id_.at(l.edge_id);
    for (const std::string& sid : l.successor_ids) {
      auto it = net.lane_by_id_.find(sid);
      if (it == net.lane_by_id_.end())
        throw ParseError("dangling reference: lane '" + l.id + "' lists missing successor '" + sid + "'");
      l.successors.push_back(it->second);
    }
    auto resolve_neighbor = [&](const std::optional<std::string>& nid, const char* side) {
      if (!nid) return kNoLane;
      auto it = net.lane_by_id_.find(*nid);
      if (it == net.lane_by_id_.end())
        throw ParseError("dangling reference: lane '" + l.id + "' lists missing " + std::string(side) +
                         " neighbor '" + *nid + "'");
      return it->second;
    };
    l.left_neighbor = resolve_neighbor(l.left_neighbor_id, "left");
    l.right_neighbor = resolve_neighbor(l.right_neighbor_id, "right");
  }

  // Lane indices within an edge must be exactly 0..n-1 (rightmost first).
  for (Edge& e : net.edges_) {
    std::sort(e.lanes.begin(), e.lanes.end(), [&](LaneIndex a, LaneIndex b) {
      return net.lanes_[static_cast<std::size_t>(a)].index < net.lanes_[static_cast<std::size_t>(b)].index;
    });
    for (std::size_t i = 0; i < e.lanes.size(); ++i) {
      if (net.lanes_[static_cast<std::size_t>(e.lanes[i])].index != static_cast<int>(i))
        throw ParseError("edge '" + e.id + "' lane indices must be 0..n-1 from rightmost");
    }
    double sum = 0.0;
    for (LaneIndex li : e.lanes) sum += net.lanes_[static_cast<std::size_t>(li)].length();
    e.mean_length = sum / static_cast<double>(e.lanes.size());
  }

  if (doc.contains("junctions")) {
    const json& js = doc["junctions"];
    if (!js.is_array()) throw ParseError("field 'junctions' must be an array");
    for (const json& jj : js) {
      Junction j;
      j.id = require_field(jj, "id", "junction").get<std::string>();
      auto resolve_edges = [&](const char* key, std::vector<EdgeIndex>& out) {
        if (!jj.contains(key)) return;
        for (const json& id : jj[key]) {
          auto it = net.edge_by_id_.find(id.get<std::string>());
          if (it == net.edge_by_id_.end())
            throw ParseError("dangling reference: junction '" + j.id + "' lists missing edge '" +
                             id.get<std::string>() + "'");
          out.push_back(it->second);
        }
      };
      resolve_edges("incoming", j.incoming);
      resolve_edges("outgoing", j.outgoing);
      resolve_edges("internal_edges", j.internal_edges);
      net.junctions_.push_back(std::move(j));
    }
  }

  if (doc.contains("signals") && !doc["signals"].is_null()) {
    const json& sig = doc["signals"];
    if (!sig.is_array()) throw ParseError("field 'signals' must be an array");
    for (const json& jsig : sig) {
      SignalSchedule sch;
      sch.junction_id = require_field(jsig, "junction_id", "signal schedule").get<std::string>();
      sch.offset = jsig.value("offset", 0.0);
      for (const json& jl : require_field(jsig, "lanes", "signal schedule '" + sch.junction_id + "'")) {
        SignalLaneSchedule ls;
        std::string lid = require_field(jl, "lane_id", "signal lane schedule").get<std::string>();
        auto it = net.lane_by_id_.find(lid);
        if (it == net.lane_by_id_.end())
          throw ParseError("dangling reference: signal schedule lists missing lane '" + lid + "'");
        ls.lane = it->second;
        for (const json& jp : require_field(jl, "phases", "signal schedule for lane '" + lid + "'")) {
          SignalPhase p;
          std::string state = require_field(jp, "state", "signal phase").get<std::string>();
          if (state == "green") p.green = true;
          else if (state == "red") p.green = false;
          else throw ParseError("signal phase state must be 'green' or 'red', got '" + state + "'");
          p.duration = positive_number(require_field(jp, "duration", "signal phase"), "duration",
                                       "signal phase for lane '" + lid + "'");
          ls.phases.push_back(p);
        }
        if (ls.phases.empty())
          throw ParseError("signal schedule for lane '" + lid + "' has no phases");
        sch.lanes.push_back(std::move(ls));
      }
      net.signals_.push_back(std::move(sch));
    }
  }

  net.build_indexes();
  return net;
}

void RoadNetwork::build_indexes() {
  for (const SignalSchedule& sch : signals_) {
    for (const SignalLaneSchedule& ls : sch.lanes) schedule_by_lane_[ls.lane] = &ls;
  }
  for (std::size_t ji = 0; ji < junctions_.size(); ++ji) {
    for (EdgeIndex e : junctions_[ji].internal_edges) {
      for (LaneIndex li : edges_[static_cast<std::size_t>(e)].lanes)
        junction_of_internal_lane_[li] = static_cast<int>(ji);
    }
  }
  // Conflict candidates: crossing internal lanes of the same junction.
  for (const Junction& j : junctions_) {
    std::vector<LaneIndex> internal;
    for (EdgeIndex e : j.internal_edges)
      for (LaneIndex li : edges_[static_cast<std::size_t>(e)].lanes) internal.push_back(li);
    for (std::size_t a = 0; a < internal.size(); ++a) {
      for (std::size_t b = a + 1; b < internal.size(); ++b) {
        if (polylines_intersect(lanes_[static_cast<std::size_t>(internal[a])].centerline,
                                lanes_[static_cast<std::size_t>(internal[b])].centerline)) {
          crossing_pairs_.emplace_back(internal[a], internal[b]);
        }
      }
    }
  }
}

std::string RoadNetwork::serialize() const {
  json doc;
  doc["edges"] = json::array();
  for (const Edge& e : edges_) {
    json je;
    je["id"] = e.id;
    je["lanes"] = json::array();
    for (LaneIndex li : e.lanes) {
      const Lane& l = lanes_[static_cast<std::size_t>(li)];
      json jl;
      jl["id"] = l.id;
      jl["index"] = l.index;
      jl["centerline"] = json::array();
      for (const Vec2& p : l.centerline.points()) jl["centerline"].push_back({p.x(), p.y()});
      jl["width"] = l.width;
      jl["speed_limit"] = l.speed_limit;
      jl["successors"] = l.successor_ids;
      jl["left_neighbor"] = l.left_neighbor_id ? json(*l.left_neighbor_id) : json(nullptr);
      jl["right_neighbor"] = l.right_neighbor_id ? json(*l.right_neighbor_id) : json(nullptr);
      je["lanes"].push_back(std::move(jl));
    }
    doc["edges"].push_back(std::move(je));
  }
  doc["junctions"] = json::array();
  for (const Junction& j : junctions_) {
    json jj;
    jj["id"] = j.id;
    auto ids = [&](const std::vector<EdgeIndex>& v) {
      json arr = json::array();
      for (EdgeIndex e : v) arr.push_back(edges_[static_cast<std::size_t>(e)].id);
      return arr;
    };
    jj["incoming"] = ids(j.incoming);
    jj["outgoing"] = ids(j.outgoing);
    jj["internal_edges"] = ids(j.internal_edges);
    doc["junctions"].push_back(std::move(jj));
  }
  if (!signals_.empty()) {
    doc["signals"] = json::array();
    for (const SignalSchedule& sch : signals_) {
      json jsig;
      jsig["junction_id"] = sch.junction_id;
      jsig["offset"] = sch.offset;
      jsig["lanes"] = json::array();
      for (const SignalLaneSchedule& ls : sch.lanes) {
        json jl;
        jl["lane_id"] = lanes_[static_cast<std::size_t>(ls.lane)].id;
        jl["phases"] = json::array();
        for (const SignalPhase& p : ls.phases) {
          jl["phases"].push_back({{"state", p.green ? "green" : "red"}, {"duration", p.duration}});
        }
        jsig["lanes"].push_back(std::move(jl));
      }
      doc["signals"].push_back(std::move(jsig));
    }
  }
  return doc.dump(2) + "\n";
}

LaneIndex RoadNetwork::lane_index(const std::string& id) const {
  auto it = lane_by_id_.find(id);
  return it == lane_by_id_.end() ? kNoLane : it->second;
}

EdgeIndex RoadNetwork::edge_index(const std::string& id) const {
  auto it = edge_by_id_.find(id);
  return it == edge_by_id_.end() ? kNoEdge : it->second;
}

bool RoadNetwork::signal_controlled(LaneIndex lane) const {
  return schedule_by_lane_.count(lane) > 0;
}

bool RoadNetwork::is_green(LaneIndex lane, double t) const {
  auto it = schedule_by_lane_.find(lane);
  if (it == schedule_by_lane_.end()) return true;
  const SignalLaneSchedule& ls = *it->second;
  double cycle = ls.cycle_length();
  const SignalSchedule* parent = nullptr;
  for (const SignalSchedule& sch : signals_) {
    for (const SignalLaneSchedule& cand : sch.lanes) {
      if (&cand == &ls) parent = &sch;
    }
  }
  double offset = parent ? parent->offset : 0.0;
  double phase_t = std::fmod(t + offset, cycle);
  if (phase_t < 0.0) phase_t += cycle;
  for (const SignalPhase& p : ls.phases) {
    if (phase_t < p.duration) return p.green;
    phase_t -= p.duration;
  }
  return ls.phases.back().green;
}

FrenetPose RoadNetwork::cartesian_to_frenet(LaneIndex lane_idx, const Vec2& point, double heading,
                                            double speed, double corridor_slack) const {
  const Lane& l = lane(lane_idx);
  Polyline::Projection proj = l.centerline.project(point);
  double bound = l.width + corridor_slack;
  if (std::abs(proj.d) > bound) {
    throw std::out_of_range("point is outside the corridor of lane '" + l.id + "' (|d| = " +
                            std::to_string(std::abs(proj.d)) + " > " + std::to_string(bound) + ")");
  }
  FrenetPose pose;
  pose.lane = lane_idx;
  pose.s = proj.s;
  pose.d = proj.d;
  pose.ambiguous = proj.ambiguous;
  double lane_heading = l.centerline.heading_at(proj.s);
  double rel = normalize_angle(heading - lane_heading);
  pose.s_dot = speed * std::cos(rel);
  pose.d_dot = speed * std::sin(rel);
  return pose;
}

std::pair<Vec2, double> RoadNetwork::frenet_to_cartesian(const FrenetPose& pose) const {
  const Lane& l = lane(pose.lane);
  if (pose.s < -1e-9 || pose.s > l.length() + 1e-9) {
    throw std::out_of_range("s = " + std::to_string(pose.s) + " out of range [0, " +
                            std::to_string(l.length()) + "] on lane '" + l.id + "'");
  }
  double s = std::clamp(pose.s, 0.0, l.length());
  Vec2 base = l.centerline.point_at(s);
  Vec2 normal = left_normal(l.centerline.direction_at(s));
  return {base + pose.d * normal, l.centerline.heading_at(s)};
}

Route RoadNetwork::plan_route(EdgeIndex origin, EdgeIndex destination) const {
  if (origin < 0 || origin >= edge_count() || destination < 0 || destination >= edge_count())
    throw NoRouteError("origin or destination edge does not exist");

  // Search over (edge, reachable-lane-set) so returned paths are always
  // traversable through successor links, not just edge-adjacent.
  using Mask = std::uint64_t;
  struct State {
    double dist;
    EdgeIndex edge;
    Mask mask;
  };
  auto full_mask = [&](EdgeIndex e) {
    return edge(e).lanes.size() >= 64 ? ~Mask(0)
                                      : ((Mask(1) << edge(e).lanes.size()) - 1);
  };
  auto cmp = [this](const State& a, const State& b) {
    if (a.dist != b.dist) return a.dist > b.dist;
    const std::string& ia = edge(a.edge).id;
    const std::string& ib = edge(b.edge).id;
    if (ia != ib) return ia > ib;
    return a.mask > b.mask;
  };
  std::priority_queue<State, std::vector<State>, decltype(cmp)> open(cmp);
  std::map<std::pair<EdgeIndex, Mask>, double> best;
  std::map<std::pair<EdgeIndex, Mask>, std::pair<EdgeIndex, Mask>> parent;

  Mask m0 = full_mask(origin);
  open.push({edge(origin).mean_length, origin, m0});
  best[{origin, m0}] = edge(origin).mean_length;

  std::pair<EdgeIndex, Mask> goal{kNoEdge, 0};
  double goal_dist = 0.0;
  while (!open.empty()) {
    State cur = open.top();
    open.pop();
    auto key = std::make_pair(cur.edge, cur.mask);
    if (cur.dist > best[key] + 1e-12) continue;
    if (cur.edge == destination) {
      goal = key;
      goal_dist = cur.dist;
      break;
    }
    // Expand: next edges reachable from any lane in the mask.
    std::map<EdgeIndex, Mask> next;
    const Edge& e = edge(cur.edge);
    for (std::size_t i = 0; i < e.lanes.size(); ++i) {
      if (!(cur.mask & (Mask(1) << i))) continue;
      for (LaneIndex succ : lane(e.lanes[i]).successors) {
        const Lane& sl = lane(succ);
        if (sl.edge == cur.edge) continue;  // internal continuation, not an edge hop
        next[sl.edge] |= Mask(1) << sl.index;
      }
    }
    for (const auto& [ne, nmask] : next) {
      double nd = cur.dist + edge(ne).mean_length;
      auto nkey = std::make_pair(ne, nmask);
      auto it = best.find(nkey);
      if (it == best.end() || nd < it->second - 1e-12) {
        best[nkey] = nd;
        parent[nkey] = key;
        open.push({nd, ne, nmask});
      }
    }
  }
  if (goal.first == kNoEdge)
    throw NoRouteError("no path from edge '" + edge(origin).id + "' to edge '" +
                       edge(destination).id + "'");

  Route route;
  route.total_length = goal_dist;
  std::vector<EdgeIndex> rev;
  auto key = goal;
  while (true) {
    rev.push_back(key.first);
    auto it = parent.find(key);
    if (it == parent.end()) break;
    key = it->second;
  }
  route.edges.assign(rev.rbegin(), rev.rend());
  route.feasible_lanes = feasible_lanes_for(route.edges, false);
  return route;
}

std::vector<std::vector<LaneIndex>> RoadNetwork::feasible_lanes_for(
    const std::vector<EdgeIndex>& edge_path, bool cyclic) const {
  std::vector<std::vector<LaneIndex>> feasible(edge_path.size());
  if (edge_path.empty()) return feasible;

  auto backward_pass = [&](std::vector<std::vector<LaneIndex>>& f) {
    for (int k = static_cast<int>(edge_path.size()) - 2; k >= 0; --k) {
      std::set<LaneIndex> next_set(f[static_cast<std::size_t>(k) + 1].begin(),
                                   f[static_cast<std::size_t>(k) + 1].end());
      std::vector<LaneIndex> ok;
      for (LaneIndex li : edge(edge_path[static_cast<std::size_t>(k)]).lanes) {
        for (LaneIndex succ : lane(li).successors) {
          if (next_set.count(succ)) {
            ok.push_back(li);
            break;
          }
        }
      }
      f[static_cast<std::size_t>(k)] = std::move(ok);
    }
  };

  feasible.back() = edge(edge_path.back()).lanes;
  backward_pass(feasible);
  if (cyclic && edge_path.size() > 1) {
    // The last edge must connect back to the first; iterate to a fixpoint.
    for (int pass = 0; pass < 4; ++pass) {
      std::set<LaneIndex> first_set(feasible.front().begin(), feasible.front().end());
      std::vector<LaneIndex> last;
      for (LaneIndex li : edge(edge_path.back()).lanes) {
        for (LaneIndex succ : lane(li).successors) {
          if (first_set.count(succ)) {
            last.push_back(li);
            break;
          }
        }
      }
      if (last == feasible.back()) break;
      feasible.back() = std::move(last);
      backward_pass(feasible);
    }
  }
  return feasible;
}

std::optional<double> RoadNetwork::path_distance(LaneIndex lane_idx, double s, LaneIndex to_lane,
                                                 double to_s, double max_dist) const {
  if (lane_idx == to_lane) {
    double d = to_s - s;
    if (d >= -1e-9 && d <= max_dist) return std::max(0.0, d);
    // Falls through: the target might be reachable around a cycle.
  }
  // BFS over successor chains, shortest accumulated arc length first.
  struct Item {
    double dist;  // arc length from start to the *beginning* of lane
    LaneIndex lane;
  };
  auto cmp = [](const Item& a, const Item& b) { return a.dist > b.dist; };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> open(cmp);
  std::map<LaneIndex, double> seen;
  double head = lane(lane_idx).length() - s;
  for (LaneIndex succ : lane(lane_idx).successors) {
    if (head <= max_dist) open.push({head, succ});
  }
  while (!open.empty()) {
    Item cur = open.top();
    open.pop();
    auto it = seen.find(cur.lane);
    if (it != seen.end() && it->second <= cur.dist + 1e-12) continue;
    seen[cur.lane] = cur.dist;
    if (cur.lane == to_lane) {
      double total = cur.dist + to_s;
      if (total <= max_dist + 1e-9) return total;
      continue;
    }
    double next = cur.dist + lane(cur.lane).length();
    if (next > max_dist) continue;
    for (LaneIndex succ : lane(cur.lane).successors) open.push({next, succ});
  }
  return std::nullopt;
}

std::vector<LaneIndex> RoadNetwork::crossing_lanes(LaneIndex internal_lane) const {
  std::vector<LaneIndex> out;
  for (const auto& [a, b] : crossing_pairs_) {
    if (a == internal_lane) out.push_back(b);
    if (b == internal_lane) out.push_back(a);
  }
  return out;
}

}  // namespace microsim
