#include "dbench/map.hpp"

#include "dbench/errors.hpp"

#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dbench {

using nlohmann::json;

double TrafficSignal::cycle() const {
  double total = 0;
  for (const auto& p : phases) total += p.duration;
  return total;
}

SignalState TrafficSignal::state_at(double time) const {
  const double c = cycle();
  double tau = std::fmod(time + offset, c);
  if (tau < 0) tau += c;
  for (const auto& p : phases) {
    if (tau < p.duration) return p.state;
    tau -= p.duration;
  }
  return phases.back().state;
}

std::string to_string(SignalState s) {
  switch (s) {
    case SignalState::green: return "green";
    case SignalState::yellow: return "yellow";
    case SignalState::red: return "red";
  }
  return "red";
}

SignalState signal_state_from_string(const std::string& s) {
  if (s == "green") return SignalState::green;
  if (s == "yellow") return SignalState::yellow;
  if (s == "red") return SignalState::red;
  throw ParseError("unknown signal state '" + s + "'");
}

std::string to_string(OffroadStatus s) {
  switch (s) {
    case OffroadStatus::on_road: return "on_road";
    case OffroadStatus::partial_offroad: return "partial_offroad";
    case OffroadStatus::full_offroad: return "full_offroad";
  }
  return "on_road";
}

OffroadStatus offroad_status_from_string(const std::string& s) {
  if (s == "on_road") return OffroadStatus::on_road;
  if (s == "partial_offroad") return OffroadStatus::partial_offroad;
  if (s == "full_offroad") return OffroadStatus::full_offroad;
  throw ParseError("unknown offroad status '" + s + "'");
}

// ---------------------------------------------------------------------------
// Construction and validation

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

}  // namespace

RoadNetwork RoadNetwork::build(std::vector<Lane> lanes, std::vector<Edge> edges,
                               std::vector<Junction> junctions,
                               std::vector<TrafficSignal> signals) {
  RoadNetwork net;
  net.lanes_ = std::move(lanes);
  net.edges_ = std::move(edges);
  net.junctions_ = std::move(junctions);
  net.signals_ = std::move(signals);

  for (std::size_t i = 0; i < net.lanes_.size(); ++i) {
    auto& lane = net.lanes_[i];
    check(!lane.id.empty(), "lane #" + std::to_string(i) + " has an empty id");
    check(net.lane_index_.emplace(lane.id, i).second, "duplicate lane id '" + lane.id + "'");
    lane.edge.clear();
    lane.junction.clear();
  }

  for (const auto& lane : net.lanes_) {
    const auto& pts = lane.centerline.points();
    check(pts.size() >= 2, "lane '" + lane.id + "' centerline needs at least 2 points");
    for (std::size_t k = 1; k < pts.size(); ++k)
      check((pts[k] - pts[k - 1]).norm() > 0,
            "lane '" + lane.id + "' has a zero-length centerline segment at index " +
                std::to_string(k - 1));
    check(lane.length() >= 0.5, "lane '" + lane.id + "' is shorter than 0.5 m");
    check(lane.width > 0 && lane.width <= 10.0,
          "lane '" + lane.id + "' width must lie in (0, 10] m");
    check(lane.speed_limit > 0, "lane '" + lane.id + "' speed limit must be positive");
    for (const auto& s : lane.successors)
      check(net.has_lane(s), "lane '" + lane.id + "' references missing successor '" + s + "'");
    for (const auto& s : lane.predecessors)
      check(net.has_lane(s), "lane '" + lane.id + "' references missing predecessor '" + s + "'");
    if (lane.left)
      check(net.has_lane(*lane.left),
            "lane '" + lane.id + "' references missing left neighbor '" + *lane.left + "'");
    if (lane.right)
      check(net.has_lane(*lane.right),
            "lane '" + lane.id + "' references missing right neighbor '" + *lane.right + "'");
  }

  std::unordered_map<std::string, std::size_t> edge_ids;
  for (std::size_t e = 0; e < net.edges_.size(); ++e) {
    const auto& edge = net.edges_[e];
    check(edge_ids.emplace(edge.id, e).second, "duplicate edge id '" + edge.id + "'");
    check(!edge.lanes.empty(), "edge '" + edge.id + "' has no lanes");
    for (const auto& l : edge.lanes) {
      check(net.has_lane(l), "edge '" + edge.id + "' references missing lane '" + l + "'");
      auto& lane = net.lanes_[net.lane_index(l)];
      check(lane.edge.empty() && lane.junction.empty(),
            "lane '" + l + "' belongs to more than one edge or junction");
      lane.edge = edge.id;
    }
  }
  std::unordered_map<std::string, std::size_t> junction_ids;
  for (std::size_t j = 0; j < net.junctions_.size(); ++j) {
    const auto& jn = net.junctions_[j];
    check(junction_ids.emplace(jn.id, j).second, "duplicate junction id '" + jn.id + "'");
    for (const auto& e : jn.incoming)
      check(edge_ids.count(e), "junction '" + jn.id + "' references missing edge '" + e + "'");
    for (const auto& e : jn.outgoing)
      check(edge_ids.count(e), "junction '" + jn.id + "' references missing edge '" + e + "'");
    for (const auto& l : jn.connections) {
      check(net.has_lane(l), "junction '" + jn.id + "' references missing lane '" + l + "'");
      auto& lane = net.lanes_[net.lane_index(l)];
      check(lane.edge.empty() && lane.junction.empty(),
            "lane '" + l + "' belongs to more than one edge or junction");
      lane.junction = jn.id;
    }
  }
  for (const auto& lane : net.lanes_)
    check(!lane.edge.empty() || !lane.junction.empty(),
          "lane '" + lane.id + "' belongs to no edge or junction");

  std::unordered_map<std::string, std::size_t> signal_ids;
  for (std::size_t s = 0; s < net.signals_.size(); ++s) {
    const auto& sig = net.signals_[s];
    check(signal_ids.emplace(sig.id, s).second, "duplicate signal id '" + sig.id + "'");
    check(net.has_lane(sig.lane),
          "signal '" + sig.id + "' references missing lane '" + sig.lane + "'");
    check(!sig.phases.empty(), "signal '" + sig.id + "' has no phases");
    for (const auto& p : sig.phases)
      check(p.duration > 0, "signal '" + sig.id + "' has a non-positive phase duration");
    check(net.signal_by_lane_.emplace(sig.lane, s).second,
          "lane '" + sig.lane + "' is controlled by more than one signal");
  }

  for (const auto& lane : net.lanes_) net.max_width_ = std::max(net.max_width_, lane.width);
  net.build_index();
  return net;
}

void RoadNetwork::build_index() {
  grid_.clear();
  bool first = true;
  for (std::uint32_t li = 0; li < lanes_.size(); ++li) {
    const auto& pts = lanes_[li].centerline.points();
    for (std::uint32_t k = 0; k + 1 < pts.size(); ++k) {
      const Vec2 lo = pts[k].cwiseMin(pts[k + 1]);
      const Vec2 hi = pts[k].cwiseMax(pts[k + 1]);
      const auto [x0, y0] = cell_of(lo);
      const auto [x1, y1] = cell_of(hi);
      for (auto cx = x0; cx <= x1; ++cx)
        for (auto cy = y0; cy <= y1; ++cy) grid_[key(cx, cy)].push_back({li, k});
      if (first) {
        min_cx_ = x0, min_cy_ = y0, max_cx_ = x1, max_cy_ = y1;
        first = false;
      } else {
        min_cx_ = std::min(min_cx_, x0), min_cy_ = std::min(min_cy_, y0);
        max_cx_ = std::max(max_cx_, x1), max_cy_ = std::max(max_cy_, y1);
      }
    }
  }
}

std::int64_t RoadNetwork::max_ring(std::pair<std::int64_t, std::int64_t> c) const {
  return std::max({std::abs(c.first - min_cx_), std::abs(c.first - max_cx_),
                   std::abs(c.second - min_cy_), std::abs(c.second - max_cy_)});
}

std::size_t RoadNetwork::lane_index(const LaneId& id) const {
  const auto it = lane_index_.find(id);
  if (it == lane_index_.end()) throw ValidationError("unknown lane '" + id + "'");
  return it->second;
}

const TrafficSignal* RoadNetwork::signal_for_lane(const LaneId& lane) const {
  const auto it = signal_by_lane_.find(lane);
  return it == signal_by_lane_.end() ? nullptr : &signals_[it->second];
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename T>
T field(const json& j, const char* name, const std::string& where) {
  if (!j.contains(name)) throw ParseError(where + ": missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": field '" + name + "' has the wrong type");
  }
}

std::vector<std::string> id_list(const json& j, const char* name, const std::string& where) {
  if (!j.contains(name) || j.at(name).is_null()) return {};
  return field<std::vector<std::string>>(j, name, where);
}

std::optional<std::string> opt_id(const json& j, const char* name, const std::string& where) {
  if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
  return field<std::string>(j, name, where);
}

}  // namespace

RoadNetwork RoadNetwork::from_json(const json& j) {
  if (!j.is_object()) throw ParseError("map: top level must be an object");
  std::vector<Lane> lanes;
  std::vector<Edge> edges;
  std::vector<Junction> junctions;
  std::vector<TrafficSignal> signals;

  const auto arr = [&](const char* key) -> const json& {
    static const json empty = json::array();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_array()) throw ParseError(std::string("map: '") + key + "' must be an array");
    return j.at(key);
  };

  for (const auto& lj : arr("lanes")) {
    Lane lane;
    lane.id = field<std::string>(lj, "id", "lane");
    const std::string where = "lane '" + lane.id + "'";
    std::vector<Vec2> pts;
    for (const auto& pj : field<std::vector<std::vector<double>>>(lj, "centerline", where)) {
      if (pj.size() != 2) throw ParseError(where + ": centerline points must be [x, y]");
      pts.emplace_back(pj[0], pj[1]);
    }
    lane.centerline = Polyline(std::move(pts));
    lane.width = field<double>(lj, "width", where);
    lane.speed_limit = field<double>(lj, "speed_limit", where);
    lane.successors = id_list(lj, "successors", where);
    lane.predecessors = id_list(lj, "predecessors", where);
    lane.left = opt_id(lj, "left", where);
    lane.right = opt_id(lj, "right", where);
    lanes.push_back(std::move(lane));
  }
  for (const auto& ej : arr("edges")) {
    Edge e;
    e.id = field<std::string>(ej, "id", "edge");
    e.lanes = id_list(ej, "lanes", "edge '" + e.id + "'");
    edges.push_back(std::move(e));
  }
  for (const auto& jj : arr("junctions")) {
    Junction jn;
    jn.id = field<std::string>(jj, "id", "junction");
    const std::string where = "junction '" + jn.id + "'";
    jn.incoming = id_list(jj, "incoming", where);
    jn.outgoing = id_list(jj, "outgoing", where);
    jn.connections = id_list(jj, "connections", where);
    junctions.push_back(std::move(jn));
  }
  for (const auto& sj : arr("signals")) {
    TrafficSignal s;
    s.id = field<std::string>(sj, "id", "signal");
    const std::string where = "signal '" + s.id + "'";
    s.lane = field<std::string>(sj, "lane", where);
    s.offset = sj.value("offset", 0.0);
    if (!sj.contains("phases") || !sj.at("phases").is_array())
      throw ParseError(where + ": missing field 'phases'");
    for (const auto& pj : sj.at("phases")) {
      SignalPhase p;
      p.state = signal_state_from_string(field<std::string>(pj, "state", where));
      p.duration = field<double>(pj, "duration", where);
      s.phases.push_back(p);
    }
    signals.push_back(std::move(s));
  }
  return build(std::move(lanes), std::move(edges), std::move(junctions), std::move(signals));
}

json RoadNetwork::to_json() const {
  json j;
  j["lanes"] = json::array();
  for (const auto& lane : lanes_) {
    json lj;
    lj["id"] = lane.id;
    json pts = json::array();
    for (const auto& p : lane.centerline.points()) pts.push_back({p.x(), p.y()});
    lj["centerline"] = std::move(pts);
    lj["width"] = lane.width;
    lj["speed_limit"] = lane.speed_limit;
    lj["successors"] = lane.successors;
    lj["predecessors"] = lane.predecessors;
    lj["left"] = lane.left ? json(*lane.left) : json(nullptr);
    lj["right"] = lane.right ? json(*lane.right) : json(nullptr);
    j["lanes"].push_back(std::move(lj));
  }
  j["edges"] = json::array();
  for (const auto& e : edges_) j["edges"].push_back({{"id", e.id}, {"lanes", e.lanes}});
  j["junctions"] = json::array();
  for (const auto& jn : junctions_)
    j["junctions"].push_back({{"id", jn.id},
                              {"incoming", jn.incoming},
                              {"outgoing", jn.outgoing},
                              {"connections", jn.connections}});
  j["signals"] = json::array();
  for (const auto& s : signals_) {
    json phases = json::array();
    for (const auto& p : s.phases)
      phases.push_back({{"state", to_string(p.state)}, {"duration", p.duration}});
    j["signals"].push_back(
        {{"id", s.id}, {"lane", s.lane}, {"phases", std::move(phases)}, {"offset", s.offset}});
  }
  return j;
}

RoadNetwork load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open map file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("map '" + path.string() + "': " + e.what());
  }
  return RoadNetwork::from_json(j);
}

// ---------------------------------------------------------------------------
// Queries

LaneQuery nearest_lane(const RoadNetwork& net, const Vec2& p) {
  if (net.lanes().empty()) throw ValidationError("nearest_lane on an empty road network");
  const auto& lanes = net.lanes();

  double best_dist = std::numeric_limits<double>::infinity();
  const Lane* best_lane = nullptr;
  PolylineProjection best_proj;

  const auto visit = [&](const RoadNetwork::SegmentRef& ref) {
    const Lane& lane = lanes[ref.lane];
    const auto proj = lane.centerline.project_segment(p, ref.segment);
    bool better = proj.distance < best_dist;
    if (!better && proj.distance == best_dist) {
      if (lane.id < best_lane->id)
        better = true;
      else if (&lane == best_lane && proj.segment < best_proj.segment)
        better = true;
    }
    if (better) {
      best_dist = proj.distance;
      best_lane = &lane;
      best_proj = proj;
    }
  };

  const auto center = net.cell_of(p);
  const auto last = net.max_ring(center);
  if (last > 64) {
    // Far from the indexed area: scanning every segment is cheaper than the rings.
    for (std::uint32_t li = 0; li < lanes.size(); ++li)
      for (std::uint32_t k = 0; k < lanes[li].centerline.segment_count(); ++k) visit({li, k});
  } else {
    for (std::int64_t ring = 0; ring <= last; ++ring) {
      net.for_segments_in_ring(center, ring, visit);
      if (best_dist < double(ring) * RoadNetwork::kCellSize) break;
    }
  }

  LaneQuery q;
  q.lane = best_lane->id;
  q.lane_index = std::size_t(best_lane - lanes.data());
  q.offset = best_proj.offset;
  q.station = best_proj.station;
  q.segment = best_proj.segment;
  return q;
}

std::vector<LaneQuery> lanes_at(const RoadNetwork& net, const Vec2& p) {
  const auto& lanes = net.lanes();
  std::map<std::uint32_t, PolylineProjection> best;
  net.for_segments_near(p, net.max_lane_width() / 2, [&](const RoadNetwork::SegmentRef& ref) {
    const Lane& lane = lanes[ref.lane];
    const auto proj = lane.centerline.project_segment(p, ref.segment);
    if (proj.distance > lane.width / 2) return;
    const auto it = best.find(ref.lane);
    if (it == best.end() || proj.distance < it->second.distance ||
        (proj.distance == it->second.distance && proj.segment < it->second.segment))
      best[ref.lane] = proj;
  });
  std::vector<LaneQuery> out;
  for (const auto& [li, proj] : best)
    out.push_back({lanes[li].id, li, proj.offset, proj.station, proj.segment});
  std::sort(out.begin(), out.end(),
            [](const LaneQuery& a, const LaneQuery& b) { return a.lane < b.lane; });
  return out;
}

double lane_heading(const RoadNetwork& net, const LaneQuery& q) {
  const auto& pts = net.lanes()[q.lane_index].centerline.points();
  const Vec2 d = pts[q.segment + 1] - pts[q.segment];
  return std::atan2(d.y(), d.x());
}

bool on_road_surface(const RoadNetwork& net, const Vec2& p) {
  bool inside = false;
  const auto& lanes = net.lanes();
  net.for_segments_near(p, net.max_lane_width() / 2, [&](const RoadNetwork::SegmentRef& ref) {
    if (inside) return;
    const Lane& lane = lanes[ref.lane];
    const auto& pts = lane.centerline.points();
    const Vec2& a = pts[ref.segment];
    const Vec2 ab = pts[ref.segment + 1] - a;
    const double half = lane.width / 2;
    const double t = (p - a).dot(ab) / ab.squaredNorm();
    if (t >= 0 && t <= 1 && std::abs(cross(Vec2(ab.normalized()), Vec2(p - a))) <= half) {
      inside = true;
      return;
    }
    if (ref.segment > 0 && (p - a).norm() <= half) inside = true;
  });
  return inside;
}

OffroadStatus offroad_status(const RoadNetwork& net, const Box& footprint) {
  int off = 0;
  for (const auto& c : footprint.corners())
    if (!on_road_surface(net, c)) ++off;
  if (off == 0) return OffroadStatus::on_road;
  if (off <= 2) return OffroadStatus::partial_offroad;
  return OffroadStatus::full_offroad;
}

// ---------------------------------------------------------------------------
// Routes

namespace {

bool is_neighbor(const Lane& a, const LaneId& b) {
  return (a.left && *a.left == b) || (a.right && *a.right == b);
}

bool is_successor(const Lane& a, const LaneId& b) {
  return std::find(a.successors.begin(), a.successors.end(), b) != a.successors.end();
}

}  // namespace

void validate_route(const RoadNetwork& net, const Route& route) {
  if (route.lanes.empty()) throw ValidationError("route has no lanes");
  for (const auto& id : route.lanes)
    if (!net.has_lane(id)) throw ValidationError("route references missing lane '" + id + "'");
  for (std::size_t i = 0; i + 1 < route.lanes.size(); ++i) {
    const Lane& a = net.lane(route.lanes[i]);
    const LaneId& b = route.lanes[i + 1];
    if (!is_successor(a, b) && !is_neighbor(a, b))
      throw ValidationError("route lanes '" + a.id + "' and '" + b +
                            "' are not connected by a successor or neighbor relation");
  }
  if (!(route.arrival_radius > 0)) throw ValidationError("route arrival radius must be positive");
  const double first_len = net.lane(route.lanes.front()).length();
  if (!(route.start_station >= 0 && route.start_station < first_len))
    throw ValidationError("route start station must lie on lane '" + route.lanes.front() + "'");
}

RoutePath::RoutePath(const RoadNetwork& net, const Route& route) {
  validate_route(net, route);
  std::vector<Vec2> pts;
  std::vector<std::size_t> seg_lane;

  const auto push = [&](const Vec2& p, std::size_t lane_idx) {
    if (!pts.empty() && (p - pts.back()).norm() < 1e-9) return;
    if (!pts.empty()) seg_lane.push_back(lane_idx);
    pts.push_back(p);
  };
  const auto append_slice = [&](const Lane& lane, std::size_t lane_idx, double s0, double s1) {
    const auto& cl = lane.centerline;
    push(cl.point_at(s0), lane_idx);
    for (std::size_t k = 0; k < cl.size(); ++k)
      if (cl.stations()[k] > s0 && cl.stations()[k] < s1) push(cl.points()[k], lane_idx);
    push(cl.point_at(s1), lane_idx);
  };

  std::vector<std::pair<std::size_t, double>> lane_end_points;
  double entry = route.start_station;
  std::size_t first_seg = 0;  // first segment of the final lane's slice
  for (std::size_t i = 0; i < route.lanes.size(); ++i) {
    first_seg = seg_lane.size();
    const std::size_t li = net.lane_index(route.lanes[i]);
    const Lane& lane = net.lanes()[li];
    const bool has_next = i + 1 < route.lanes.size();
    if (has_next && is_neighbor(lane, route.lanes[i + 1]) &&
        !is_successor(lane, route.lanes[i + 1])) {
      const double cut = entry + std::min(0.5 * (lane.length() - entry), kLaneChangeLead);
      append_slice(lane, li, entry, cut);
      const Lane& next = net.lane(route.lanes[i + 1]);
      const auto proj = next.centerline.project(lane.centerline.point_at(cut));
      entry = std::min(proj.station + kLaneChangeLength, next.length());
    } else {
      append_slice(lane, li, entry, lane.length());
      lane_end_points.emplace_back(li, 0.0);
      lane_end_points.back().second = double(pts.size() - 1);  // vertex index for now
      entry = 0;
    }
  }

  // Truncate at the goal's projection onto the final lane's block of segments.
  Polyline full(pts);
  if (first_seg >= seg_lane.size() && !seg_lane.empty()) first_seg = seg_lane.size() - 1;
  const auto goal_proj = full.project(route.goal, first_seg, seg_lane.size());
  std::vector<Vec2> kept;
  std::vector<std::size_t> kept_lane;
  for (std::size_t k = 0; k <= goal_proj.segment; ++k) {
    kept.push_back(pts[k]);
    if (k > 0) kept_lane.push_back(seg_lane[k - 1]);
  }
  const Vec2 foot = full.point_at(goal_proj.station);
  if ((foot - kept.back()).norm() >= 1e-9) {
    kept.push_back(foot);
    kept_lane.push_back(seg_lane[goal_proj.segment]);
  }
  if (kept.size() < 2) {
    // Goal projects onto the very start of the route; keep the first segment.
    kept = {pts[0], pts[1]};
    kept_lane = {seg_lane[0]};
  }
  line_ = Polyline(std::move(kept));
  segment_lane_ = std::move(kept_lane);
  for (const auto& [li, vertex] : lane_end_points) {
    const double s = full.stations()[std::size_t(vertex)];
    if (s <= line_.length() + 1e-9) lane_ends_.emplace_back(li, s);
  }
}

PolylineProjection RoutePath::project_near(const Vec2& p, double hint, double window,
                                           double accept) const {
  const std::size_t first = line_.segment_at(hint - window);
  const std::size_t last = line_.segment_at(hint + window) + 1;
  auto local = line_.project(p, first, last);
  if (local.distance <= accept) return local;
  return line_.project(p);
}

std::optional<double> RoutePath::lane_end_station(std::size_t lane_index) const {
  for (const auto& [li, s] : lane_ends_)
    if (li == lane_index) return s;
  return std::nullopt;
}

std::vector<Waypoint> waypoints_along(const RoadNetwork& net, const RoutePath& path,
                                      const PolylineProjection& start, double horizon,
                                      double spacing) {
  if (!(horizon > 0) || !(spacing > 0))
    throw std::invalid_argument("waypoints_along: horizon and spacing must be positive");
  const auto& line = path.line();
  const double end = line.length();
  const auto make = [&](double s) {
    Waypoint w;
    w.station = s;
    w.pose.position = line.point_at(s);
    w.pose.heading = line.heading_at(s);
    const Lane& lane = net.lanes()[path.segment_lane(line.segment_at(s))];
    w.lane = lane.id;
    w.speed_limit = lane.speed_limit;
    return w;
  };
  std::vector<Waypoint> out;
  for (std::size_t k = 0;; ++k) {
    const double along = double(k) * spacing;
    if (along >= horizon - 1e-9) break;
    const double s = start.station + along;
    if (s >= end - 1e-9) {
      out.push_back(make(end));
      break;
    }
    out.push_back(make(s));
  }
  return out;
}

std::vector<Waypoint> waypoints_along(const RoadNetwork& net, const Route& route, const Pose& from,
                                      double horizon, double spacing) {
  const RoutePath path(net, route);
  const auto proj = path.project(from.position);
  if (proj.distance > kMaxRouteDistance)
    throw OffRouteError("pose is " + std::to_string(proj.distance) +
                        " m from the route; at most 20 m allowed");
  return waypoints_along(net, path, proj, horizon, spacing);
}

}  // namespace dbench
