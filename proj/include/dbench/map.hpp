#pragma once

#include "dbench/geometry.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dbench {

using LaneId = std::string;

struct Lane {
  LaneId id;
  Polyline centerline;
  double width = 3.5;
  double speed_limit = 13.89;
  std::vector<LaneId> successors;
  std::vector<LaneId> predecessors;
  std::optional<LaneId> left;
  std::optional<LaneId> right;
  // Exactly one of these is set after validation.
  std::string edge;
  std::string junction;

  double length() const { return centerline.length(); }
};

/// Ordered group of parallel lanes forming one road segment, rightmost first.
struct Edge {
  std::string id;
  std::vector<LaneId> lanes;
};

/// Connectivity between edges. Connecting lanes live here rather than in an edge.
struct Junction {
  std::string id;
  std::vector<std::string> incoming;
  std::vector<std::string> outgoing;
  std::vector<LaneId> connections;
};

enum class SignalState { green, yellow, red };

struct SignalPhase {
  SignalState state = SignalState::green;
  double duration = 0;
};

/// Fixed-cycle phase schedule controlling the downstream end of one lane.
struct TrafficSignal {
  std::string id;
  LaneId lane;
  std::vector<SignalPhase> phases;
  double offset = 0;

  double cycle() const;
  SignalState state_at(double time) const;
};

std::string to_string(SignalState s);
SignalState signal_state_from_string(const std::string& s);

/// Lane-level road graph. Immutable after construction; queries are safe from
/// any number of threads.
class RoadNetwork {
 public:
  RoadNetwork() = default;

  /// Builds and validates. Throws ValidationError naming the offending entity.
  static RoadNetwork build(std::vector<Lane> lanes, std::vector<Edge> edges,
                           std::vector<Junction> junctions, std::vector<TrafficSignal> signals);

  static RoadNetwork from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const std::vector<Lane>& lanes() const { return lanes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Junction>& junctions() const { return junctions_; }
  const std::vector<TrafficSignal>& signals() const { return signals_; }

  bool has_lane(const LaneId& id) const { return lane_index_.count(id) != 0; }
  std::size_t lane_index(const LaneId& id) const;
  const Lane& lane(const LaneId& id) const { return lanes_[lane_index(id)]; }
  double max_lane_width() const { return max_width_; }

  /// Signal controlling the end of `lane`, if any.
  const TrafficSignal* signal_for_lane(const LaneId& lane) const;

  struct SegmentRef {
    std::uint32_t lane;
    std::uint32_t segment;
  };

  /// Visits every lane segment whose bounding box touches the square of
  /// half-size `radius` around `p`. A segment may be visited more than once.
  template <typename Fn>
  void for_segments_near(const Vec2& p, double radius, Fn&& fn) const {
    const auto [cx0, cy0] = cell_of(p - Vec2(radius, radius));
    const auto [cx1, cy1] = cell_of(p + Vec2(radius, radius));
    for (std::int64_t cx = cx0; cx <= cx1; ++cx)
      for (std::int64_t cy = cy0; cy <= cy1; ++cy) visit_cell(cx, cy, fn);
  }

  /// Visits the cells forming the Chebyshev ring `ring` around `center`.
  template <typename Fn>
  void for_segments_in_ring(std::pair<std::int64_t, std::int64_t> center, std::int64_t ring,
                            Fn&& fn) const {
    const auto [x, y] = center;
    if (ring == 0) return visit_cell(x, y, fn);
    for (std::int64_t d = -ring; d <= ring; ++d) {
      visit_cell(x + d, y - ring, fn);
      visit_cell(x + d, y + ring, fn);
    }
    for (std::int64_t d = -ring + 1; d <= ring - 1; ++d) {
      visit_cell(x - ring, y + d, fn);
      visit_cell(x + ring, y + d, fn);
    }
  }

  std::pair<std::int64_t, std::int64_t> cell_of(const Vec2& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / kCellSize)),
            static_cast<std::int64_t>(std::floor(p.y() / kCellSize))};
  }
  /// Number of rings needed from `center` to cover every indexed cell.
  std::int64_t max_ring(std::pair<std::int64_t, std::int64_t> center) const;

  static constexpr double kCellSize = 10.0;

 private:
  template <typename Fn>
  void visit_cell(std::int64_t cx, std::int64_t cy, Fn& fn) const {
    const auto it = grid_.find(key(cx, cy));
    if (it == grid_.end()) return;
    for (const auto& ref : it->second) fn(ref);
  }
  static std::uint64_t key(std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(cx) << 32) ^ (static_cast<std::uint64_t>(cy) & 0xffffffffu);
  }
  void build_index();

  std::vector<Lane> lanes_;
  std::vector<Edge> edges_;
  std::vector<Junction> junctions_;
  std::vector<TrafficSignal> signals_;
  std::unordered_map<LaneId, std::size_t> lane_index_;
  std::unordered_map<LaneId, std::size_t> signal_by_lane_;
  std::unordered_map<std::uint64_t, std::vector<SegmentRef>> grid_;
  std::int64_t min_cx_ = 0, min_cy_ = 0, max_cx_ = 0, max_cy_ = 0;
  double max_width_ = 0;
};

RoadNetwork load_map(const std::filesystem::path& path);

struct LaneQuery {
  LaneId lane;
  std::size_t lane_index = 0;
  double offset = 0;   // signed, positive left of travel direction
  double station = 0;  // in [0, lane length]
  std::size_t segment = 0;
};

/// Lane minimizing the absolute lateral offset; ties go to the smaller lane id.
LaneQuery nearest_lane(const RoadNetwork& net, const Vec2& p);

/// Every lane whose surface contains `p`, with its projection, sorted by lane id.
std::vector<LaneQuery> lanes_at(const RoadNetwork& net, const Vec2& p);

/// Lane travel direction at a station.
double lane_heading(const RoadNetwork& net, const LaneQuery& q);

enum class OffroadStatus { on_road, partial_offroad, full_offroad };

std::string to_string(OffroadStatus s);
OffroadStatus offroad_status_from_string(const std::string& s);

/// True when `p` lies on the union of lane surfaces (each centerline segment
/// swept by the lane width, with round joins at interior vertices).
bool on_road_surface(const RoadNetwork& net, const Vec2& p);

/// Classifies the footprint corners: 0 off -> on_road, 1-2 -> partial, 3-4 -> full.
OffroadStatus offroad_status(const RoadNetwork& net, const Box& footprint);

inline constexpr double kMaxRouteDistance = 20.0;
inline constexpr double kLaneChangeLead = 5.0;
inline constexpr double kLaneChangeLength = 25.0;

struct Route {
  std::vector<LaneId> lanes;
  Vec2 goal = Vec2::Zero();
  double arrival_radius = 2.0;
  double start_station = 0;  // where the path begins on the first lane
};

/// Checks that lanes exist and consecutive lanes are connected by a successor
/// or neighbor relation.
void validate_route(const RoadNetwork& net, const Route& route);

struct Waypoint {
  Pose pose;
  LaneId lane;
  double speed_limit = 0;
  double station = 0;  // along the route path
};

/// Route lanes stitched into one polyline and truncated at the goal. A lane
/// change between neighbors is drawn as a diagonal that leaves the current
/// lane at most kLaneChangeLead meters after entering it and rejoins the
/// neighbor kLaneChangeLength meters further on.
class RoutePath {
 public:
  RoutePath() = default;
  RoutePath(const RoadNetwork& net, const Route& route);

  const Polyline& line() const { return line_; }
  double length() const { return line_.length(); }
  /// Lane index (into RoadNetwork::lanes) owning segment `i`.
  std::size_t segment_lane(std::size_t i) const { return segment_lane_[i]; }
  /// Global closest point.
  PolylineProjection project(const Vec2& p) const { return line_.project(p); }
  /// Searches a station window around `hint` first, falling back to the global
  /// projection when the local result is farther than `accept` meters.
  PolylineProjection project_near(const Vec2& p, double hint, double window = 30.0,
                                  double accept = 5.0) const;
  /// Path station at which the given lane's end is reached, if the lane is on the path.
  std::optional<double> lane_end_station(std::size_t lane_index) const;

 private:
  Polyline line_;
  std::vector<std::size_t> segment_lane_;
  std::vector<std::pair<std::size_t, double>> lane_ends_;
};

/// Poses sampled every `spacing` meters along the route, starting at the
/// projection of `from`, spanning less than `horizon` meters, and ending at
/// the goal when the route runs out first.
std::vector<Waypoint> waypoints_along(const RoadNetwork& net, const Route& route, const Pose& from,
                                      double horizon, double spacing);
std::vector<Waypoint> waypoints_along(const RoadNetwork& net, const RoutePath& path,
                                      const PolylineProjection& start, double horizon,
                                      double spacing);

}  // namespace dbench
