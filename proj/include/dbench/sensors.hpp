#pragma once

#include "dbench/map.hpp"
#include "dbench/trajectory_log.hpp"
#include "dbench/v2v.hpp"

#include <optional>
#include <vector>

namespace dbench {

struct SensorConfig {
  double range = 50.0;
  int ray_count = 720;
  double visibility_threshold = 0.25;
  /// Points sampled along a neighbor's footprint boundary for its visibility fraction.
  int boundary_samples = 64;
  /// When false, neighbors are reported with fraction 1 and no polygon is cast.
  bool occlusion = true;
};

/// Throws std::invalid_argument on out-of-range settings.
void validate(const SensorConfig& config);

struct SceneActor {
  ActorId id;
  ActorRole role = ActorRole::social;
  VehicleState state;
  Box box;
  bool frozen = false;
};

/// Frozen view of every actor at one step, sorted by id.
class Scene {
 public:
  Scene() = default;
  explicit Scene(std::vector<SceneActor> actors);
  static Scene from_snapshot(const Snapshot& snap);

  const std::vector<SceneActor>& actors() const { return actors_; }
  const SceneActor* find(const ActorId& id) const;
  std::size_t index_of(const ActorId& id) const;

 private:
  std::vector<SceneActor> actors_;
};

/// Ray endpoints in angular order. Ray i points at world angle 2*pi*i/n.
struct VisibilityPolygon {
  Vec2 origin = Vec2::Zero();
  std::vector<double> ranges;
  std::vector<Vec2> vertices;
};

VisibilityPolygon visibility_polygon(const Scene& scene, const ActorId& ego,
                                     const SensorConfig& config);

struct NeighborObservation {
  ActorId id;
  VehicleState state;
  double visibility = 1.0;
};

/// Fraction of boundary samples of `target` with a clear line of sight from
/// the ego center. Only third-party footprints occlude.
double visibility_fraction(const Scene& scene, std::size_t ego, std::size_t target,
                           int samples);

/// Evenly spaced samples along the footprint perimeter, starting at the front-left corner.
std::vector<Vec2> boundary_samples(const Box& box, int count);

/// Neighbors within range whose fraction reaches the threshold, sorted by id.
std::vector<NeighborObservation> visible_neighbors(const Scene& scene, const ActorId& ego,
                                                   const SensorConfig& config);

struct LaneContext {
  LaneId lane;
  double offset = 0;
  double station = 0;
  double lane_width = 0;
  double speed_limit = 0;
  double lane_heading = 0;
};

struct SignalObservation {
  std::string id;
  SignalState state = SignalState::green;
  double distance = 0;                // straight-line distance to the stop point
  std::optional<double> route_distance;  // along the ego route, when the lane is on it
};

struct RouteContext {
  const RoutePath* path = nullptr;
  Vec2 goal = Vec2::Zero();
  double arrival_radius = 2.0;
  double hint = -1;  // station to search around; negative means global projection
  double horizon = 50.0;
  double spacing = 2.0;
};

struct Observation {
  std::int64_t step = 0;
  double time = 0;
  ActorId ego_id;
  VehicleState ego;
  std::vector<NeighborObservation> neighbors;
  std::vector<Vec2> visibility_polygon;
  std::vector<Waypoint> waypoints;
  LaneContext lane;
  std::vector<SignalObservation> signals;
  Vec2 goal = Vec2::Zero();
  double arrival_radius = 2.0;
  double route_station = 0;
  double route_remaining = 0;
  std::optional<ActorId> follow_target;
  std::vector<V2VMessage> inbox;
};

/// Assembles a full observation. A pure function of its arguments.
Observation observe(const Scene& scene, const ActorId& ego, const RoadNetwork& net,
                    const RouteContext& route, double time, const SensorConfig& config);

nlohmann::json to_json(const Observation& obs);
/// Inverse of to_json.
Observation observation_from_json(const nlohmann::json& j);

}  // namespace dbench
