#include "dbench/diagnose.hpp"

#include "dbench/errors.hpp"
#include "dbench/generators.hpp"
#include "dbench/policies.hpp"
#include "dbench/world.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace dbench {

std::string to_string(DiagnoseVariable v) {
  switch (v) {
    case DiagnoseVariable::traffic_actors: return "traffic_actors";
    case DiagnoseVariable::agents: return "agents";
    default: return "road_edges";
  }
}

DiagnoseVariable diagnose_variable_from_string(const std::string& s) {
  if (s == "traffic_actors") return DiagnoseVariable::traffic_actors;
  if (s == "agents") return DiagnoseVariable::agents;
  if (s == "road_edges") return DiagnoseVariable::road_edges;
  throw UsageError("unknown diagnose variable '" + s +
                   "' (expected traffic_actors, agents or road_edges)");
}

namespace {

constexpr double kRingLength = 2000.0;

// Lanes from `edge` onward covering at least `distance` meters.
std::vector<LaneId> ring_route(int edges, int edge, int lane, double distance) {
  const double edge_len = kRingLength / edges;
  const int n = int(std::ceil(distance / edge_len)) + 1;
  std::vector<LaneId> out;
  for (int k = 0; k < n; ++k)
    out.push_back("ring_" + std::to_string((edge + k) % edges) + "_" + std::to_string(lane));
  return out;
}

struct Slot {
  int edge = 0;
  int lane = 0;
  double station = 0;
  Pose pose;
};

Slot ring_slot(const RoadNetwork& net, int edges, int index, int total) {
  Slot s;
  s.lane = index % 2;
  // Stagger the two lanes by half a spacing.
  const double spacing = 2 * kRingLength / total;
  const double along = std::fmod((index / 2) * spacing + s.lane * spacing / 2, kRingLength);
  const double edge_len = kRingLength / edges;
  s.edge = std::min(int(along / edge_len), edges - 1);
  const auto& line =
      net.lane("ring_" + std::to_string(s.edge) + "_" + std::to_string(s.lane)).centerline;
  s.station = std::min((along - s.edge * edge_len) / edge_len * line.length(), line.length() - 0.01);
  s.pose = {line.point_at(s.station), line.heading_at(s.station)};
  return s;
}

}  // namespace

Scenario diagnose_scenario(DiagnoseVariable variable, int count, std::int64_t steps) {
  int edges = kDiagnoseBaseEdges, missions = 1, traffic = 0;
  switch (variable) {
    case DiagnoseVariable::traffic_actors: traffic = count; break;
    case DiagnoseVariable::agents: missions = count; break;
    case DiagnoseVariable::road_edges:
      edges = count;
      missions = kDiagnoseFixedAgents;
      break;
  }
  Scenario sc;
  sc.id = "diagnose-" + to_string(variable) + "-" + std::to_string(count);
  sc.family = TaskFamily::collaborative;
  sc.network = std::make_shared<const RoadNetwork>(ring_map(edges, kRingLength));
  sc.dt = 0.1;
  sc.time_limit = double(steps + 10) * sc.dt;
  const double reach = double(steps) * sc.dt * sc.limits.max_speed + 50.0;
  const int total = missions + traffic;
  for (int i = 0; i < total; ++i) {
    const Slot slot = ring_slot(*sc.network, edges, i, total);
    Route route;
    route.lanes = ring_route(edges, slot.edge, slot.lane, reach);
    route.start_station = slot.station;
    route.goal = Vec2::Zero();  // ring centre: never reached, so every world runs all steps
    char id[32];
    if (i < missions) {
      MissionSpec m;
      std::snprintf(id, sizeof id, "agent_%03d", i);
      m.id = id;
      m.start = slot.pose;
      m.speed = 8.0;
      m.route = std::move(route);
      sc.missions.push_back(std::move(m));
    } else {
      SocialSpec s;
      std::snprintf(id, sizeof id, "traffic_%03d", i - missions);
      s.id = id;
      s.kind = SocialKind::reactive;
      s.route = std::move(route);
      s.speed = 8.0;
      sc.social.push_back(std::move(s));
    }
  }
  return sc;
}

std::vector<DiagnoseRow> diagnose(DiagnoseVariable variable, const std::vector<int>& counts,
                                  std::int64_t steps) {
  if (counts.empty()) throw UsageError("diagnose needs at least one count");
  if (steps < 100) throw UsageError("diagnose needs at least 100 steps");
  for (int c : counts)
    if (c < 1 || c > 400) throw UsageError("diagnose counts must lie in [1, 400]");

  std::vector<DiagnoseRow> rows;
  for (int c : counts) {
    const Scenario sc = diagnose_scenario(variable, c, steps);
    World world(sc);
    WaypointFollower policy;
    policy.reset(sc);
    const auto t0 = std::chrono::steady_clock::now();
    for (std::int64_t k = 0; k < steps && !world.done(); ++k) {
      std::map<ActorId, Action> actions;
      for (const auto& id : world.active_missions()) actions.emplace(id, policy.act(world.observe(id)));
      world.step(actions);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    DiagnoseRow row;
    row.count = c;
    row.steps = world.step_index();
    row.seconds = secs;
    row.fps = secs > 0 ? double(row.steps) / secs : 0;
    rows.push_back(row);
  }
  return rows;
}

std::string format_diagnose_table(DiagnoseVariable variable, const std::vector<DiagnoseRow>& rows) {
  std::ostringstream os;
  os << to_string(variable) << ",steps,seconds,fps\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%lld,%.4f,%.1f\n", r.count, static_cast<long long>(r.steps),
                  r.seconds, r.fps);
    os << buf;
  }
  return os.str();
}

}  // namespace dbench
