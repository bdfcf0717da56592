#pragma once

#include "dbench/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dbench {

enum class DiagnoseVariable { traffic_actors, agents, road_edges };

std::string to_string(DiagnoseVariable v);
/// Throws UsageError for unknown names.
DiagnoseVariable diagnose_variable_from_string(const std::string& s);

inline constexpr std::int64_t kDefaultDiagnoseSteps = 1000;
inline constexpr int kDiagnoseBaseEdges = 8;
inline constexpr int kDiagnoseFixedAgents = 10;

/// Synthetic ring-road world for one row of the diagnostic:
/// traffic_actors adds `count` reactive vehicles around one agent, agents
/// places `count` sensor-equipped missions, and road_edges splits the ring
/// into `count` edges under a fixed set of agents.
Scenario diagnose_scenario(DiagnoseVariable variable, int count, std::int64_t steps);

struct DiagnoseRow {
  int count = 0;
  std::int64_t steps = 0;
  double seconds = 0;
  double fps = 0;  // world steps per second
};

/// Steps each world `steps` times with the waypoint follower driving every
/// mission. Throws UsageError for empty counts, counts outside [1, 400] or
/// fewer than 100 steps.
std::vector<DiagnoseRow> diagnose(DiagnoseVariable variable, const std::vector<int>& counts,
                                  std::int64_t steps = kDefaultDiagnoseSteps);

std::string format_diagnose_table(DiagnoseVariable variable, const std::vector<DiagnoseRow>& rows);

}  // namespace dbench
