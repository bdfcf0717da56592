#pragma once

#include "dbench/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dbench {

enum class JunctionKind { four_way, t_junction, signalized };
enum class TurnKind { left, right, straight };
enum class Density { none, low, medium, high };

std::string to_string(JunctionKind k);
std::string to_string(TurnKind k);
std::string to_string(Density d);
JunctionKind junction_kind_from_string(const std::string& s);
TurnKind turn_kind_from_string(const std::string& s);
Density density_from_string(const std::string& s);

/// Mean spawn headway in seconds, infinite for `none`.
double mean_headway(Density d);

/// Spawn times in [0, horizon) built from unit exponential gaps scaled by the
/// mean headway. The same seed gives the same unit gaps at every density.
std::vector<double> poisson_spawn_times(std::uint64_t seed, Density density, double horizon);

// Single-lane-per-direction junction. Arms are 100 m long and meet a 20 m box
// centred on the origin. Lane ids: "<arm>_in", "<arm>_out", "<from>_to_<to>".
inline constexpr double kArmLength = 100.0;
inline constexpr double kBoxHalf = 10.0;
inline constexpr double kJunctionLaneWidth = 3.5;
inline constexpr double kJunctionSpeedLimit = 13.89;
inline constexpr double kGreen = 10.0;
inline constexpr double kYellow = 2.0;

/// Arms present in a junction layout: south, east, north, west order.
std::vector<std::string> junction_arms(JunctionKind kind);
/// Exit arm for a turn from an approach arm, if the layout has one.
std::optional<std::string> turn_exit(JunctionKind kind, const std::string& approach, TurnKind turn);
RoadNetwork junction_map(JunctionKind kind);

struct TurnSuiteParams {
  JunctionKind junction = JunctionKind::four_way;
  TurnKind turn = TurnKind::left;
  Density density = Density::none;
  int missions = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> approaches;  // empty: every arm supporting the turn
  double time_limit = 60.0;
  double dt = 0.1;
};

/// One collaborative scenario per approach arm. Throws ValidationError for a
/// turn the junction cannot host.
std::vector<Scenario> generate_turn_suite(const TurnSuiteParams& p);

// Two-lane corridor heading east with a right-side exit ramp branching at
// x = 300 and a junction at x = 600 offering a right turn.
RoadNetwork corridor_map();

struct FollowSuiteParams {
  std::vector<LeadBehavior> behaviors{LeadBehavior::cruise, LeadBehavior::merge,
                                      LeadBehavior::exit, LeadBehavior::turn,
                                      LeadBehavior::stop};
  Density density = Density::none;
  std::vector<double> offsets{15.0};  // follower distance behind the lead, one per mission
  bool ambiguity = false;             // lead rides the lane that forks
  std::uint64_t seed = 0;
  double lead_speed = 10.0;
  double time_limit = 120.0;
  double dt = 0.1;
};

/// One adaptive scenario per lead behavior.
std::vector<Scenario> generate_follow_suite(const FollowSuiteParams& p);

/// Closed two-lane ring of the given circumference split into `edges` edges.
RoadNetwork ring_map(int edges, double circumference = 2000.0);

TurnSuiteParams turn_params_from_json(const nlohmann::json& j);
FollowSuiteParams follow_params_from_json(const nlohmann::json& j);

/// Builds a suite from {"generator": "turn"|"follow", ...}.
SuiteManifest generate_suite(const nlohmann::json& params);

}  // namespace dbench
