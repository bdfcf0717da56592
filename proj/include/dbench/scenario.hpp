#pragma once

#include "dbench/agents.hpp"
#include "dbench/dynamics.hpp"
#include "dbench/map.hpp"
#include "dbench/metrics.hpp"
#include "dbench/sensors.hpp"
#include "dbench/trajectory_log.hpp"
#include "dbench/v2v.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dbench {

struct VehicleSize {
  double length = 4.5;
  double width = 1.8;
};

struct MissionSpec {
  ActorId id;
  Pose start;
  double speed = 0;
  VehicleSize size;
  Route route;
  std::optional<ActorId> follow;  // lead actor this mission is asked to follow
};

enum class SocialKind { reactive, replay };

struct SocialSpec {
  ActorId id;
  SocialKind kind = SocialKind::reactive;
  std::int64_t spawn_step = 0;
  VehicleSize size;
  // reactive
  Route route;
  double speed = 0;
  std::optional<double> desired_speed;
  // replay
  ReplayTrack track;
  std::optional<std::int64_t> reactive_from;  // hand a replay actor to the reactive driver
};

struct LeadSpec {
  ActorId id;
  Pose start;
  double speed = 0;
  VehicleSize size;
  LeadScript script;
};

struct Scenario {
  std::string id;
  TaskFamily family = TaskFamily::collaborative;
  std::shared_ptr<const RoadNetwork> network;
  double dt = 0.1;
  double time_limit = 60.0;
  std::uint64_t seed = 0;
  std::vector<MissionSpec> missions;
  std::vector<SocialSpec> social;
  std::optional<LeadSpec> lead;
  DynamicsLimits limits;
  SensorConfig sensor;
  V2VConfig v2v;
  std::map<std::string, std::string> tags;  // variation axes

  std::int64_t limit_steps() const;
};

/// Throws ValidationError naming the offending entity.
void validate(const Scenario& scenario);

/// `base` resolves a map given as a relative path.
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
nlohmann::json to_json(const Scenario& scenario);

struct SuiteManifest {
  std::string name;
  TaskFamily family = TaskFamily::collaborative;
  MetricWeights weights;
  std::vector<Scenario> scenarios;
};

void validate(const SuiteManifest& suite);
SuiteManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
nlohmann::json to_json(const SuiteManifest& suite);
SuiteManifest load_manifest(const std::filesystem::path& path);

}  // namespace dbench
