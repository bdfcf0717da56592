#pragma once

#include "dbench/dynamics.hpp"
#include "dbench/map.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dbench {

using ActorId = std::string;

enum class ActorRole { mission, social, lead };
enum class TaskFamily { collaborative, adaptive };

std::string to_string(ActorRole r);
ActorRole actor_role_from_string(const std::string& s);
std::string to_string(TaskFamily f);
TaskFamily task_family_from_string(const std::string& s);

enum class EventKind {
  collision,
  full_offroad,
  partial_offroad,
  wrong_way,
  speed_violation,
  goal_reached,
  timeout,
  v2v
};

std::string to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

struct Event {
  std::int64_t step = 0;
  ActorId actor;
  EventKind kind = EventKind::collision;
  std::optional<ActorId> other;  // collision partner
  double amount = 0;             // speed excess over the limit, m/s
  double limit = 0;              // speed limit in force, m/s
  nlohmann::json payload;        // v2v traffic details

  bool operator==(const Event&) const = default;
};

/// One actor in one snapshot, with the lane context evaluated at that step.
struct ActorRecord {
  ActorId id;
  ActorRole role = ActorRole::social;
  bool frozen = false;
  VehicleState state;
  LaneId lane;
  double lane_offset = 0;
  double lane_width = 0;
  double speed_limit = 0;
  OffroadStatus offroad = OffroadStatus::on_road;
  bool wrong_way = false;
};

struct SignalRecord {
  std::string id;
  SignalState state = SignalState::green;
};

struct Snapshot {
  std::int64_t step = 0;
  double time = 0;
  std::vector<ActorRecord> actors;  // sorted by id
  std::vector<SignalRecord> signals;

  const ActorRecord* find(const ActorId& id) const;
};

enum class OutcomeKind { running, goal_reached, terminated, timed_out };

std::string to_string(OutcomeKind k);
OutcomeKind outcome_kind_from_string(const std::string& s);

struct MissionOutcome {
  OutcomeKind kind = OutcomeKind::running;
  std::int64_t step = 0;
  std::string reason;  // collision / full_offroad for terminated

  bool operator==(const MissionOutcome&) const = default;
};

struct MissionInfo {
  ActorId id;
  Vec2 goal = Vec2::Zero();
  double arrival_radius = 2.0;
  std::optional<ActorId> lead;
};

/// Everything the metrics need about one episode.
struct TrajectoryLog {
  std::string scenario_id;
  TaskFamily family = TaskFamily::collaborative;
  double dt = 0.1;
  double time_limit = 60.0;
  std::uint64_t seed = 0;
  nlohmann::json map;  // embedded road network, for rendering
  std::vector<MissionInfo> missions;
  std::vector<Snapshot> snapshots;  // contiguous in step, starting at 0
  std::vector<Event> events;        // ordered by step
  std::vector<std::pair<ActorId, MissionOutcome>> outcomes;

  const MissionOutcome* outcome(const ActorId& id) const;
  std::int64_t limit_steps() const;
};

/// Line-delimited JSON: a header line, then each snapshot followed by its
/// events, then a final outcome line. Every line carries a "type" field.
void write_log(std::ostream& out, const TrajectoryLog& log);
std::string serialize_log(const TrajectoryLog& log);
TrajectoryLog read_log(std::istream& in);
void write_log_file(const std::filesystem::path& path, const TrajectoryLog& log);
TrajectoryLog read_log_file(const std::filesystem::path& path);

/// Structural checks: contiguous snapshots, events reference existing steps.
void validate_log(const TrajectoryLog& log);

}  // namespace dbench
