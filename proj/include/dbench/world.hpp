#pragma once

#include "dbench/agents.hpp"
#include "dbench/scenario.hpp"
#include "dbench/sensors.hpp"
#include "dbench/trajectory_log.hpp"
#include "dbench/v2v.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dbench {

struct ActorSlot {
  ActorRole role = ActorRole::social;
  VehicleState state;
  bool frozen = false;
  std::string frozen_reason;  // collision or full_offroad
};

struct WorldState {
  std::int64_t step = 0;
  double sim_time = 0;
  std::map<ActorId, ActorSlot> actors;
  std::map<std::string, SignalState> signal_phases;
};

/// Mission outcomes at the current step. Resolved outcomes in `previous` are
/// kept; a frozen mission is terminated, one inside its arrival radius has
/// reached the goal, and one still running at the time limit has timed out.
std::map<ActorId, MissionOutcome> check_termination(
    const WorldState& state, const Scenario& scenario,
    const std::map<ActorId, MissionOutcome>& previous = {});

/// True when the heading differs by more than 90 degrees from the travel
/// direction of the nearest lane. Where several lane surfaces overlap (inside
/// junctions), any of them permitting the heading clears the flag.
bool wrong_way_flag(const RoadNetwork& net, const VehicleState& state);

/// Deterministic discrete-time simulation of one scenario. Every step reads
/// the frozen snapshot of the previous step and advances all actors at once.
class World {
 public:
  explicit World(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  const RoadNetwork& network() const { return *scenario_.network; }
  const WorldState& state() const { return state_; }
  const Scene& scene() const { return scene_; }
  std::int64_t step_index() const { return state_.step; }

  /// Missions that still need an action this step.
  std::vector<ActorId> active_missions() const;
  const std::map<ActorId, MissionOutcome>& outcomes() const { return outcomes_; }
  bool done() const;

  /// Full sensor observation for a mission actor.
  Observation observe(const ActorId& mission) const;

  /// Advances one step. Throws UnknownActorError when `actions` names an actor
  /// that is not a mission, and std::invalid_argument when an active mission
  /// has no action. Actions for resolved missions are ignored.
  std::vector<Event> step(const std::map<ActorId, Action>& actions);

  /// Queues a V2V message stamped with the current step.
  SendStatus send(const ActorId& sender, std::string payload,
                  std::optional<ActorId> recipient = std::nullopt);

  const TrajectoryLog& log() const { return log_; }
  /// Log with outcomes filled in.
  TrajectoryLog finish_log() const;

 private:
  struct MissionRuntime {
    const MissionSpec* spec = nullptr;
    RoutePath path;
    double hint = -1;
  };
  struct SocialRuntime {
    const SocialSpec* spec = nullptr;
    std::unique_ptr<ReactiveDriver> driver;
  };

  void spawn_due();
  bool spawn_blocked(const VehicleState& st) const;
  std::vector<Event> evaluate();
  void rebuild_scene();
  void record_snapshot();
  std::map<std::string, Vec2> positions() const;

  Scenario scenario_;
  WorldState state_;
  Scene scene_;
  V2VBus bus_;
  std::map<ActorId, MissionRuntime> missions_;
  std::map<ActorId, SocialRuntime> social_;
  std::unique_ptr<LeadController> lead_;
  std::vector<const SocialSpec*> pending_;
  std::set<ActorId> retiring_;
  std::map<ActorId, MissionOutcome> outcomes_;
  std::map<ActorId, std::vector<V2VMessage>> inbox_;
  std::map<ActorId, ActorRecord> context_;  // lane context at the current step
  TrajectoryLog log_;
};

}  // namespace dbench
