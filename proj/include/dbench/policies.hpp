#pragma once

#include "dbench/agents.hpp"
#include "dbench/dynamics.hpp"
#include "dbench/scenario.hpp"
#include "dbench/sensors.hpp"

#include <nlohmann/json.hpp>

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace dbench {

nlohmann::json to_json(const Action& a);
/// Throws ParseError for unknown spaces or missing fields.
Action action_from_json(const nlohmann::json& j);

/// Controller for every mission actor of a scenario.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  /// Clears per-episode state before a scenario starts.
  virtual void reset(const Scenario& scenario);
  virtual Action act(const Observation& obs) = 0;

 protected:
  DynamicsLimits limits_;
  double dt_ = 0.1;
};

/// Expresses a throttle/brake/steer command in another action space by
/// integrating one step of the vehicle model. The pose is placed so that the
/// realized speed equals the model's end-of-step speed.
Action convert_action(const Continuous& c, const VehicleState& ego, ActionSpace space,
                      const DynamicsLimits& limits, double dt);

/// Route tracking with IDM speed control and pure-pursuit steering. Requests
/// no motion once inside the arrival radius.
class WaypointFollower : public Policy {
 public:
  explicit WaypointFollower(ActionSpace space = ActionSpace::relative_target_pose) : space_(space) {}
  std::string name() const override { return "waypoint_follower"; }
  Action act(const Observation& obs) override;

 private:
  ActionSpace space_;
};

/// Follows the observation's follow target along the trail of positions it
/// has driven, keeping an IDM gap behind it. Holds full brake until the
/// target has been seen.
class LeadFollower : public Policy {
 public:
  explicit LeadFollower(ActionSpace space = ActionSpace::continuous) : space_(space) {}
  std::string name() const override { return "lead_follower"; }
  void reset(const Scenario& scenario) override;
  Action act(const Observation& obs) override;

  IdmParams idm{.time_headway = 1.1, .min_gap = 2.5};

 private:
  struct Memory {
    std::deque<Vec2> trail;
    std::optional<VehicleState> last_seen;
  };
  ActionSpace space_;
  std::map<ActorId, Memory> memory_;
};

/// Requests no motion: a zero displacement, the current pose, or coasting.
class ZeroPolicy : public Policy {
 public:
  explicit ZeroPolicy(ActionSpace space = ActionSpace::relative_target_pose) : space_(space) {}
  std::string name() const override { return "zero"; }
  Action act(const Observation& obs) override;

 private:
  ActionSpace space_;
};

struct PolicySpec {
  std::string name;
  std::optional<ActionSpace> space;
};

/// Parses "name[:action-space]". Throws UsageError on an empty name or unknown space.
PolicySpec parse_policy_spec(const std::string& spec);

/// Builtin policies: waypoint_follower, lead_follower, zero. Throws UsageError otherwise.
std::unique_ptr<Policy> make_builtin_policy(const std::string& spec);

}  // namespace dbench
