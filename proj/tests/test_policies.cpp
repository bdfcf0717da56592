#include "dbench/errors.hpp"
#include "dbench/generators.hpp"
#include "dbench/policies.hpp"
#include "dbench/runner.hpp"
#include "dbench/world.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

namespace dbench {
namespace {

Scenario road_scenario(Pose start, double speed, double limit = 13.89) {
  Scenario sc;
  sc.id = "policy-road";
  sc.network = test::single_lane(1000.0, limit);
  sc.time_limit = 60;
  MissionSpec m;
  m.id = "ego";
  m.start = start;
  m.speed = speed;
  m.route.lanes = {"road"};
  m.route.goal = Vec2(900, 0);
  sc.missions.push_back(m);
  return sc;
}

TEST(WaypointFollower, AlignsWithLaneOnEmptyRoad) {
  const auto sc = road_scenario({Vec2(10, 1.0), 0.3}, 5);
  World w(sc);
  WaypointFollower policy;
  policy.reset(sc);
  for (int k = 0; k < 50; ++k) w.step({{"ego", policy.act(w.observe("ego"))}});
  const auto obs = w.observe("ego");
  ASSERT_FALSE(obs.waypoints.empty());
  EXPECT_LT(std::abs(normalize_angle(obs.waypoints.front().pose.heading - obs.ego.heading)), 0.05);
}

SceneActor scene_actor(const std::string& id, ActorRole role, const VehicleState& s) {
  return {id, role, s, footprint(s), false};
}

Observation crossing_observation(bool with_crossing) {
  static const auto net = test::single_lane(1000.0, 13.89);
  static const RoutePath path = [] {
    Route r;
    r.lanes = {"road"};
    r.goal = Vec2(900, 0);
    return RoutePath(*net, r);
  }();
  VehicleState ego;
  ego.position = Vec2(0, 0);
  ego.speed = 10;
  std::vector<SceneActor> actors{scene_actor("ego", ActorRole::mission, ego)};
  if (with_crossing) {
    // Reaches the ego's path 20 m ahead in 2 s, when the ego would get there.
    VehicleState x;
    x.position = Vec2(20 + ego.length / 2, -20);
    x.heading = kPi / 2;
    x.speed = 10;
    actors.push_back(scene_actor("crossing", ActorRole::social, x));
  }
  RouteContext ctx;
  ctx.path = &path;
  ctx.goal = Vec2(900, 0);
  return observe(Scene(actors), "ego", *net, ctx, 0.0, SensorConfig{});
}

TEST(WaypointFollower, YieldsToCrossingVehicle) {
  WaypointFollower policy;
  policy.reset(road_scenario({Vec2(0, 0), 0}, 0));
  const auto free = std::get<RelativeTargetPose>(policy.act(crossing_observation(false)));
  const auto blocked = std::get<RelativeTargetPose>(policy.act(crossing_observation(true)));
  ASSERT_EQ(crossing_observation(true).neighbors.size(), 1u);
  EXPECT_LT(std::hypot(blocked.dx, blocked.dy), std::hypot(free.dx, free.dy));
}

TEST(WaypointFollower, AtGoalRequestsNoMotion) {
  auto obs = crossing_observation(false);
  obs.goal = obs.ego.position + Vec2(1.0, 0.5);
  WaypointFollower policy;
  const auto a = std::get<RelativeTargetPose>(policy.act(obs));
  EXPECT_EQ(a.dx, 0.0);
  EXPECT_EQ(a.dy, 0.0);
  EXPECT_EQ(a.dheading, 0.0);
}

TEST(WaypointFollower, CompletesLeftTurn) {
  TurnSuiteParams p;
  p.approaches = {"south"};
  const auto sc = generate_turn_suite(p)[0];
  WaypointFollower policy;
  const auto log = run_scenario(sc, policy);
  EXPECT_EQ(log.outcome("ego_0")->kind, OutcomeKind::goal_reached);
  EXPECT_DOUBLE_EQ(progress_rate({log}), 1.0);
}

Scenario follow_scenario(LeadBehavior b) {
  FollowSuiteParams p;
  p.behaviors = {b};
  return generate_follow_suite(p)[0];
}

TEST(LeadFollower, SteadyTimeGapBehindCruisingLead) {
  auto sc = follow_scenario(LeadBehavior::cruise);
  LeadFollower policy;
  const auto log = run_scenario(sc, policy);
  ASSERT_GT(log.snapshots.size(), 500u);
  for (std::size_t k : {400u, 450u, 500u}) {
    const auto& s = log.snapshots[k];
    const auto* ego = s.find("follower_0");
    const auto* lead = s.find("lead");
    ASSERT_TRUE(ego && lead);
    const double gap = (lead->state.position - ego->state.position).norm() -
                       (ego->state.length + lead->state.length) / 2;
    const double tg = gap / ego->state.speed;
    EXPECT_GE(tg, 1.0) << "step " << k;
    EXPECT_LE(tg, 2.0) << "step " << k;
  }
}

TEST(LeadFollower, StopsBehindHardStoppingLead) {
  auto sc = follow_scenario(LeadBehavior::stop);
  LeadFollower policy;
  const auto log = run_scenario(sc, policy);
  for (const auto& e : log.events) EXPECT_NE(e.kind, EventKind::collision) << "step " << e.step;
  double slowest = 1e9;
  for (const auto& s : log.snapshots)
    if (s.step > 100)
      if (const auto* r = s.find("follower_0")) slowest = std::min(slowest, r->state.speed);
  EXPECT_LT(slowest, 0.5);
}

TEST(LeadFollower, FullBrakeUntilLeadSeen) {
  auto obs = crossing_observation(false);
  obs.follow_target = "lead";
  LeadFollower policy;
  const auto a = std::get<Continuous>(policy.act(obs));
  EXPECT_EQ(a.throttle, 0.0);
  EXPECT_EQ(a.brake, 1.0);
}

TEST(Policies, DeterministicInObservation) {
  const auto obs = crossing_observation(true);
  for (const char* spec : {"waypoint_follower", "waypoint_follower:target_pose",
                           "waypoint_follower:continuous", "zero", "lead_follower"}) {
    auto a = make_builtin_policy(spec);
    auto b = make_builtin_policy(spec);
    EXPECT_EQ(to_json(a->act(obs)), to_json(b->act(obs))) << spec;
  }
}

TEST(Policies, SpecParsing) {
  EXPECT_EQ(make_builtin_policy("zero")->name(), "zero");
  EXPECT_EQ(parse_policy_spec("lead_follower:target_pose").space, ActionSpace::target_pose);
  EXPECT_THROW(make_builtin_policy("teleporter"), UsageError);
  EXPECT_THROW(make_builtin_policy("zero:sideways"), UsageError);
  EXPECT_THROW(make_builtin_policy(""), UsageError);
}

TEST(Policies, ActionJsonRoundTrip) {
  for (const Action& a : {Action(RelativeTargetPose{1.5, -0.25, 0.1}), Action(TargetPose{3, 4, -2}),
                          Action(Continuous{0.3, 0, -0.7})})
    EXPECT_EQ(to_json(action_from_json(to_json(a))), to_json(a));
  EXPECT_THROW(action_from_json({{"space", "warp"}}), ParseError);
  EXPECT_THROW(action_from_json({{"space", "continuous"}, {"throttle", 1}}), ParseError);
}

TEST(Policies, ConvertedPoseActionRealizesModelSpeed) {
  Rng rng(6);
  const DynamicsLimits lim;
  for (int k = 0; k < 500; ++k) {
    VehicleState s;
    s.position = Vec2(rng.uniform(-50, 50), rng.uniform(-50, 50));
    s.heading = rng.uniform(-kPi, kPi);
    s.speed = rng.uniform(0.5, 15);
    const Continuous c{rng.uniform(0, 1), 0, rng.uniform(-0.3, 0.3)};
    const auto want = step_continuous(s, c, lim, 0.1);
    for (auto space : {ActionSpace::target_pose, ActionSpace::relative_target_pose}) {
      const auto got = step_action(s, convert_action(c, s, space, lim, 0.1), lim, 0.1);
      ASSERT_NEAR(got.speed, want.speed, 1e-9) << k;
      ASSERT_NEAR(normalize_angle(got.heading - want.heading), 0.0, 1e-9) << k;
    }
  }
}

}  // namespace
}  // namespace dbench
