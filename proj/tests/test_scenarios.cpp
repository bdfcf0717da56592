#include "dbench/errors.hpp"
#include "dbench/generators.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <deque>
#include <set>

namespace dbench {
namespace {

// Heading change from the approach lane to the exit lane.
double turn_angle(const RoadNetwork& net, const std::vector<LaneId>& route) {
  const auto& in = net.lane(route.front()).centerline;
  const auto& out = net.lane(route.back()).centerline;
  return normalize_angle(out.heading_at(0) - in.heading_at(in.length()));
}

TEST(TurnSuite, SingleLeftTurnNoTraffic) {
  TurnSuiteParams p;
  p.junction = JunctionKind::four_way;
  p.turn = TurnKind::left;
  p.density = Density::none;
  p.missions = 1;
  p.approaches = {"south"};
  const auto suite = generate_turn_suite(p);
  ASSERT_EQ(suite.size(), 1u);
  const auto& sc = suite[0];
  ASSERT_EQ(sc.missions.size(), 1u);
  EXPECT_TRUE(sc.social.empty());
  const auto& lanes = sc.missions[0].route.lanes;
  ASSERT_EQ(lanes.size(), 3u);
  EXPECT_EQ(lanes[0], "south_in");
  EXPECT_EQ(lanes[2], "west_out");
  // A left turn bends counter-clockwise by a quarter turn.
  EXPECT_NEAR(turn_angle(*sc.network, lanes), kPi / 2, 1e-9);
}

TEST(TurnSuite, EveryArmWhenApproachesUnset) {
  TurnSuiteParams p;
  EXPECT_EQ(generate_turn_suite(p).size(), 4u);
  p.junction = JunctionKind::t_junction;
  for (const auto& sc : generate_turn_suite(p))
    for (const auto& m : sc.missions)
      EXPECT_NEAR(turn_angle(*sc.network, m.route.lanes), kPi / 2, 1e-9) << sc.id;
}

TEST(TurnSuite, UnsupportedTurnThrows) {
  TurnSuiteParams p;
  p.junction = JunctionKind::t_junction;
  p.turn = TurnKind::straight;
  p.approaches = {"south"};
  EXPECT_THROW(generate_turn_suite(p), ValidationError);
}

TEST(TurnSuite, HigherDensitySpawnsMore) {
  TurnSuiteParams p;
  p.seed = 42;
  p.approaches = {"south"};
  p.density = Density::low;
  const auto low = generate_turn_suite(p)[0].social.size();
  p.density = Density::high;
  const auto high = generate_turn_suite(p)[0].social.size();
  EXPECT_GT(high, low);
}

TEST(TurnSuite, DensityOrderingOverSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::size_t prev = 0;
    for (Density d : {Density::none, Density::low, Density::medium, Density::high}) {
      const auto n = poisson_spawn_times(seed, d, 60.0).size();
      EXPECT_GE(n, prev) << "seed " << seed << " density " << to_string(d);
      prev = n;
    }
    EXPECT_GT(poisson_spawn_times(seed, Density::high, 60.0).size(),
              poisson_spawn_times(seed, Density::low, 60.0).size())
        << "seed " << seed;
  }
}

TEST(TurnSuite, SpawnRateMatchesHeadway) {
  // Mean count of a Poisson process over 600 s at a 4 s headway is 150.
  double total = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    total += double(poisson_spawn_times(seed, Density::medium, 600.0).size());
  EXPECT_NEAR(total / 200, 150.0, 3.0);
}

TEST(TurnSuite, SignalizedVariantHasSignals) {
  EXPECT_TRUE(junction_map(JunctionKind::four_way).signals().empty());
  const auto net = junction_map(JunctionKind::signalized);
  EXPECT_EQ(net.signals().size(), 4u);
  for (const auto& s : net.signals()) EXPECT_TRUE(net.has_lane(s.lane)) << s.id;
}

TEST(FollowSuite, SimplestCaseHasLeadAndOneFollower) {
  FollowSuiteParams p;
  p.behaviors = {LeadBehavior::cruise};
  const auto suite = generate_follow_suite(p);
  ASSERT_EQ(suite.size(), 1u);
  const auto& sc = suite[0];
  EXPECT_EQ(sc.family, TaskFamily::adaptive);
  ASSERT_TRUE(sc.lead.has_value());
  EXPECT_EQ(sc.missions.size() + 1 + sc.social.size(), 2u);
  EXPECT_EQ(sc.missions[0].follow, std::optional<ActorId>(sc.lead->id));
  EXPECT_LT(sc.missions[0].start.position.x(), sc.lead->start.position.x());
}

TEST(FollowSuite, MergeScriptContainsMerge) {
  FollowSuiteParams p;
  p.behaviors = {LeadBehavior::merge};
  const auto sc = generate_follow_suite(p)[0];
  int merges = 0;
  for (const auto& seg : sc.lead->script.segments)
    if (seg.behavior == LeadBehavior::merge) {
      ++merges;
      const Lane& from = sc.network->lane(sc.lead->script.route.front());
      EXPECT_TRUE(from.left == seg.lane || from.right == seg.lane);
    }
  EXPECT_EQ(merges, 1);
}

std::set<LaneId> reachable(const RoadNetwork& net, const LaneId& from) {
  std::set<LaneId> seen{from};
  std::deque<LaneId> queue{from};
  while (!queue.empty()) {
    const auto l = queue.front();
    queue.pop_front();
    for (const auto& s : net.lane(l).successors)
      if (seen.insert(s).second) queue.push_back(s);
  }
  return seen;
}

TEST(FollowSuite, AmbiguityPutsLeadOnForkingLane) {
  FollowSuiteParams p;
  p.behaviors = {LeadBehavior::cruise};
  p.ambiguity = true;
  const auto sc = generate_follow_suite(p)[0];
  const auto& start = sc.network->lane(sc.lead->script.route.front());
  ASSERT_GE(start.successors.size(), 2u);
  const auto from_lead = reachable(*sc.network, start.id);
  for (const auto& s : start.successors) EXPECT_TRUE(from_lead.count(s)) << s;
  // The follower starts on the same lane, so it can reach both branches too.
  const auto q = nearest_lane(*sc.network, sc.missions[0].start.position);
  EXPECT_EQ(q.lane, start.id);
}

TEST(Generators, PureFunctionOfParameters) {
  const auto a = generate_suite(test::read_fixture("turn_suite.json"));
  const auto b = generate_suite(test::read_fixture("turn_suite.json"));
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  FollowSuiteParams p;
  p.density = Density::high;
  p.seed = 5;
  const auto x = generate_follow_suite(p), y = generate_follow_suite(p);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(to_json(x[i]).dump(), to_json(y[i]).dump());
}

TEST(Generators, EveryGeneratedScenarioValidates) {
  Rng rng(12);
  const JunctionKind kinds[] = {JunctionKind::four_way, JunctionKind::t_junction,
                                JunctionKind::signalized};
  const TurnKind turns[] = {TurnKind::left, TurnKind::right, TurnKind::straight};
  const Density densities[] = {Density::none, Density::low, Density::medium, Density::high};
  for (int k = 0; k < 30; ++k) {
    TurnSuiteParams p;
    p.junction = kinds[rng.below(3)];
    p.turn = turns[rng.below(3)];
    p.density = densities[rng.below(4)];
    p.missions = 1 + int(rng.below(5));
    p.seed = rng.below(1000000);
    std::vector<Scenario> suite;
    try {
      suite = generate_turn_suite(p);
    } catch (const ValidationError&) {
      EXPECT_EQ(p.junction, JunctionKind::t_junction);
      continue;
    }
    for (const auto& sc : suite) {
      EXPECT_NO_THROW(validate(sc)) << sc.id;
      EXPECT_EQ(int(sc.missions.size()), p.missions);
    }
  }
  for (int k = 0; k < 10; ++k) {
    FollowSuiteParams p;
    p.density = densities[rng.below(4)];
    p.ambiguity = rng.uniform() < 0.5;
    p.seed = rng.below(1000000);
    p.offsets = {15.0, 25.0};
    for (const auto& sc : generate_follow_suite(p)) EXPECT_NO_THROW(validate(sc)) << sc.id;
  }
}

TEST(ScenarioJson, RoundTrip) {
  FollowSuiteParams p;
  p.density = Density::medium;
  for (const auto& sc : generate_follow_suite(p)) {
    const auto j = to_json(sc);
    EXPECT_EQ(to_json(scenario_from_json(j)).dump(), j.dump()) << sc.id;
  }
  const auto m = load_manifest(test::fixture("suite_straight.json"));
  EXPECT_EQ(to_json(manifest_from_json(to_json(m))).dump(), to_json(m).dump());
}

TEST(ScenarioJson, ManifestFixtureLoads) {
  const auto m = load_manifest(test::fixture("suite_straight.json"));
  EXPECT_EQ(m.name, "straight");
  ASSERT_EQ(m.scenarios.size(), 1u);
  EXPECT_EQ(m.scenarios[0].missions[0].route.goal, Vec2(80, -1.75));
  EXPECT_EQ(m.scenarios[0].limit_steps(), 200);
}

TEST(ScenarioJson, MalformedManifestNamesField) {
  try {
    load_manifest(test::fixture("bad_manifest.json"));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("missions"), std::string::npos) << e.what();
  }
}

TEST(ScenarioJson, MissingMapNamed) {
  auto j = test::read_fixture("suite_straight.json");
  j["scenarios"][0].erase("map");
  try {
    manifest_from_json(j, test::fixture(""));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("'map'"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace dbench
