#include "dbench/errors.hpp"
#include "dbench/metrics.hpp"
#include "log_generators.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace dbench {
namespace {

using test::follow_log;
using test::set_outcome;
using test::straight_log;
using test::synthetic_log;

TEST(ProgressRate, Extremes) {
  EXPECT_DOUBLE_EQ(progress_rate({straight_log(100)}), 1.0);
  EXPECT_DOUBLE_EQ(progress_rate({straight_log(0)}), 0.0);
  // Ends 120 m from a goal that started 100 m away.
  EXPECT_DOUBLE_EQ(progress_rate({straight_log(-20)}), 0.0);
}

TEST(ProgressRate, GoalReachedCountsAsZeroDistance) {
  auto log = straight_log(99);
  set_outcome(log, OutcomeKind::goal_reached, 10);
  EXPECT_DOUBLE_EQ(progress_rate({log}), 1.0);
}

TEST(ProgressRate, AveragesScenarios) {
  // Remaining-distance ratios 0.2 and 0.6.
  EXPECT_NEAR(progress_rate({straight_log(80), straight_log(40)}), 0.6, 1e-12);
}

TEST(Humanness, PerfectCenterlineDriving) {
  const auto log = synthetic_log(50, 0.1, 10, Vec2(100, 0), [](std::int64_t k, ActorRecord& r) {
    r.state.position = Vec2(double(k), 0);
    r.state.acceleration = Vec2(1.0, 0.5);
    r.state.jerk = Vec2(0.5, -0.5);
  });
  EXPECT_DOUBLE_EQ(humanness({log}, MetricConfig{}), 1.0);
}

TEST(Humanness, FullOffroadAndUncomfortableWithNoWindowIsZero) {
  MetricConfig c;
  c.penalty_period = 0;
  const auto log = synthetic_log(50, 0.1, 10, Vec2(100, 0), [](std::int64_t k, ActorRecord& r) {
    r.state.position = Vec2(double(k), 30);
    r.state.jerk = Vec2(5, 0);
    r.offroad = OffroadStatus::full_offroad;
  });
  EXPECT_DOUBLE_EQ(humanness({log}, c), 0.0);
}

TEST(Humanness, SingleSpikeGivesTenthComfortPenalty) {
  // 10 s of travel at dt 0.1 with one spike at t = 5 s and a 1 s window:
  // the spike step plus 10 trailing windows are uncomfortable, 11 of 110.
  const auto log = synthetic_log(100, 0.1, 20, Vec2(200, 0), [](std::int64_t k, ActorRecord& r) {
    r.state.position = Vec2(double(k), 0);
    if (k == 50) r.state.jerk = Vec2(2.0, 0);
  });
  const auto s = score_scenario(log, MetricConfig{});
  EXPECT_NEAR(s.agents[0].comfort_penalty, 0.1, 1e-12);
  EXPECT_NEAR(s.humanness, 0.95, 1e-12);
  EXPECT_NEAR(humanness({log}, MetricConfig{}), 0.95, 1e-12);
}

TEST(Humanness, LaneOffsetClampsAtOne) {
  const auto log = synthetic_log(10, 0.1, 10, Vec2(100, 0), [](std::int64_t k, ActorRecord& r) {
    r.state.position = Vec2(double(k), 0);
    r.lane_offset = k % 2 ? 0.875 : 9.0;  // half-lane 1.75: ratio 0.5, clamped 1
  });
  const auto s = score_scenario(log, MetricConfig{});
  // Scored steps 1..10: five odd (0.5) and five even (1.0).
  EXPECT_NEAR(s.agents[0].lane_offset, 0.75, 1e-12);
}

TEST(RuleCompliance, Extremes) {
  const auto clean = synthetic_log(20, 0.1, 10, Vec2(100, 0), [](std::int64_t k, ActorRecord& r) {
    r.state.position = Vec2(double(k), 0);
    r.state.speed = 9.99;
  });
  EXPECT_DOUBLE_EQ(rule_compliance({clean}), 1.0);
  const auto speeding = synthetic_log(20, 0.1, 10, Vec2(100, 0), [](std::int64_t k, ActorRecord& r) {
    r.state.position = Vec2(double(k), 0);
    r.state.speed = 15.0;
  });
  EXPECT_NEAR(rule_compliance({speeding}), 2.0 / 3.0, 1e-9);
  const auto all = synthetic_log(20, 0.1, 10, Vec2(100, 0), [](std::int64_t k, ActorRecord& r) {
    r.state.position = Vec2(double(k), 0);
    r.state.speed = 30.0;
    r.wrong_way = true;
    r.offroad = OffroadStatus::partial_offroad;
  });
  EXPECT_DOUBLE_EQ(rule_compliance({all}), 0.0);
}

TEST(RuleCompliance, HandComputedMix) {
  // Steps 1..10 scored. Speed 12 on steps 1-4 (term 0.4 each), wrong way on
  // steps 5-6, partial offroad on step 10.
  const auto log = synthetic_log(10, 0.1, 10, Vec2(100, 0), [](std::int64_t k, ActorRecord& r) {
    r.state.position = Vec2(double(k), 0);
    r.state.speed = k >= 1 && k <= 4 ? 12.0 : 5.0;
    r.wrong_way = k == 5 || k == 6;
    if (k == 10) r.offroad = OffroadStatus::partial_offroad;
  });
  const double want = 1.0 - (1.6 / 10 + 2.0 / 10 + 1.0 / 10) / 3.0;
  EXPECT_NEAR(rule_compliance({log}), want, 1e-12);
}

TEST(MissionTimeEfficiency, Extremes) {
  auto log = straight_log(100);
  set_outcome(log, OutcomeKind::goal_reached, 0);
  EXPECT_DOUBLE_EQ(mission_time_efficiency({log}), 1.0);
  set_outcome(log, OutcomeKind::timed_out, 10);
  EXPECT_DOUBLE_EQ(mission_time_efficiency({log}), 0.0);
  set_outcome(log, OutcomeKind::terminated, 3);
  EXPECT_DOUBLE_EQ(mission_time_efficiency({log}), 0.0);
}

TEST(MissionTimeEfficiency, HalfTimeArrival) {
  auto log = synthetic_log(100, 0.1, 10, Vec2(50, 0), [](std::int64_t k, ActorRecord& r) {
    r.state.position = Vec2(double(k), 0);
  });
  set_outcome(log, OutcomeKind::goal_reached, 50);
  EXPECT_NEAR(mission_time_efficiency({log}), 0.5, 1e-9);
}

TEST(SafeFollowingDistance, Extremes) {
  const MetricConfig c;
  EXPECT_DOUBLE_EQ(safe_following_distance({follow_log(35.5, 10)}, c), 1.0);
  EXPECT_DOUBLE_EQ(safe_following_distance({follow_log(40, 10)}, c), 0.0);
  // Far behind: the time gap exceeds t_max.
  EXPECT_DOUBLE_EQ(safe_following_distance({follow_log(-20, 10)}, c), 0.0);
}

TEST(SafeFollowingDistance, HalfMaxTimeGap) {
  // 15 m behind the boundary at 10 m/s is 1.5 s, half of t_max.
  EXPECT_NEAR(safe_following_distance({follow_log(20.5, 10)}, MetricConfig{}), 0.5, 1e-9);
}

TEST(SafeFollowingDistance, MissingLeadIsMalformed) {
  auto log = follow_log(20.5, 10);
  log.missions[0].lead.reset();
  EXPECT_THROW(safe_following_distance({log}, MetricConfig{}), MalformedLogError);
}

struct Row {
  const char* name;
  double pr, rc, h, task, s_bench;
};

TEST(Combine, PublishedRows) {
  const Row rows[] = {{"AID", .895, .776, .618, .221, .598},  {"VCR", .958, .789, .532, .195, .589},
                      {"Drive", .715, .669, .917, .178, .564}, {"TF", .956, .744, .620, .130, .562},
                      {"Platoon-rtp", .438, .855, .902, .361, .672},
                      {"Platoon-c", .671, .917, .444, .182, .601},
                      {"VCR-adaptive", .822, .708, .546, .050, .498},
                      {"AID-adaptive", .802, .695, .759, .070, .528},
                      {"TF-adaptive", .773, .711, .727, .010, .509}};
  for (const auto& r : rows)
    EXPECT_NEAR(combine(r.pr, r.rc, r.h, r.task, MetricWeights{}), r.s_bench, 1e-3) << r.name;
  EXPECT_DOUBLE_EQ(combine(1, 1, 1, 1, MetricWeights{}), 1.0);
}

TEST(Combine, NormalizesWeights) {
  MetricWeights w{1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(combine(0.2, 0.4, 0.6, 0.8, w), 0.5);
  w = {0, 0, 0, 0};
  EXPECT_THROW(combine(1, 1, 1, 1, w), ValidationError);
}

TEST(Evaluate, EmptyListIsUsageError) {
  EXPECT_THROW(evaluate({}, MetricConfig{}), UsageError);
}

TEST(Evaluate, MixedFamiliesRejected) {
  Rng rng(1);
  EXPECT_THROW(evaluate({test::random_log(rng, TaskFamily::collaborative),
                         test::random_log(rng, TaskFamily::adaptive)},
                        MetricConfig{}),
               MalformedLogError);
}

TEST(Fuzz, MetricsStayInUnitInterval) {
  Rng rng(2024);
  const MetricConfig c;
  for (int k = 0; k < 300; ++k) {
    const auto family = k % 2 ? TaskFamily::adaptive : TaskFamily::collaborative;
    const auto log = test::random_log(rng, family);
    const auto r = evaluate({log}, c);
    for (double v : {r.progress, r.rule_compliance, r.humanness, r.task, r.s_bench}) {
      ASSERT_GE(v, 0.0) << "log " << k;
      ASSERT_LE(v, 1.0) << "log " << k;
    }
  }
}

TEST(Monotone, ExtraSpeedViolationNeverRaisesRuleCompliance) {
  Rng rng(41);
  for (int k = 0; k < 200; ++k) {
    auto log = test::random_log(rng, TaskFamily::collaborative);
    const double before = rule_compliance({log});
    auto& r = log.snapshots[1 + rng.below(log.snapshots.size() - 1)].actors[0];
    r.state.speed = std::max(r.state.speed, r.speed_limit * 1.3);
    ASSERT_LE(rule_compliance({log}), before + 1e-12) << "log " << k;
  }
}

TEST(Monotone, CloserFinalPositionNeverLowersProgress) {
  Rng rng(42);
  for (int k = 0; k < 200; ++k) {
    auto log = test::random_log(rng, TaskFamily::collaborative);
    log.outcomes.clear();  // every track ends at the last snapshot
    const double before = progress_rate({log});
    auto& r = log.snapshots.back().actors[0];
    const Vec2 goal = log.missions[0].goal;
    r.state.position += rng.uniform(0, 1) * (goal - r.state.position);
    ASSERT_GE(progress_rate({log}), before - 1e-12) << "log " << k;
  }
}

TEST(Monotone, ExtraSpikeNeverRaisesHumanness) {
  Rng rng(43);
  const MetricConfig c;
  for (int k = 0; k < 200; ++k) {
    auto log = test::random_log(rng, TaskFamily::collaborative);
    log.outcomes.clear();
    const double before = humanness({log}, c);
    log.snapshots[rng.below(log.snapshots.size())].actors[0].state.jerk = Vec2(10, 0);
    ASSERT_LE(humanness({log}, c), before + 1e-12) << "log " << k;
  }
}

TEST(Monotone, LaterArrivalNeverRaisesMte) {
  Rng rng(44);
  for (int k = 0; k < 200; ++k) {
    auto log = test::random_log(rng, TaskFamily::collaborative);
    const std::int64_t last = log.snapshots.back().step;
    auto& o = log.outcomes[0].second;
    o.kind = OutcomeKind::goal_reached;
    o.step = std::int64_t(rng.below(std::uint64_t(last) + 1));
    const double before = mission_time_efficiency({log});
    o.step = std::min(last, o.step + 1 + std::int64_t(rng.below(10)));
    ASSERT_LE(mission_time_efficiency({log}), before + 1e-12) << "log " << k;
  }
}

TEST(Monotone, LongerTimeGapNeverRaisesSfd) {
  Rng rng(45);
  const MetricConfig c;
  int exercised = 0;
  for (int k = 0; k < 200; ++k) {
    auto log = follow_log(rng.uniform(24, 35), rng.uniform(5, 15));
    const double before = safe_following_distance({log}, c);
    auto& ego = log.snapshots[1 + rng.below(log.snapshots.size() - 1)].actors[0];
    ASSERT_EQ(ego.id, "ego");
    // Back off without leaving (0, t_max).
    const double tg = (45.5 - ego.state.position.x() - 10.0) / ego.state.speed;
    const double room = (c.t_max - tg) * ego.state.speed;
    if (room > 1e-6) {
      ego.state.position.x() -= rng.uniform(0, room * 0.99);
      ++exercised;
    }
    ASSERT_LE(safe_following_distance({log}, c), before + 1e-12) << "log " << k;
  }
  EXPECT_GT(exercised, 150);
}

TEST(Evaluate, InvariantUnderReserialization) {
  Rng rng(46);
  const MetricConfig c;
  for (int k = 0; k < 50; ++k) {
    const auto log = test::random_log(rng, k % 2 ? TaskFamily::adaptive : TaskFamily::collaborative);
    std::istringstream in(serialize_log(log));
    const auto again = read_log(in);
    EXPECT_EQ(to_json(evaluate({again}, c)).dump(), to_json(evaluate({log}, c)).dump()) << k;
  }
}

TEST(MetricConfig, JsonRoundTripAndValidation) {
  MetricConfig c;
  c.t_max = 4;
  EXPECT_EQ(to_json(metric_config_from_json(to_json(c))), to_json(c));
  auto j = to_json(c);
  j["weights"]["PR"] = 0.5;
  EXPECT_THROW(metric_config_from_json(j), ValidationError);
}

TEST(Report, CsvHasSuiteRow) {
  const auto r = evaluate({straight_log(50)}, MetricConfig{});
  const auto csv = to_csv(r, "zero");
  EXPECT_EQ(csv.rfind("Model,Scenario,PR,RC,Humanness,MTE,S_bench\n", 0), 0u);
  EXPECT_NE(csv.find("zero,all,"), std::string::npos);
  const auto j = to_json(r);
  EXPECT_EQ(j["metrics"].size(), 5u);
}

}  // namespace
}  // namespace dbench
