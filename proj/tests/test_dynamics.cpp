#include "dbench/dynamics.hpp"
#include "dbench/random.hpp"

#include <gtest/gtest.h>

namespace dbench {
namespace {

VehicleState at_speed(double speed, double heading = 0) {
  VehicleState s;
  s.speed = speed;
  s.heading = heading;
  return s;
}

TEST(StepContinuous, CoastingAdvancesAlongHeading) {
  const auto next = step_continuous(at_speed(10), Continuous{0, 0, 0}, DynamicsLimits{}, 0.1);
  EXPECT_NEAR(next.position.x(), 1.0, 1e-12);
  EXPECT_NEAR(next.position.y(), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(next.heading, 0.0);
  EXPECT_EQ(next.step, 1);
}

TEST(StepContinuous, BrakingAtRestNeverReverses) {
  VehicleState s;
  for (int k = 0; k < 20; ++k) s = step_continuous(s, Continuous{0, 1, 0}, DynamicsLimits{}, 0.1);
  EXPECT_DOUBLE_EQ(s.speed, 0.0);
  EXPECT_DOUBLE_EQ(s.position.norm(), 0.0);
}

// Circle through three points.
double circumradius(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double ab = (b - a).norm(), bc = (c - b).norm(), ca = (a - c).norm();
  const double area2 = std::abs(cross(Vec2(b - a), Vec2(c - a)));
  return ab * bc * ca / (2 * area2);
}

TEST(StepContinuous, ConstantSteeringTracesBicycleCircle) {
  const DynamicsLimits lim;
  VehicleState s = at_speed(5);
  std::vector<Vec2> pts{s.position};
  for (int k = 0; k < 300; ++k) {
    s = step_continuous(s, Continuous{0, 0, 0.5}, lim, 0.1);
    pts.push_back(s.position);
  }
  const double expected = lim.wheelbase / std::tan(0.5 * lim.max_steer_angle);
  const double r = circumradius(pts[0], pts[100], pts[200]);
  EXPECT_NEAR(r / expected, 1.0, 0.01);
  EXPECT_NEAR(circumradius(pts[37], pts[151], pts[280]) / expected, 1.0, 0.01);
}

TEST(StepContinuous, RejectsBadDt) {
  EXPECT_THROW(step_continuous(VehicleState{}, Continuous{}, DynamicsLimits{}, 0.0),
               std::invalid_argument);
  EXPECT_THROW(step_continuous(VehicleState{}, Continuous{}, DynamicsLimits{}, 0.6),
               std::invalid_argument);
}

TEST(StepPose, ZeroActionKeepsPose) {
  VehicleState s = at_speed(0, 0.3);
  s.position = Vec2(4, 5);
  const auto next = step_pose(s, RelativeTargetPose{0, 0, 0}, DynamicsLimits{}, 0.1);
  EXPECT_EQ(next.position, s.position);
  EXPECT_EQ(next.heading, s.heading);
  EXPECT_EQ(next.step, 1);
}

TEST(StepPose, DisplacementIsClamped) {
  DynamicsLimits lim;
  lim.max_speed = 20;
  const auto next = step_pose(at_speed(0), RelativeTargetPose{100, 0, 0}, lim, 0.1);
  EXPECT_NEAR(next.position.x(), 2.0, 1e-12);
  EXPECT_NEAR(next.position.y(), 0.0, 1e-12);
  const auto diag = step_pose(at_speed(0), RelativeTargetPose{30, 40, 0}, lim, 0.1);
  EXPECT_NEAR(diag.position.norm(), 2.0, 1e-12);
  EXPECT_NEAR(diag.position.y() / diag.position.x(), 40.0 / 30.0, 1e-12);
}

TEST(StepPose, TargetMatchesRelative) {
  DynamicsLimits lim;
  lim.max_speed = 20;
  VehicleState s = at_speed(0);
  const auto a = step_pose(s, TargetPose{1, 0, 0}, lim, 0.1);
  const auto b = step_pose(s, RelativeTargetPose{1, 0, 0}, lim, 0.1);
  EXPECT_EQ(a.position, b.position);
  EXPECT_EQ(a.heading, b.heading);
  EXPECT_EQ(a.speed, b.speed);
}

TEST(StepPose, TargetEqualsRelativeBitExactRandom) {
  Rng rng(17);
  const DynamicsLimits lim;
  for (int k = 0; k < 2000; ++k) {
    VehicleState s = at_speed(rng.uniform(0, 20), rng.uniform(-kPi, kPi));
    s.position = Vec2(rng.uniform(-500, 500), rng.uniform(-500, 500));
    const TargetPose t{s.position.x() + rng.uniform(-5, 5), s.position.y() + rng.uniform(-5, 5),
                       rng.uniform(-kPi, kPi)};
    const auto a = step_pose(s, t, lim, 0.1);
    const auto b = step_pose(s, to_relative(s, t), lim, 0.1);
    ASSERT_EQ(a.position, b.position);
    ASSERT_EQ(a.heading, b.heading);
    ASSERT_EQ(a.acceleration, b.acceleration);
    ASSERT_EQ(a.jerk, b.jerk);
  }
}

TEST(StepAction, DisplacementNeverExceedsSpeedCap) {
  Rng rng(23);
  const DynamicsLimits lim;
  for (int k = 0; k < 3000; ++k) {
    VehicleState s = at_speed(rng.uniform(0, 40), rng.uniform(-kPi, kPi));
    const double dt = rng.uniform(0.01, 0.5);
    Action a;
    switch (k % 3) {
      case 0: a = RelativeTargetPose{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-4, 4)}; break;
      case 1: a = TargetPose{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-4, 4)}; break;
      default: a = Continuous{rng.uniform(-1, 2), rng.uniform(-1, 2), rng.uniform(-2, 2)};
    }
    const auto next = step_action(s, a, lim, dt);
    ASSERT_LE((next.position - s.position).norm(), lim.max_speed * dt + 1e-9) << "case " << k;
  }
}

TEST(StepContinuous, JerkIsAccelerationDifference) {
  const DynamicsLimits lim;
  VehicleState s = at_speed(2);
  const double dt = 0.1;
  for (int k = 0; k < 40; ++k) {
    const double throttle = 0.02 * k;  // linear ramp in commanded acceleration
    const auto next = step_continuous(s, Continuous{throttle, 0, 0}, lim, dt);
    const double want = (next.acceleration.x() - s.acceleration.x()) / dt;
    EXPECT_NEAR(next.jerk.x(), want, 1e-6) << "step " << k;
    if (k > 0) {
      EXPECT_NEAR(next.jerk.x(), 0.02 * lim.max_accel / dt, 1e-6);
    }
    s = next;
  }
}

TEST(Footprint, AxisAlignedCorners) {
  VehicleState s;
  s.length = 4;
  s.width = 2;
  const auto c = footprint(s).corners();
  EXPECT_EQ(c[0], Vec2(2, 1));
  EXPECT_EQ(c[1], Vec2(-2, 1));
  EXPECT_EQ(c[2], Vec2(-2, -1));
  EXPECT_EQ(c[3], Vec2(2, -1));
}

TEST(Footprint, QuarterTurnSwapsExtents) {
  VehicleState s;
  s.length = 4;
  s.width = 2;
  s.heading = kPi / 2;
  const auto c = footprint(s).corners();
  EXPECT_NEAR(c[0].x(), -1, 1e-12);
  EXPECT_NEAR(c[0].y(), 2, 1e-12);
  EXPECT_NEAR(c[2].x(), 1, 1e-12);
  EXPECT_NEAR(c[2].y(), -2, 1e-12);
}

TEST(Footprint, DiagonalMatchesRotationMatrix) {
  VehicleState s;
  s.length = 4;
  s.width = 2;
  s.heading = kPi / 4;
  s.position = Vec2(3, -1);
  const double c = std::cos(kPi / 4), sn = std::sin(kPi / 4);
  const std::array<Vec2, 4> local = {Vec2(2, 1), Vec2(-2, 1), Vec2(-2, -1), Vec2(2, -1)};
  const auto got = footprint(s).corners();
  for (int i = 0; i < 4; ++i) {
    const Vec2 want(3 + c * local[i].x() - sn * local[i].y(), -1 + sn * local[i].x() + c * local[i].y());
    EXPECT_NEAR((got[i] - want).norm(), 0.0, 1e-12);
  }
}

TEST(Actions, SpaceNames) {
  for (auto s : {ActionSpace::relative_target_pose, ActionSpace::target_pose, ActionSpace::continuous})
    EXPECT_EQ(action_space_from_string(to_string(s)), s);
  EXPECT_THROW(action_space_from_string("teleport"), std::invalid_argument);
}

}  // namespace
}  // namespace dbench
