#include "dbench/errors.hpp"
#include "dbench/map.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

namespace dbench {
namespace {

using test::fixture;
using test::read_fixture;

TEST(Fixtures, TwoLaneStraightHasTwoLanesOneEdge) {
  const auto net = load_map(fixture("two_lane_straight.json"));
  EXPECT_EQ(net.lanes().size(), 2u);
  EXPECT_EQ(net.edges().size(), 1u);
  EXPECT_EQ(net.junctions().size(), 0u);
  EXPECT_EQ(net.lane("a_0").left, std::optional<LaneId>("a_1"));
}

TEST(Fixtures, FourWayCounts) {
  // Oracle: count straight from the file, independent of the loader.
  const auto raw = read_fixture("four_way.json");
  std::set<std::string> edge_lanes;
  for (const auto& e : raw["edges"])
    for (const auto& l : e["lanes"]) edge_lanes.insert(l.get<std::string>());
  int loose = 0;
  for (const auto& l : raw["lanes"])
    if (!edge_lanes.count(l["id"].get<std::string>())) ++loose;
  EXPECT_EQ(loose, 12);

  const auto net = load_map(fixture("four_way.json"));
  ASSERT_EQ(net.junctions().size(), 1u);
  const auto& j = net.junctions()[0];
  EXPECT_EQ(j.incoming.size(), 4u);
  EXPECT_EQ(j.outgoing.size(), 4u);
  EXPECT_EQ(j.connections.size(), std::size_t(loose));
  for (const auto& c : j.connections) EXPECT_EQ(net.lane(c).junction, "center");
}

TEST(Fixtures, MissingSuccessorNamesLane) {
  try {
    load_map(fixture("bad_successor.json"));
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("a_0"), std::string::npos) << e.what();
  }
}

TEST(Map, JsonRoundTrip) {
  const auto net = load_map(fixture("four_way.json"));
  const auto again = RoadNetwork::from_json(net.to_json());
  EXPECT_EQ(again.to_json(), net.to_json());
}

TEST(NearestLane, OnCenterlineHasZeroOffset) {
  const auto net = load_map(fixture("two_lane_straight.json"));
  const auto q = nearest_lane(net, Vec2(30, -1.75));
  EXPECT_EQ(q.lane, "a_0");
  EXPECT_DOUBLE_EQ(q.offset, 0.0);
  EXPECT_DOUBLE_EQ(q.station, 30.0);
}

TEST(NearestLane, LeftOffsetIsPositive) {
  const auto net = load_map(fixture("two_lane_straight.json"));
  const auto q = nearest_lane(net, Vec2(30, -0.75));
  EXPECT_EQ(q.lane, "a_0");
  EXPECT_NEAR(q.offset, 1.0, 1e-12);
  EXPECT_NEAR(nearest_lane(net, Vec2(30, -2.75)).offset, -1.0, 1e-12);
}

TEST(NearestLane, TieGoesToSmallerId) {
  const auto net = load_map(fixture("two_lane_straight.json"));
  EXPECT_EQ(nearest_lane(net, Vec2(50, 0.0)).lane, "a_0");
  EXPECT_EQ(nearest_lane(net, Vec2(50, 0.3)).lane, "a_1");
  EXPECT_EQ(nearest_lane(net, Vec2(50, -0.3)).lane, "a_0");
}

// Oracle: minimum distance over every lane segment, computed here.
double brute_distance(const Lane& lane, const Vec2& p) {
  double best = 1e300;
  const auto& pts = lane.centerline.points();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 ab = pts[i + 1] - pts[i];
    const double t = std::clamp((p - pts[i]).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (p - (pts[i] + t * ab)).norm());
  }
  return best;
}

TEST(NearestLane, MatchesBruteForceOnFixtures) {
  Rng rng(11);
  for (const char* name : {"four_way.json", "two_lane_straight.json"}) {
    const auto net = load_map(fixture(name));
    for (int k = 0; k < 500; ++k) {
      const Vec2 p(rng.uniform(-120, 120), rng.uniform(-120, 120));
      const auto q = nearest_lane(net, p);
      double best = 1e300;
      for (const auto& l : net.lanes()) best = std::min(best, brute_distance(l, p));
      EXPECT_NEAR(std::abs(q.offset), best, 1e-9) << name << " at " << p.transpose();
      EXPECT_GE(q.station, 0.0);
      EXPECT_LE(q.station, net.lane(q.lane).length() + 1e-9);
    }
  }
}

Box box_at(double x, double y, double heading = 0, double length = 4.5, double width = 1.8) {
  return Box{Vec2(x, y), heading, length, width};
}

TEST(Offroad, CenteredIsOnRoad) {
  const auto net = load_map(fixture("two_lane_straight.json"));
  EXPECT_EQ(offroad_status(net, box_at(50, -1.75)), OffroadStatus::on_road);
}

TEST(Offroad, StraddlingBoundaryIsPartial) {
  const auto net = load_map(fixture("two_lane_straight.json"));
  const Box b = box_at(50, 3.5);
  // Oracle: the road surface is the strip 0 <= x <= 100, |y| <= 3.5.
  int off = 0;
  for (const auto& c : b.corners())
    if (!(c.x() >= 0 && c.x() <= 100 && std::abs(c.y()) <= 3.5)) ++off;
  ASSERT_EQ(off, 2);
  EXPECT_EQ(offroad_status(net, b), OffroadStatus::partial_offroad);
}

TEST(Offroad, FarAwayIsFull) {
  const auto net = load_map(fixture("two_lane_straight.json"));
  EXPECT_EQ(offroad_status(net, box_at(50, 20)), OffroadStatus::full_offroad);
}

TEST(Offroad, MonotoneUnderOutwardTranslation) {
  const auto net = load_map(fixture("two_lane_straight.json"));
  Rng rng(5);
  for (int k = 0; k < 300; ++k) {
    const double x = rng.uniform(10, 90);
    const double heading = rng.uniform(-kPi, kPi);
    const double dir = rng.uniform() < 0.5 ? -1.0 : 1.0;
    int prev = 0;
    for (double y = 0; y < 12; y += 0.25) {
      const int s = int(offroad_status(net, box_at(x, dir * y, heading)));
      EXPECT_GE(s, prev) << "x " << x << " y " << dir * y;
      prev = s;
    }
  }
}

TEST(Waypoints, StraightSpacing) {
  const auto net = test::single_lane(100.0);
  Route r;
  r.lanes = {"road"};
  r.goal = Vec2(100, 0);
  const auto wps = waypoints_along(*net, r, Pose{Vec2(0, 0), 0}, 50.0, 10.0);
  ASSERT_EQ(wps.size(), 5u);
  for (std::size_t i = 0; i < wps.size(); ++i) {
    EXPECT_NEAR(wps[i].pose.position.x(), 10.0 * double(i), 1e-12);
    EXPECT_NEAR(wps[i].pose.position.y(), 0.0, 1e-12);
  }
}

TEST(Waypoints, TruncatedAtGoal) {
  const auto net = test::single_lane(100.0);
  Route r;
  r.lanes = {"road"};
  r.goal = Vec2(75, 0);
  const auto wps = waypoints_along(*net, r, Pose{Vec2(50, 0), 0}, 100.0, 10.0);
  ASSERT_EQ(wps.size(), 4u);
  EXPECT_NEAR(wps.back().pose.position.x(), 75.0, 1e-9);
}

TEST(Waypoints, OffRouteThrows) {
  const auto net = test::single_lane(100.0);
  Route r;
  r.lanes = {"road"};
  r.goal = Vec2(75, 0);
  EXPECT_THROW(waypoints_along(*net, r, Pose{Vec2(50, 30), 0}, 50.0, 10.0), OffRouteError);
}

// Oracle: arc-length interpolation over the concatenated fixture polylines.
Vec2 resample(const std::vector<Vec2>& pts, double s) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double len = (pts[i + 1] - pts[i]).norm();
    if (s <= len || i + 2 == pts.size()) return pts[i] + (pts[i + 1] - pts[i]) * (s / len);
    s -= len;
  }
  return pts.back();
}

TEST(Waypoints, FollowJunctionCurvature) {
  const auto raw = test::read_fixture("four_way.json");
  std::vector<Vec2> pts;
  for (const char* id : {"south_in", "south_to_west", "west_out"})
    for (const auto& l : raw["lanes"])
      if (l["id"] == id)
        for (const auto& p : l["centerline"]) {
          const Vec2 v(p[0].get<double>(), p[1].get<double>());
          if (pts.empty() || (v - pts.back()).norm() > 1e-9) pts.push_back(v);
        }

  const auto net = load_map(fixture("four_way.json"));
  Route r;
  r.lanes = {"south_in", "south_to_west", "west_out"};
  r.goal = Vec2(-60, 1.75);
  const auto wps = waypoints_along(net, r, Pose{Vec2(1.75, -30), kPi / 2}, 60.0, 2.0);
  int on_connection = 0;
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const Vec2 want = resample(pts, 80.0 + 2.0 * double(i));
    EXPECT_NEAR((wps[i].pose.position - want).norm(), 0.0, 1e-6) << "waypoint " << i;
    if (wps[i].lane == "south_to_west") ++on_connection;
    if (i > 0) {
      EXPECT_NEAR(wps[i].station - wps[i - 1].station, 2.0, 1e-6);
    }
  }
  EXPECT_GT(on_connection, 3);
  // The connection bends left by 90 degrees.
  EXPECT_NEAR(normalize_angle(wps.back().pose.heading - kPi), 0.0, 1e-9);
}

TEST(Waypoints, GapsEqualSpacingExceptLast) {
  const auto net = load_map(fixture("four_way.json"));
  Rng rng(3);
  const std::vector<std::vector<LaneId>> routes = {
      {"south_in", "south_to_east", "east_out"},
      {"east_in", "east_to_west", "west_out"},
      {"north_in", "north_to_east", "east_out"}};
  for (int k = 0; k < 60; ++k) {
    Route r;
    r.lanes = routes[rng.below(routes.size())];
    const auto& out = net.lane(r.lanes.back()).centerline;
    r.goal = out.point_at(rng.uniform(5, 95));
    const auto& in = net.lane(r.lanes.front()).centerline;
    const Pose from{in.point_at(rng.uniform(0, 90)), 0};
    const double spacing = rng.uniform(0.5, 7);
    const auto wps = waypoints_along(net, r, from, rng.uniform(10, 200), spacing);
    for (std::size_t i = 1; i + 1 < wps.size(); ++i)
      EXPECT_NEAR(wps[i].station - wps[i - 1].station, spacing, 1e-6);
  }
}

TEST(Routes, ValidateRejectsDisconnectedLanes) {
  const auto net = load_map(fixture("four_way.json"));
  Route r;
  r.lanes = {"south_in", "east_out"};
  r.goal = Vec2(50, -1.75);
  EXPECT_THROW(validate_route(net, r), ValidationError);
  r.lanes = {"south_in", "south_to_east", "east_out"};
  EXPECT_NO_THROW(validate_route(net, r));
}

TEST(Signals, CycleSchedule) {
  TrafficSignal s;
  s.phases = {{SignalState::green, 10}, {SignalState::yellow, 2}, {SignalState::red, 12}};
  s.offset = 0;
  EXPECT_DOUBLE_EQ(s.cycle(), 24.0);
  EXPECT_EQ(s.state_at(0), SignalState::green);
  EXPECT_EQ(s.state_at(10.5), SignalState::yellow);
  EXPECT_EQ(s.state_at(13), SignalState::red);
  EXPECT_EQ(s.state_at(24.5), SignalState::green);
}

}  // namespace
}  // namespace dbench
