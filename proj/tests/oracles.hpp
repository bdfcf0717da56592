#pragma once

#include "dbench/sensors.hpp"
#include "test_support.hpp"

namespace dbench::test {

inline void set_outcome(TrajectoryLog& log, OutcomeKind kind, std::int64_t step) {
  MissionOutcome o;
  o.kind = kind;
  o.step = step;
  log.outcomes = {{"ego", o}};
}

// Ego drives from x = 0 toward (100, 0) and stops at `final_x`.
inline TrajectoryLog straight_log(double final_x) {
  return synthetic_log(10, 0.1, 10, Vec2(100, 0), [&](std::int64_t k, ActorRecord& r) {
    r.state.position = Vec2(final_x * double(k) / 10.0, 0);
  });
}

// Lead at x = 50 doing 10 m/s: rear bumper 47.75, margin 10 m, so the follow
// margin boundary sits at 37.75 and an ego front there means x = 35.5.
inline TrajectoryLog follow_log(double ego_x, double ego_speed) {
  auto log = synthetic_log(
      20, 0.1, 10, Vec2(200, 0),
      [&](std::int64_t, ActorRecord& r) {
        r.state.position = Vec2(ego_x, 0);
        r.state.speed = ego_speed;
      },
      TaskFamily::adaptive);
  log.missions[0].lead = "lead";
  for (auto& s : log.snapshots) {
    ActorRecord lead = record("lead", 50, 0, 10);
    lead.role = ActorRole::lead;
    s.actors.push_back(lead);
  }
  return log;
}

inline SceneActor actor(const std::string& id, double x, double y, double heading = 0,
                        double length = 4.5, double width = 1.8) {
  SceneActor a;
  a.id = id;
  a.state.position = Vec2(x, y);
  a.state.heading = heading;
  a.state.length = length;
  a.state.width = width;
  a.box = footprint(a.state);
  return a;
}

// Oracle: does segment a-b pass through the interior of box? Uses orientation
// tests against the four edges plus an inside check of the segment midpoint.
inline bool blocked_oracle(const Vec2& a, const Vec2& b, const Box& box) {
  const auto c = box.corners();
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
  };
  for (int i = 0; i < 4; ++i) {
    const Vec2& p = c[i];
    const Vec2& q = c[(i + 1) % 4];
    const double d1 = orient(a, b, p), d2 = orient(a, b, q);
    const double d3 = orient(p, q, a), d4 = orient(p, q, b);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
      return true;
  }
  return box.contains(0.5 * (a + b)) || box.contains(a) || box.contains(b);
}

// Fraction of `n` evenly spaced boundary points of the target with a clear
// line of sight from the ego's center.
inline double dense_fraction(const Scene& scene, const std::string& ego, const std::string& target,
                             int n) {
  const Vec2 o = scene.find(ego)->state.position;
  const Box& t = scene.find(target)->box;
  const auto c = t.corners();
  const double perim = 2 * (t.length + t.width);
  int clear = 0;
  for (int k = 0; k < n; ++k) {
    double s = perim * (k + 0.5) / n;
    int e = 0;
    const double len[4] = {t.length, t.width, t.length, t.width};
    while (s > len[e]) s -= len[e++];
    const Vec2 p = c[e] + (c[(e + 1) % 4] - c[e]) * (s / len[e]);
    bool blocked = false;
    for (const auto& a : scene.actors())
      if (a.id != ego && a.id != target && blocked_oracle(o, p, a.box)) blocked = true;
    clear += !blocked;
  }
  return double(clear) / n;
}

}  // namespace dbench::test
