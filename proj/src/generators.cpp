#include "dbench/generators.hpp"

#include "dbench/errors.hpp"
#include "dbench/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <set>

namespace dbench {

using nlohmann::json;

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string padded(std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", n);
  return buf;
}

Vec2 arm_direction(const std::string& arm) {
  if (arm == "south") return {0, -1};
  if (arm == "east") return {1, 0};
  if (arm == "north") return {0, 1};
  if (arm == "west") return {-1, 0};
  throw ValidationError("unknown junction arm '" + arm + "'");
}

std::string arm_towards(const Vec2& d) {
  for (const char* a : {"south", "east", "north", "west"})
    if ((arm_direction(a) - d).norm() < 1e-9) return a;
  return {};
}

// Left normal of a direction.
Vec2 left_of(const Vec2& d) { return {-d.y(), d.x()}; }

// Quarter-circle points from `from` to `to` around `center`, turning the short way.
std::vector<Vec2> arc(const Vec2& center, const Vec2& from, const Vec2& to, int segments) {
  const double r = (from - center).norm();
  const double a0 = std::atan2(from.y() - center.y(), from.x() - center.x());
  double a1 = std::atan2(to.y() - center.y(), to.x() - center.x());
  double sweep = a1 - a0;
  while (sweep > std::numbers::pi) sweep -= 2 * std::numbers::pi;
  while (sweep < -std::numbers::pi) sweep += 2 * std::numbers::pi;
  std::vector<Vec2> pts;
  for (int k = 0; k <= segments; ++k) {
    const double a = a0 + sweep * k / segments;
    pts.emplace_back(center.x() + r * std::cos(a), center.y() + r * std::sin(a));
  }
  pts.front() = from;
  pts.back() = to;
  return pts;
}

Lane make_lane(std::string id, std::vector<Vec2> pts, double width = kJunctionLaneWidth,
               double limit = kJunctionSpeedLimit) {
  Lane l;
  l.id = std::move(id);
  l.centerline = Polyline(std::move(pts));
  l.width = width;
  l.speed_limit = limit;
  return l;
}

void link(std::vector<Lane>& lanes, const std::string& from, const std::string& to) {
  auto find = [&](const std::string& id) -> Lane& {
    for (auto& l : lanes)
      if (l.id == id) return l;
    throw ValidationError("generator references missing lane '" + id + "'");
  };
  find(from).successors.push_back(to);
  find(to).predecessors.push_back(from);
}

std::string connection_id(const std::string& from, const std::string& to) {
  return from + "_to_" + to;
}

template <class Enum, std::size_t N>
Enum parse_enum(const std::string& s, const std::pair<const char*, Enum> (&table)[N],
                const char* what) {
  for (const auto& [name, v] : table)
    if (s == name) return v;
  throw ValidationError(std::string("unknown ") + what + " '" + s + "'");
}

template <class Enum, std::size_t N>
std::string enum_name(Enum v, const std::pair<const char*, Enum> (&table)[N]) {
  for (const auto& [name, e] : table)
    if (e == v) return name;
  return "?";
}

constexpr std::pair<const char*, JunctionKind> kJunctionNames[] = {
    {"four-way", JunctionKind::four_way},
    {"t-junction", JunctionKind::t_junction},
    {"signalized", JunctionKind::signalized}};
constexpr std::pair<const char*, TurnKind> kTurnNames[] = {
    {"left", TurnKind::left}, {"right", TurnKind::right}, {"straight", TurnKind::straight}};
constexpr std::pair<const char*, Density> kDensityNames[] = {{"none", Density::none},
                                                             {"low", Density::low},
                                                             {"medium", Density::medium},
                                                             {"high", Density::high}};

Pose pose_on(const RoadNetwork& net, const LaneId& lane, double station) {
  const auto& line = net.lane(lane).centerline;
  return {line.point_at(station), line.heading_at(station)};
}

std::vector<SocialSpec> spawn_stream(const RoadNetwork& net, std::uint64_t seed, Density density,
                                     double horizon, double dt, const std::string& prefix,
                                     const std::vector<std::vector<LaneId>>& routes,
                                     double speed) {
  std::vector<SocialSpec> out;
  const auto times = poisson_spawn_times(seed, density, horizon);
  // Route choices use their own stream so they line up across densities.
  Rng choice(mix(seed, 0xc0ffee));
  for (std::size_t j = 0; j < times.size(); ++j) {
    SocialSpec s;
    s.id = prefix + padded(j);
    s.kind = SocialKind::reactive;
    s.spawn_step = std::llround(times[j] / dt);
    s.route.lanes = routes[routes.size() == 1 ? 0 : choice.below(routes.size())];
    s.route.start_station = s.size.length / 2 + 0.5;  // whole footprint on the lane
    const auto& last = net.lane(s.route.lanes.back()).centerline;
    s.route.goal = last.points().back();
    s.speed = speed;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::string to_string(JunctionKind k) { return enum_name(k, kJunctionNames); }
std::string to_string(TurnKind k) { return enum_name(k, kTurnNames); }
std::string to_string(Density d) { return enum_name(d, kDensityNames); }
JunctionKind junction_kind_from_string(const std::string& s) {
  return parse_enum(s, kJunctionNames, "junction kind");
}
TurnKind turn_kind_from_string(const std::string& s) { return parse_enum(s, kTurnNames, "turn"); }
Density density_from_string(const std::string& s) { return parse_enum(s, kDensityNames, "density"); }

double mean_headway(Density d) {
  switch (d) {
    case Density::low: return 8.0;
    case Density::medium: return 4.0;
    case Density::high: return 2.0;
    default: return std::numeric_limits<double>::infinity();
  }
}

std::vector<double> poisson_spawn_times(std::uint64_t seed, Density density, double horizon) {
  std::vector<double> out;
  const double mean = mean_headway(density);
  if (!std::isfinite(mean)) return out;
  Rng rng(seed);
  double t = 0;
  while (true) {
    t += mean * rng.exponential(1.0);
    if (t >= horizon) break;
    out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// junctions

std::vector<std::string> junction_arms(JunctionKind kind) {
  if (kind == JunctionKind::t_junction) return {"south", "east", "west"};
  return {"south", "east", "north", "west"};
}

std::optional<std::string> turn_exit(JunctionKind kind, const std::string& approach,
                                     TurnKind turn) {
  const auto arms = junction_arms(kind);
  if (std::find(arms.begin(), arms.end(), approach) == arms.end()) return std::nullopt;
  const Vec2 d = arm_direction(approach);
  // Travel heads in -d; its right-hand side is left_of(d).
  Vec2 exit_dir;
  switch (turn) {
    case TurnKind::right: exit_dir = left_of(d); break;
    case TurnKind::left: exit_dir = -left_of(d); break;
    case TurnKind::straight: exit_dir = -d; break;
  }
  const std::string target = arm_towards(exit_dir);
  if (std::find(arms.begin(), arms.end(), target) == arms.end()) return std::nullopt;
  return target;
}

RoadNetwork junction_map(JunctionKind kind) {
  const auto arms = junction_arms(kind);
  const double off = kJunctionLaneWidth / 2;
  std::vector<Lane> lanes;
  std::vector<Edge> edges;
  Junction jn;
  jn.id = "center";

  for (const auto& a : arms) {
    const Vec2 d = arm_direction(a);
    const Vec2 r = left_of(d);
    lanes.push_back(make_lane(a + "_in", {(kBoxHalf + kArmLength) * d + off * r, kBoxHalf * d + off * r}));
    lanes.push_back(make_lane(a + "_out", {kBoxHalf * d - off * r, (kBoxHalf + kArmLength) * d - off * r}));
    edges.push_back({a + "_in", {a + "_in"}});
    edges.push_back({a + "_out", {a + "_out"}});
    jn.incoming.push_back(a + "_in");
    jn.outgoing.push_back(a + "_out");
  }

  for (const auto& a : arms) {
    const Vec2 da = arm_direction(a);
    const Vec2 p = kBoxHalf * da + off * left_of(da);
    for (TurnKind t : {TurnKind::right, TurnKind::straight, TurnKind::left}) {
      const auto b = turn_exit(kind, a, t);
      if (!b) continue;
      const Vec2 db = arm_direction(*b);
      const Vec2 q = kBoxHalf * db - off * left_of(db);
      std::vector<Vec2> pts;
      if (t == TurnKind::straight) {
        pts = {p, q};
      } else {
        // Corner of the box shared by both arms.
        pts = arc(kBoxHalf * da + kBoxHalf * db, p, q, 16);
      }
      const std::string id = connection_id(a, *b);
      lanes.push_back(make_lane(id, std::move(pts)));
      jn.connections.push_back(id);
      link(lanes, a + "_in", id);
      link(lanes, id, *b + "_out");
    }
  }

  std::vector<TrafficSignal> signals;
  if (kind == JunctionKind::signalized) {
    const double cycle = double(arms.size()) * (kGreen + kYellow);
    for (std::size_t i = 0; i < arms.size(); ++i) {
      TrafficSignal s;
      s.id = "signal_" + arms[i];
      s.lane = arms[i] + "_in";
      s.phases = {{SignalState::green, kGreen},
                  {SignalState::yellow, kYellow},
                  {SignalState::red, cycle - kGreen - kYellow}};
      s.offset = std::fmod(cycle - double(i) * (kGreen + kYellow), cycle);
      signals.push_back(std::move(s));
    }
  }
  return RoadNetwork::build(std::move(lanes), std::move(edges), {jn}, std::move(signals));
}

std::vector<Scenario> generate_turn_suite(const TurnSuiteParams& p) {
  if (p.missions < 1 || p.missions > 5)
    throw ValidationError("turn suite: missions must lie in [1, 5]");
  if (!(p.dt > 0) || !(p.time_limit > 0))
    throw ValidationError("turn suite: dt and time limit must be positive");

  std::vector<std::string> approaches = p.approaches;
  const auto arms = junction_arms(p.junction);
  if (approaches.empty()) {
    for (const auto& a : arms)
      if (turn_exit(p.junction, a, p.turn)) approaches.push_back(a);
    if (approaches.empty())
      throw ValidationError("turn suite: " + to_string(p.junction) + " has no approach for a " +
                            to_string(p.turn) + " turn");
  }
  for (const auto& a : approaches)
    if (!turn_exit(p.junction, a, p.turn))
      throw ValidationError("turn suite: approach '" + a + "' of " + to_string(p.junction) +
                            " does not support a " + to_string(p.turn) + " turn");

  auto net = std::make_shared<const RoadNetwork>(junction_map(p.junction));
  std::vector<Scenario> out;
  for (std::size_t si = 0; si < approaches.size(); ++si) {
    const auto& a = approaches[si];
    const std::string exit_arm = *turn_exit(p.junction, a, p.turn);
    Scenario sc;
    sc.id = "turn-" + to_string(p.junction) + "-" + to_string(p.turn) + "-" + to_string(p.density) +
            "-" + a;
    sc.family = TaskFamily::collaborative;
    sc.network = net;
    sc.dt = p.dt;
    sc.time_limit = p.time_limit;
    sc.seed = mix(p.seed, si);
    sc.tags = {{"junction", to_string(p.junction)},
               {"turn", to_string(p.turn)},
               {"density", to_string(p.density)},
               {"approach", a},
               {"missions", std::to_string(p.missions)}};

    const LaneId in = a + "_in";
    const LaneId conn = connection_id(a, exit_arm);
    const LaneId out_lane = exit_arm + "_out";
    const Vec2 goal = net->lane(out_lane).centerline.point_at(50.0);
    for (int i = 0; i < p.missions; ++i) {
      MissionSpec m;
      m.id = "ego_" + std::to_string(i);
      const double station = kArmLength - 60.0 - 10.0 * i;
      m.start = pose_on(*net, in, station);
      m.speed = 0;
      m.route.lanes = {in, conn, out_lane};
      m.route.goal = goal;
      m.route.start_station = station;
      sc.missions.push_back(std::move(m));
    }

    for (std::size_t ai = 0; ai < arms.size(); ++ai) {
      const auto& other = arms[ai];
      if (other == a) continue;
      std::vector<std::vector<LaneId>> routes;
      for (TurnKind t : {TurnKind::left, TurnKind::right, TurnKind::straight})
        if (auto b = turn_exit(p.junction, other, t))
          routes.push_back({other + "_in", connection_id(other, *b), *b + "_out"});
      auto spawns = spawn_stream(*net, mix(p.seed, 1000 + ai), p.density, p.time_limit, p.dt,
                                 "social_" + other + "_", routes, 8.0);
      for (auto& s : spawns) sc.social.push_back(std::move(s));
    }
    std::sort(sc.social.begin(), sc.social.end(),
              [](const SocialSpec& x, const SocialSpec& y) { return x.id < y.id; });
    validate(sc);
    out.push_back(std::move(sc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// corridor

namespace {

constexpr double kForkX = 300.0;
constexpr double kCrossX = 600.0;
constexpr double kCorridorEnd = 900.0;
constexpr double kLaneY[2] = {-1.75, 1.75};

std::string lane_name(const char* edge, int k) { return std::string(edge) + "_" + std::to_string(k); }

}  // namespace

RoadNetwork corridor_map() {
  std::vector<Lane> lanes;
  std::vector<Edge> edges;
  auto two_lane = [&](const char* edge, double x0, double x1) {
    Edge e{edge, {}};
    for (int k = 0; k < 2; ++k) {
      lanes.push_back(make_lane(lane_name(edge, k), {{x0, kLaneY[k]}, {x1, kLaneY[k]}}));
      e.lanes.push_back(lane_name(edge, k));
    }
    lanes[lanes.size() - 2].left = lane_name(edge, 1);
    lanes.back().right = lane_name(edge, 0);
    edges.push_back(e);
  };
  two_lane("main_a", 0, kForkX);
  two_lane("main_b", kForkX, kCrossX);
  two_lane("main_c", kCrossX + 2 * kBoxHalf, kCorridorEnd);

  // Exit ramp: right-hand arc of radius 150 over 35 degrees, then 60 m straight.
  {
    const double radius = 150.0;
    const Vec2 start(kForkX, kLaneY[0]);
    const Vec2 center(kForkX, kLaneY[0] - radius);
    const double sweep = 35.0 * std::numbers::pi / 180.0;
    std::vector<Vec2> pts;
    for (int k = 0; k <= 20; ++k) {
      const double a = std::numbers::pi / 2 - sweep * k / 20;
      pts.emplace_back(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a));
    }
    pts.front() = start;
    const double heading = -sweep;
    pts.push_back(pts.back() + 60.0 * Vec2(std::cos(heading), std::sin(heading)));
    lanes.push_back(make_lane("ramp_exit_0", std::move(pts)));
    edges.push_back({"ramp_exit", {"ramp_exit_0"}});
  }
  // Road leaving the junction to the south.
  const Vec2 turn_end(kCrossX + kBoxHalf, kLaneY[0] - kBoxHalf);
  lanes.push_back(make_lane("south_road_0", {turn_end, turn_end + Vec2(0, -200.0)}));
  edges.push_back({"south_road", {"south_road_0"}});

  Junction cross;
  cross.id = "cross";
  cross.incoming = {"main_b"};
  cross.outgoing = {"main_c", "south_road"};
  for (int k = 0; k < 2; ++k) {
    const std::string id = lane_name("conn_through", k);
    lanes.push_back(make_lane(id, {{kCrossX, kLaneY[k]}, {kCrossX + 2 * kBoxHalf, kLaneY[k]}}));
    cross.connections.push_back(id);
  }
  lanes.push_back(make_lane("conn_right_0", arc(Vec2(kCrossX, kLaneY[0] - kBoxHalf),
                                                Vec2(kCrossX, kLaneY[0]), turn_end, 16)));
  cross.connections.push_back("conn_right_0");

  Junction fork;
  fork.id = "fork";
  fork.incoming = {"main_a"};
  fork.outgoing = {"main_b", "ramp_exit"};

  for (int k = 0; k < 2; ++k) {
    link(lanes, lane_name("main_a", k), lane_name("main_b", k));
    link(lanes, lane_name("main_b", k), lane_name("conn_through", k));
    link(lanes, lane_name("conn_through", k), lane_name("main_c", k));
  }
  link(lanes, "main_a_0", "ramp_exit_0");
  link(lanes, "main_b_0", "conn_right_0");
  link(lanes, "conn_right_0", "south_road_0");
  return RoadNetwork::build(std::move(lanes), std::move(edges), {fork, cross}, {});
}

std::vector<Scenario> generate_follow_suite(const FollowSuiteParams& p) {
  if (p.behaviors.empty()) throw ValidationError("follow suite: no lead behaviors");
  if (p.offsets.empty()) throw ValidationError("follow suite: no follower offsets");
  if (!(p.lead_speed > 0) || p.lead_speed > kJunctionSpeedLimit)
    throw ValidationError("follow suite: lead speed must lie in (0, 13.89] m/s");
  if (!(p.dt > 0) || !(p.time_limit > 0))
    throw ValidationError("follow suite: dt and time limit must be positive");
  constexpr double kLeadX = 60.0;
  std::vector<double> sorted = p.offsets;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] < 6.0 || sorted[i] > kLeadX)
      throw ValidationError("follow suite: offsets must lie in [6, 60] m");
    if (i > 0 && sorted[i] - sorted[i - 1] < 6.0)
      throw ValidationError("follow suite: offsets must be at least 6 m apart");
  }

  auto net = std::make_shared<const RoadNetwork>(corridor_map());
  std::vector<Scenario> out;
  std::set<LeadBehavior> seen;
  for (std::size_t bi = 0; bi < p.behaviors.size(); ++bi) {
    const LeadBehavior b = p.behaviors[bi];
    if (!seen.insert(b).second) throw ValidationError("follow suite: duplicate behavior");
    const bool needs_fork = b == LeadBehavior::exit || b == LeadBehavior::turn;
    const int base = (p.ambiguity || needs_fork) ? 0 : 1;
    const int other = 1 - base;
    auto chain = [](int k) {
      return std::vector<LaneId>{lane_name("main_a", k), lane_name("main_b", k),
                                 lane_name("conn_through", k), lane_name("main_c", k)};
    };

    LeadSpec lead;
    lead.id = "lead";
    lead.start = {Vec2(kLeadX, kLaneY[base]), 0.0};
    lead.speed = p.lead_speed;
    lead.script.route = chain(base);
    LeadSegment cruise;
    cruise.behavior = LeadBehavior::cruise;
    cruise.speed = p.lead_speed;
    lead.script.segments.push_back(cruise);
    LaneId final_lane = lead.script.route.back();
    LeadSegment seg;
    seg.behavior = b;
    seg.trigger = TriggerKind::station;
    switch (b) {
      case LeadBehavior::cruise: break;
      case LeadBehavior::merge:
        seg.lane = lane_name("main_a", other);
        seg.at = 100.0;
        final_lane = lane_name("main_c", other);
        break;
      case LeadBehavior::exit:
        seg.lane = "ramp_exit_0";
        seg.at = 150.0;
        final_lane = "ramp_exit_0";
        break;
      case LeadBehavior::turn:
        seg.lane = "conn_right_0";
        seg.at = 400.0;
        final_lane = "south_road_0";
        break;
      case LeadBehavior::stop:
        seg.duration = 5.0;
        seg.at = 200.0;
        break;
    }
    if (b != LeadBehavior::cruise) lead.script.segments.push_back(seg);

    // The lead halts a standstill gap short of the end of its path.
    const auto& fl = net->lane(final_lane).centerline;
    const double h = fl.heading_at(fl.length());
    const Vec2 dir(std::cos(h), std::sin(h));
    const Vec2 lead_stop = fl.points().back() - dir * (lead.size.length / 2 + IdmParams{}.min_gap);

    Scenario sc;
    sc.id = "follow-" + to_string(b) + "-" + to_string(p.density) + (p.ambiguity ? "-ambiguous" : "");
    sc.family = TaskFamily::adaptive;
    sc.network = net;
    sc.dt = p.dt;
    sc.time_limit = p.time_limit;
    sc.seed = mix(p.seed, bi);
    sc.tags = {{"behavior", to_string(b)},
               {"density", to_string(p.density)},
               {"ambiguity", p.ambiguity ? "true" : "false"},
               {"followers", std::to_string(p.offsets.size())}};

    for (std::size_t i = 0; i < p.offsets.size(); ++i) {
      MissionSpec m;
      m.id = "follower_" + std::to_string(i);
      const double x = kLeadX - p.offsets[i];
      m.start = {Vec2(x, kLaneY[base]), 0.0};
      m.speed = p.lead_speed;
      m.route.lanes = {lane_name("main_a", base)};
      m.route.start_station = x;
      m.route.goal = lead_stop - dir * (6.5 * double(i + 1));
      m.follow = lead.id;
      sc.missions.push_back(std::move(m));
    }
    sc.lead = std::move(lead);
    sc.social = spawn_stream(*net, mix(p.seed, 2000), p.density, p.time_limit, p.dt, "social_",
                             {chain(other)}, p.lead_speed);
    validate(sc);
    out.push_back(std::move(sc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// ring

RoadNetwork ring_map(int edges, double circumference) {
  if (edges < 1) throw ValidationError("ring map needs at least one edge");
  if (!(circumference > 0)) throw ValidationError("ring circumference must be positive");
  const double radius = circumference / (2 * std::numbers::pi);
  const double span = 2 * std::numbers::pi / edges;
  const int segments = std::max(1, int(std::ceil(radius * span / 5.0)));
  std::vector<Lane> lanes;
  std::vector<Edge> edge_list;
  auto name = [](int e, int k) { return "ring_" + std::to_string(e) + "_" + std::to_string(k); };
  for (int e = 0; e < edges; ++e) {
    Edge ed{"ring_" + std::to_string(e), {}};
    for (int k = 0; k < 2; ++k) {
      const double r = radius + (k == 0 ? 1.75 : -1.75);
      std::vector<Vec2> pts;
      for (int s = 0; s <= segments; ++s) {
        const double a = span * (e + double(s) / segments);
        pts.emplace_back(r * std::cos(a), r * std::sin(a));
      }
      Lane l = make_lane(name(e, k), std::move(pts));
      if (k == 0) l.left = name(e, 1);
      else l.right = name(e, 0);
      l.successors = {name((e + 1) % edges, k)};
      l.predecessors = {name((e + edges - 1) % edges, k)};
      lanes.push_back(std::move(l));
      ed.lanes.push_back(name(e, k));
    }
    edge_list.push_back(std::move(ed));
  }
  return RoadNetwork::build(std::move(lanes), std::move(edge_list), {}, {});
}

// ---------------------------------------------------------------------------
// parameters

TurnSuiteParams turn_params_from_json(const json& j) {
  TurnSuiteParams p;
  try {
    if (j.contains("junction")) p.junction = junction_kind_from_string(j.at("junction").get<std::string>());
    if (j.contains("turn")) p.turn = turn_kind_from_string(j.at("turn").get<std::string>());
    if (j.contains("density")) p.density = density_from_string(j.at("density").get<std::string>());
    if (j.contains("missions")) p.missions = j.at("missions").get<int>();
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("approaches")) p.approaches = j.at("approaches").get<std::vector<std::string>>();
    if (j.contains("time_limit")) p.time_limit = j.at("time_limit").get<double>();
    if (j.contains("dt")) p.dt = j.at("dt").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("turn suite parameters: ") + e.what());
  }
  return p;
}

FollowSuiteParams follow_params_from_json(const json& j) {
  FollowSuiteParams p;
  try {
    if (j.contains("behaviors")) {
      p.behaviors.clear();
      for (const auto& b : j.at("behaviors")) p.behaviors.push_back(lead_behavior_from_string(b.get<std::string>()));
    }
    if (j.contains("density")) p.density = density_from_string(j.at("density").get<std::string>());
    if (j.contains("offsets")) p.offsets = j.at("offsets").get<std::vector<double>>();
    if (j.contains("ambiguity")) p.ambiguity = j.at("ambiguity").get<bool>();
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("lead_speed")) p.lead_speed = j.at("lead_speed").get<double>();
    if (j.contains("time_limit")) p.time_limit = j.at("time_limit").get<double>();
    if (j.contains("dt")) p.dt = j.at("dt").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("follow suite parameters: ") + e.what());
  }
  return p;
}

SuiteManifest generate_suite(const json& params) {
  if (!params.is_object() || !params.contains("generator"))
    throw ParseError("generator parameters need a 'generator' field");
  const std::string kind = params.at("generator").get<std::string>();
  SuiteManifest m;
  if (kind == "turn") {
    const auto p = turn_params_from_json(params);
    m.name = params.value("name", "turn-" + to_string(p.junction) + "-" + to_string(p.turn) + "-" +
                                      to_string(p.density));
    m.family = TaskFamily::collaborative;
    m.scenarios = generate_turn_suite(p);
  } else if (kind == "follow") {
    const auto p = follow_params_from_json(params);
    m.name = params.value("name", "follow-" + to_string(p.density) + (p.ambiguity ? "-ambiguous" : ""));
    m.family = TaskFamily::adaptive;
    m.scenarios = generate_follow_suite(p);
  } else {
    throw ValidationError("unknown generator '" + kind + "'");
  }
  if (params.contains("weights")) {
    MetricConfig c;
    c = metric_config_from_json(json{{"weights", params.at("weights")}});
    m.weights = c.weights;
  }
  validate(m);
  return m;
}

}  // namespace dbench
