#include "dbench/trajectory_log.hpp"

#include "dbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dbench {

using nlohmann::json;

std::string to_string(ActorRole r) {
  switch (r) {
    case ActorRole::mission: return "mission";
    case ActorRole::social: return "social";
    case ActorRole::lead: return "lead";
  }
  return "social";
}

ActorRole actor_role_from_string(const std::string& s) {
  if (s == "mission") return ActorRole::mission;
  if (s == "social") return ActorRole::social;
  if (s == "lead") return ActorRole::lead;
  throw ParseError("unknown actor role '" + s + "'");
}

std::string to_string(TaskFamily f) {
  return f == TaskFamily::collaborative ? "collaborative" : "adaptive";
}

TaskFamily task_family_from_string(const std::string& s) {
  if (s == "collaborative") return TaskFamily::collaborative;
  if (s == "adaptive") return TaskFamily::adaptive;
  throw ParseError("unknown task family '" + s + "'");
}

namespace {
constexpr std::pair<EventKind, const char*> kEventNames[] = {
    {EventKind::collision, "collision"},
    {EventKind::full_offroad, "full_offroad"},
    {EventKind::partial_offroad, "partial_offroad"},
    {EventKind::wrong_way, "wrong_way"},
    {EventKind::speed_violation, "speed_violation"},
    {EventKind::goal_reached, "goal_reached"},
    {EventKind::timeout, "timeout"},
    {EventKind::v2v, "v2v"},
};
}  // namespace

std::string to_string(EventKind k) {
  for (const auto& [kind, name] : kEventNames)
    if (kind == k) return name;
  return "collision";
}

EventKind event_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : kEventNames)
    if (s == name) return kind;
  throw ParseError("unknown event kind '" + s + "'");
}

std::string to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::running: return "running";
    case OutcomeKind::goal_reached: return "goal_reached";
    case OutcomeKind::terminated: return "terminated";
    case OutcomeKind::timed_out: return "timed_out";
  }
  return "running";
}

OutcomeKind outcome_kind_from_string(const std::string& s) {
  if (s == "running") return OutcomeKind::running;
  if (s == "goal_reached") return OutcomeKind::goal_reached;
  if (s == "terminated") return OutcomeKind::terminated;
  if (s == "timed_out") return OutcomeKind::timed_out;
  throw ParseError("unknown outcome '" + s + "'");
}

const ActorRecord* Snapshot::find(const ActorId& id) const {
  const auto it = std::lower_bound(actors.begin(), actors.end(), id,
                                   [](const ActorRecord& a, const ActorId& k) { return a.id < k; });
  return it != actors.end() && it->id == id ? &*it : nullptr;
}

const MissionOutcome* TrajectoryLog::outcome(const ActorId& id) const {
  for (const auto& [aid, o] : outcomes)
    if (aid == id) return &o;
  return nullptr;
}

std::int64_t TrajectoryLog::limit_steps() const {
  return static_cast<std::int64_t>(std::llround(time_limit / dt));
}

// ---------------------------------------------------------------------------

namespace {

json record_json(const ActorRecord& a) {
  const auto& s = a.state;
  return json{{"id", a.id},
              {"role", to_string(a.role)},
              {"frozen", a.frozen},
              {"x", s.position.x()},
              {"y", s.position.y()},
              {"heading", s.heading},
              {"speed", s.speed},
              {"acc", {s.acceleration.x(), s.acceleration.y()}},
              {"jerk", {s.jerk.x(), s.jerk.y()}},
              {"length", s.length},
              {"width", s.width},
              {"lane", a.lane},
              {"offset", a.lane_offset},
              {"lane_width", a.lane_width},
              {"speed_limit", a.speed_limit},
              {"offroad", to_string(a.offroad)},
              {"wrong_way", a.wrong_way}};
}

ActorRecord record_from(const json& j, std::int64_t step) {
  ActorRecord a;
  a.id = j.at("id").get<std::string>();
  a.role = actor_role_from_string(j.at("role").get<std::string>());
  a.frozen = j.at("frozen").get<bool>();
  auto& s = a.state;
  s.position = Vec2(j.at("x").get<double>(), j.at("y").get<double>());
  s.heading = j.at("heading").get<double>();
  s.speed = j.at("speed").get<double>();
  const auto acc = j.at("acc").get<std::vector<double>>();
  const auto jerk = j.at("jerk").get<std::vector<double>>();
  if (acc.size() != 2 || jerk.size() != 2) throw MalformedLogError("acc/jerk must be pairs");
  s.acceleration = Vec2(acc[0], acc[1]);
  s.jerk = Vec2(jerk[0], jerk[1]);
  s.length = j.at("length").get<double>();
  s.width = j.at("width").get<double>();
  s.step = step;
  a.lane = j.at("lane").get<std::string>();
  a.lane_offset = j.at("offset").get<double>();
  a.lane_width = j.at("lane_width").get<double>();
  a.speed_limit = j.at("speed_limit").get<double>();
  a.offroad = offroad_status_from_string(j.at("offroad").get<std::string>());
  a.wrong_way = j.at("wrong_way").get<bool>();
  return a;
}

json event_json(const Event& e) {
  json j{{"type", "event"}, {"step", e.step}, {"actor", e.actor}, {"kind", to_string(e.kind)}};
  if (e.other) j["other"] = *e.other;
  if (e.kind == EventKind::speed_violation) {
    j["amount"] = e.amount;
    j["limit"] = e.limit;
  }
  if (!e.payload.is_null()) j["payload"] = e.payload;
  return j;
}

Event event_from(const json& j) {
  Event e;
  e.step = j.at("step").get<std::int64_t>();
  e.actor = j.at("actor").get<std::string>();
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("other")) e.other = j.at("other").get<std::string>();
  e.amount = j.value("amount", 0.0);
  e.limit = j.value("limit", 0.0);
  if (j.contains("payload")) e.payload = j.at("payload");
  return e;
}

}  // namespace

void write_log(std::ostream& out, const TrajectoryLog& log) {
  json header{{"type", "header"},
              {"format", "dbench-log/1"},
              {"scenario", log.scenario_id},
              {"family", to_string(log.family)},
              {"dt", log.dt},
              {"time_limit", log.time_limit},
              {"seed", log.seed},
              {"map", log.map}};
  json missions = json::array();
  for (const auto& m : log.missions)
    missions.push_back({{"id", m.id},
                        {"goal", {m.goal.x(), m.goal.y()}},
                        {"arrival_radius", m.arrival_radius},
                        {"lead", m.lead ? json(*m.lead) : json(nullptr)}});
  header["missions"] = std::move(missions);
  out << header.dump() << '\n';

  std::size_t ev = 0;
  for (const auto& snap : log.snapshots) {
    json actors = json::array();
    for (const auto& a : snap.actors) actors.push_back(record_json(a));
    json signals = json::array();
    for (const auto& s : snap.signals) signals.push_back({{"id", s.id}, {"state", to_string(s.state)}});
    out << json{{"type", "snapshot"},
                {"step", snap.step},
                {"time", snap.time},
                {"actors", std::move(actors)},
                {"signals", std::move(signals)}}
               .dump()
        << '\n';
    while (ev < log.events.size() && log.events[ev].step <= snap.step)
      out << event_json(log.events[ev++]).dump() << '\n';
  }
  while (ev < log.events.size()) out << event_json(log.events[ev++]).dump() << '\n';

  json outcomes = json::array();
  for (const auto& [id, o] : log.outcomes)
    outcomes.push_back(
        {{"id", id}, {"outcome", to_string(o.kind)}, {"step", o.step}, {"reason", o.reason}});
  out << json{{"type", "outcomes"}, {"outcomes", std::move(outcomes)}}.dump() << '\n';
}

std::string serialize_log(const TrajectoryLog& log) {
  std::ostringstream os;
  write_log(os, log);
  return os.str();
}

TrajectoryLog read_log(std::istream& in) {
  TrajectoryLog log;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  bool have_outcomes = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        log.scenario_id = j.at("scenario").get<std::string>();
        log.family = task_family_from_string(j.at("family").get<std::string>());
        log.dt = j.at("dt").get<double>();
        log.time_limit = j.at("time_limit").get<double>();
        log.seed = j.at("seed").get<std::uint64_t>();
        log.map = j.value("map", json());
        for (const auto& mj : j.at("missions")) {
          MissionInfo m;
          m.id = mj.at("id").get<std::string>();
          const auto g = mj.at("goal").get<std::vector<double>>();
          if (g.size() != 2) throw MalformedLogError("goal must be [x, y]");
          m.goal = Vec2(g[0], g[1]);
          m.arrival_radius = mj.at("arrival_radius").get<double>();
          if (mj.contains("lead") && !mj.at("lead").is_null())
            m.lead = mj.at("lead").get<std::string>();
          log.missions.push_back(std::move(m));
        }
        have_header = true;
      } else if (type == "snapshot") {
        Snapshot s;
        s.step = j.at("step").get<std::int64_t>();
        s.time = j.at("time").get<double>();
        for (const auto& aj : j.at("actors")) s.actors.push_back(record_from(aj, s.step));
        for (const auto& sj : j.at("signals"))
          s.signals.push_back({sj.at("id").get<std::string>(),
                               signal_state_from_string(sj.at("state").get<std::string>())});
        log.snapshots.push_back(std::move(s));
      } else if (type == "event") {
        log.events.push_back(event_from(j));
      } else if (type == "outcomes") {
        for (const auto& oj : j.at("outcomes")) {
          MissionOutcome o;
          o.kind = outcome_kind_from_string(oj.at("outcome").get<std::string>());
          o.step = oj.at("step").get<std::int64_t>();
          o.reason = oj.value("reason", "");
          log.outcomes.emplace_back(oj.at("id").get<std::string>(), o);
        }
        have_outcomes = true;
      } else {
        throw MalformedLogError("unknown record type '" + type + "'");
      }
    } catch (const MalformedLogError& e) {
      throw MalformedLogError("log line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::exception& e) {
      throw MalformedLogError("log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw MalformedLogError("log has no header line");
  if (!have_outcomes) throw MalformedLogError("log has no outcomes line");
  validate_log(log);
  return log;
}

void write_log_file(const std::filesystem::path& path, const TrajectoryLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write log '" + path.string() + "'");
  write_log(out, log);
}

TrajectoryLog read_log_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedLogError("cannot open log '" + path.string() + "'");
  try {
    return read_log(in);
  } catch (const MalformedLogError& e) {
    throw MalformedLogError(path.string() + ": " + e.what());
  }
}

void validate_log(const TrajectoryLog& log) {
  if (!(log.dt > 0)) throw MalformedLogError("dt must be positive");
  if (!(log.time_limit > 0)) throw MalformedLogError("time limit must be positive");
  if (log.snapshots.empty()) throw MalformedLogError("log has no snapshots");
  for (std::size_t i = 0; i < log.snapshots.size(); ++i)
    if (log.snapshots[i].step != std::int64_t(i))
      throw MalformedLogError("snapshots are not contiguous at index " + std::to_string(i));
  const auto last = log.snapshots.back().step;
  for (const auto& e : log.events)
    if (e.step < 0 || e.step > last)
      throw MalformedLogError("event at step " + std::to_string(e.step) + " has no snapshot");
}

}  // namespace dbench
