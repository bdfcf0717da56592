#include "dbench/metrics.hpp"

#include "dbench/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace dbench {

using nlohmann::json;

void validate(const MetricConfig& c) {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw ValidationError(std::string("metric config: ") + name + " must be positive");
  };
  positive(c.jerk_max.x(), "jerk_max.long");
  positive(c.jerk_max.y(), "jerk_max.lat");
  positive(c.acc_max.x(), "acc_max.long");
  positive(c.acc_max.y(), "acc_max.lat");
  if (!(c.penalty_period >= 0)) throw ValidationError("metric config: penalty_period must be >= 0");
  positive(c.min_headway, "min_headway");
  positive(c.min_margin, "min_margin");
  positive(c.t_max, "t_max");
  const auto& w = c.weights;
  for (double v : {w.progress, w.rule_compliance, w.humanness, w.task})
    if (!(v >= 0)) throw ValidationError("metric config: weights must be non-negative");
  const double sum = w.progress + w.rule_compliance + w.humanness + w.task;
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("metric config: weights sum to " + std::to_string(sum) + ", expected 1");
}

MetricConfig metric_config_from_json(const json& j) {
  MetricConfig c;
  try {
    if (j.contains("jerk_max")) {
      const auto v = j.at("jerk_max").get<std::vector<double>>();
      if (v.size() != 2) throw ParseError("metric config: jerk_max must be [long, lat]");
      c.jerk_max = Vec2(v[0], v[1]);
    }
    if (j.contains("acc_max")) {
      const auto v = j.at("acc_max").get<std::vector<double>>();
      if (v.size() != 2) throw ParseError("metric config: acc_max must be [long, lat]");
      c.acc_max = Vec2(v[0], v[1]);
    }
    c.penalty_period = j.value("penalty_period", c.penalty_period);
    c.min_headway = j.value("min_headway", c.min_headway);
    c.min_margin = j.value("min_margin", c.min_margin);
    c.t_max = j.value("t_max", c.t_max);
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      c.weights.progress = w.value("PR", c.weights.progress);
      c.weights.rule_compliance = w.value("RC", c.weights.rule_compliance);
      c.weights.humanness = w.value("Humanness", c.weights.humanness);
      c.weights.task = w.value("task", c.weights.task);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("metric config: ") + e.what());
  }
  validate(c);
  return c;
}

json to_json(const MetricConfig& c) {
  return {{"jerk_max", {c.jerk_max.x(), c.jerk_max.y()}},
          {"acc_max", {c.acc_max.x(), c.acc_max.y()}},
          {"penalty_period", c.penalty_period},
          {"min_headway", c.min_headway},
          {"min_margin", c.min_margin},
          {"t_max", c.t_max},
          {"weights",
           {{"PR", c.weights.progress},
            {"RC", c.weights.rule_compliance},
            {"Humanness", c.weights.humanness},
            {"task", c.weights.task}}}};
}

double dyn_ratio(const VehicleState& s, const MetricConfig& c) {
  return std::max({std::abs(s.jerk.x()) / c.jerk_max.x(), std::abs(s.jerk.y()) / c.jerk_max.y(),
                   std::abs(s.acceleration.x()) / c.acc_max.x(),
                   std::abs(s.acceleration.y()) / c.acc_max.y()});
}

namespace {

// Records of one mission from its first appearance to its outcome step.
struct AgentTrack {
  const MissionInfo* info = nullptr;
  std::int64_t start = 0;
  std::vector<const ActorRecord*> records;  // records[t - start]
  MissionOutcome outcome;

  std::int64_t end() const { return start + std::int64_t(records.size()) - 1; }
  std::size_t steps() const { return records.size() - 1; }
  // Indices scored per step: every step after the first, or the first alone.
  std::pair<std::size_t, std::size_t> scored() const {
    return records.size() > 1 ? std::make_pair(std::size_t(1), records.size())
                              : std::make_pair(std::size_t(0), std::size_t(1));
  }
};

AgentTrack track_of(const TrajectoryLog& log, const MissionInfo& m) {
  AgentTrack t;
  t.info = &m;
  std::int64_t start = -1;
  for (const auto& s : log.snapshots)
    if (s.find(m.id)) {
      start = s.step;
      break;
    }
  if (start < 0) throw MalformedLogError("mission '" + m.id + "' never appears in the log");
  t.start = start;
  const std::int64_t last = log.snapshots.back().step;
  std::int64_t end = last;
  if (const auto* o = log.outcome(m.id)) {
    t.outcome = *o;
    if (o->kind != OutcomeKind::running) end = std::clamp(o->step, start, last);
  }
  for (std::int64_t k = start; k <= end; ++k) {
    const ActorRecord* r = log.snapshots[std::size_t(k)].find(m.id);
    if (!r)
      throw MalformedLogError("mission '" + m.id + "' missing from snapshot " + std::to_string(k));
    t.records.push_back(r);
  }
  return t;
}

double progress_term(const AgentTrack& t) {
  const Vec2 g = t.info->goal;
  const double d_init = (t.records.front()->state.position - g).norm();
  if (!(d_init > 0)) throw MalformedLogError("mission '" + t.info->id + "' starts at its goal");
  const double d_final = t.outcome.kind == OutcomeKind::goal_reached
                             ? 0.0
                             : (t.records.back()->state.position - g).norm();
  return 1.0 - std::min(d_final, d_init) / d_init;
}

double comfort_penalty(const AgentTrack& t, double dt, const MetricConfig& c) {
  const std::size_t n = t.steps();
  const std::size_t np = std::size_t(std::llround(c.penalty_period / dt));
  if (n + np == 0) return 0.0;
  // prefix[j] = number of indices < j with dyn > 1
  std::vector<std::size_t> prefix(n + 2, 0);
  for (std::size_t j = 0; j <= n; ++j)
    prefix[j + 1] = prefix[j] + (dyn_ratio(t.records[j]->state, c) > 1.0 ? 1 : 0);
  std::size_t uncomfortable = 0;
  for (std::size_t k = 1; k <= n + np; ++k) {
    const std::size_t lo = k > np ? k - np : 0;
    const std::size_t hi = std::min(n, k);
    if (lo <= hi && prefix[hi + 1] - prefix[lo] > 0) ++uncomfortable;
  }
  return double(uncomfortable) / double(n + np);
}

double lane_offset_penalty(const ActorRecord& r) {
  if (r.offroad == OffroadStatus::full_offroad) return 1.0;
  if (!(r.lane_width > 0)) throw MalformedLogError("actor '" + r.id + "' has no lane width");
  return std::min(std::abs(r.lane_offset) / (0.5 * r.lane_width), 1.0);
}

double mean_lane_offset(const AgentTrack& t) {
  const auto [a, b] = t.scored();
  double sum = 0;
  for (std::size_t i = a; i < b; ++i) sum += lane_offset_penalty(*t.records[i]);
  return sum / double(b - a);
}

double rule_term(const AgentTrack& t) {
  const auto [a, b] = t.scored();
  double speed = 0, way = 0, off = 0;
  for (std::size_t i = a; i < b; ++i) {
    const ActorRecord& r = *t.records[i];
    const double excess = std::max(0.0, r.state.speed - r.speed_limit);
    if (excess > 0) speed += std::min(excess / (0.5 * r.speed_limit), 1.0);
    way += r.wrong_way ? 1.0 : 0.0;
    off += r.offroad != OffroadStatus::on_road ? 1.0 : 0.0;
  }
  const double n = double(b - a);
  return 1.0 - (speed / n + way / n + off / n) / 3.0;
}

double mte_term(const AgentTrack& t, const TrajectoryLog& log) {
  const double t_sc = log.time_limit;
  double tr = t_sc;
  if (t.outcome.kind == OutcomeKind::goal_reached) tr = double(t.end() - t.start) * log.dt;
  return 1.0 - std::clamp(tr / t_sc, 0.0, 1.0);
}

double follow_penalty(const ActorRecord& ego, const ActorRecord& lead, const MetricConfig& c) {
  const Vec2 h = heading_vector(lead.state.heading);
  const Vec2 rear = lead.state.position - h * (lead.state.length / 2);
  const Vec2 front = ego.state.position + heading_vector(ego.state.heading) * (ego.state.length / 2);
  const double d = (rear - front).dot(h);
  const double margin = std::max(c.min_headway * lead.state.speed, c.min_margin);
  if (d < margin) return 1.0;
  const double tg = (d - margin) / std::max(ego.state.speed, 0.1);
  return tg > c.t_max ? 1.0 : tg / c.t_max;
}

double sfd_term(const AgentTrack& t, const TrajectoryLog& log, const MetricConfig& c) {
  if (!t.info->lead) throw MalformedLogError("mission '" + t.info->id + "' has no lead actor");
  const auto [a, b] = t.scored();
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t i = a; i < b; ++i) {
    const auto& snap = log.snapshots[std::size_t(t.start) + i];
    const ActorRecord* lead = snap.find(*t.info->lead);
    if (!lead) continue;
    sum += follow_penalty(*t.records[i], *lead, c);
    ++count;
  }
  if (count == 0) return 0.0;
  return 1.0 - sum / double(count);
}

template <typename Fn>
double suite_mean(const std::vector<TrajectoryLog>& logs, Fn&& per_agent) {
  if (logs.empty()) throw UsageError("no logs to evaluate");
  double total = 0;
  for (const auto& log : logs) {
    if (log.missions.empty())
      throw MalformedLogError("log '" + log.scenario_id + "' has no mission agents");
    double sum = 0;
    for (const auto& m : log.missions) sum += per_agent(track_of(log, m), log);
    total += sum / double(log.missions.size());
  }
  return total / double(logs.size());
}

}  // namespace

double progress_rate(const std::vector<TrajectoryLog>& logs) {
  return suite_mean(logs, [](const AgentTrack& t, const TrajectoryLog&) { return progress_term(t); });
}

double humanness(const std::vector<TrajectoryLog>& logs, const MetricConfig& c) {
  return suite_mean(logs, [&](const AgentTrack& t, const TrajectoryLog& log) {
    return 1.0 - (comfort_penalty(t, log.dt, c) + mean_lane_offset(t)) / 2.0;
  });
}

double rule_compliance(const std::vector<TrajectoryLog>& logs) {
  return suite_mean(logs, [](const AgentTrack& t, const TrajectoryLog&) { return rule_term(t); });
}

double mission_time_efficiency(const std::vector<TrajectoryLog>& logs) {
  return suite_mean(logs,
                    [](const AgentTrack& t, const TrajectoryLog& log) { return mte_term(t, log); });
}

double safe_following_distance(const std::vector<TrajectoryLog>& logs, const MetricConfig& c) {
  return suite_mean(
      logs, [&](const AgentTrack& t, const TrajectoryLog& log) { return sfd_term(t, log, c); });
}

double combine(double progress, double rule, double human, double task, const MetricWeights& w) {
  for (double v : {w.progress, w.rule_compliance, w.humanness, w.task})
    if (!(v >= 0)) throw ValidationError("metric weights must be non-negative");
  const double sum = w.progress + w.rule_compliance + w.humanness + w.task;
  if (!(sum > 0)) throw ValidationError("metric weights must not all be zero");
  return (w.progress * progress + w.rule_compliance * rule + w.humanness * human + w.task * task) /
         sum;
}

ScenarioScores score_scenario(const TrajectoryLog& log, const MetricConfig& c) {
  if (log.missions.empty())
    throw MalformedLogError("log '" + log.scenario_id + "' has no mission agents");
  ScenarioScores s;
  s.scenario_id = log.scenario_id;
  s.family = log.family;
  for (const auto& m : log.missions) {
    const AgentTrack t = track_of(log, m);
    AgentScores a;
    a.id = m.id;
    a.progress = progress_term(t);
    a.rule_compliance = rule_term(t);
    a.comfort_penalty = comfort_penalty(t, log.dt, c);
    a.lane_offset = mean_lane_offset(t);
    a.humanness = 1.0 - (a.comfort_penalty + a.lane_offset) / 2.0;
    if (log.family == TaskFamily::collaborative)
      a.mte = mte_term(t, log);
    else
      a.sfd = sfd_term(t, log, c);
    s.progress += a.progress;
    s.rule_compliance += a.rule_compliance;
    s.humanness += a.humanness;
    s.task += a.mte ? *a.mte : *a.sfd;
    s.agents.push_back(std::move(a));
  }
  const double n = double(s.agents.size());
  s.progress /= n;
  s.rule_compliance /= n;
  s.humanness /= n;
  s.task /= n;
  s.s_bench = combine(s.progress, s.rule_compliance, s.humanness, s.task, c.weights);
  return s;
}

MetricReport evaluate(const std::vector<TrajectoryLog>& logs, const MetricConfig& c) {
  validate(c);
  if (logs.empty()) throw UsageError("no logs to evaluate");
  MetricReport r;
  r.family = logs.front().family;
  for (const auto& log : logs) {
    if (log.family != r.family)
      throw MalformedLogError("log '" + log.scenario_id + "' belongs to a different task family");
    r.scenarios.push_back(score_scenario(log, c));
  }
  const double n = double(r.scenarios.size());
  for (const auto& s : r.scenarios) {
    r.progress += s.progress;
    r.rule_compliance += s.rule_compliance;
    r.humanness += s.humanness;
    r.task += s.task;
  }
  r.progress /= n;
  r.rule_compliance /= n;
  r.humanness /= n;
  r.task /= n;
  r.s_bench = combine(r.progress, r.rule_compliance, r.humanness, r.task, c.weights);
  return r;
}

json to_json(const MetricReport& r) {
  const std::string task = r.task_name();
  json scenarios = json::array();
  for (const auto& s : r.scenarios) {
    json agents = json::array();
    for (const auto& a : s.agents)
      agents.push_back({{"id", a.id},
                        {"PR", a.progress},
                        {"RC", a.rule_compliance},
                        {"Humanness", a.humanness},
                        {"comf", a.comfort_penalty},
                        {"lc_off", a.lane_offset},
                        {task, a.mte ? *a.mte : *a.sfd}});
    scenarios.push_back({{"id", s.scenario_id},
                         {"PR", s.progress},
                         {"RC", s.rule_compliance},
                         {"Humanness", s.humanness},
                         {task, s.task},
                         {"S_bench", s.s_bench},
                         {"agents", std::move(agents)}});
  }
  return {{"family", to_string(r.family)},
          {"metrics",
           {{"PR", r.progress},
            {"RC", r.rule_compliance},
            {"Humanness", r.humanness},
            {task, r.task},
            {"S_bench", r.s_bench}}},
          {"scenarios", std::move(scenarios)}};
}

std::string to_csv(const MetricReport& r, const std::string& label) {
  std::ostringstream os;
  char buf[256];
  os << "Model,Scenario,PR,RC,Humanness," << r.task_name() << ",S_bench\n";
  const auto row = [&](const std::string& scenario, double pr, double rc, double h, double t,
                       double s) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f,%.6f\n", pr, rc, h, t, s);
    os << label << ',' << scenario << buf;
  };
  for (const auto& s : r.scenarios)
    row(s.scenario_id, s.progress, s.rule_compliance, s.humanness, s.task, s.s_bench);
  row("all", r.progress, r.rule_compliance, r.humanness, r.task, r.s_bench);
  return os.str();
}

}  // namespace dbench
