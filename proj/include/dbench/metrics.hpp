#pragma once

#include "dbench/trajectory_log.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace dbench {

struct MetricWeights {
  double progress = 0.10;
  double rule_compliance = 0.45;
  double humanness = 0.15;
  double task = 0.30;  // MTE for collaborative suites, SFD for adaptive ones
};

struct MetricConfig {
  Vec2 jerk_max = Vec2(0.9, 0.9);  // (long, lat), m/s^3
  Vec2 acc_max = Vec2(2.0, 1.47);  // (long, lat), m/s^2
  double penalty_period = 1.0;     // T_p, s
  double min_headway = 1.0;        // follow margin length per m/s of lead speed, s
  double min_margin = 2.0;         // follow margin floor, m
  double t_max = 3.0;              // s
  MetricWeights weights;
};

/// Throws ValidationError for non-positive parameters or weights not summing to 1.
/// A zero penalty period is allowed.
void validate(const MetricConfig& config);
MetricConfig metric_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MetricConfig& config);

/// Discomfort ratio of one state: the largest of the four normalized
/// acceleration and jerk components.
double dyn_ratio(const VehicleState& s, const MetricConfig& config);

/// Per-agent terms before averaging. `progress` etc. are the per-agent
/// contributions in metric orientation (1 is best).
struct AgentScores {
  ActorId id;
  double progress = 0;
  double rule_compliance = 0;
  double humanness = 0;
  double comfort_penalty = 0;  // comf
  double lane_offset = 0;      // mean lc-off
  std::optional<double> mte;
  std::optional<double> sfd;
};

struct ScenarioScores {
  std::string scenario_id;
  TaskFamily family = TaskFamily::collaborative;
  double progress = 0;
  double rule_compliance = 0;
  double humanness = 0;
  double task = 0;
  double s_bench = 0;
  std::vector<AgentScores> agents;
};

struct MetricReport {
  TaskFamily family = TaskFamily::collaborative;
  double progress = 0;
  double rule_compliance = 0;
  double humanness = 0;
  double task = 0;
  double s_bench = 0;
  std::vector<ScenarioScores> scenarios;

  const char* task_name() const { return family == TaskFamily::collaborative ? "MTE" : "SFD"; }
};

double progress_rate(const std::vector<TrajectoryLog>& logs);
double humanness(const std::vector<TrajectoryLog>& logs, const MetricConfig& config);
double rule_compliance(const std::vector<TrajectoryLog>& logs);
double mission_time_efficiency(const std::vector<TrajectoryLog>& logs);
double safe_following_distance(const std::vector<TrajectoryLog>& logs, const MetricConfig& config);

/// Weighted average of the four metrics: sum(w * m) / sum(w).
double combine(double progress, double rule_compliance, double humanness, double task,
               const MetricWeights& weights);

/// Scores one scenario's mission agents.
ScenarioScores score_scenario(const TrajectoryLog& log, const MetricConfig& config);

/// Full report. All logs must share one task family; throws UsageError on an
/// empty list and MalformedLogError on mixed families.
MetricReport evaluate(const std::vector<TrajectoryLog>& logs, const MetricConfig& config);

nlohmann::json to_json(const MetricReport& report);
/// Table layout: one row per scenario followed by a row for the whole suite.
std::string to_csv(const MetricReport& report, const std::string& label);

}  // namespace dbench
