#pragma once

#include "dbench/metrics.hpp"
#include "dbench/policies.hpp"
#include "dbench/scenario.hpp"
#include "dbench/trajectory_log.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dbench {

/// Runs one scenario to completion with `policy` driving every mission actor.
TrajectoryLog run_scenario(const Scenario& scenario, Policy& policy);

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

struct RunOptions {
  std::optional<std::uint64_t> seed;    // replaces scenario seeds with seed + index
  std::optional<MetricConfig> metrics;  // default config with the suite's weights when unset
  int jobs = 1;                         // worker threads, one policy instance each
};

struct RunResult {
  std::vector<TrajectoryLog> logs;
  MetricConfig metrics;
  MetricReport report;
};

/// Scenarios run independently; results keep suite order whatever `jobs` is.
RunResult run_suite(SuiteManifest suite, const PolicyFactory& make_policy,
                    const RunOptions& options = {});

/// Writes logs/<scenario>.jsonl, report.json, report.csv and metric_config.json.
void write_run(const RunResult& result, const std::filesystem::path& out, const std::string& label);

}  // namespace dbench
