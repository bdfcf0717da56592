#include "dbench/runner.hpp"

#include "dbench/errors.hpp"
#include "dbench/world.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

namespace dbench {

TrajectoryLog run_scenario(const Scenario& scenario, Policy& policy) {
  World world(scenario);
  policy.reset(scenario);
  while (!world.done()) {
    std::map<ActorId, Action> actions;
    for (const auto& id : world.active_missions()) actions.emplace(id, policy.act(world.observe(id)));
    world.step(actions);
  }
  return world.finish_log();
}

RunResult run_suite(SuiteManifest suite, const PolicyFactory& make_policy, const RunOptions& options) {
  if (options.seed)
    for (std::size_t i = 0; i < suite.scenarios.size(); ++i) suite.scenarios[i].seed = *options.seed + i;
  validate(suite);

  RunResult result;
  if (options.metrics) {
    result.metrics = *options.metrics;
  } else {
    result.metrics.weights = suite.weights;
  }
  validate(result.metrics);

  const std::size_t n = suite.scenarios.size();
  result.logs.resize(n);
  const int jobs = std::max(1, std::min<int>(options.jobs, int(n)));
  if (jobs == 1) {
    auto policy = make_policy();
    for (std::size_t i = 0; i < n; ++i) result.logs[i] = run_scenario(suite.scenarios[i], *policy);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        try {
          auto policy = make_policy();
          for (std::size_t i = next++; i < n; i = next++)
            result.logs[i] = run_scenario(suite.scenarios[i], *policy);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  result.report = evaluate(result.logs, result.metrics);
  return result;
}

void write_run(const RunResult& result, const std::filesystem::path& out, const std::string& label) {
  namespace fs = std::filesystem;
  fs::create_directories(out / "logs");
  for (const auto& log : result.logs) write_log_file(out / "logs" / (log.scenario_id + ".jsonl"), log);
  auto write_text = [](const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
  };
  write_text(out / "report.json", to_json(result.report).dump(2) + "\n");
  write_text(out / "report.csv", to_csv(result.report, label));
  write_text(out / "metric_config.json", to_json(result.metrics).dump(2) + "\n");
}

}  // namespace dbench
