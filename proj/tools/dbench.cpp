#include "dbench/bridge.hpp"
#include "dbench/diagnose.hpp"
#include "dbench/errors.hpp"
#include "dbench/generators.hpp"
#include "dbench/metrics.hpp"
#include "dbench/render.hpp"
#include "dbench/runner.hpp"
#include "dbench/scenario.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dbench;

namespace {

json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw UsageError("cannot open " + p.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw UsageError("cannot write " + p.string());
  f << text;
}

// A suite file is either a manifest or generator parameters.
SuiteManifest load_suite(const fs::path& p) {
  const json j = read_json(p);
  if (j.is_object() && j.contains("generator")) return generate_suite(j);
  return manifest_from_json(j, p.parent_path());
}

MetricConfig load_metric_config(const std::string& path) {
  MetricConfig c = metric_config_from_json(read_json(path));
  validate(c);
  return c;
}

struct RunArgs {
  std::string suite;
  std::string policy = "waypoint_follower";
  std::string bridge_cmd;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string metric_config;
  std::string config;
  int jobs = 1;
  int bridge_timeout_ms = 10000;
};

// Keys in the config file replace the matching flags.
void apply_config(RunArgs& a) {
  if (a.config.empty()) return;
  const json j = read_json(a.config);
  if (!j.is_object()) throw ParseError(a.config + ": config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "suite") a.suite = v.get<std::string>();
      else if (key == "policy") a.policy = v.get<std::string>();
      else if (key == "bridge_cmd") a.bridge_cmd = v.get<std::string>();
      else if (key == "seed") a.seed = v.get<std::uint64_t>();
      else if (key == "out") a.out = v.get<std::string>();
      else if (key == "metric_config") a.metric_config = v.get<std::string>();
      else if (key == "jobs") a.jobs = v.get<int>();
      else if (key == "bridge_timeout_ms") a.bridge_timeout_ms = v.get<int>();
      else throw ParseError(a.config + ": unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(a.config + ": " + e.what());
  }
}

int cmd_run(RunArgs a) {
  apply_config(a);
  if (a.suite.empty()) throw UsageError("run needs --suite");
  const SuiteManifest suite = load_suite(a.suite);
  RunOptions opts;
  opts.seed = a.seed;
  if (!a.metric_config.empty()) opts.metrics = load_metric_config(a.metric_config);
  PolicyFactory factory;
  std::string label;
  if (!a.bridge_cmd.empty()) {
    const auto timeout = std::chrono::milliseconds(a.bridge_timeout_ms);
    factory = [cmd = a.bridge_cmd, timeout] { return std::make_unique<BridgePolicy>(cmd, timeout); };
    label = "bridge";
    opts.jobs = 1;
  } else {
    make_builtin_policy(a.policy);  // fail early on a bad name
    factory = [spec = a.policy] { return make_builtin_policy(spec); };
    label = a.policy;
    opts.jobs = a.jobs;
  }
  const RunResult result = run_suite(suite, factory, opts);
  write_run(result, a.out, label);
  const auto& r = result.report;
  std::cout << "suite " << suite.name << ": " << result.logs.size() << " scenario(s), PR "
            << r.progress << ", RC " << r.rule_compliance << ", Humanness " << r.humanness << ", "
            << r.task_name() << ' ' << r.task << ", S_bench " << r.s_bench << "\n"
            << "wrote " << (fs::path(a.out) / "report.json").string() << "\n";
  return 0;
}

int cmd_evaluate(const std::vector<std::string>& logs, const std::string& metric_config,
                 const std::string& out, const std::string& label) {
  if (logs.empty()) throw UsageError("evaluate needs at least one log");
  std::vector<TrajectoryLog> parsed;
  for (const auto& p : logs) parsed.push_back(read_log_file(p));
  MetricConfig cfg;
  if (!metric_config.empty()) cfg = load_metric_config(metric_config);
  const MetricReport report = evaluate(parsed, cfg);
  const std::string text = to_json(report).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    fs::create_directories(out);
    write_text(fs::path(out) / "report.json", text);
    write_text(fs::path(out) / "report.csv", to_csv(report, label));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dbench: multi-agent driving simulator and planning benchmark"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a policy over a suite and score it");
  run->add_option("--suite", run_args.suite, "Suite manifest or generator parameters (JSON)");
  run->add_option("--policy", run_args.policy, "Builtin policy, name[:action-space]");
  run->add_option("--bridge-cmd", run_args.bridge_cmd, "Shell command serving an external policy");
  run->add_option("--seed", run_args.seed, "Seed replacing scenario seeds (seed + index)");
  run->add_option("--out", run_args.out, "Output directory");
  run->add_option("--metric-config", run_args.metric_config, "Metric configuration (JSON)");
  run->add_option("--config", run_args.config, "JSON file whose keys override flags");
  run->add_option("--jobs", run_args.jobs, "Worker threads for builtin policies")->check(CLI::PositiveNumber);
  run->add_option("--bridge-timeout-ms", run_args.bridge_timeout_ms, "Per-frame bridge timeout");

  std::vector<std::string> eval_logs;
  std::string eval_metric, eval_out, eval_label = "offline";
  auto* ev = app.add_subcommand("evaluate", "Score trajectory logs offline");
  ev->add_option("logs", eval_logs, "Trajectory logs (.jsonl)");
  ev->add_option("--metric-config", eval_metric, "Metric configuration (JSON)");
  ev->add_option("--out", eval_out, "Directory for report.json and report.csv (stdout otherwise)");
  ev->add_option("--label", eval_label, "Model column of the CSV");

  std::string diag_var = "agents", diag_out;
  std::vector<int> diag_counts{1, 10, 20, 50};
  std::int64_t diag_steps = kDefaultDiagnoseSteps;
  auto* dg = app.add_subcommand("diagnose", "Measure simulation throughput");
  dg->add_option("--variable", diag_var, "traffic_actors, agents or road_edges");
  dg->add_option("--counts", diag_counts, "Counts to test")->delimiter(',');
  dg->add_option("--steps", diag_steps, "Steps per measurement");
  dg->add_option("--out", diag_out, "CSV output file (stdout otherwise)");

  std::string render_log, render_out;
  auto* rd = app.add_subcommand("render", "Draw a trajectory log as SVG");
  rd->add_option("--log", render_log, "Trajectory log")->required();
  rd->add_option("--out", render_out, "SVG output file")->required();

  std::string gen_params, gen_out;
  auto* gn = app.add_subcommand("generate", "Expand generator parameters into a manifest");
  gn->add_option("--params", gen_params, "Generator parameters (JSON)")->required();
  gn->add_option("--out", gen_out, "Manifest output file (stdout otherwise)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*ev) return cmd_evaluate(eval_logs, eval_metric, eval_out, eval_label);
    if (*dg) {
      const auto rows = diagnose(diagnose_variable_from_string(diag_var), diag_counts, diag_steps);
      const std::string table = format_diagnose_table(diagnose_variable_from_string(diag_var), rows);
      if (diag_out.empty()) std::cout << table;
      else write_text(diag_out, table);
      return 0;
    }
    if (*rd) {
      render_svg_file(render_log, render_out);
      return 0;
    }
    if (*gn) {
      const std::string text = to_json(generate_suite(read_json(gen_params))).dump(2) + "\n";
      if (gen_out.empty()) std::cout << text;
      else write_text(gen_out, text);
      return 0;
    }
  } catch (const BridgeError& e) {
    std::cerr << "bridge error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const MalformedLogError& e) {
    std::cerr << "malformed log: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
