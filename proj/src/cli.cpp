#include "viewseek/cli.hpp"

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "viewseek/bench.hpp"
#include "viewseek/errors.hpp"
#include "viewseek/io.hpp"

namespace viewseek {

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kIoError = 2;

namespace fs = std::filesystem;

struct Options {
  std::uint64_t seed = 0;
  std::string config;
  std::string out = ".";
  int jobs = 1;
  int per_category = 100;
  std::string suite;
  std::string agent = "aif";
  std::vector<std::string> results;
  std::string external;
  int record = 0;
  bool explore = false;
  int steps = 100;
};

AgentContext load_context(const Options& o) {
  if (o.config.empty()) return AgentContext{};
  const std::string text = read_text_file(o.config);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("config: ") + e.what());
  }
  return context_from_json(j);
}

std::vector<SuiteRecord> load_suite(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::Config, "--suite is required");
  const std::string text = read_text_file(path);
  try {
    return suite_from_json(Json::parse(text));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("suite: ") + e.what());
  }
}

int cmd_suite(const Options& o) {
  const auto suite = build_suite(o.seed, o.per_category);
  const fs::path path = fs::path(o.out) / "suite.json";
  write_text_file(path, dump_suite(suite));
  std::cout << "wrote " << suite.size() << " records to " << path.string() << "\n";
  return kOk;
}

int cmd_run(const Options& o) {
  const auto kind = parse_agent(o.agent);
  if (!kind) throw Error(ErrorCode::Config, "unknown agent '" + o.agent + "'");
  RunSettings settings;
  settings.ctx = load_context(o);
  settings.master_seed = o.seed;
  settings.jobs = o.jobs;
  const auto suite = load_suite(o.suite);
  const auto results = run_suite(suite, *kind, settings);
  const fs::path path = fs::path(o.out) / ("results_" + o.agent + ".json");
  write_text_file(path, results_to_json(results).dump(2) + "\n");
  int wins = 0;
  for (const auto& r : results) wins += r.success ? 1 : 0;
  std::cout << o.agent << ": " << wins << "/" << results.size() << " successful, results in "
            << path.string() << "\n";
  return kOk;
}

int cmd_report(const Options& o) {
  if (o.results.empty() && o.external.empty()) {
    throw Error(ErrorCode::Config, "report needs --results and/or --external");
  }
  MetricsTable table;
  if (!o.results.empty()) {
    std::vector<EpisodeResult> all;
    for (const auto& path : o.results) {
      Json j;
      try {
        j = Json::parse(read_text_file(path));
      } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::Config, path + ": " + e.what());
      }
      const auto rs = results_from_json(j);
      all.insert(all.end(), rs.begin(), rs.end());
    }
    table = aggregate(all);
  }
  if (!o.external.empty()) {
    // Externally produced rows are shown alongside, never recomputed.
    const MetricsTable ext = parse_csv(read_text_file(o.external));
    table.rows.insert(table.rows.end(), ext.rows.begin(), ext.rows.end());
  }
  write_text_file(fs::path(o.out) / "report.csv", to_csv(table));
  const std::string text = to_text(table);
  write_text_file(fs::path(o.out) / "report.txt", text);
  std::cout << text;
  return kOk;
}

int cmd_trace(const Options& o) {
  RunSettings settings;
  settings.ctx = load_context(o);
  settings.master_seed = o.seed;
  const auto suite = load_suite(o.suite);
  const SuiteRecord* rec = nullptr;
  for (const auto& r : suite) {
    if (r.id == o.record) rec = &r;
  }
  if (rec == nullptr) throw Error(ErrorCode::Config, "no record with id " + std::to_string(o.record));

  EpisodeTrace trace;
  Json doc;
  if (o.explore) {
    const auto res = run_exploration(rec->scene, settings, mix_seed(o.seed, rec->id), o.steps, &trace);
    trace.scene_id = rec->id;
    doc = to_json(trace);
    doc["exploration"] = to_json(res);
  } else {
    const auto kind = parse_agent(o.agent);
    if (!kind) throw Error(ErrorCode::Config, "unknown agent '" + o.agent + "'");
    const auto result = run_episode(*rec, *kind, settings, &trace);
    doc = to_json(trace);
    doc["result"] = to_json(result);
  }
  doc["scene"] = to_json(rec->scene);
  doc["goal"] = to_json(rec->goal);
  const fs::path path = fs::path(o.out) / ("trace_" + std::to_string(rec->id) + ".json");
  write_text_file(path, doc.dump() + "\n");
  std::cout << "wrote " << trace.steps.size() << " steps to " << path.string() << "\n";
  return kOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"viewseek: active viewpoint search benchmark"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--config", o.config, "JSON config with noise/planner/belief/env blocks");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--jobs", o.jobs, "parallel episodes")->check(CLI::PositiveNumber);
  };

  auto* suite = app.add_subcommand("suite", "build an evaluation suite");
  common(suite);
  suite->add_option("--per-category", o.per_category, "scenes per target category")
      ->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "run one agent over a suite");
  common(run);
  run->add_option("--suite", o.suite, "suite JSON")->required();
  run->add_option("--agent", o.agent, "aif | greedy | greedy-infogain | random | oracle");

  auto* report = app.add_subcommand("report", "aggregate results into CSV and a text table");
  common(report);
  report->add_option("--results", o.results, "results JSON files");
  report->add_option("--external", o.external, "extra CSV rows to show alongside");

  auto* trace = app.add_subcommand("trace", "export a per-step trace of one episode");
  common(trace);
  trace->add_option("--suite", o.suite, "suite JSON")->required();
  trace->add_option("--id", o.record, "record id");
  trace->add_option("--agent", o.agent, "agent for goal-directed traces");
  trace->add_flag("--explore", o.explore, "goal-free exploration instead of the record's goal");
  trace->add_option("--steps", o.steps, "exploration steps")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*suite) return cmd_suite(o);
    if (*run) return cmd_run(o);
    if (*report) return cmd_report(o);
    if (*trace) return cmd_trace(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::Io ? kIoError : kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace viewseek
