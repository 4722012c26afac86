#include "cli.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dio/error.hpp"
#include "dio/harness.hpp"
#include "dio/llm.hpp"
#include "dio/run_record.hpp"
#include "dio/task_catalog.hpp"

namespace dio::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void report_error(std::ostream& err, const std::exception& e) {
  if (const auto* d = dynamic_cast<const Error*>(&e)) {
    err << "error [" << d->component() << "]: " << d->what() << "\n";
  } else {
    err << "error: " << e.what() << "\n";
  }
}

std::unique_ptr<LlmClient> make_llm(const RunConfig& c) {
  if (!c.mock.empty()) return ScriptedMock::load(c.mock);
  auto client = HttpChatClient::from_env();
  return client;
}

std::unique_ptr<Executor> make_executor(const RunConfig& c) {
  if (!c.fake_exec.empty()) return std::make_unique<FakeExecutor>(FakeExecutor::load(c.fake_exec));
  std::string runner = c.runner;
  if (runner.empty()) {
    const char* env = std::getenv("DIO_RUNNER");
    runner = env ? env : "python3 -m guest_runner";
  }
  SubprocessOptions opts;
  opts.argv = split_command(runner);
  return std::make_unique<SubprocessExecutor>(std::move(opts));
}

std::vector<Task> load_tasks(const RunConfig& c) {
  auto all = c.tasks_dir.empty() ? build_catalog() : load_benchmark(c.tasks_dir);
  auto tasks = select_tasks(all, c);
  if (tasks.empty()) throw ConfigError("no task matches the given filters");
  return tasks;
}

void print_summary(const SuiteReport& s, std::ostream& out) {
  out << "mode " << s.mode << ": solved " << s.overall.solved << "/" << s.overall.tasks << " (pass rate "
      << s.overall.pass_rate << ", mean sample pass ratio " << s.overall.mean_sample_pass_ratio << ")\n";
}

int finish(const SuiteReport& s, std::ostream& out, std::ostream& err) {
  print_summary(s, out);
  for (const auto& r : s.records) {
    if (!r.error.empty()) err << "error [" << r.task_id << "]: " << r.error << "\n";
  }
  return s.infrastructure_failures > 0 ? kExitInfra : kExitOk;
}

enum class Kind { Suite, Autonomous };

int run_common(const Overrides& o, Kind kind, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::vector<Task> tasks;
  try {
    cfg = resolve_config(o);
    if (kind == Kind::Autonomous) cfg.mode = "autonomous";
    cfg.validate();
    tasks = load_tasks(cfg);
  } catch (const std::exception& e) {
    report_error(err, e);
    return kExitUsage;
  }

  std::unique_ptr<LlmClient> llm;
  std::unique_ptr<Executor> executor;
  try {
    executor = make_executor(cfg);
  } catch (const IoError& e) {
    report_error(err, e);
    return kExitUsage;
  } catch (const std::exception& e) {
    report_error(err, e);
    return kExitInfra;
  }
  try {
    llm = make_llm(cfg);
  } catch (const IoError& e) {
    report_error(err, e);
    return kExitUsage;
  } catch (const std::exception& e) {
    report_error(err, e);
    return kExitInfra;
  }

  SuiteOptions opts;
  opts.workers = cfg.workers;
  if (!cfg.out_dir.empty()) opts.out_dir = fs::path(cfg.out_dir);
  try {
    if (opts.out_dir) write_text_file(*opts.out_dir / "config.json", to_json(cfg).dump(2) + "\n", "cli");
    SuiteReport report;
    if (kind == Kind::Autonomous) {
      report = run_autonomous_suite(tasks, cfg.engine, *llm, *executor, opts);
    } else if (cfg.mode == "direct" || cfg.mode == "bon" || cfg.mode == "sc") {
      report = run_tts_baselines(tasks, cfg.tts_samples, tts_from_string(cfg.mode), cfg.engine, *llm, *executor, opts);
    } else {
      report = run_suite(tasks, cfg.engine, mode_from_string(cfg.mode), *llm, *executor, opts);
    }
    return finish(report, out, err);
  } catch (const IoError& e) {
    report_error(err, e);
    return kExitUsage;
  } catch (const std::exception& e) {
    report_error(err, e);
    return kExitInfra;
  }
}

}  // namespace

RunConfig resolve_config(const Overrides& o) {
  RunConfig c = o.config ? load_run_config(*o.config) : RunConfig{};
  if (o.mode) c.mode = *o.mode;
  if (o.mock) c.mock = *o.mock;
  if (o.out) c.out_dir = *o.out;
  if (o.tasks) c.task_ids = split_csv(*o.tasks);
  if (o.seed) c.engine.seed = *o.seed;
  if (o.islands) c.engine.islands = *o.islands;
  if (o.iters) c.engine.total_iterations = *o.iters;
  if (o.stages) c.engine.stages = *o.stages;
  if (o.fake_exec) c.fake_exec = *o.fake_exec;
  if (o.runner) c.runner = *o.runner;
  if (o.samples) c.tts_samples = *o.samples;
  if (o.workers) c.workers = *o.workers;
  return c;
}

int cmd_gen(const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  try {
    const auto manifest = export_benchmark(build_catalog(), out_dir);
    out << manifest.sha256 << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    report_error(err, e);
    return kExitUsage;
  }
}

int cmd_run(const Overrides& o, std::ostream& out, std::ostream& err) { return run_common(o, Kind::Suite, out, err); }

int cmd_autonomous(const Overrides& o, std::ostream& out, std::ostream& err) {
  return run_common(o, Kind::Autonomous, out, err);
}

int cmd_report(const std::vector<fs::path>& dirs, const std::optional<std::string>& out_dir, std::ostream& out,
               std::ostream& err) {
  if (dirs.empty()) {
    err << "error [experiment_harness]: no run directories given\n";
    return kExitUsage;
  }
  std::vector<RunRecord> records;
  try {
    for (const auto& d : dirs) {
      if (fs::is_directory(d / "runs")) {
        std::vector<fs::path> runs;
        for (const auto& entry : fs::directory_iterator(d / "runs")) runs.push_back(entry.path());
        std::sort(runs.begin(), runs.end());
        for (const auto& r : runs) records.push_back(read_run_dir(r));
      } else {
        records.push_back(read_run_dir(d));
      }
    }
  } catch (const std::exception& e) {
    report_error(err, e);
    return kExitUsage;
  }
  std::string label = records.empty() ? "" : records.front().mode;
  for (const auto& r : records) {
    if (r.mode != label) label = "merged";
  }
  try {
    const auto report = summarize(std::move(records), label);
    if (out_dir) {
      write_suite_outputs(report, *out_dir);
      print_summary(report, out);
    } else {
      out << report_json(report);
    }
  } catch (const std::exception& e) {
    report_error(err, e);
    return kExitUsage;
  }
  return kExitOk;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Curriculum-driven program synthesis from input/output examples"};
  app.require_subcommand(1);

  std::string gen_out = "tasks";
  auto* gen = app.add_subcommand("gen", "Build the benchmark and write tasks plus manifest.json");
  gen->add_option("--out", gen_out, "Output directory");

  Overrides o;
  auto add_run_flags = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option("--mock", o.mock, "Scripted LLM responses instead of the HTTP endpoint");
    sub->add_option("--out", o.out, "Output directory for run records and reports");
    sub->add_option("--tasks", o.tasks, "Comma separated task ids");
    sub->add_option("--seed", o.seed, "Run seed");
    sub->add_option("--islands", o.islands, "Island count");
    sub->add_option("--iters", o.iters, "Total iteration budget");
    sub->add_option("--stages", o.stages, "Curriculum stage count");
    sub->add_option("--fake-exec", o.fake_exec, "Tabulated executor instead of the guest runner");
    sub->add_option("--runner", o.runner, "Guest runner command line");
    sub->add_option("--workers", o.workers, "Tasks run in parallel");
  };
  auto* run = app.add_subcommand("run", "Run a search suite or a sampling baseline");
  add_run_flags(run);
  run->add_option("--mode", o.mode, "dio|ablate-ce|ablate-tpp|ablate-ef|flat|direct|bon|sc");
  run->add_option("--samples", o.samples, "Sample count for bon and sc");
  auto* autonomous = app.add_subcommand("autonomous", "Search with self-proposed examples");
  add_run_flags(autonomous);

  std::vector<std::string> report_dirs;
  std::optional<std::string> report_out;
  auto* report = app.add_subcommand("report", "Merge run directories into one report");
  report->add_option("dirs", report_dirs, "Suite or run directories");
  report->add_option("--out", report_out, "Write report.json and CSV tables here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error [cli]: " << e.what() << "\n";
    return kExitUsage;
  }

  if (gen->parsed()) return cmd_gen(gen_out, out, err);
  if (run->parsed()) return cmd_run(o, out, err);
  if (autonomous->parsed()) return cmd_autonomous(o, out, err);
  std::vector<fs::path> dirs(report_dirs.begin(), report_dirs.end());
  return cmd_report(dirs, report_out, out, err);
}

}  // namespace dio::cli
