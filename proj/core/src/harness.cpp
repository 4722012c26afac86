#include "dio/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "dio/error.hpp"
#include "dio/source_text.hpp"

namespace dio {

std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::DIO:
      return "dio";
    case Mode::Ablate_CE:
      return "ablate-ce";
    case Mode::Ablate_TPP:
      return "ablate-tpp";
    case Mode::Ablate_EF:
      return "ablate-ef";
    case Mode::FlatEvolve:
      return "flat";
  }
  return "?";
}

std::string_view to_string(TtsVariant v) noexcept {
  switch (v) {
    case TtsVariant::Direct:
      return "direct";
    case TtsVariant::BestOfN:
      return "bon";
    case TtsVariant::SelfConsistency:
      return "sc";
  }
  return "?";
}

Mode mode_from_string(std::string_view s) {
  for (auto m : {Mode::DIO, Mode::Ablate_CE, Mode::Ablate_TPP, Mode::Ablate_EF, Mode::FlatEvolve}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

TtsVariant tts_from_string(std::string_view s) {
  for (auto v : {TtsVariant::Direct, TtsVariant::BestOfN, TtsVariant::SelfConsistency}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown baseline '" + std::string(s) + "'");
}

EngineConfig apply_mode(EngineConfig c, Mode m) {
  switch (m) {
    case Mode::DIO:
      break;
    case Mode::Ablate_CE:
      c.stages = 1;
      break;
    case Mode::Ablate_TPP:
      c.use_tpp = false;
      break;
    case Mode::Ablate_EF:
      c.use_feedback = false;
      break;
    case Mode::FlatEvolve:
      c.stages = 1;
      c.use_tpp = false;
      c.use_feedback = false;
      break;
  }
  return c;
}

std::string_view to_string(TrajectoryClass c) noexcept {
  switch (c) {
    case TrajectoryClass::Stable:
      return "Stable";
    case TrajectoryClass::MonotoneDown:
      return "MonotoneDown";
    case TrajectoryClass::Hump:
      return "Hump";
    case TrajectoryClass::MonotoneUp:
      return "MonotoneUp";
    case TrajectoryClass::Valley:
      return "Valley";
    case TrajectoryClass::Mixed:
      return "Mixed";
  }
  return "?";
}

TrajectoryClass classify_trajectory(std::span<const double> xs, double eps_frac) {
  if (xs.size() < 2) throw InvalidSequence("need at least two values, got " + std::to_string(xs.size()));
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (*hi - *lo <= eps_frac * std::abs(mean)) return TrajectoryClass::Stable;

  std::vector<int> runs;  // signs of nonzero steps, consecutive repeats merged
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double d = xs[i] - xs[i - 1];
    if (d == 0) continue;
    const int sign = d > 0 ? 1 : -1;
    if (runs.empty() || runs.back() != sign) runs.push_back(sign);
  }
  if (runs.size() == 1) return runs[0] < 0 ? TrajectoryClass::MonotoneDown : TrajectoryClass::MonotoneUp;
  if (runs.size() == 2) return runs[0] > 0 ? TrajectoryClass::Hump : TrajectoryClass::Valley;
  return TrajectoryClass::Mixed;
}

bool is_curriculum_perfect_hidden_failed(const RunRecord& r) noexcept {
  return r.error.empty() && r.visible_accuracy == 1.0 && r.hidden_eval_count > 0 && !r.solved;
}

bool is_early_stop_incorrect(const RunRecord& r) noexcept { return is_curriculum_perfect_hidden_failed(r); }

std::vector<FamilyOverfit> overfit_diagnostics(std::span<const RunRecord> records) {
  std::map<Family, FamilyOverfit> by_family;
  std::map<Family, double> len_solved, len_failed;
  for (const auto& r : records) {
    auto& f = by_family[r.family];
    f.family = r.family;
    ++f.runs;
    const auto len = static_cast<double>(r.final_source.size());
    if (r.solved) {
      ++f.solved;
      len_solved[r.family] += len;
    } else {
      len_failed[r.family] += len;
    }
    if (is_curriculum_perfect_hidden_failed(r)) ++f.curriculum_perfect_hidden_failed;
    if (is_early_stop_incorrect(r)) ++f.early_stop_incorrect;
    f.copy_frequency += r.copy_frequency;
  }
  std::vector<FamilyOverfit> out;
  for (auto& [fam, f] : by_family) {
    const int failed = f.runs - f.solved;
    f.mean_length_solved = f.solved ? len_solved[fam] / f.solved : 0.0;
    f.mean_length_failed = failed ? len_failed[fam] / failed : 0.0;
    f.copy_frequency /= f.runs;
    out.push_back(f);
  }
  return out;
}

SuiteReport summarize(std::vector<RunRecord> records, std::string mode_label) {
  SuiteReport s;
  s.mode = std::move(mode_label);
  if (!records.empty() && records.front().config.is_object()) {
    const auto& c = records.front().config;
    s.stages = c.value("stages", 0);
    s.curriculum = s.stages > 1;
    s.tpp = c.value("use_tpp", true);
    s.feedback = c.value("use_feedback", true);
  }

  std::int64_t tokens = 0, calls = 0;
  double overall_ratio = 0;
  std::map<Level, double> ratio_sum;
  for (const auto& r : records) {
    if (!r.error.empty()) ++s.infrastructure_failures;
    auto& lv = s.levels[r.level];
    ++lv.tasks;
    ++s.overall.tasks;
    if (r.solved) {
      ++lv.solved;
      ++s.overall.solved;
    }
    ratio_sum[r.level] += r.hidden.accuracy;
    overall_ratio += r.hidden.accuracy;
    tokens += r.prompt_tokens + r.completion_tokens;
    calls += r.mutation_calls;
    if (r.stages.size() >= 2) ++s.trajectories[classify_trajectory(r.stage_lengths())];
  }
  for (auto& [level, lv] : s.levels) {
    lv.pass_rate = static_cast<double>(lv.solved) / lv.tasks;
    lv.mean_sample_pass_ratio = ratio_sum[level] / lv.tasks;
  }
  if (s.overall.tasks > 0) {
    s.overall.pass_rate = static_cast<double>(s.overall.solved) / s.overall.tasks;
    s.overall.mean_sample_pass_ratio = overall_ratio / s.overall.tasks;
  }
  s.token_per_iter = calls > 0 ? static_cast<double>(tokens) / static_cast<double>(calls) : 0.0;

  // Checkpoint curve with improved/regressed counts against the previous checkpoint.
  std::size_t depth = 0;
  for (const auto& r : records) depth = std::max(depth, r.checkpoints.size());
  for (std::size_t k = 0; k < depth; ++k) {
    CurvePoint p;
    double sum = 0;
    for (const auto& r : records) {
      if (k >= r.checkpoints.size()) continue;
      const auto& cp = r.checkpoints[k];
      p.label = cp.label;
      p.at = cp.at;
      ++p.tasks;
      sum += cp.hidden_accuracy;
      const double prev = k == 0 ? 0.0 : r.checkpoints[k - 1].hidden_accuracy;
      if (cp.hidden_accuracy > prev) ++p.improved;
      if (cp.hidden_accuracy < prev) ++p.regressed;
    }
    p.mean_sample_pass_ratio = p.tasks ? sum / p.tasks : 0.0;
    s.curve.push_back(std::move(p));
  }
  s.overfit = overfit_diagnostics(records);
  s.records = std::move(records);
  return s;
}

namespace {

// Diagnostic held-out scores of intermediate bests, taken after the search.
void add_checkpoints(RunRecord& r, const Task& task, Mode mode, int total_iterations, Executor& executor,
                     const EvalOptions& opts) {
  auto eval = [&](const std::string& id) {
    auto it = r.sources.find(id);
    if (it == r.sources.end()) return 0.0;
    return heldout_eval(it->second, task, executor, opts).accuracy;
  };
  if (mode == Mode::FlatEvolve) {
    for (int at : kFlatCheckpoints) {
      if (at > total_iterations) continue;
      std::string id = r.stages.empty() ? std::string() : r.stages.front().seed_id;
      for (const auto& [iter, best] : r.best_by_iter) {
        if (iter <= at) id = best;
      }
      r.checkpoints.push_back({"iter" + std::to_string(at), at, id, eval(id)});
    }
    return;
  }
  for (const auto& s : r.stages) {
    r.checkpoints.push_back({"stage" + std::to_string(s.stage), s.stage, s.best_id, eval(s.best_id)});
  }
}

RunRecord failed_record(const Task& task, const EngineConfig& cfg, std::string mode, const std::exception& e) {
  RunRecord r;
  r.task_id = task.id;
  r.family = task.family;
  r.level = task.level;
  r.function_name = task.function_name;
  r.mode = std::move(mode);
  r.config = to_json(cfg);
  r.prompt_sha256 = prompt_template_sha256();
  const auto* err = dynamic_cast<const Error*>(&e);
  r.error = (err ? err->component() + ": " : std::string()) + e.what();
  return r;
}

template <typename Fn>
std::vector<RunRecord> for_each_task(const std::vector<Task>& tasks, int workers, Fn&& fn) {
  std::vector<RunRecord> out(tasks.size());
  if (workers <= 1 || tasks.size() <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) out[i] = fn(tasks[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) out[i] = fn(tasks[i]);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

EvalOptions eval_options(const EngineConfig& c) {
  EvalOptions o;
  o.timeout_ms = c.timeout_ms;
  o.memory_cap_mb = c.memory_cap_mb;
  return o;
}

void persist(const SuiteReport& s, const SuiteOptions& opts) {
  if (!opts.out_dir) return;
  for (const auto& r : s.records) write_run_dir(r, *opts.out_dir / "runs" / r.task_id);
  write_suite_outputs(s, *opts.out_dir);
}

}  // namespace

SuiteReport run_suite(const std::vector<Task>& tasks, const EngineConfig& config, Mode mode, LlmClient& llm,
                      Executor& executor, const SuiteOptions& opts) {
  const auto cfg = apply_mode(config, mode);
  cfg.validate();
  const auto label = std::string(to_string(mode));
  auto records = for_each_task(tasks, opts.workers, [&](const Task& task) {
    try {
      auto r = run_task(task, cfg, llm, executor);
      r.mode = label;
      add_checkpoints(r, task, mode, cfg.total_iterations, executor, eval_options(cfg));
      return r;
    } catch (const std::exception& e) {
      return failed_record(task, cfg, label, e);
    }
  });
  auto s = summarize(std::move(records), label);
  persist(s, opts);
  return s;
}

SuiteReport run_autonomous_suite(const std::vector<Task>& tasks, const EngineConfig& config, LlmClient& llm,
                                 Executor& executor, const SuiteOptions& opts) {
  config.validate();
  auto records = for_each_task(tasks, opts.workers, [&](const Task& task) {
    try {
      return run_autonomous(task, config, llm, executor);
    } catch (const std::exception& e) {
      return failed_record(task, config, "autonomous", e);
    }
  });
  auto s = summarize(std::move(records), "autonomous");
  persist(s, opts);
  return s;
}

namespace {

struct Sample {
  std::string source;
  double fitness = 0;
  std::string signature;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::string detail;
};

RunRecord run_tts_task(const Task& task, int n, TtsVariant variant, const EngineConfig& cfg, LlmClient& llm,
                       Executor& executor) {
  RunRecord r;
  r.task_id = task.id;
  r.family = task.family;
  r.level = task.level;
  r.function_name = task.function_name;
  r.mode = std::string(to_string(variant));
  r.config = to_json(cfg);
  r.prompt_sha256 = prompt_template_sha256();
  const int draws = variant == TtsVariant::Direct ? 1 : n;
  const auto opts = eval_options(cfg);
  const auto prompt = render_direct_prompt(task.id, task.function_name, task.visible);

  std::vector<Sample> samples;
  for (int i = 0; i < draws; ++i) {
    ChatRequest req;
    req.model = cfg.model;
    req.messages = {{"user", prompt}};
    req.temperature = cfg.llm_temperature;
    req.max_tokens = cfg.max_tokens;
    req.ordinal = llm.reserve_ordinals(1);
    req.iteration = i + 1;
    ++r.llm_calls;
    ++r.mutation_calls;

    Sample s;
    try {
      auto resp = llm.complete(req);
      s.prompt_tokens = resp.prompt_tokens;
      s.completion_tokens = resp.completion_tokens;
      auto parsed = parse_response(resp.content);
      if (auto* rw = std::get_if<FullRewrite>(&parsed)) {
        s.source = rw->source;
      } else if (auto* blocks = std::get_if<std::vector<DiffBlock>>(&parsed)) {
        try {
          s.source = apply_diffs(initial_program(task.function_name), *blocks);
        } catch (const DiffApplyError& e) {
          s.detail = e.what();
        }
      } else {
        s.detail = std::get<ParseFailure>(parsed).reason;
      }
    } catch (const LlmUnavailable& e) {
      s.detail = e.what();
    } catch (const MalformedResponse& e) {
      s.detail = e.what();
    }

    if (!s.source.empty()) {
      ExecJob job;
      job.program_source = s.source;
      job.function_name = task.function_name;
      job.timeout_ms = opts.timeout_ms;
      job.memory_cap_mb = opts.memory_cap_mb;
      for (const auto& e : task.visible) job.cases.push_back(e.input);
      const auto res = executor.execute(job);
      int correct = 0;
      for (std::size_t k = 0; k < task.visible.size(); ++k) {
        const auto& got = res.per_case[k];
        if (got.is_ok() && values_equal(got.value, task.visible[k].output, opts.float_tol)) ++correct;
        s.signature += outcome_to_json(got).dump() + "\n";
      }
      s.fitness = static_cast<double>(correct) / static_cast<double>(task.visible.size());
    }

    r.prompt_tokens += s.prompt_tokens;
    r.completion_tokens += s.completion_tokens;
    IterationEvent e;
    e.kind = EventKind::Mutation;
    e.iter = i + 1;
    e.stage = 1;
    e.child_id = "b-t" + std::to_string(i + 1);
    e.outcome = s.source.empty() ? Outcome::ParseFailed : Outcome::Inserted;
    e.detail = s.detail;
    if (!s.source.empty()) {
      e.score = make_stage_score(s.fitness, omega_comp(s.source), omega_hard(s.source, task.visible), cfg.lambda_c,
                                 cfg.lambda_h);
      r.sources[e.child_id] = s.source;
    }
    e.prompt_tokens = s.prompt_tokens;
    e.completion_tokens = s.completion_tokens;
    r.events.push_back(std::move(e));
    samples.push_back(std::move(s));
  }
  r.iterations_run = draws;

  std::size_t win = 0;
  if (variant == TtsVariant::SelfConsistency) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!samples[i].source.empty()) groups[samples[i].signature].push_back(i);
    }
    std::size_t best_size = 0;
    for (const auto& [sig, members] : groups) {
      const auto rep = members.front();
      const bool better = members.size() > best_size ||
                          (members.size() == best_size &&
                           (samples[rep].fitness > samples[win].fitness ||
                            (samples[rep].fitness == samples[win].fitness && rep < win)));
      if (better) {
        best_size = members.size();
        win = rep;
      }
    }
  } else {
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (samples[i].fitness > samples[win].fitness) win = i;
    }
  }

  const auto& w = samples[win];
  StageRecord st;
  st.stage = 1;
  for (std::size_t i = 0; i < task.visible.size(); ++i) st.current_idx.push_back(i);
  st.delta_idx = st.current_idx;
  st.budget = draws;
  st.iterations_run = draws;
  st.best_id = "b-t" + std::to_string(win + 1);
  st.best_score = make_stage_score(w.fitness, omega_comp(w.source), omega_hard(w.source, task.visible), cfg.lambda_c,
                                   cfg.lambda_h);
  st.best_length = w.source.size();
  r.stages.push_back(st);
  r.final_id = st.best_id;
  r.final_source = w.source;
  r.visible_accuracy = w.fitness;
  r.copy_frequency = omega_hard(w.source, task.visible);
  r.hidden = w.source.empty() ? EvalReport{0, static_cast<int>(task.hidden.size()), 0.0, 0, {}}
                              : heldout_eval(w.source, task, executor, opts);
  r.hidden_eval_count = 1;
  r.solved = r.hidden.total > 0 && r.hidden.correct == r.hidden.total;
  return r;
}

}  // namespace

SuiteReport run_tts_baselines(const std::vector<Task>& tasks, int n, TtsVariant variant, const EngineConfig& config,
                              LlmClient& llm, Executor& executor, const SuiteOptions& opts) {
  if (n < 1) throw ConfigError("baseline sample count must be >= 1");
  config.validate();
  const auto label = std::string(to_string(variant));
  auto records = for_each_task(tasks, opts.workers, [&](const Task& task) {
    try {
      return run_tts_task(task, n, variant, config, llm, executor);
    } catch (const std::exception& e) {
      return failed_record(task, config, label, e);
    }
  });
  auto s = summarize(std::move(records), label);
  persist(s, opts);
  return s;
}

nlohmann::ordered_json to_json(const SuiteReport& s) {
  nlohmann::ordered_json j;
  j["mode"] = s.mode;
  j["ablation"] = {{"curriculum", s.curriculum}, {"tpp", s.tpp}, {"feedback", s.feedback}, {"stages", s.stages}};
  auto level_json = [](const LevelStats& l) {
    nlohmann::ordered_json o;
    o["tasks"] = l.tasks;
    o["solved"] = l.solved;
    o["pass_rate"] = l.pass_rate;
    o["mean_sample_pass_ratio"] = l.mean_sample_pass_ratio;
    return o;
  };
  j["overall"] = level_json(s.overall);
  nlohmann::ordered_json levels = nlohmann::ordered_json::object();
  for (const auto& [level, l] : s.levels) levels[std::string(to_string(level))] = level_json(l);
  j["levels"] = std::move(levels);
  j["token_per_iter"] = s.token_per_iter;
  j["infrastructure_failures"] = s.infrastructure_failures;

  auto curve = nlohmann::ordered_json::array();
  for (const auto& p : s.curve) {
    curve.push_back({{"label", p.label},
                     {"at", p.at},
                     {"mean_sample_pass_ratio", p.mean_sample_pass_ratio},
                     {"tasks", p.tasks},
                     {"improved", p.improved},
                     {"regressed", p.regressed}});
  }
  j["checkpoints"] = std::move(curve);

  nlohmann::ordered_json traj = nlohmann::ordered_json::object();
  for (auto c : kAllTrajectories) {
    auto it = s.trajectories.find(c);
    traj[std::string(to_string(c))] = it == s.trajectories.end() ? 0 : it->second;
  }
  j["trajectories"] = std::move(traj);

  auto overfit = nlohmann::ordered_json::array();
  for (const auto& f : s.overfit) {
    overfit.push_back({{"family", std::string(to_string(f.family))},
                       {"runs", f.runs},
                       {"solved", f.solved},
                       {"curriculum_perfect_hidden_failed", f.curriculum_perfect_hidden_failed},
                       {"early_stop_incorrect", f.early_stop_incorrect},
                       {"mean_length_solved", f.mean_length_solved},
                       {"mean_length_failed", f.mean_length_failed},
                       {"copy_frequency", f.copy_frequency}});
  }
  j["overfit"] = std::move(overfit);

  auto tasks = nlohmann::ordered_json::array();
  for (const auto& r : s.records) {
    nlohmann::ordered_json t;
    t["id"] = r.task_id;
    t["family"] = to_string(r.family);
    t["level"] = to_string(r.level);
    t["mode"] = r.mode;
    t["solved"] = r.solved;
    t["hidden_accuracy"] = r.hidden.accuracy;
    t["visible_accuracy"] = r.visible_accuracy;
    t["hidden_eval_count"] = r.hidden_eval_count;
    t["stages"] = r.stages.size();
    t["stage_lengths"] = r.stage_lengths();
    t["trajectory"] = r.stages.size() >= 2 ? std::string(to_string(classify_trajectory(r.stage_lengths()))) : "";
    t["final_length"] = r.final_source.size();
    t["copy_frequency"] = r.copy_frequency;
    t["iterations"] = r.iterations_run;
    t["mutation_calls"] = r.mutation_calls;
    t["prompt_tokens"] = r.prompt_tokens;
    t["completion_tokens"] = r.completion_tokens;
    t["example_counts"] = r.example_counts;
    auto cps = nlohmann::ordered_json::array();
    for (const auto& c : r.checkpoints) cps.push_back({{"label", c.label}, {"hidden_accuracy", c.hidden_accuracy}});
    t["checkpoints"] = std::move(cps);
    t["error"] = r.error;
    tasks.push_back(std::move(t));
  }
  j["tasks"] = std::move(tasks);
  return j;
}

std::string report_json(const SuiteReport& s) { return to_json(s).dump(2) + "\n"; }

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

}  // namespace

std::string ablation_csv(std::span<const SuiteReport> reports) {
  std::string out = "mode,curriculum,tpp,feedback,base,algorithm,geometry,average,mean_sample_pass_ratio,token_per_iter\n";
  for (const auto& s : reports) {
    auto rate = [&s](Level l) {
      auto it = s.levels.find(l);
      return it == s.levels.end() ? std::string() : fmt(it->second.pass_rate);
    };
    out += s.mode + "," + (s.curriculum ? "1" : "0") + "," + (s.tpp ? "1" : "0") + "," + (s.feedback ? "1" : "0") +
           "," + rate(Level::Base) + "," + rate(Level::Algorithm) + "," + rate(Level::Geometry) + "," +
           fmt(s.overall.pass_rate) + "," + fmt(s.overall.mean_sample_pass_ratio) + "," + fmt(s.token_per_iter) + "\n";
  }
  return out;
}

std::string trajectory_csv(const SuiteReport& s) {
  std::string out = "task,family,level,stage_lengths,trajectory,solved\n";
  for (const auto& r : s.records) {
    std::string lens;
    for (auto x : r.stage_lengths()) lens += (lens.empty() ? "" : ";") + std::to_string(static_cast<long long>(x));
    const auto label = r.stages.size() >= 2 ? std::string(to_string(classify_trajectory(r.stage_lengths()))) : "";
    out += r.task_id + "," + std::string(to_string(r.family)) + "," + std::string(to_string(r.level)) + "," + lens +
           "," + label + "," + (r.solved ? "1" : "0") + "\n";
  }
  return out;
}

void write_suite_outputs(const SuiteReport& s, const std::filesystem::path& dir) {
  write_text_file(dir / "report.json", report_json(s), "experiment_harness");
  write_text_file(dir / "ablation.csv", ablation_csv(std::span<const SuiteReport>(&s, 1)), "experiment_harness");
  write_text_file(dir / "trajectory.csv", trajectory_csv(s), "experiment_harness");
  std::string overfit = "family,runs,solved,curriculum_perfect_hidden_failed,early_stop_incorrect,"
                        "mean_length_solved,mean_length_failed,copy_frequency\n";
  for (const auto& f : s.overfit) {
    overfit += std::string(to_string(f.family)) + "," + std::to_string(f.runs) + "," + std::to_string(f.solved) + "," +
               std::to_string(f.curriculum_perfect_hidden_failed) + "," + std::to_string(f.early_stop_incorrect) +
               "," + fmt(f.mean_length_solved) + "," + fmt(f.mean_length_failed) + "," + fmt(f.copy_frequency) + "\n";
  }
  write_text_file(dir / "overfit.csv", overfit, "experiment_harness");
}

}  // namespace dio
