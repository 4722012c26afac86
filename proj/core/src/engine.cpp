#include "dio/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>

#include "dio/error.hpp"
#include "dio/source_text.hpp"
#include "search.hpp"

namespace dio {

// ---- config ----------------------------------------------------------------

void EngineConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (islands < 1) fail("islands must be >= 1");
  if (stages < 1) fail("stages must be >= 1");
  if (total_iterations < stages) fail("total_iterations must be >= stages");
  if (migration_period < 1) fail("migration_period must be >= 1");
  if (mix.p_random < 0 || mix.p_best < 0 || mix.p_weighted < 0) fail("sampling_mix entries must be >= 0");
  if (std::abs(mix.p_random + mix.p_best + mix.p_weighted - 1.0) > 1e-9) fail("sampling_mix must sum to 1");
  if (lambda_c < 0 || lambda_h < 0) fail("lambdas must be >= 0");
  if (timeout_ms <= 0) fail("timeout_ms must be > 0");
  if (population_cap < 1) fail("population_cap must be >= 1");
  if (softmax_temperature <= 0) fail("softmax_temperature must be > 0");
  if (max_tokens < 1) fail("max_tokens must be >= 1");
  if (auto_max_iterations < 1 || auto_initial_examples < 1 || auto_step < 1 || auto_patience < 1 ||
      auto_max_reprompts < 0) {
    fail("autonomous settings out of range");
  }
}

nlohmann::ordered_json to_json(const EngineConfig& c) {
  nlohmann::ordered_json j;
  j["islands"] = c.islands;
  j["total_iterations"] = c.total_iterations;
  j["stages"] = c.stages;
  j["migration_period"] = c.migration_period;
  j["sampling_mix"] = {c.mix.p_random, c.mix.p_best, c.mix.p_weighted};
  j["lambda_c"] = c.lambda_c;
  j["lambda_h"] = c.lambda_h;
  j["timeout_ms"] = c.timeout_ms;
  j["memory_cap_mb"] = c.memory_cap_mb;
  j["seed"] = c.seed;
  j["population_cap"] = c.population_cap;
  j["replay_cap"] = c.replay_cap;
  j["softmax_temperature"] = c.softmax_temperature;
  j["llm_temperature"] = c.llm_temperature;
  j["max_tokens"] = c.max_tokens;
  j["model"] = c.model;
  j["use_tpp"] = c.use_tpp;
  j["use_feedback"] = c.use_feedback;
  j["parallel_islands"] = c.parallel_islands;
  j["auto_max_iterations"] = c.auto_max_iterations;
  j["auto_initial_examples"] = c.auto_initial_examples;
  j["auto_step"] = c.auto_step;
  j["auto_patience"] = c.auto_patience;
  j["auto_max_reprompts"] = c.auto_max_reprompts;
  return j;
}

EngineConfig engine_config_from_json(const nlohmann::json& j, EngineConfig c) {
  if (!j.is_object()) throw ConfigError("engine config must be an object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "islands") c.islands = v.get<int>();
      else if (key == "total_iterations") c.total_iterations = v.get<int>();
      else if (key == "stages") c.stages = v.get<int>();
      else if (key == "migration_period") c.migration_period = v.get<int>();
      else if (key == "sampling_mix") {
        if (!v.is_array() || v.size() != 3) throw ConfigError("sampling_mix must be [p_random, p_best, p_weighted]");
        c.mix = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
      } else if (key == "lambda_c") c.lambda_c = v.get<double>();
      else if (key == "lambda_h") c.lambda_h = v.get<double>();
      else if (key == "timeout_ms") c.timeout_ms = v.get<int>();
      else if (key == "memory_cap_mb") c.memory_cap_mb = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "population_cap") c.population_cap = v.get<std::size_t>();
      else if (key == "replay_cap") c.replay_cap = v.get<std::size_t>();
      else if (key == "softmax_temperature") c.softmax_temperature = v.get<double>();
      else if (key == "llm_temperature") c.llm_temperature = v.get<double>();
      else if (key == "max_tokens") c.max_tokens = v.get<int>();
      else if (key == "model") c.model = v.get<std::string>();
      else if (key == "use_tpp") c.use_tpp = v.get<bool>();
      else if (key == "use_feedback") c.use_feedback = v.get<bool>();
      else if (key == "parallel_islands") c.parallel_islands = v.get<bool>();
      else if (key == "auto_max_iterations") c.auto_max_iterations = v.get<int>();
      else if (key == "auto_initial_examples") c.auto_initial_examples = v.get<int>();
      else if (key == "auto_step") c.auto_step = v.get<int>();
      else if (key == "auto_patience") c.auto_patience = v.get<int>();
      else if (key == "auto_max_reprompts") c.auto_max_reprompts = v.get<int>();
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("bad value for '" + key + "': " + e.what());
    }
  }
  return c;
}

std::vector<int> split_budget(int total, int stages) {
  std::vector<int> out(static_cast<std::size_t>(std::max(stages, 0)), stages > 0 ? total / stages : 0);
  for (int i = 0; stages > 0 && i < total % stages; ++i) ++out[static_cast<std::size_t>(i)];
  return out;
}

std::string initial_program(std::string_view function_name) {
  return "def " + std::string(function_name) + "(x):\n    return None\n";
}

// ---- population operators ----------------------------------------------------

bool ranks_above(const Candidate& a, const Candidate& b) noexcept {
  if (a.score.total != b.score.total) return a.score.total > b.score.total;
  if (a.source.size() != b.source.size()) return a.source.size() < b.source.size();
  if (a.created_iter != b.created_iter) return a.created_iter < b.created_iter;
  return a.id < b.id;
}

const Candidate& best_of(std::span<const Candidate> pop) {
  return *std::min_element(pop.begin(), pop.end(), [](const Candidate& a, const Candidate& b) { return ranks_above(a, b); });
}

const Candidate& sample_parent(const Island& island, const SamplingMix& mix, Rng& rng, double temperature) {
  const auto& pop = island.population;
  const double u = rng.uniform01();
  if (u < mix.p_random) return pop[rng.index(pop.size())];
  if (u < mix.p_random + mix.p_best) return best_of(pop);
  double hi = pop.front().score.total;
  for (const auto& c : pop) hi = std::max(hi, c.score.total);
  std::vector<double> w;
  double sum = 0;
  for (const auto& c : pop) {
    w.push_back(std::exp((c.score.total - hi) / temperature));
    sum += w.back();
  }
  double r = rng.uniform01() * sum;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (r < w[i]) return pop[i];
    r -= w[i];
  }
  return pop.back();
}

ContextPick build_context(const Candidate& parent, const Island& island, Rng& rng) {
  ContextPick pick;
  pick.parent = &parent;
  std::vector<const Candidate*> ranked;
  for (const auto& c : island.population) ranked.push_back(&c);
  std::sort(ranked.begin(), ranked.end(), [](const Candidate* a, const Candidate* b) { return ranks_above(*a, *b); });

  for (const auto* c : ranked) {
    if (pick.best_two.size() < 2 && c->id != parent.id) pick.best_two.push_back(c);
  }
  for (std::size_t k = 0; pick.best_two.size() < 2 && !ranked.empty(); ++k) {
    pick.best_two.push_back(ranked[k % ranked.size()]);
  }

  std::vector<const Candidate*> pool;
  for (const auto& c : island.population) {
    bool used = c.id == parent.id;
    for (const auto* b : pick.best_two) used = used || b->id == c.id;
    if (!used) pool.push_back(&c);
  }
  if (pool.empty()) {
    for (const auto& c : island.population) pool.push_back(&c);
  }
  pick.inspiration = pool[rng.index(pool.size())];
  return pick;
}

std::string_view to_string(InsertOutcome o) noexcept {
  switch (o) {
    case InsertOutcome::Inserted:
      return "Inserted";
    case InsertOutcome::DuplicateRejected:
      return "DuplicateRejected";
    case InsertOutcome::OutcompetedRejected:
      return "OutcompetedRejected";
  }
  return "?";
}

InsertOutcome insert_child(Island& island, Candidate child, std::size_t cap) {
  auto& pop = island.population;
  for (const auto& c : pop) {
    if (c.source_hash == child.source_hash) return InsertOutcome::DuplicateRejected;
  }
  if (pop.size() < cap) {
    pop.push_back(std::move(child));
    return InsertOutcome::Inserted;
  }
  auto worst = std::max_element(pop.begin(), pop.end(), [](const Candidate& a, const Candidate& b) { return ranks_above(a, b); });
  if (!(child.score.total > worst->score.total)) return InsertOutcome::OutcompetedRejected;
  pop.erase(worst);
  pop.push_back(std::move(child));
  return InsertOutcome::Inserted;
}

namespace {

Outcome as_event_outcome(InsertOutcome o) {
  switch (o) {
    case InsertOutcome::Inserted:
      return Outcome::Inserted;
    case InsertOutcome::DuplicateRejected:
      return Outcome::DuplicateRejected;
    case InsertOutcome::OutcompetedRejected:
      return Outcome::OutcompetedRejected;
  }
  return Outcome::Inserted;
}

}  // namespace

std::vector<IterationEvent> migrate(std::vector<Island>& islands, int period, int iter, int stage, std::size_t cap,
                                    std::vector<Candidate>* clones) {
  std::vector<IterationEvent> events;
  const auto n = islands.size();
  if (n < 2 || period < 1 || iter % period != 0) return events;
  std::vector<Candidate> bests;
  for (const auto& isl : islands) bests.push_back(best_of(isl.population));
  for (std::size_t k = 0; k < n; ++k) {
    const auto dst = (k + 1) % n;
    Candidate clone = bests[k];
    clone.id = detail::stage_tag(stage, static_cast<int>(dst)) + "-t" + std::to_string(iter) + "-m" + std::to_string(k);
    clone.island = static_cast<int>(dst);
    clone.parent_id = bests[k].id;
    clone.created_iter = iter;
    IterationEvent e;
    e.kind = EventKind::Migration;
    e.iter = iter;
    e.stage = stage;
    e.island = static_cast<int>(dst);
    e.parent_id = bests[k].id;
    e.child_id = clone.id;
    e.score = clone.score;
    auto copy = clone;
    e.outcome = as_event_outcome(insert_child(islands[dst], std::move(clone), cap));
    if (clones && e.outcome == Outcome::Inserted) clones->push_back(std::move(copy));
    events.push_back(std::move(e));
  }
  return events;
}

// ---- search ----------------------------------------------------------------

namespace detail {

std::string stage_tag(int stage, int island) { return "s" + std::to_string(stage) + "-i" + std::to_string(island); }

Search::Search(const Task& task, const EngineConfig& cfg, LlmClient& llm, Executor& executor)
    : task_(task), cfg_(cfg), llm_(llm), executor_(executor) {
  cfg_.validate();
}

EvalOptions Search::eval_options() const {
  EvalOptions o;
  o.timeout_ms = cfg_.timeout_ms;
  o.memory_cap_mb = cfg_.memory_cap_mb;
  return o;
}

Candidate Search::evaluate(std::string id, std::string source, int island, int stage, std::optional<std::string> parent,
                           const StageSlice& slice, int iter) const {
  auto ev = stage_score(source, task_.function_name, slice, executor_, cfg_.lambda_c, cfg_.lambda_h, eval_options());
  Candidate c;
  c.id = std::move(id);
  c.source_hash = source_hash(source);
  c.source = std::move(source);
  c.island = island;
  c.stage = stage;
  c.parent_id = std::move(parent);
  c.score = ev.score;
  c.current = std::move(ev.current);
  c.replay = std::move(ev.replay);
  c.created_iter = iter;
  return c;
}

std::vector<FeedbackBundle> Search::feedback_chain(const Candidate& parent) const {
  std::vector<FeedbackBundle> chain;
  const Candidate* c = &parent;
  while (c && chain.size() < kFeedbackDepth) {
    FeedbackBundle b;
    b.candidate_id = c->id;
    b.score = c->score;
    for (const auto* report : {&c->current, &c->replay}) {
      for (const auto& f : report->failures) {
        if (b.artifacts.size() < kMaxFailures) b.artifacts.push_back(f);
      }
    }
    chain.push_back(std::move(b));
    const Candidate* next = nullptr;
    if (c->parent_id) {
      auto it = archive_.find(*c->parent_id);
      if (it != archive_.end()) next = &it->second;
    }
    c = next;
  }
  return chain;
}

Search::StepResult Search::step(const Island& island, Rng& rng, const StageSlice& slice, int stage_count, int iter,
                                std::int64_t ordinal) const {
  StepResult out;
  auto& e = out.event;
  e.kind = EventKind::Mutation;
  e.iter = iter;
  e.stage = slice.index;
  e.island = island.index;

  const auto& parent = sample_parent(island, cfg_.mix, rng, cfg_.softmax_temperature);
  const auto pick = build_context(parent, island, rng);
  e.parent_id = parent.id;
  e.child_id = stage_tag(slice.index, island.index) + "-t" + std::to_string(iter);

  PromptContext ctx;
  ctx.task_id = task_.id;
  ctx.function_name = task_.function_name;
  ctx.stage_count = stage_count;
  ctx.slice = slice;
  auto view = [](const Candidate* c) { return ProgramView{c->id, c->source, c->score}; };
  ctx.parent = view(pick.parent);
  for (const auto* b : pick.best_two) ctx.best_two.push_back(view(b));
  ctx.inspiration = view(pick.inspiration);
  ctx.feedback_chain = feedback_chain(parent);
  ctx.phase = select_phase(parent.score);
  ctx.switches = {cfg_.use_tpp, cfg_.use_feedback};
  e.phase = std::string(to_string(ctx.phase));

  ChatRequest req;
  req.model = cfg_.model;
  req.messages = {{"user", render_prompt(ctx)}};
  req.temperature = cfg_.llm_temperature;
  req.max_tokens = cfg_.max_tokens;
  req.ordinal = ordinal;
  req.iteration = iter;

  ChatResponse resp;
  try {
    resp = llm_.complete(req);
  } catch (const LlmUnavailable& ex) {
    e.outcome = Outcome::LlmFailed;
    e.detail = ex.what();
    return out;
  } catch (const MalformedResponse& ex) {
    e.outcome = Outcome::LlmFailed;
    e.detail = ex.what();
    return out;
  }
  e.prompt_tokens = resp.prompt_tokens;
  e.completion_tokens = resp.completion_tokens;

  std::string child_source;
  auto parsed = parse_response(resp.content);
  if (auto* fail = std::get_if<ParseFailure>(&parsed)) {
    e.outcome = Outcome::ParseFailed;
    e.detail = fail->reason;
    return out;
  }
  if (auto* rewrite = std::get_if<FullRewrite>(&parsed)) {
    child_source = rewrite->source;
    e.detail = "full rewrite";
  } else {
    const auto& blocks = std::get<std::vector<DiffBlock>>(parsed);
    try {
      child_source = apply_diffs(parent.source, blocks);
    } catch (const DiffApplyError& ex) {
      e.outcome = Outcome::DiffFailed;
      e.detail = ex.what();
      return out;
    }
    e.detail = std::to_string(blocks.size()) + " diff block" + (blocks.size() == 1 ? "" : "s");
  }

  const auto h = source_hash(child_source);
  for (const auto& c : island.population) {
    if (c.source_hash == h) {
      e.outcome = Outcome::DuplicateRejected;
      return out;
    }
  }
  out.child = evaluate(e.child_id, std::move(child_source), island.index, slice.index, parent.id, slice, iter);
  e.score = out.child->score;
  e.replay_accuracy = out.child->replay.accuracy;
  return out;
}

StageResult Search::run_stage(const StageSlice& slice, int stage_count, const std::string& seed_source,
                              const std::optional<std::string>& seed_parent, int budget, bool final_stage) {
  StageResult result;
  const auto first_event = events_.size();
  const int n = cfg_.islands;
  const int stage = slice.index;

  std::vector<Island> islands(static_cast<std::size_t>(n));
  std::vector<Rng> rngs;
  const auto seed = evaluate(stage_tag(stage, 0) + "-seed", seed_source, 0, stage, seed_parent, slice, global_iter_);
  for (int k = 0; k < n; ++k) {
    auto& isl = islands[static_cast<std::size_t>(k)];
    isl.index = k;
    isl.rng_seed = derive_seed(cfg_.seed, static_cast<std::uint64_t>(stage), static_cast<std::uint64_t>(k));
    rngs.emplace_back(isl.rng_seed);
    Candidate c = seed;
    c.id = stage_tag(stage, k) + "-seed";
    c.island = k;
    archive_[c.id] = c;
    isl.population.push_back(std::move(c));
  }

  auto global_best = [&islands]() -> const Candidate& {
    const Candidate* best = nullptr;
    for (const auto& isl : islands) {
      const auto& b = best_of(isl.population);
      if (!best || ranks_above(b, *best)) best = &b;
    }
    return *best;
  };
  auto solved = [&]() { return final_stage && global_best().score.acc_curr == 1.0; };

  if (solved()) result.early_exit = true;
  for (int t = 0; t < budget && !result.early_exit; ++t) {
    const int iter = ++global_iter_;
    const auto base = llm_.reserve_ordinals(n);
    std::vector<StepResult> steps(static_cast<std::size_t>(n));
    if (cfg_.parallel_islands && n > 1) {
      std::vector<std::future<StepResult>> futures;
      for (int k = 0; k < n; ++k) {
        futures.push_back(std::async(std::launch::async, [&, k] {
          return step(islands[static_cast<std::size_t>(k)], rngs[static_cast<std::size_t>(k)], slice, stage_count,
                      iter, base + k);
        }));
      }
      std::exception_ptr first_error;
      for (int k = 0; k < n; ++k) {
        try {
          steps[static_cast<std::size_t>(k)] = futures[static_cast<std::size_t>(k)].get();
        } catch (...) {
          if (!first_error) first_error = std::current_exception();
        }
      }
      if (first_error) std::rethrow_exception(first_error);
    } else {
      for (int k = 0; k < n; ++k) {
        steps[static_cast<std::size_t>(k)] =
            step(islands[static_cast<std::size_t>(k)], rngs[static_cast<std::size_t>(k)], slice, stage_count, iter,
                 base + k);
      }
    }

    for (int k = 0; k < n; ++k) {
      auto& s = steps[static_cast<std::size_t>(k)];
      ++llm_calls_;
      ++mutation_calls_;
      prompt_tokens_ += s.event.prompt_tokens;
      completion_tokens_ += s.event.completion_tokens;
      if (s.child) {
        archive_[s.child->id] = *s.child;
        s.event.outcome =
            as_event_outcome(insert_child(islands[static_cast<std::size_t>(k)], std::move(*s.child), cfg_.population_cap));
      }
      events_.push_back(std::move(s.event));
    }

    std::vector<Candidate> clones;
    for (auto& e : migrate(islands, cfg_.migration_period, iter, stage, cfg_.population_cap, &clones)) {
      events_.push_back(std::move(e));
    }
    for (auto& c : clones) archive_[c.id] = std::move(c);

    ++result.iterations_run;
    best_by_iter_.emplace_back(iter, global_best().id);
    if (solved()) result.early_exit = true;
  }

  result.best = global_best();
  result.events.assign(events_.begin() + static_cast<std::ptrdiff_t>(first_event), events_.end());
  return result;
}

std::optional<ChatResponse> Search::ask(const std::string& prompt, std::string* error) {
  ChatRequest req;
  req.model = cfg_.model;
  req.messages = {{"user", prompt}};
  req.temperature = cfg_.llm_temperature;
  req.max_tokens = cfg_.max_tokens;
  req.ordinal = llm_.reserve_ordinals(1);
  req.iteration = global_iter_;
  ++llm_calls_;
  try {
    auto resp = llm_.complete(req);
    prompt_tokens_ += resp.prompt_tokens;
    completion_tokens_ += resp.completion_tokens;
    return resp;
  } catch (const LlmUnavailable& ex) {
    if (error) *error = ex.what();
  } catch (const MalformedResponse& ex) {
    if (error) *error = ex.what();
  }
  return std::nullopt;
}

void Search::fill_record(RunRecord& r) const {
  r.events = events_;
  r.best_by_iter = best_by_iter_;
  for (const auto& [id, c] : archive_) r.sources[id] = c.source;
  r.iterations_run = global_iter_;
  r.llm_calls = llm_calls_;
  r.mutation_calls = mutation_calls_;
  r.prompt_tokens = prompt_tokens_;
  r.completion_tokens = completion_tokens_;
}

}  // namespace detail

// ---- public drivers ----------------------------------------------------------

namespace {

RunRecord record_header(const Task& task, const EngineConfig& cfg) {
  RunRecord r;
  r.task_id = task.id;
  r.family = task.family;
  r.level = task.level;
  r.function_name = task.function_name;
  r.config = to_json(cfg);
  r.prompt_sha256 = prompt_template_sha256();
  return r;
}

StageRecord stage_record(const StageSlice& slice, int budget, const StageResult& res) {
  StageRecord s;
  s.stage = slice.index;
  s.current_idx = slice.current_idx;
  s.delta_idx = slice.delta_idx;
  s.replay_idx = slice.replay_idx;
  s.budget = budget;
  s.iterations_run = res.iterations_run;
  s.early_exit = res.early_exit;
  s.seed_id = detail::stage_tag(slice.index, 0) + "-seed";
  s.best_id = res.best.id;
  s.best_score = res.best.score;
  s.best_length = res.best.source.size();
  return s;
}

}  // namespace

StageResult run_stage(const Task& task, const StageSlice& slice, const std::string& seed_program,
                      const EngineConfig& config, LlmClient& llm, Executor& executor, int budget, bool final_stage) {
  detail::Search search(task, config, llm, executor);
  return search.run_stage(slice, std::max(config.stages, slice.index), seed_program, std::nullopt, budget, final_stage);
}

void detail::finish_record(RunRecord& r, const Candidate& final, const Task& task, Executor& executor,
                   const EvalOptions& opts) {
  r.final_id = final.id;
  r.final_source = final.source;
  r.visible_accuracy = final.score.acc_curr;
  r.hidden = heldout_eval(final.source, task, executor, opts);
  r.hidden_eval_count = 1;
  r.solved = r.hidden.total > 0 && r.hidden.correct == r.hidden.total;
}

RunRecord run_task(const Task& task, const EngineConfig& config, LlmClient& llm, Executor& executor) {
  detail::Search search(task, config, llm, executor);
  auto record = record_header(task, config);
  const auto plan = build_plan(task.visible, config.stages, config.replay_cap, config.seed);
  record.plan = plan_to_json(plan);
  const auto budgets = split_budget(config.total_iterations, config.stages);

  std::string seed_source = initial_program(task.function_name);
  std::optional<std::string> seed_parent;
  Candidate final;
  for (std::size_t s = 0; s < plan.stages.size(); ++s) {
    const auto& slice = plan.stages[s];
    const bool last = s + 1 == plan.stages.size();
    auto res = search.run_stage(slice, plan.stage_count, seed_source, seed_parent, budgets[s], last);
    record.stages.push_back(stage_record(slice, budgets[s], res));
    seed_source = res.best.source;
    seed_parent = res.best.id;
    final = std::move(res.best);
  }
  search.fill_record(record);
  record.copy_frequency = omega_hard(final.source, task.visible);
  detail::finish_record(record, final, task, executor, search.eval_options());
  return record;
}

}  // namespace dio
