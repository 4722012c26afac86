#include <set>

#include "dio/engine.hpp"
#include "dio/error.hpp"
#include "search.hpp"

namespace dio {

std::string describe_domain(const InputDomain& d) {
  const auto lens = std::to_string(d.min_len) + " to " + std::to_string(d.max_len);
  const auto lo = std::to_string(static_cast<long long>(d.lo));
  const auto hi = std::to_string(static_cast<long long>(d.hi));
  switch (d.shape) {
    case Shape::ScalarInt:
      return "one integer in [" + lo + ", " + hi + "]";
    case Shape::IntSeq:
      return "a list of " + lens + " integers, each in [" + lo + ", " + hi + "]";
    case Shape::BitSeq:
      return "a list of " + lens + " bits (0 or 1)";
    case Shape::IntPairSeq:
      return "a tuple of two lists of the same length (" + lens + "), integers in [" + lo + ", " + hi + "]";
    case Shape::BitPairSeq:
      return "a tuple of two bit lists of the same length (" + lens + ")";
    case Shape::FloatSeq:
      return "a list of " + lens + " floats in [" + lo + ", " + hi + "] with at most two decimals";
    case Shape::Text:
      return "a string built from the characters '" + d.charset + "'";
    case Shape::PointSeq:
      return "a list of " + lens + " (x, y) integer tuples with coordinates in [" + lo + ", " + hi + "]";
    case Shape::StrPair:
      return "a tuple of two strings of length " + lens + " over '" + d.charset + "'";
  }
  return std::string(to_string(d.shape));
}

std::vector<Value> accept_proposals(std::string_view response, const OracleSpec& oracle,
                                    const std::vector<Value>& existing, std::size_t want,
                                    std::vector<std::string>* rejected) {
  std::set<std::string> seen;
  for (const auto& v : existing) seen.insert(serialize(v));
  const auto block = first_fenced_block(response);
  const std::string_view body = block ? std::string_view(*block) : response;

  std::vector<Value> out;
  std::size_t pos = 0;
  while (pos < body.size() && out.size() < want) {
    auto eol = body.find('\n', pos);
    if (eol == std::string_view::npos) eol = body.size();
    auto line = body.substr(pos, eol - pos);
    pos = eol + 1;
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == ',')) line.remove_suffix(1);
    if (line.empty()) continue;
    try {
      Value v;
      try {
        v = parse_literal(line);
      } catch (const std::invalid_argument& e) {
        throw InvalidProposedInput("'" + std::string(line) + "' is not a literal");
      }
      std::string why;
      if (!conforms(oracle, v, &why)) throw InvalidProposedInput(literal_form(v) + " is outside the domain: " + why);
      if (!seen.insert(serialize(v)).second) throw InvalidProposedInput(literal_form(v) + " is a duplicate");
      out.push_back(std::move(v));
    } catch (const InvalidProposedInput& e) {
      if (rejected) rejected->push_back(e.what());
    }
  }
  return out;
}

namespace {

// Labels up to `count` new inputs: LLM proposals first, re-prompting on
// rejects, then seeded domain samples for whatever is still missing.
std::vector<Example> grow_examples(detail::Search& search, const Task& task, const OracleSpec& oracle,
                                   const std::vector<Example>& have, std::size_t count, int max_reprompts,
                                   std::uint64_t fallback_seed, int round) {
  std::vector<Value> existing;
  for (const auto& e : have) existing.push_back(e.input);
  std::vector<Value> fresh;
  const auto domain_text = describe_domain(oracle.domain);

  for (int attempt = 0; attempt <= max_reprompts && fresh.size() < count; ++attempt) {
    std::vector<Value> known = existing;
    known.insert(known.end(), fresh.begin(), fresh.end());
    const auto need = count - fresh.size();
    std::string error;
    auto resp = search.ask(render_proposal_prompt(task.id, task.function_name, domain_text, known, need), &error);

    IterationEvent e;
    e.kind = EventKind::Proposal;
    e.iter = search.global_iter();
    e.stage = round;
    e.outcome = Outcome::Proposed;
    if (!resp) {
      e.detail = "llm failure: " + error;
      search.events().push_back(std::move(e));
      continue;
    }
    e.prompt_tokens = resp->prompt_tokens;
    e.completion_tokens = resp->completion_tokens;
    std::vector<std::string> rejected;
    auto got = accept_proposals(resp->content, oracle, known, need, &rejected);
    e.detail = "accepted " + std::to_string(got.size()) + " of " + std::to_string(need);
    for (const auto& r : rejected) e.detail += "; " + r;
    search.events().push_back(std::move(e));
    fresh.insert(fresh.end(), got.begin(), got.end());
  }

  if (fresh.size() < count) {
    std::set<std::string> seen;
    for (const auto& v : existing) seen.insert(serialize(v));
    for (const auto& v : fresh) seen.insert(serialize(v));
    Rng rng(fallback_seed);
    const auto missing = count - fresh.size();
    for (int tries = 0; fresh.size() < count && tries < 10000; ++tries) {
      auto v = sample_input(oracle, rng);
      if (seen.insert(serialize(v)).second) fresh.push_back(std::move(v));
    }
    IterationEvent e;
    e.kind = EventKind::Proposal;
    e.iter = search.global_iter();
    e.stage = round;
    e.outcome = Outcome::Fallback;
    e.detail = "sampled " + std::to_string(missing) + " input(s) from the domain";
    search.events().push_back(std::move(e));
  }

  std::vector<Example> out;
  for (auto& v : fresh) {
    auto y = oracle.fn(v);
    out.push_back({std::move(v), std::move(y)});
  }
  return out;
}

}  // namespace

RunRecord run_autonomous(const Task& task, const EngineConfig& config, LlmClient& llm, Executor& executor) {
  detail::Search search(task, config, llm, executor);
  const auto& oracle = find_oracle(task.oracle_id);

  RunRecord record;
  record.task_id = task.id;
  record.family = task.family;
  record.level = task.level;
  record.function_name = task.function_name;
  record.mode = "autonomous";
  record.config = to_json(config);
  record.prompt_sha256 = prompt_template_sha256();

  std::vector<Example> examples;
  std::string seed_source = initial_program(task.function_name);
  std::optional<std::string> seed_parent;
  Candidate best;
  int streak = 0;
  int round = 1;
  auto fresh = grow_examples(search, task, oracle, examples, static_cast<std::size_t>(config.auto_initial_examples),
                             config.auto_max_reprompts, derive_seed(config.seed, 0x4175746fULL, 1), round);

  for (;; ++round) {
    StageSlice slice;
    slice.index = round;
    for (auto& e : fresh) {
      slice.delta_idx.push_back(examples.size());
      slice.delta.push_back(e);
      examples.push_back(std::move(e));
    }
    slice.current = examples;
    for (std::size_t i = 0; i < examples.size(); ++i) slice.current_idx.push_back(i);
    record.example_counts.push_back(examples.size());

    const int budget = config.auto_max_iterations - search.global_iter();
    auto res = search.run_stage(slice, round, seed_source, seed_parent, budget, true);
    StageRecord s;
    s.stage = round;
    s.current_idx = slice.current_idx;
    s.delta_idx = slice.delta_idx;
    s.budget = budget;
    s.iterations_run = res.iterations_run;
    s.early_exit = res.early_exit;
    s.seed_id = detail::stage_tag(round, 0) + "-seed";
    s.best_id = res.best.id;
    s.best_score = res.best.score;
    s.best_length = res.best.source.size();
    record.stages.push_back(std::move(s));
    best = res.best;

    if (best.score.acc_curr != 1.0) break;  // iteration budget spent without passing
    streak = res.iterations_run == 0 ? streak + 1 : 1;
    if (streak >= config.auto_patience || search.global_iter() >= config.auto_max_iterations) break;

    seed_source = best.source;
    seed_parent = best.id;
    fresh = grow_examples(search, task, oracle, examples, static_cast<std::size_t>(config.auto_step),
                          config.auto_max_reprompts, derive_seed(config.seed, 0x4175746fULL, round + 1), round + 1);
  }

  search.fill_record(record);
  nlohmann::ordered_json plan;
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& e : examples) inputs.push_back(nlohmann::ordered_json(to_tagged_json(e.input)));
  plan["self_built_inputs"] = std::move(inputs);
  record.plan = std::move(plan);
  record.copy_frequency = omega_hard(best.source, examples);
  detail::finish_record(record, best, task, executor, search.eval_options());
  return record;
}

}  // namespace dio
