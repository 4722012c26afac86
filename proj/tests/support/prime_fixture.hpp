#pragma once

#include <string>
#include <vector>

#include "dio/engine.hpp"
#include "dio/executor.hpp"
#include "dio/llm.hpp"

namespace dio::testing {

// The prime-factorization walk-through: four successive guest programs, a
// lookup table that memorizes the visible pairs, and C++ mirrors of each.

extern const std::string kPrimeL1;
extern const std::string kPrimeL2;
extern const std::string kPrimeL3;
extern const std::string kPrimeL4;
extern const std::string kPrimeLookup;

/// The eight visible (input, factors) pairs, ascending by input.
std::vector<Example> prime_pairs();

CaseOutcome mirror_l1(const Value& n);
CaseOutcome mirror_l2(const Value& n);
CaseOutcome mirror_l3(const Value& n);
CaseOutcome mirror_l4(const Value& n);
CaseOutcome mirror_lookup(const Value& n);
CaseOutcome mirror_initial(const Value& n);

/// Four mutation responses, one per stage: a fenced rewrite to L1, then
/// SEARCH/REPLACE edits to L2, L3 and L4.
std::vector<ScriptStep> prime_script();

/// Hint-free responses cycling through rewrites to the programs above, a
/// reply without code and an edit that matches nothing.
std::vector<ScriptStep> mixed_script(std::size_t n);

/// Every program above tabulated on every visible and hidden input of `task`.
FakeExecutor prime_executor(const Task& task);

/// One island, four iterations, four stages, seed 0.
EngineConfig prime_config();

}  // namespace dio::testing
