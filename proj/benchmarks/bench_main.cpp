#include <benchmark/benchmark.h>

#include "dio/curriculum.hpp"
#include "dio/mutation.hpp"
#include "dio/scoring.hpp"
#include "dio/source_text.hpp"
#include "dio/task_catalog.hpp"

namespace {

const std::string kSource =
    "def f(n):\n"
    "    factors = []  # collected here\n"
    "    d = 2\n"
    "    while d <= n:\n"
    "        while n % d == 0:\n"
    "            factors.append(d)\n"
    "            n = n // d\n"
    "        d += 1\n"
    "    return factors\n";

void BM_BuildCatalog(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dio::build_catalog());
}
BENCHMARK(BM_BuildCatalog)->Unit(benchmark::kMillisecond);

void BM_BuildPlan(benchmark::State& state) {
  const auto task = dio::build_split(dio::find_task_def("sort_list"));
  for (auto _ : state) benchmark::DoNotOptimize(dio::build_plan(task.visible, 4, 4, 7));
}
BENCHMARK(BM_BuildPlan);

void BM_OmegaHard(benchmark::State& state) {
  const auto task = dio::build_split(dio::find_task_def("prime_factorization"));
  for (auto _ : state) benchmark::DoNotOptimize(dio::omega_hard(kSource, task.visible));
}
BENCHMARK(BM_OmegaHard);

void BM_SourceHash(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dio::source_hash(kSource));
}
BENCHMARK(BM_SourceHash);

void BM_ApplyDiffs(benchmark::State& state) {
  const std::vector<dio::DiffBlock> blocks{{"        d += 1\n", "        d = d + 1\n"},
                                           {"    return factors\n", "    return list(factors)\n"}};
  for (auto _ : state) benchmark::DoNotOptimize(dio::apply_diffs(kSource, blocks));
}
BENCHMARK(BM_ApplyDiffs);

void BM_ParseResponse(benchmark::State& state) {
  const std::string response =
      "Tighten the loop.\n<<<<<<< SEARCH\n        d += 1\n=======\n        d = d + 1\n>>>>>>> REPLACE\n";
  for (auto _ : state) benchmark::DoNotOptimize(dio::parse_response(response));
}
BENCHMARK(BM_ParseResponse);

}  // namespace

BENCHMARK_MAIN();
