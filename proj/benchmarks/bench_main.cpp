#include <benchmark/benchmark.h>

#include "forestore/dataset.hpp"
#include "forestore/forest.hpp"
#include "forestore/log.hpp"
#include "forestore/preselect.hpp"
#include "forestore/rules.hpp"
#include "forestore/selection.hpp"

using namespace forestore;

namespace {

struct XorFixture {
  Dataset train = generate_xor(1);
  Forest forest = quiet_train(train);
  std::vector<Rule> extracted;
  PreselectResult pre;
  SelectionProblem problem;

  static Forest quiet_train(const Dataset& ds) {
    set_log_sink([](LogLevel, std::string_view) {});
    return train_forest(ds, ForestParams{});
  }

  XorFixture() {
    extracted = extract_rules(forest);
    pre = preselect(extracted, train, PreselectParams{});
    problem = build_problem(pre.psr.metrics, pre.coverage, forest_error(forest, train), SelectionParams{},
                            ids_of(pre.psr.rules));
  }

  static std::vector<RuleId> ids_of(const std::vector<Rule>& rules) {
    std::vector<RuleId> ids;
    for (const auto& r : rules) ids.push_back(r.id);
    return ids;
  }
};

const XorFixture& xor_fixture() {
  static const XorFixture f;
  return f;
}

void BM_TrainForest(benchmark::State& state) {
  const Dataset ds = generate_xor(2);
  ForestParams fp;
  fp.n_trees = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train_forest(ds, fp));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainForest)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ExtractRules(benchmark::State& state) {
  const auto& f = xor_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(extract_rules(f.forest));
}
BENCHMARK(BM_ExtractRules)->Unit(benchmark::kMicrosecond);

void BM_BuildCoverage(benchmark::State& state) {
  const auto& f = xor_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(build_coverage(f.extracted, f.train));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.extracted.size()));
}
BENCHMARK(BM_BuildCoverage)->Unit(benchmark::kMillisecond);

void BM_Preselect(benchmark::State& state) {
  const auto& f = xor_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(preselect(f.extracted, f.train, PreselectParams{}));
}
BENCHMARK(BM_Preselect)->Unit(benchmark::kMillisecond);

void BM_SolveExact(benchmark::State& state) {
  const auto& f = xor_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(solve_exact(f.problem));
}
BENCHMARK(BM_SolveExact)->Unit(benchmark::kMillisecond);

void BM_SolveHeuristic(benchmark::State& state) {
  const auto& f = xor_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(solve_heuristic(f.problem));
}
BENCHMARK(BM_SolveHeuristic)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
