// Micro-benchmarks for the hot paths of a turn: spot search, speech markup,
// and a complete scripted session including event-log persistence.

#include <random>

#include <benchmark/benchmark.h>

#include "concierge/speech_markup.hpp"
#include "corpus.hpp"
#include "oracles.hpp"
#include "service_fixture.hpp"
#include "test_support.hpp"

namespace concierge {
namespace {

void BM_SpotSearch(benchmark::State& state) {
  const auto& cat = test::shared_resources()->catalog;
  std::mt19937_64 rng(1);
  std::vector<SearchQuery> queries;
  for (int i = 0; i < 256; ++i) queries.push_back(test::random_query(cat.spots(), rng));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(cat.search(queries[i++ % queries.size()]));
}
BENCHMARK(BM_SpotSearch);

void BM_BruteForceSearch(benchmark::State& state) {
  const auto& cat = test::shared_resources()->catalog;
  std::mt19937_64 rng(1);
  std::vector<SearchQuery> queries;
  for (int i = 0; i < 256; ++i) queries.push_back(test::random_query(cat.spots(), rng));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(test::brute_force_ranked(cat.spots(), queries[i++ % queries.size()]));
  }
}
BENCHMARK(BM_BruteForceSearch);

void BM_AnnotateRender(benchmark::State& state) {
  const auto& res = *test::shared_resources();
  const auto corpus = test::markup_corpus(res, 200);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto m = annotate(corpus[i++ % corpus.size()], res.catalog.spots(), res.persons,
                            res.profile);
    benchmark::DoNotOptimize(render(m, res.profile));
  }
}
BENCHMARK(BM_AnnotateRender);

void BM_ScriptedSession(benchmark::State& state) {
  test::TempDir dir;
  auto svc = test::make_service(dir.path(), std::make_shared<ScriptedBackend>(test::happy_script()));
  const auto inputs = test::happy_inputs();
  for (auto _ : state) {
    const auto id = svc->create_session();
    for (const auto& line : inputs) benchmark::DoNotOptimize(svc->post_user_turn(id, line));
  }
}
BENCHMARK(BM_ScriptedSession)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace concierge

BENCHMARK_MAIN();
