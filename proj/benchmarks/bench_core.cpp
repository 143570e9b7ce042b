#include <benchmark/benchmark.h>

#include <filesystem>
#include <memory>
#include <unistd.h>

#include "ctxk/harness.hpp"

using namespace ctxk;
using namespace ctxk::bench;
namespace fs = std::filesystem;

namespace {

// One seeded control plane shared by every benchmark.
struct World {
  fs::path dir;
  Corpus corpus;
  std::unique_ptr<ManualClock> clock;
  std::unique_ptr<ControlPlane> plane;
  std::string session;

  World() {
    dir = fs::temp_directory_path() / ("ctxk-bench-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    generate_seed(dir);
    corpus = load_corpus(dir);
    clock = std::make_unique<ManualClock>(seed_epoch());
    plane = std::make_unique<ControlPlane>(plane_config(corpus, EngineMode::three_tier), *clock);
    session = plane->open_session("alice").id;
  }
  ~World() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

World& world() {
  static World w;
  return w;
}

std::vector<Candidate> candidates(World& w) {
  std::vector<Candidate> out;
  for (const auto& v : w.plane->registry().query_views("sales", {}, w.clock->now())) out.push_back({v.unit, v.state, {}});
  return out;
}

}  // namespace

static void BM_ClassifyIntent(benchmark::State& state) {
  auto& w = world();
  const auto& tax = w.plane->router().taxonomy();
  for (auto _ : state) {
    benchmark::DoNotOptimize(classify_intent("What discount did we offer Henderson in the latest proposal?", tax,
                                             std::nullopt, w.corpus.known_entities));
  }
}
BENCHMARK(BM_ClassifyIntent);

static void BM_Rank(benchmark::State& state) {
  auto& w = world();
  const auto cands = candidates(w);
  const RoutingSpec spec;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank(cands, "volume discount pricing approval", {}, spec, w.clock->now()));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cands.size()));
}
BENCHMARK(BM_Rank);

static void BM_ApplyTokenBudget(benchmark::State& state) {
  auto& w = world();
  const auto ranked = rank(candidates(w), "pricing", {}, RoutingSpec{}, w.clock->now());
  for (auto _ : state) benchmark::DoNotOptimize(apply_token_budget(ranked, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ApplyTokenBudget)->Arg(500)->Arg(8000);

static void BM_CheckAccess(benchmark::State& state) {
  auto& w = world();
  const auto units = w.plane->registry().all_units();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(w.plane->engine().check_access(w.session, AccessOp::read, units[i++ % units.size()]));
  }
}
BENCHMARK(BM_CheckAccess);

static void BM_ReconcileOnce(benchmark::State& state) {
  auto& w = world();
  for (auto _ : state) benchmark::DoNotOptimize(w.plane->reconciler().reconcile_once());
}
BENCHMARK(BM_ReconcileOnce)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
