#include <gtest/gtest.h>

#include "ctxk/error.hpp"
#include "ctxk/harness.hpp"
#include "fixtures.hpp"

using namespace ctxk;
using namespace ctxk::bench;
namespace fs = std::filesystem;
using ctxk::testing::TempDir;

namespace {

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = ctxk::testing::read_file(e.path());
  }
  return out;
}

}  // namespace

TEST(Seed, DeterministicPerSeed) {
  TempDir dir;
  generate_seed(dir / "a", 7);
  generate_seed(dir / "b", 7);
  generate_seed(dir / "c", 8);
  const auto a = snapshot(dir / "a");
  EXPECT_EQ(a, snapshot(dir / "b"));
  EXPECT_NE(a.at("benchmark.json"), snapshot(dir / "c").at("benchmark.json"));
  for (const char* f : {"taxonomy.json", "org.json", "entities.json", "benchmark.json"}) EXPECT_TRUE(a.count(f)) << f;
}

TEST(Seed, RefusesNonEmptyDirectory) {
  TempDir dir;
  ctxk::testing::write_file(dir / "x" / "keep.txt", "x");
  try {
    generate_seed(dir / "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kDirectoryNotEmpty);
  }
}

TEST(Seed, CorpusShape) {
  TempDir dir;
  generate_seed(dir / "c");
  const auto c = load_corpus(dir / "c");
  EXPECT_EQ(c.manifests.size(), 5u);
  ASSERT_EQ(c.benchmark.queries.size(), 200u);
  std::map<std::string, int> mix;
  for (const auto& q : c.benchmark.queries) ++mix[q.category];
  EXPECT_EQ(mix, (std::map<std::string, int>{
                     {"sales", 50}, {"delivery", 40}, {"hr", 30}, {"finance", 30}, {"cross-domain", 50}}));

  // Every labelled domain and ground-truth unit is real after ingestion.
  ManualClock clock(seed_epoch());
  ControlPlane cp(plane_config(c, EngineMode::three_tier), clock);
  std::set<std::string> domains;
  for (const auto& m : c.manifests) domains.insert(m.name);
  for (const auto& q : c.benchmark.queries) {
    EXPECT_NE(c.org.user(q.user), nullptr) << q.id;
    for (const auto& d : q.domains) EXPECT_TRUE(domains.count(d)) << q.id << " " << d;
    for (const auto& id : q.ground_truth) EXPECT_TRUE(cp.registry().unit(id).has_value()) << q.id << " " << id;
  }
  EXPECT_EQ(seed_unit("hr", "salaries/compensation.md").rfind("hr/", 0), 0u);
  EXPECT_FALSE(c.known_entities.empty());
}

TEST(Seed, BenchmarkJsonRoundTrip) {
  TempDir dir;
  generate_seed(dir / "c", 3);
  const auto b = Benchmark::load(dir / "c" / "benchmark.json");
  EXPECT_EQ(b.seed, 3u);
  EXPECT_EQ(Benchmark::from_json(nlohmann::json::parse(b.to_json().dump())).to_json(), b.to_json());
  EXPECT_THROW(Benchmark::from_json(nlohmann::json{{"seed", 1}}), Error);
}

TEST(Harness, LatencyStatsAndUnknownExperiment) {
  const auto s = LatencyStats::of({4.0, 1.0, 3.0, 2.0});
  EXPECT_EQ(s.n, 4u);
  EXPECT_DOUBLE_EQ(s.mean_ms, 2.5);
  EXPECT_DOUBLE_EQ(s.max_ms, 4.0);
  EXPECT_EQ(LatencyStats::of({}).n, 0u);
  HarnessOptions opts;
  TempDir dir;
  opts.scratch = dir.path();
  EXPECT_THROW(run_experiment("v9", opts), Error);
}
