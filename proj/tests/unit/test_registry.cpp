#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "ctxk/error.hpp"
#include "ctxk/registry.hpp"
#include "ctxk/text.hpp"
#include "fixtures.hpp"

using namespace ctxk;
using namespace std::chrono_literals;

namespace {

const Instant t0 = Instant{Millis{1'780'000'000'000}};

DomainManifest ops_manifest() {
  auto m = parse_manifest(ctxk::testing::minimal_manifest("ops", "/tmp/ops"));
  m.freshness.defaults.max_age = 60min;
  return m;
}

ContextUnit make_unit(const std::string& path, const std::string& content, Instant ts = t0) {
  ContextUnit u;
  u.content = content;
  u.metadata.domain = "ops";
  u.metadata.source = source_id("ops", "docs");
  u.metadata.path = path;
  u.metadata.timestamp = ts;
  u.metadata.author = "olga";
  u.authorized_roles = {"analyst"};
  return u;
}

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "ok";
}

}  // namespace

TEST(Registry, DomainsAndSources) {
  Registry r;
  const auto h = r.register_domain(ops_manifest());
  EXPECT_EQ(h.name, "ops");
  EXPECT_EQ(code_of([&] { r.register_domain(ops_manifest()); }), errc::kDuplicateDomain);
  EXPECT_EQ(r.list_domains(), std::vector<std::string>{"ops"});
  ASSERT_EQ(r.list_sources().size(), 1u);
  EXPECT_EQ(r.source_state("ops/docs").status, SourceStatus::connected);
  EXPECT_EQ(code_of([&] { r.source_state("ops/none"); }), errc::kUnknownSource);

  auto m = ops_manifest();
  m.sources.push_back(m.sources[0]);
  m.sources[1].name = "wiki";
  r.update_domain(m);
  EXPECT_EQ(r.list_sources().size(), 2u);
  m.sources.erase(m.sources.begin());
  r.update_domain(m);
  ASSERT_EQ(r.list_sources().size(), 1u);
  EXPECT_EQ(r.list_sources()[0].source, "ops/wiki");
  EXPECT_EQ(code_of([&] { r.update_domain(parse_manifest(ctxk::testing::minimal_manifest("hr", "/x"))); }),
            errc::kUnknownDomain);
}

TEST(Registry, UpsertValidation) {
  Registry r;
  r.register_domain(ops_manifest());
  auto u = make_unit("a.md", "quarterly numbers");
  u.authorized_roles.clear();
  EXPECT_EQ(code_of([&] { r.upsert_unit(u, t0); }), errc::kEmptyAuthorizedRoles);
  EXPECT_EQ(code_of([&] { r.upsert_unit(make_unit("a.md", ""), t0); }), errc::kInvalidUnit);
  u = make_unit("a.md", "x");
  u.metadata.authority = 1.5;
  EXPECT_EQ(code_of([&] { r.upsert_unit(u, t0); }), errc::kInvalidUnit);
  u = make_unit("a.md", "x");
  u.vector = {1.0, 0.0};
  EXPECT_EQ(code_of([&] { r.upsert_unit(u, t0); }), errc::kInvalidUnit);
  u = make_unit("a.md", "x");
  u.metadata.domain = "hr";
  EXPECT_EQ(code_of([&] { r.upsert_unit(u, t0); }), errc::kUnknownDomain);
  u = make_unit("a.md", "x");
  u.metadata.source = "ops/none";
  EXPECT_EQ(code_of([&] { r.upsert_unit(u, t0); }), errc::kUnknownSource);
  EXPECT_TRUE(r.all_units().empty());
}

TEST(Registry, VersionsAreMonotoneAndIdStable) {
  Registry r;
  r.register_domain(ops_manifest());
  EXPECT_EQ(r.upsert_unit(make_unit("a.md", "one"), t0), 1);
  EXPECT_EQ(r.upsert_unit(make_unit("a.md", "one"), t0 + 1s), 1);
  EXPECT_EQ(r.upsert_unit(make_unit("a.md", "two"), t0 + 2s, UpsertMode::supersede), 2);
  EXPECT_EQ(r.upsert_unit(make_unit("a.md", "three"), t0 + 3s, UpsertMode::supersede), 3);
  const auto u = r.unit("ops/docs:a.md");
  ASSERT_TRUE(u);
  EXPECT_EQ(u->id, unit_id("ops/docs", "a.md"));
  EXPECT_EQ(u->content, "three");
  EXPECT_EQ(u->vector.size(), text::kVectorDim);
  EXPECT_EQ(r.unit_version(u->id, 2)->content, "two");
  EXPECT_FALSE(r.unit_version(u->id, 1));
  EXPECT_EQ(r.query_units("ops", {}, t0 + 3s).size(), 1u);
}

TEST(Registry, RetainKeepsBothVersionsLiveAsConflicted) {
  Registry r;
  r.register_domain(ops_manifest());
  r.upsert_unit(make_unit("p.md", "price 100", t0), t0);
  r.upsert_unit(make_unit("p.md", "price 120", t0 + 5min), t0 + 5min);
  const auto views = r.query_views("ops", {}, t0 + 5min);
  ASSERT_EQ(views.size(), 2u);
  EXPECT_EQ(views[0].unit.version, 2);
  EXPECT_EQ(views[1].unit.version, 1);
  for (const auto& v : views) EXPECT_EQ(v.state, FreshnessState::conflicted);

  // Keeping the older version republishes it with a higher number.
  EXPECT_EQ(r.keep_version("ops/docs:p.md", 1, t0 + 6min), 3);
  const auto after = r.query_views("ops", {}, t0 + 6min);
  ASSERT_EQ(after.size(), 1u);
  EXPECT_EQ(after[0].unit.content, "price 100");
  EXPECT_EQ(after[0].state, FreshnessState::fresh);
  EXPECT_EQ(code_of([&] { r.keep_version("ops/docs:p.md", 9, t0); }), errc::kNotFound);
}

TEST(Registry, FreshnessFiltersAndFlags) {
  Registry r;
  r.register_domain(ops_manifest());
  r.upsert_unit(make_unit("a.md", "alpha"), t0);
  r.upsert_unit(make_unit("b.md", "beta"), t0 + 50min);
  const auto now = t0 + 70min;
  UnitFilter only_fresh;
  only_fresh.freshness_states = std::vector{FreshnessState::fresh};
  const auto fresh = r.query_units("ops", only_fresh, now);
  ASSERT_EQ(fresh.size(), 1u);
  EXPECT_EQ(fresh[0].metadata.path, "b.md");

  r.flag_stale("ops/docs:b.md");
  EXPECT_TRUE(r.query_units("ops", only_fresh, now).empty());
  r.mark_verified("ops/docs:a.md", now);
  EXPECT_EQ(r.query_units("ops", only_fresh, now).size(), 1u);
  EXPECT_EQ(r.flag_source_stale("ops/docs"), 2);
  EXPECT_TRUE(r.query_units("ops", only_fresh, now).empty());

  UnitFilter glob;
  glob.path_glob = "b*";
  EXPECT_EQ(r.query_units("ops", glob, now).size(), 1u);
  UnitFilter minv;
  minv.min_version = 2;
  EXPECT_TRUE(r.query_units("ops", minv, now).empty());

  r.archive("ops/docs:a.md");
  EXPECT_TRUE(r.is_archived("ops/docs:a.md"));
  EXPECT_EQ(r.all_units().size(), 1u);
  EXPECT_EQ(r.units_of_source("ops/docs").size(), 2u);
  EXPECT_EQ(r.freshness_record("ops/docs:b.md")->governing_policy.max_age, 60min);
}

TEST(Registry, SourceFailureThreshold) {
  Registry r(3);
  r.register_domain(ops_manifest());
  auto a = r.record_source_result("ops/docs", false, t0);
  EXPECT_EQ(a.state.status, SourceStatus::degraded);
  EXPECT_TRUE(a.status_changed);
  EXPECT_FALSE(a.delta);
  EXPECT_FALSE(r.record_source_result("ops/docs", false, t0).delta);
  auto c = r.record_source_result("ops/docs", false, t0);
  EXPECT_EQ(c.state.status, SourceStatus::disconnected);
  ASSERT_TRUE(c.delta);
  EXPECT_EQ(c.delta->type, DeltaType::source_disconnected);
  EXPECT_FALSE(r.record_source_result("ops/docs", false, t0).delta);
  auto ok = r.record_source_result("ops/docs", true, t0 + 1s);
  EXPECT_EQ(ok.state.status, SourceStatus::connected);
  EXPECT_EQ(ok.state.consecutive_failures, 0);
  EXPECT_EQ(ok.state.last_success, t0 + 1s);
}

TEST(Registry, SnapshotRoundTrips) {
  Registry r;
  r.register_domain(ops_manifest());
  r.upsert_unit(make_unit("a.md", "alpha"), t0);
  r.upsert_unit(make_unit("a.md", "alpha two"), t0 + 1s, UpsertMode::supersede);
  std::stringstream ss;
  r.export_snapshot(ss);
  std::string line;
  std::vector<ContextUnit> back;
  while (std::getline(ss, line)) back.push_back(unit_from_json(nlohmann::ordered_json::parse(line)));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], *r.unit_version("ops/docs:a.md", 1));
  EXPECT_EQ(back[1], *r.unit("ops/docs:a.md"));
}

TEST(Registry, ConcurrentReadersAndWriters) {
  Registry r;
  r.register_domain(ops_manifest());
  std::vector<std::jthread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 200; ++i) {
        r.upsert_unit(make_unit("u" + std::to_string(t) + ".md", "rev " + std::to_string(i)), t0,
                      UpsertMode::supersede);
        EXPECT_GE(r.query_views("ops", {}, t0).size(), 1u);
      }
    });
  }
  threads.clear();
  for (int t = 0; t < 4; ++t) EXPECT_EQ(r.unit("ops/docs:u" + std::to_string(t) + ".md")->version, 200);
}
