#include <gtest/gtest.h>

#include <memory>

#include "ctxk/cxri.hpp"
#include "ctxk/error.hpp"
#include "ctxk/text.hpp"
#include "fixtures.hpp"

using namespace ctxk;
using namespace std::chrono_literals;
using ctxk::testing::TempDir;
using ctxk::testing::write_file;

namespace {

const Instant t0 = Instant{Millis{1'780'000'000'000}};

// One store of each kind holding the same three entries.
struct Harness {
  virtual ~Harness() = default;
  virtual std::unique_ptr<Connection> open() = 0;
  virtual void put(const std::string& path, const std::string& content) = 0;
  virtual void remove(const std::string& path) = 0;
  virtual void lose() = 0;
  virtual void restore() = 0;
};

const SourceBinding kBinding{"ops", "docs", {"analyst"}};

struct FsHarness : Harness {
  TempDir dir;
  bool git;
  explicit FsHarness(bool g) : git(g) {
    if (git) {
      write_file(dir / ".ctxmeta.json",
                 R"({"notes/a.md": {"author": "olga", "timestamp": "2026-09-01T08:30:00Z", "authority": 0.9,)"
                 R"( "entities": ["Henderson"], "sensitivity": "confidential"}})");
    }
  }
  std::unique_ptr<Connection> open() override {
    SourceSpec s;
    s.name = "docs";
    s.type = git ? SourceType::git_repo : SourceType::file_system;
    s.config = {{git ? "repo" : "root", dir.path().string()}};
    return connect(s, kBinding);
  }
  void put(const std::string& path, const std::string& content) override { write_file(dir / path, content); }
  void remove(const std::string& path) override { std::filesystem::remove(dir / path); }
  void lose() override { std::filesystem::rename(dir.path(), dir.path().string() + ".gone"); }
  void restore() override { std::filesystem::rename(dir.path().string() + ".gone", dir.path()); }
};

struct MemHarness : Harness {
  MemoryCatalog catalog;
  int tick = 0;
  std::unique_ptr<Connection> open() override {
    SourceSpec s;
    s.name = "docs";
    s.type = SourceType::connector;
    s.config = {{"system", "crm"}};
    return connect(s, kBinding, ConnectOptions{&catalog});
  }
  void put(const std::string& path, const std::string& content) override {
    MemoryCatalog::Row row;
    row.content = content;
    row.mtime = t0 + std::chrono::seconds(++tick);
    if (path == "notes/a.md") {
      row.author = "olga";
      row.timestamp = *parse_rfc3339("2026-09-01T08:30:00Z");
      row.authority = 0.9;
      row.entities = {"Henderson"};
      row.sensitivity = Sensitivity::confidential;
    }
    catalog.put("crm", path, row);
  }
  void remove(const std::string& path) override { catalog.erase("crm", path); }
  void lose() override { catalog.set_reachable("crm", false); }
  void restore() override { catalog.set_reachable("crm", true); }
};

class Conformance : public ::testing::TestWithParam<std::string> {
 protected:
  void SetUp() override {
    if (GetParam() == "memory") {
      h = std::make_unique<MemHarness>();
    } else {
      h = std::make_unique<FsHarness>(GetParam() == "git");
    }
    h->put("notes/a.md", "Henderson renewal is on track");
    h->put("notes/b.md", "Globex pricing draft");
    h->put("plan.md", "Quarterly plan");
  }
  std::unique_ptr<Harness> h;
};

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "ok";
}

}  // namespace

TEST_P(Conformance, QueryReadAndMetadata) {
  auto c = h->open();
  EXPECT_TRUE(c->alive());
  EXPECT_EQ(c->health().status, HealthStatus::connected);
  EXPECT_EQ(c->source(), "ops/docs");

  const auto all = c->query("");
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].metadata.path, "notes/a.md");
  EXPECT_EQ(all[2].metadata.path, "plan.md");
  const auto hits = c->query("henderson");
  ASSERT_EQ(hits.size(), 1u);

  const auto u = c->read("notes/a.md");
  EXPECT_EQ(u.id, "ops/docs:notes/a.md");
  EXPECT_EQ(u.content, "Henderson renewal is on track");
  EXPECT_EQ(u.metadata.domain, "ops");
  EXPECT_EQ(u.metadata.source, "ops/docs");
  EXPECT_EQ(u.authorized_roles, std::set<std::string>{"analyst"});
  EXPECT_EQ(u.version, 1);
  EXPECT_EQ(u.vector.size(), text::kVectorDim);
  if (GetParam() != "fs") {
    EXPECT_EQ(u.metadata.author, "olga");
    EXPECT_EQ(u.metadata.timestamp, *parse_rfc3339("2026-09-01T08:30:00Z"));
    EXPECT_DOUBLE_EQ(u.metadata.authority, 0.9);
    EXPECT_EQ(u.metadata.entities, std::vector<std::string>{"Henderson"});
    EXPECT_EQ(u.metadata.sensitivity, Sensitivity::confidential);
  }
  EXPECT_EQ(code_of([&] { c->read("nope.md"); }), errc::kNotFound);
}

TEST_P(Conformance, WriteBumpsVersion) {
  auto c = h->open();
  EXPECT_EQ(c->read("plan.md").version, 1);
  EXPECT_EQ(c->write("plan.md", "Quarterly plan v2").new_version, 2);
  const auto u = c->read("plan.md");
  EXPECT_EQ(u.content, "Quarterly plan v2");
  EXPECT_EQ(u.version, 2);
  EXPECT_EQ(c->write("new/c.md", "fresh entry").new_version, 1);
  EXPECT_EQ(c->read("new/c.md").content, "fresh entry");
  EXPECT_EQ(code_of([&] { c->write("../escape.md", "x"); }), errc::kWriteFailed);
  EXPECT_EQ(code_of([&] { c->write("/abs.md", "x"); }), errc::kWriteFailed);
}

TEST_P(Conformance, SubscriptionReportsChanges) {
  auto c = h->open();
  auto sub = c->subscribe("notes/*");
  EXPECT_TRUE(sub.poll(t0).empty());
  h->put("notes/b.md", "Globex pricing final");
  h->put("notes/c.md", "new note");
  h->remove("notes/a.md");
  h->put("plan.md", "outside the glob");
  const auto ev = sub.poll(t0 + 1s);
  ASSERT_EQ(ev.size(), 3u);
  std::map<std::string, ChangeKind> kinds;
  for (const auto& e : ev) kinds[e.path] = e.kind;
  EXPECT_EQ(kinds["notes/b.md"], ChangeKind::modified);
  EXPECT_EQ(kinds["notes/c.md"], ChangeKind::created);
  EXPECT_EQ(kinds["notes/a.md"], ChangeKind::deleted);
  EXPECT_EQ(ev.back().kind, ChangeKind::deleted);
  EXPECT_FALSE(ev.back().content);
  for (const auto& e : ev) {
    if (e.kind != ChangeKind::deleted) EXPECT_TRUE(e.content);
  }
  EXPECT_TRUE(sub.poll(t0 + 2s).empty());
}

TEST_P(Conformance, LossTerminatesStream) {
  auto c = h->open();
  auto sub = c->subscribe("*");
  h->lose();
  EXPECT_FALSE(c->alive());
  EXPECT_EQ(c->health().status, HealthStatus::disconnected);
  EXPECT_EQ(code_of([&] { c->query(""); }), errc::kConnectionLost);
  EXPECT_EQ(code_of([&] { c->read("plan.md"); }), errc::kConnectionLost);
  EXPECT_EQ(code_of([&] { sub.poll(t0); }), errc::kConnectionLost);
  EXPECT_TRUE(sub.terminated());
  EXPECT_EQ(code_of([&] { h->open(); }), errc::kConnectFailed);
  h->restore();
  EXPECT_TRUE(c->alive());
  EXPECT_EQ(code_of([&] { sub.poll(t0); }), errc::kConnectionLost);
  EXPECT_EQ(c->subscribe("*").poll(t0).size(), 0u);
}

INSTANTIATE_TEST_SUITE_P(Kinds, Conformance, ::testing::Values("fs", "git", "memory"));

TEST(Connect, Failures) {
  SourceSpec s;
  s.name = "docs";
  s.type = SourceType::file_system;
  EXPECT_EQ(code_of([&] { connect(s, kBinding); }), errc::kConnectFailed);
  s.config = {{"root", "/definitely/not/here"}};
  EXPECT_EQ(code_of([&] { connect(s, kBinding); }), errc::kConnectFailed);
  TempDir dir;
  s.type = SourceType::git_repo;
  s.config = {{"repo", dir.path().string()}};
  EXPECT_EQ(code_of([&] { connect(s, kBinding); }), errc::kConnectFailed);
}

TEST(Connect, ReadOnlyFileSystem) {
  TempDir dir;
  write_file(dir / "a.md", "alpha");
  SourceSpec s;
  s.name = "docs";
  s.config = {{"root", dir.path().string()}, {"readOnly", "true"}};
  auto c = connect(s, kBinding);
  EXPECT_EQ(code_of([&] { c->write("a.md", "beta"); }), errc::kWriteFailed);
  EXPECT_EQ(c->read("a.md").content, "alpha");
}
