#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "ctxk/audit.hpp"
#include "ctxk/error.hpp"
#include "fixtures.hpp"

using namespace ctxk;
using namespace std::chrono_literals;

namespace {

const Instant t0 = Instant{Millis{1'780'000'000'000}};

AuditEvent event(AuditKind kind, std::string session, std::string user = "olga") {
  AuditEvent e;
  e.kind = kind;
  e.session_id = std::move(session);
  e.user = std::move(user);
  e.outcome = "ok";
  return e;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

struct BrokenSink : AuditSink {
  void write(const std::string&) override { throw Error(errc::kAuditFailure, "disk full"); }
};

}  // namespace

TEST(Audit, SequenceAndFilters) {
  ManualClock clock(t0);
  AuditLog log(clock);
  EXPECT_EQ(log.append(event(AuditKind::session_created, "s-1")), 1);
  clock.advance(1s);
  EXPECT_EQ(log.append(event(AuditKind::context_requested, "s-1")), 2);
  clock.advance(1s);
  EXPECT_EQ(log.append(event(AuditKind::context_requested, "s-2", "max")), 3);
  EXPECT_EQ(log.size(), 3u);

  AuditFilter f;
  f.session_id = "s-1";
  EXPECT_EQ(log.query(f).size(), 2u);
  f = {};
  f.user = "max";
  EXPECT_EQ(log.query(f).size(), 1u);
  f = {};
  f.kind = AuditKind::context_requested;
  EXPECT_EQ(log.query(f).size(), 2u);
  f = {};
  f.from = t0 + 1s;
  f.to = t0 + 2s;
  const auto window = log.query(f);
  ASSERT_EQ(window.size(), 1u);
  EXPECT_EQ(window[0].seq, 2);
}

TEST(Audit, JsonShapeAndRoundTrip) {
  ManualClock clock(t0);
  AuditLog log(clock);
  auto e = event(AuditKind::action_submitted, "s-1");
  e.domain = "sales";
  e.detail = {{"operation", "send-internal-msg"}};
  log.append(e);
  const auto j = to_json(log.query().front());
  std::vector<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"seq", "at", "kind", "session_id", "user", "domain", "outcome", "detail"}));
  EXPECT_EQ(j["at"], format_rfc3339(t0));
  const auto back = audit_event_from_json(j);
  EXPECT_EQ(to_json(back), j);
  for (const char* k : {"session_created", "otp_issued", "source_state_change"}) {
    EXPECT_EQ(to_string(*parse_audit_kind(k)), k);
  }
  EXPECT_FALSE(parse_audit_kind("nope"));
}

TEST(Audit, RejectsOtpsInDetailAndOutcome) {
  ManualClock clock(t0);
  AuditLog log(clock);
  log.register_secret("482913");
  auto e = event(AuditKind::otp_issued, "s-1");
  e.detail = {{"otp", "anything"}};
  EXPECT_THROW(log.append(e), Error);
  e.detail = {{"code", "482913"}};
  try {
    log.append(e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), errc::kOtpInAuditDetail);
  }
  e.detail.clear();
  e.outcome = "482913";
  EXPECT_THROW(log.append(e), Error);
  EXPECT_EQ(log.size(), 0u);
}

TEST(Audit, FileSinkIsAppendOnlyAndMatchesMemory) {
  ctxk::testing::TempDir dir;
  const auto file = dir / "audit.jsonl";
  ManualClock clock(t0);
  AuditLog log(clock);
  log.set_sink(std::make_unique<JsonlFileSink>(file));
  for (int i = 0; i < 5; ++i) log.append(event(AuditKind::context_requested, "s-" + std::to_string(i)));
  const auto first = ctxk::testing::read_file(file);
  for (int i = 5; i < 10; ++i) log.append(event(AuditKind::context_delivered, "s-" + std::to_string(i)));
  const auto second = ctxk::testing::read_file(file);
  EXPECT_EQ(second.compare(0, first.size(), first), 0);

  const auto lines = lines_of(second);
  const auto events = log.query();
  ASSERT_EQ(lines.size(), events.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    EXPECT_EQ(lines[i], to_json(events[i]).dump());
    EXPECT_EQ(nlohmann::json::parse(lines[i])["seq"], static_cast<int>(i) + 1);
  }

  // A second log on the same file appends rather than truncating.
  {
    AuditLog again(clock);
    again.set_sink(std::make_unique<JsonlFileSink>(file));
    again.append(event(AuditKind::session_killed, "s-0"));
  }
  EXPECT_EQ(lines_of(ctxk::testing::read_file(file)).size(), 11u);
}

TEST(Audit, SinkFailureRecordsNothing) {
  ManualClock clock(t0);
  AuditLog log(clock);
  std::ostringstream mirror;
  log.set_mirror(&mirror);
  log.append(event(AuditKind::session_created, "s-1"));
  log.set_sink(std::make_unique<BrokenSink>());
  try {
    log.append(event(AuditKind::context_requested, "s-1"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kAuditFailure);
  }
  EXPECT_EQ(log.size(), 1u);
  EXPECT_EQ(lines_of(mirror.str()).size(), 1u);
}

TEST(Audit, ConcurrentAppendsStayGapless) {
  ManualClock clock(t0);
  AuditLog log(clock);
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        for (int i = 0; i < 250; ++i) log.append(event(AuditKind::context_requested, "s-" + std::to_string(t)));
      });
    }
  }
  const auto all = log.query();
  ASSERT_EQ(all.size(), 2000u);
  for (std::size_t i = 0; i < all.size(); ++i) ASSERT_EQ(all[i].seq, static_cast<std::int64_t>(i) + 1);
}
