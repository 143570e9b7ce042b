#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ctxk/error.hpp"
#include "ctxk/router.hpp"
#include "ctxk/text.hpp"
#include "fixtures.hpp"

using namespace ctxk;
using namespace std::chrono_literals;

namespace {

const Instant t0 = Instant{Millis{1'780'000'000'000}};

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "ok";
}

Taxonomy henderson_taxonomy() {
  Taxonomy t;
  t.keywords = {{"sales", {"deal", "pipeline", "pricing"}},
                {"clients", {"henderson", "deal", "renewal", "draft"}},
                {"hr", {"salary", "leave"}}};
  return t;
}

RankedResult sized(const std::string& path, std::size_t tokens) {
  RankedResult r;
  r.unit.metadata.path = path;
  r.unit.content = std::string(tokens * 4, 'x');
  return r;
}

}  // namespace

TEST(Classify, HendersonQueryRoutesToSalesAndClients) {
  const auto t = henderson_taxonomy();
  const auto intent = classify_intent("What is the Henderson deal status?", t, std::nullopt);
  ASSERT_EQ(intent.domains.size(), 2u);
  // henderson is unique to clients (1), deal is shared (1/2 each).
  EXPECT_EQ(intent.domains[0].domain, "clients");
  EXPECT_NEAR(intent.domains[0].confidence, 0.75, 1e-12);
  EXPECT_EQ(intent.domains[1].domain, "sales");
  EXPECT_NEAR(intent.domains[1].confidence, 0.25, 1e-12);
  EXPECT_TRUE(classify_intent("weather tomorrow", t, std::nullopt).domains.empty());
}

TEST(Classify, AgreesWithKeywordOracle) {
  const auto t = henderson_taxonomy();
  std::vector<std::string> vocab{"budget", "report", "weekly", "status"};
  for (const auto& [_, kws] : t.keywords) vocab.insert(vocab.end(), kws.begin(), kws.end());
  std::mt19937_64 rng(23);
  for (int i = 0; i < 1000; ++i) {
    std::string q;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 6); k < n; ++k) q += vocab[rng() % vocab.size()] + " ";
    const auto oracle = ctxk::testing::keyword_oracle(q, t);
    double total = 0;
    for (const auto& [_, s] : oracle) total += s;
    const auto intent = classify_intent(q, t, std::nullopt);
    ASSERT_EQ(intent.domains.size(), oracle.size()) << q;
    double sum = 0;
    for (std::size_t k = 0; k < intent.domains.size(); ++k) {
      const auto& ds = intent.domains[k];
      ASSERT_NEAR(ds.confidence, oracle.at(ds.domain) / total, 1e-12) << q;
      if (k) ASSERT_LE(ds.confidence, intent.domains[k - 1].confidence);
      sum += ds.confidence;
    }
    if (!oracle.empty()) ASSERT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Classify, PronounsResolveToLastEntity) {
  const auto t = henderson_taxonomy();
  const auto first = classify_intent("Status of the Globex deal", t, std::nullopt);
  EXPECT_EQ(first.entities, std::vector<std::string>{"Globex"});
  const auto next = classify_intent("When is their renewal due?", t, std::string("Globex"));
  EXPECT_EQ(next.resolved_query, "When is Globex renewal due");
  EXPECT_EQ(next.entities, std::vector<std::string>{"Globex"});
  const auto known = classify_intent("acme renewal", t, std::nullopt, {"acme"});
  EXPECT_EQ(known.entities, std::vector<std::string>{"Acme"});
}

TEST(Signals, RecencyAndUserRelevance) {
  EXPECT_DOUBLE_EQ(recency_signal(t0, 60min, t0), 1.0);
  EXPECT_NEAR(recency_signal(t0, 60min, t0 + 60min), std::exp(-1.0), 1e-12);
  EXPECT_NEAR(recency_signal(t0, 24h, t0 + 12h), std::exp(-0.5), 1e-12);
  EXPECT_DOUBLE_EQ(recency_signal(t0 + 1h, 60min, t0), 1.0);
  const std::vector<std::string> assigned{"henderson"};
  EXPECT_DOUBLE_EQ(user_relevance_signal("clients/henderson/a.md", assigned), 1.0);
  EXPECT_DOUBLE_EQ(user_relevance_signal("clients/hendersonx/a.md", assigned), 0.25);
  EXPECT_DOUBLE_EQ(user_relevance_signal("clients/globex/a.md", {}), 0.25);
}

TEST(Rank, ScoreIsTheWeightedSumAndOrderIsDescending) {
  std::mt19937_64 rng(29);
  const std::vector<std::string> words{"pricing", "henderson", "renewal", "q3", "budget", "salary", "deal"};
  RoutingSpec spec;
  const std::vector<std::string> assigned{"henderson"};
  std::vector<Candidate> cands;
  for (int i = 0; i < 40; ++i) {
    Candidate c;
    for (int k = 0; k < 5; ++k) c.unit.content += words[rng() % words.size()] + " ";
    c.unit.metadata.path = (i % 3 ? "clients/henderson/" : "clients/globex/") + std::to_string(i) + ".md";
    c.unit.metadata.timestamp = t0 - std::chrono::minutes(rng() % 3000);
    c.unit.metadata.authority = static_cast<double>(rng() % 101) / 100.0;
    c.unit.id = "s:" + c.unit.metadata.path;
    c.max_age = 24h;
    cands.push_back(c);
  }
  const auto ranked = rank(cands, "henderson pricing renewal", assigned, spec, t0);
  ASSERT_EQ(ranked.size(), cands.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    const double expect = 0.4 * r.signals.semantic_relevance +
                          0.3 * std::exp(-std::chrono::duration<double>(t0 - r.unit.metadata.timestamp).count() /
                                         std::chrono::duration<double>(24h).count()) +
                          0.2 * r.unit.metadata.authority +
                          0.1 * (r.unit.metadata.path.find("/henderson/") != std::string::npos ? 1.0 : 0.25);
    ASSERT_NEAR(r.score, expect, 1e-12);
    ASSERT_GE(r.signals.semantic_relevance, 0.0);
    ASSERT_LE(r.signals.semantic_relevance, 1.0 + 1e-12);
    if (i) ASSERT_GE(ranked[i - 1].score, r.score);
  }
}

TEST(Rank, SemanticRelevanceDominatesWhenOtherSignalsTie) {
  std::vector<Candidate> cands(2);
  cands[0].unit.content = "office plants watering rota";
  cands[0].unit.metadata.path = "a.md";
  cands[1].unit.content = "Henderson renewal pricing proposal";
  cands[1].unit.metadata.path = "b.md";
  for (auto& c : cands) c.unit.metadata.timestamp = t0;
  const auto ranked = rank(cands, "Henderson pricing", {}, RoutingSpec{}, t0);
  EXPECT_EQ(ranked[0].unit.metadata.path, "b.md");
  EXPECT_DOUBLE_EQ(ranked[1].signals.semantic_relevance, 0.0);
}

TEST(Budget, Examples) {
  // Three 3000-token units under 8000: two fit.
  auto out = apply_token_budget({sized("a", 3000), sized("b", 3000), sized("c", 3000)}, 8000);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_FALSE(out[0].truncated);
  // A single 10000-token unit is cut to 8000.
  out = apply_token_budget({sized("big", 10000), sized("small", 10)}, 8000);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(out[0].truncated);
  EXPECT_EQ(text::token_count(out[0].unit.content), 8000u);
  // Greedy prefix: a later unit that would fit is not pulled forward.
  out = apply_token_budget({sized("a", 5000), sized("b", 4000), sized("c", 100)}, 8000);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(apply_token_budget({}, 8000).empty());
  EXPECT_EQ(apply_token_budget({sized("a", 8000)}, 8000).size(), 1u);
}

namespace {

// Registry, engine and router over the reference sales domain.
struct RouteWorld {
  ManualClock clock{t0};
  AuditLog audit{clock};
  Registry registry;
  PermissionEngine engine{audit, clock};
  Router router;
  Session rita;
  Session max;

  RouteWorld()
      : router(henderson_taxonomy(), registry, engine, audit, clock) {
    auto sales = parse_manifest(ctxk::testing::read_file(ctxk::testing::data_dir() / "sales-listing.yaml"));
    sales.name = "clients";
    registry.register_domain(sales);
    engine.install_access("clients", sales.access);
    const std::set<std::string> ops{std::string(kReadContext), std::string(kWriteContext), "x"};
    engine.register_role({"sales-rep", {}, {}, ops, {}});
    engine.register_role({"sales-manager", {}, {}, ops, {}});
    engine.register_user("rita", "sales-rep");
    engine.register_user("max", "sales-manager");
    engine.register_agent_profile({"rita-agent", "rita", "sales-rep", {std::string(kReadContext)}, {}, {}});
    engine.register_agent_profile({"max-agent", "max", "sales-manager", {std::string(kReadContext)}, {}, {}});
    rita = engine.create_session("rita", "rita-agent", "sales-rep", {"henderson"}, "clients");
    max = engine.create_session("max", "max-agent", "sales-manager", {}, "clients");

    put("clients/henderson/deal.md", "Henderson deal renewal at 120k, signed in principle", t0);
    put("clients/henderson/notes.md", "Henderson renewal call notes and next steps", t0 - 30h);
    put("clients/globex/deal.md", "Globex deal renewal pricing draft", t0);
    put("clients/henderson/old.md", "Henderson renewal archive from last year", t0 - 60h);
  }

  void put(const std::string& path, const std::string& content, Instant verified) {
    ContextUnit u;
    u.content = content;
    u.metadata.domain = "clients";
    u.metadata.source = source_id("clients", "client-context");
    u.metadata.path = path;
    u.metadata.timestamp = verified;
    u.authorized_roles = {"sales-rep", "sales-manager"};
    registry.upsert_unit(u, verified);
  }
};

}  // namespace

TEST(Route, FiltersByPermissionAndFreshnessAndAudits) {
  RouteWorld w;
  const auto before = w.audit.size();
  const auto d = w.router.route(w.rita.id, "Henderson deal renewal");
  EXPECT_FALSE(d.denied);
  EXPECT_EQ(d.routed_domains, std::vector<std::string>{"clients"});
  std::set<std::string> paths;
  for (const auto& r : d.results) paths.insert(r.unit.metadata.path);
  EXPECT_EQ(paths, (std::set<std::string>{"clients/henderson/deal.md", "clients/henderson/notes.md"}));
  EXPECT_EQ(d.permission_filtered, 1);
  EXPECT_EQ(d.expired_filtered, 1);
  EXPECT_EQ(d.results[0].unit.metadata.path, "clients/henderson/deal.md");
  for (const auto& r : d.results) {
    if (r.unit.metadata.path == "clients/henderson/notes.md") EXPECT_EQ(r.freshness, FreshnessState::stale);
  }
  const auto events = w.audit.query({});
  ASSERT_EQ(w.audit.size(), before + 2);
  EXPECT_EQ(events[before].kind, AuditKind::context_requested);
  EXPECT_EQ(events[before + 1].kind, AuditKind::context_delivered);
  EXPECT_EQ(events[before + 1].seq, d.audit_ref);

  RouteOptions opts;
  opts.freshness_filter = false;
  w.router.set_options(opts);
  EXPECT_EQ(w.router.route(w.rita.id, "Henderson deal renewal").results.size(), 3u);

  const auto m = w.router.route(w.max.id, "Globex deal renewal");
  EXPECT_EQ(m.permission_filtered, 0);
}

TEST(Route, DeniedOutcomes) {
  RouteWorld w;
  const auto none = w.router.route(w.rita.id, "Globex pricing draft");
  EXPECT_TRUE(none.denied);
  EXPECT_EQ(none.reason, "permission");
  EXPECT_EQ(w.audit.query({}).back().kind, AuditKind::context_denied);

  // hr is named by the query but not registered, so nothing is routed.
  const auto other = w.router.route(w.rita.id, "salary leave");
  EXPECT_TRUE(other.denied);
  EXPECT_EQ(other.reason, "no_match");
  EXPECT_TRUE(other.routed_domains.empty());

  w.engine.set_available(false);
  EXPECT_EQ(code_of([&] { w.router.route(w.rita.id, "Henderson deal"); }), errc::kPermissionEngineUnavailable);
  w.engine.set_available(true);
  w.engine.kill_switch({KillScope::session, w.rita.id});
  EXPECT_EQ(code_of([&] { w.router.route(w.rita.id, "Henderson deal"); }), errc::kSessionKilled);
  EXPECT_EQ(w.audit.query({}).back().detail.at("reason"), "killed");
  EXPECT_EQ(code_of([&] { w.router.route("s-404", "Henderson deal"); }), errc::kUnknownSession);
}

TEST(Route, BudgetFromHomeDomain) {
  RouteWorld w;
  auto m = *w.registry.domain("clients");
  m.routing.token_budget = 5;
  w.registry.update_domain(m);
  const auto d = w.router.route(w.max.id, "Henderson deal renewal");
  ASSERT_EQ(d.results.size(), 1u);
  EXPECT_TRUE(d.results[0].truncated);
  EXPECT_LE(text::token_count(d.results[0].unit.content), 5u);
}

TEST(Route, CacheAndCoreference) {
  RouteWorld w;
  w.router.set_known_entities({"Henderson"});
  w.router.route(w.rita.id, "Status of the Henderson deal");
  EXPECT_EQ(w.engine.session(w.rita.id)->last_entity, "Henderson");
  const auto again = w.router.classify("Status of the Henderson deal", std::nullopt);
  EXPECT_TRUE(again.cached);
  const auto d = w.router.route(w.rita.id, "what about their renewal");
  EXPECT_EQ(d.intent.resolved_query, "what about Henderson renewal");
  EXPECT_FALSE(d.denied);
}
