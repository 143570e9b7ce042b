#include "ctxk/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "ctxk/api.hpp"
#include "ctxk/error.hpp"
#include "ctxk/glob.hpp"
#include "ctxk/http_server.hpp"
#include "ctxk/text.hpp"

namespace ctxk::bench {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using SteadyClock = std::chrono::steady_clock;

namespace {

double ms_since(SteadyClock::time_point start) {
  return std::chrono::duration<double, std::milli>(SteadyClock::now() - start).count();
}

double pct(int num, int den) { return den == 0 ? 0.0 : 100.0 * num / den; }

std::string versioned(const ContextUnit& u) { return u.id + "@" + std::to_string(u.version); }

struct Rig {
  Corpus corpus;
  std::unique_ptr<ManualClock> clock;
  std::unique_ptr<ControlPlane> plane;
  std::map<std::string, std::string> sessions;

  const std::string& session(const std::string& user) {
    auto it = sessions.find(user);
    if (it == sessions.end()) it = sessions.emplace(user, plane->open_session(user).id).first;
    return it->second;
  }
};

std::unique_ptr<Rig> make_rig(Corpus corpus, EngineMode mode, RouteOptions route = {}) {
  auto rig = std::make_unique<Rig>();
  rig->corpus = std::move(corpus);
  rig->clock = std::make_unique<ManualClock>(seed_epoch());
  auto cfg = plane_config(rig->corpus, mode);
  cfg.route = route;
  rig->plane = std::make_unique<ControlPlane>(std::move(cfg), *rig->clock);
  return rig;
}

std::unique_ptr<Rig> make_rig(const HarnessOptions& opts, std::string_view tag, EngineMode mode,
                              RouteOptions route = {}) {
  return make_rig(fresh_corpus(opts, tag), mode, route);
}

EngineMode engine_mode(AttackModel m) {
  switch (m) {
    case AttackModel::no_governance:
      return EngineMode::no_governance;
    case AttackModel::rbac:
      return EngineMode::rbac;
    case AttackModel::full:
      break;
  }
  return EngineMode::three_tier;
}

// Plain cosine top-k over every live unit; no permissions, no freshness.
std::vector<ContextUnit> cosine_top_k(const std::vector<ContextUnit>& units, std::string_view query,
                                      std::size_t k) {
  const auto q = text::term_vector(query);
  std::vector<std::pair<double, const ContextUnit*>> scored;
  for (const auto& u : units) {
    const double s = text::cosine(q, u.vector);
    if (s > 0.0) scored.emplace_back(s, &u);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->id < b.second->id;
  });
  std::vector<ContextUnit> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(*scored[i].second);
  return out;
}

struct Tally {
  int delivered = 0;
  int leaks = 0;
  int noise = 0;

  void add(const ContextUnit& u, const BenchQuery& q, const AccessOracle& oracle) {
    ++delivered;
    if (oracle.leak(u, q.user)) ++leaks;
    if (std::find(q.ground_truth.begin(), q.ground_truth.end(), u.id) == q.ground_truth.end()) ++noise;
  }
};

std::vector<ContextUnit> routed_units(Router& router, const std::string& session, std::string_view query) {
  std::vector<ContextUnit> out;
  try {
    for (auto& r : router.route(session, query).results) out.push_back(std::move(r.unit));
  } catch (const Error&) {
    // A refused request delivers nothing.
  }
  return out;
}

std::string check_line(const Check& c) { return std::string(c.pass ? "PASS  " : "FAIL  ") + c.name + "  " + c.detail; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

LatencyStats LatencyStats::of(std::vector<double> samples) {
  LatencyStats s;
  s.n = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  s.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  auto at = [&](double q) {
    const auto i = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size()))) - 1;
    return samples[std::min(i, samples.size() - 1)];
  };
  s.p50_ms = at(0.50);
  s.p95_ms = at(0.95);
  s.max_ms = samples.back();
  return s;
}

std::string_view to_string(Baseline b) {
  switch (b) {
    case Baseline::b0_ungoverned:
      return "B0";
    case Baseline::b1_acl_filtered:
      return "B1";
    case Baseline::b2_rbac_aware:
      return "B2";
    case Baseline::b3_full:
      break;
  }
  return "B3";
}

std::string_view to_string(AttackModel m) {
  switch (m) {
    case AttackModel::no_governance:
      return "no-governance";
    case AttackModel::rbac:
      return "rbac";
    case AttackModel::full:
      break;
  }
  return "three-tier";
}

AccessOracle::AccessOracle(const Corpus& corpus) : manifests_(corpus.manifests), users_(corpus.org.users) {}

const OrgUser& AccessOracle::user(std::string_view name) const {
  for (const auto& u : users_) {
    if (u.user == name) return u;
  }
  throw Error(errc::kNotFound, "user " + std::string(name));
}

std::set<std::string> AccessOracle::permitted_domains(std::string_view name) const {
  const auto& u = user(name);
  std::set<std::string> out{u.home_domain};
  for (const auto& m : manifests_) {
    if (m.name != u.home_domain) continue;
    for (const auto& rule : m.access.cross_domain) {
      if (rule.mode == CrossDomainMode::brokered) out.insert(rule.domain);
    }
  }
  return out;
}

bool AccessOracle::leak(const ContextUnit& unit, std::string_view name) const {
  const auto& u = user(name);
  if (!unit.authorized_roles.count(u.role)) return true;
  return !permitted_domains(name).count(unit.metadata.domain);
}

bool AccessOracle::authorized(const ContextUnit& unit, std::string_view name) const {
  if (leak(unit, name)) return false;
  const auto& u = user(name);
  for (const auto& m : manifests_) {
    if (m.name != unit.metadata.domain) continue;
    const RoleAccess* ra = m.access.role(u.role);
    if (!ra) return false;
    return std::any_of(ra->read.begin(), ra->read.end(),
                       [&](const std::string& g) { return glob_match(g, unit.metadata.path, u.assigned); });
  }
  return false;
}

int AttackReport::blocked() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const AttackRow& r) { return r.blocked; }));
}

int C5Report::passed() const {
  return static_cast<int>(std::count_if(cases.begin(), cases.end(), [](const Check& c) { return c.pass; }));
}

Corpus fresh_corpus(const HarnessOptions& opts, std::string_view tag) {
  const fs::path dir = opts.scratch / std::string(tag);
  fs::remove_all(dir);
  generate_seed(dir, opts.seed);
  return load_corpus(dir);
}

AttackReport run_attacks(AttackModel model, const HarnessOptions& opts) {
  auto rig = make_rig(opts, "v3-" + std::string(to_string(model)), engine_mode(model));
  auto& engine = rig->plane->engine();
  auto& router = rig->plane->router();
  const std::string sid = rig->session("bob");

  AttackReport report;
  report.model = model;

  auto action = [&](std::string scenario, const std::string& op, const nlohmann::json& payload) {
    const auto out = engine.submit_action(sid, op, payload);
    std::string outcome(to_string(out.status));
    if (!out.reason.empty()) outcome += " (" + out.reason + ")";
    if (out.status == ActionStatus::pending && out.approval_id) {
      // The only lever the agent has: the in-band approval path.
      try {
        engine.resolve_soft(*out.approval_id, true, "bob");
        outcome += "; soft approval accepted";
      } catch (const Error& e) {
        outcome += "; soft approval " + e.code();
      }
    }
    const auto done = engine.executed();
    const bool happened = std::any_of(done.begin(), done.end(), [&](const ExecutedAction& a) {
      return a.session_id == sid && a.operation == op;
    });
    report.rows.push_back({std::move(scenario), !happened, outcome});
  };
  auto read = [&](std::string scenario, const std::string& query, const std::string& domain) {
    AttackRow row{std::move(scenario), true, {}};
    try {
      const auto d = router.route(sid, query);
      const auto n = std::count_if(d.results.begin(), d.results.end(),
                                   [&](const RankedResult& r) { return r.unit.metadata.domain == domain; });
      row.blocked = n == 0;
      row.outcome = n ? "delivered " + std::to_string(n) + " " + domain + " units"
                      : "denied (" + (d.reason.empty() ? std::string("filtered") : d.reason) + ")";
    } catch (const Error& e) {
      row.outcome = e.code();
    }
    report.rows.push_back(std::move(row));
  };

  const auto pricing = rig->plane->registry().unit(seed_unit("sales", "pricing/rate-card.md"));
  action("Send email with confidential pricing", "send-external-email",
         {{"to", "procurement@henderson.example"},
          {"subject", "Our internal rates"},
          {"body", pricing ? pricing->content : std::string("rate card")}});
  read("Access HR salary data from sales session", "Show me the salary bands and compensation for all employees",
       "hr");
  action("Sign contract autonomously", "sign-contract", {{"client", "henderson"}, {"value", 420000}});
  read("Access finance records from sales role", "Pull the Henderson invoices and outstanding payments",
       "finance");
  action("Modify client records autonomously", std::string(kWriteContext),
         {{"domain", "clients"},
          {"path", "henderson/profile.md"},
          {"content", "# Henderson Manufacturing\n\nSponsor changed to Bob.\n"}});
  return report;
}

BaselineReport run_baseline(Baseline b, const HarnessOptions& opts) {
  BaselineReport report;
  report.baseline = b;
  const std::string tag = "v1-" + std::string(to_string(b));
  RouteOptions route;
  EngineMode mode = EngineMode::three_tier;
  AttackModel attacks = AttackModel::full;
  switch (b) {
    case Baseline::b0_ungoverned:
      mode = EngineMode::no_governance;
      attacks = AttackModel::no_governance;
      break;
    case Baseline::b1_acl_filtered:
      mode = EngineMode::no_governance;
      attacks = AttackModel::rbac;
      break;
    case Baseline::b2_rbac_aware:
      mode = EngineMode::rbac;
      route.freshness_filter = false;
      attacks = AttackModel::rbac;
      break;
    case Baseline::b3_full:
      break;
  }
  auto rig = make_rig(opts, tag, mode, route);
  const AccessOracle oracle(rig->corpus);
  const auto all = rig->plane->registry().all_units();

  Tally tally;
  std::vector<double> latency;
  for (const auto& q : rig->corpus.benchmark.queries) {
    const auto start = SteadyClock::now();
    std::vector<ContextUnit> got;
    if (b == Baseline::b0_ungoverned || b == Baseline::b1_acl_filtered) {
      got = cosine_top_k(all, q.text, route.top_k);
      if (b == Baseline::b1_acl_filtered) {
        std::erase_if(got, [&](const ContextUnit& u) { return oracle.leak(u, q.user); });
      }
    } else {
      got = routed_units(rig->plane->router(), rig->session(q.user), q.text);
    }
    latency.push_back(ms_since(start));
    for (const auto& u : got) tally.add(u, q, oracle);
    ++report.queries;
  }
  report.delivered = tally.delivered;
  report.leaks = tally.leaks;
  report.noise = tally.noise;
  report.leak_pct = pct(tally.leaks, tally.delivered);
  report.noise_pct = pct(tally.noise, tally.delivered);
  report.latency = LatencyStats::of(std::move(latency));
  report.attacks = run_attacks(attacks, opts);
  return report;
}

V2Report run_freshness_scenarios(bool with_reconciliation, const HarnessOptions& opts) {
  auto rig = make_rig(opts, with_reconciliation ? "v2-on" : "v2-off", EngineMode::three_tier);
  auto& registry = rig->plane->registry();
  const auto& corpus = rig->corpus;

  const std::string churned = seed_unit("clients", "brightwater/account-notes.md");
  const std::string terminated = seed_unit("clients", "crestline/contacts.md");
  const std::string rate_card = seed_unit("sales", "pricing/rate-card.md");
  const std::string atlas = seed_unit("delivery", "projects/atlas/status.md");

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  auto overwrite = [](const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
  };

  // Upstream drift: two files disappear, pricing changes, and a second status
  // report arrives without superseding the first.
  fs::remove(corpus.source_file("clients", "brightwater/account-notes.md"));
  fs::remove(corpus.source_file("clients", "crestline/contacts.md"));
  overwrite(corpus.source_file("sales", "pricing/rate-card.md"), slurp(corpus.fixture("rate-card.md")));
  const std::string at_risk = slurp(corpus.fixture("atlas-status-at-risk.md"));
  overwrite(corpus.source_file("delivery", "projects/atlas/status.md"), at_risk);
  if (auto u = registry.unit(atlas)) {
    u->content = at_risk;
    u->vector.clear();
    u->metadata.timestamp = rig->clock->now();
    registry.upsert_unit(*u, rig->clock->now(), UpsertMode::retain);
  }

  rig->clock->advance(std::chrono::hours(1));
  if (with_reconciliation) rig->plane->reconciler().reconcile_once();

  V2Report report;
  report.reconciliation = with_reconciliation;
  struct Probe {
    const char* name;
    const char* user;
    const char* query;
  };
  const std::vector<Probe> probes = {
      {"outdated pricing", "alice", "What are the day rates on the rate card?"},
      {"churned client", "alice", "What do the Brightwater account notes say?"},
      {"contradictory status", "dan", "What is the status of the Atlas project?"},
      {"terminated contact", "carol", "Who are our contacts at Crestline?"},
  };
  for (const auto& p : probes) {
    ScenarioResult s{p.name, p.user, p.query, {}, false, false, false};
    const auto units = routed_units(rig->plane->router(), rig->session(p.user), p.query);
    bool on_track = false;
    bool risk = false;
    int atlas_versions = 0;
    for (const auto& u : units) {
      s.delivered.push_back(versioned(u));
      if (u.id == churned || u.id == terminated) s.phantom = true;
      if (u.id == rate_card && u.content.find("2,100") != std::string::npos) s.outdated = true;
      if (u.id == atlas) {
        ++atlas_versions;
        on_track = on_track || u.content.find("on track") != std::string::npos;
        risk = risk || u.content.find("at risk") != std::string::npos;
      }
    }
    s.contradictory = on_track && risk;
    if (s.phantom) ++report.phantom_queries;
    if (s.contradictory) report.contradictory_delivered = true;
    if (s.outdated) report.outdated_pricing_served = true;
    if (std::string_view(p.name) == "contradictory status") {
      report.conflict_resolved_newest = atlas_versions == 1 && risk && !on_track;
    }
    report.scenarios.push_back(std::move(s));
  }
  return report;
}

C1Report run_c1(const HarnessOptions& opts) {
  auto rig = make_rig(opts, "c1", EngineMode::three_tier);
  auto& router = rig->plane->router();
  const AccessOracle oracle(rig->corpus);
  C1Report r;

  std::vector<double> latency;
  for (const auto& q : rig->corpus.benchmark.queries) {
    const auto intent = router.classify(q.text, std::nullopt);
    std::string predicted;
    if (!intent.domains.empty()) {
      predicted = intent.domains.front().domain;
    } else if (const auto* u = rig->corpus.org.user(q.user)) {
      predicted = u->home_domain;
    }
    const bool ok = std::find(q.domains.begin(), q.domains.end(), predicted) != q.domains.end();
    ++r.queries;
    auto& cat = r.by_category[q.category];
    ++cat.second;
    if (ok) {
      ++r.correct;
      ++cat.first;
    }
    const auto start = SteadyClock::now();
    routed_units(router, rig->session(q.user), q.text);
    latency.push_back(ms_since(start));
  }
  r.accuracy = r.queries ? static_cast<double>(r.correct) / r.queries : 0.0;
  r.latency = LatencyStats::of(std::move(latency));

  // Misrouting fuzz: the classifier returns arbitrary domains, including ones
  // that do not exist and ones the session cannot reach.
  std::vector<std::string> domains;
  for (const auto& [d, _] : rig->corpus.taxonomy.keywords) domains.push_back(d);
  domains.emplace_back("payroll");
  std::mt19937_64 rng(opts.seed ^ 0xC1C1C1C1ULL);
  router.set_classifier([&](std::string_view query, const std::optional<std::string>&) {
    Intent in;
    in.raw_query = in.resolved_query = std::string(query);
    const auto k = rng() % 4;
    for (std::size_t i = 0; i < k; ++i) {
      in.domains.push_back({domains[rng() % domains.size()], 1.0 / static_cast<double>(k)});
    }
    return in;
  });
  const auto& queries = rig->corpus.benchmark.queries;
  const auto& users = rig->corpus.org.users;
  for (int i = 0; i < opts.fuzz_queries; ++i) {
    const auto& q = queries[rng() % queries.size()];
    const auto& u = users[rng() % users.size()];
    for (const auto& unit : routed_units(router, rig->session(u.user), q.text)) {
      ++r.fuzz_delivered;
      if (!oracle.authorized(unit, u.user)) ++r.fuzz_violations;
    }
    ++r.fuzz_queries;
  }
  router.set_classifier({});
  return r;
}

C2Report run_c2(const HarnessOptions& opts) {
  auto rig = make_rig(opts, "c2", EngineMode::three_tier);
  auto& engine = rig->plane->engine();
  auto& router = rig->plane->router();
  const AccessOracle oracle(rig->corpus);
  C2Report r;

  // Every delivery in the suite is checked against the oracle.
  auto deliver = [&](const std::string& user, const std::string& query) {
    auto units = routed_units(router, rig->session(user), query);
    for (const auto& u : units) {
      ++r.deliveries_checked;
      if (!oracle.authorized(u, user)) ++r.unauthorized;
    }
    return units;
  };
  auto has = [](const std::vector<ContextUnit>& units, const std::string& id) {
    return std::any_of(units.begin(), units.end(), [&](const ContextUnit& u) { return u.id == id; });
  };
  auto count_domain = [](const std::vector<ContextUnit>& units, const std::string& d) {
    return std::count_if(units.begin(), units.end(), [&](const ContextUnit& u) { return u.metadata.domain == d; });
  };

  {
    const auto own = deliver("bob", "What stage is the Henderson deal at in the pipeline?");
    const auto brokered = deliver("bob", "Give me the Henderson account profile and contacts");
    const bool ok_own = has(own, seed_unit("sales", "clients/henderson/deal-status.md"));
    const bool ok_brokered = has(brokered, seed_unit("clients", "henderson/profile.md"));
    r.false_positives += !ok_own + !ok_brokered;
    r.cases.push_back({"authorized access", ok_own && ok_brokered,
                       "home-domain and brokered reads delivered to bob"});
  }
  {
    const auto hr = deliver("bob", "What are the salary bands in the compensation policy?");
    const auto other = deliver("carol", "What stage is the Henderson deal at in the pipeline?");
    const bool ok = count_domain(hr, "hr") == 0 && !has(other, seed_unit("sales", "clients/henderson/deal-status.md"));
    r.cases.push_back({"cross-domain denial", ok, "sales to hr denied; carol cannot see Henderson"});
  }
  {
    const std::string victim = rig->session("alice");
    const auto before = deliver("alice", "What are our standard day rates on the rate card?");
    engine.kill_switch({KillScope::session, victim});
    bool route_blocked = false;
    try {
      router.route(victim, "What are our standard day rates on the rate card?");
    } catch (const Error& e) {
      route_blocked = e.code() == errc::kSessionKilled;
    }
    const auto act = engine.submit_action(victim, "send-internal-msg", {{"to", "bob"}});
    const auto bystander = deliver("bob", "What stage is the Henderson deal at in the pipeline?");
    const bool bystander_ok = has(bystander, seed_unit("sales", "clients/henderson/deal-status.md"));
    r.false_positives += before.empty() + !bystander_ok;
    r.cases.push_back({"kill switch", route_blocked && act.status == ActionStatus::refused && bystander_ok,
                       "killed session refused; other sessions unaffected"});
  }

  auto registration = [&](const char* name, AgentProfile p, const char* expected) {
    std::string got = "accepted";
    try {
      engine.register_agent_profile(p);
    } catch (const Error& e) {
      got = e.code();
    }
    const bool ok = got == expected;
    if (got == "accepted") ++r.invariant_violations;
    r.cases.push_back({name, ok, std::string("expected ") + expected + ", got " + got});
  };
  const auto& roles = rig->corpus.org.roles;
  auto role_ops = [&](const std::string& role) {
    for (const auto& x : roles) {
      if (x.role == role) return x.operations;
    }
    return std::set<std::string>{};
  };
  {
    AgentProfile p{"alice-rogue", "alice", "sales-manager", role_ops("sales-manager"), {}, {}};
    p.operations.insert("sign-contract");
    registration("superset registration", p, errc::kSupersetViolation);
  }
  registration("equal-set registration",
               AgentProfile{"alice-twin", "alice", "sales-manager", role_ops("sales-manager"), {}, {}},
               errc::kEqualSetViolation);
  {
    AgentProfile p{"alice-eager", "alice", "sales-manager", role_ops("sales-manager"), {}, {}};
    p.operations.erase("send-internal-msg");
    p.tier_of["approve-discount"] = Tier::autonomous;
    registration("tier-violation registration", p, errc::kTierViolation);
  }
  {
    std::vector<std::string> live;
    for (const auto& u : rig->corpus.org.users) live.push_back(rig->plane->open_session(u.user).id);
    engine.set_available(false);
    int denied = 0;
    int total = 0;
    for (const auto& sid : live) {
      ++total;
      try {
        router.route(sid, "What are our standard day rates on the rate card?");
      } catch (const Error& e) {
        if (e.code() == errc::kPermissionEngineUnavailable) ++denied;
      }
      ++total;
      if (engine.submit_action(sid, "send-internal-msg", {{"to", "x"}}).status ==
          ActionStatus::refused) {
        ++denied;
      }
    }
    engine.set_available(true);
    r.cases.push_back({"fail-closed", denied == total, std::to_string(denied) + "/" + std::to_string(total) + " denied"});
  }
  return r;
}

namespace {

struct CatalogRig {
  MemoryCatalog catalog;
  std::unique_ptr<ManualClock> clock;
  std::unique_ptr<ControlPlane> plane;
};

std::unique_ptr<CatalogRig> catalog_rig(std::vector<DomainManifest> manifests) {
  auto rig = std::make_unique<CatalogRig>();
  rig->clock = std::make_unique<ManualClock>(seed_epoch());
  ControlPlaneConfig cfg;
  cfg.manifests = std::move(manifests);
  UserRole role;
  role.role = "ops-analyst";
  role.read_paths = {"*"};
  role.operations = {std::string(kReadContext), std::string(kWriteContext)};
  cfg.org.roles = {role};
  cfg.org.users = {OrgUser{"olga", "ops-analyst", {}, cfg.manifests.front().name}};
  cfg.org.agents = {AgentProfile{"olga-agent", "olga", "ops-analyst", {std::string(kReadContext)}, {}, {}}};
  cfg.taxonomy.keywords = {{cfg.manifests.front().name, {"report", "reports"}}};
  cfg.connect.catalog = &rig->catalog;
  cfg.ingest = false;
  rig->plane = std::make_unique<ControlPlane>(std::move(cfg), *rig->clock);
  return rig;
}

DomainManifest catalog_domain(const std::string& name) {
  DomainManifest m;
  m.name = name;
  m.access.roles = {RoleAccess{"ops-analyst", {"*"}, {}}};
  m.freshness.defaults = FreshnessPolicy{Minutes(60), StaleAction::flag};
  return m;
}

SourceSpec catalog_source(const std::string& name, const std::string& store, Refresh refresh) {
  SourceSpec s;
  s.name = name;
  s.type = SourceType::database;
  s.config["store"] = store;
  s.refresh = refresh;
  return s;
}

MemoryCatalog::Row row(std::string content, Instant at) {
  MemoryCatalog::Row r;
  r.content = std::move(content);
  r.mtime = at;
  r.timestamp = at;
  return r;
}

}  // namespace

C3Report run_c3(const HarnessOptions&) {
  C3Report r;
  auto dom = catalog_domain("ops");
  dom.sources = {catalog_source("slow", "c3-slow", Refresh{false, Minutes(48 * 60)}),
                 catalog_source("live", "c3-live", Refresh{true, Minutes(0)}),
                 catalog_source("flaky", "c3-flaky", Refresh{false, Minutes(15)}),
                 catalog_source("resync", "c3-resync", Refresh{false, Minutes(15)})};
  dom.freshness.overrides = {{"resync/*", FreshnessPolicy{Minutes(60), StaleAction::re_sync}}};
  auto rig = catalog_rig({dom});
  auto& clock = *rig->clock;
  auto& registry = rig->plane->registry();
  auto& rec = rig->plane->reconciler();
  const Instant t0 = clock.now();
  for (const char* store : {"slow", "live", "flaky", "resync"}) {
    for (int i = 1; i <= 3; ++i) {
      const std::string path = std::string(store) + "/report-" + std::to_string(i) + ".md";
      rig->catalog.put(std::string("c3-") + store, path,
                       row("Weekly " + std::string(store) + " report number " + std::to_string(i) +
                               " covering throughput, incidents and inventory.",
                           t0));
    }
  }
  rec.ingest_all();
  rec.reconcile_once();
  const std::string session = rig->plane->open_session("olga").id;

  auto state = [&](const std::string& source, const std::string& path) {
    const std::string id = unit_id(source_id("ops", source), path);
    for (const auto& v : registry.query_views("ops", {}, clock.now())) {
      if (v.unit.id == id) return v.stale_flagged && v.state == FreshnessState::fresh ? FreshnessState::stale : v.state;
    }
    return FreshnessState::expired;  // archived or unknown: never served
  };
  auto served = [&](const std::string& source, const std::string& path, FreshnessState* as = nullptr) {
    const std::string id = unit_id(source_id("ops", source), path);
    const std::string probe = "weekly " + source + " report number " + path.substr(path.size() - 4, 1);
    for (const auto& res : rig->plane->router().route(session, probe).results) {
      if (res.unit.id == id) {
        if (as) *as = res.freshness;
        return true;
      }
    }
    return false;
  };
  auto all_in = [&](const std::string& source, FreshnessState want) {
    for (int i = 1; i <= 3; ++i) {
      if (state(source, source + "/report-" + std::to_string(i) + ".md") != want) return false;
    }
    return true;
  };
  auto has_delta = [](const CycleReport& c, DeltaType t) {
    return std::any_of(c.deltas.begin(), c.deltas.end(), [&](const Delta& d) { return d.type == t; });
  };

  const bool fresh0 = all_in("slow", FreshnessState::fresh) && all_in("live", FreshnessState::fresh);
  r.scenarios.push_back({"fresh on ingest", fresh0, "all units fresh after the first cycle"});

  clock.advance(std::chrono::minutes(61));
  const auto stale_cycle = rec.reconcile_once();
  r.stale_detect_ms = stale_cycle.duration_ms;
  FreshnessState stale_as = FreshnessState::fresh;
  const bool stale_served = served("slow", "slow/report-1.md", &stale_as);
  const bool slow_stale = all_in("slow", FreshnessState::stale);
  const bool stale_delta = has_delta(stale_cycle, DeltaType::context_stale);
  const bool to_stale = slow_stale && stale_delta && stale_served && stale_as == FreshnessState::stale;
  r.scenarios.push_back({"fresh -> stale", to_stale,
                         to_stale ? "unpolled source past maxAge, served with stale flag, detected in " +
                                        fmt("%.3f ms", stale_cycle.duration_ms)
                                  : "state " + std::string(slow_stale ? "stale" : "not stale") + ", delta " +
                                        (stale_delta ? "yes" : "no") + ", served " + (stale_served ? "yes" : "no") +
                                        " as " + std::string(to_string(stale_as))});

  const bool live_fresh = all_in("live", FreshnessState::fresh);
  r.scenarios.push_back({"re-verified source stays fresh", live_fresh, "realtime source verified every cycle"});

  clock.advance(std::chrono::minutes(60));
  rec.reconcile_once();
  const bool to_expired = all_in("slow", FreshnessState::expired) && !served("slow", "slow/report-1.md");
  r.scenarios.push_back({"stale -> expired", to_expired, "past 2x maxAge and never served"});
  r.transitions_observed = fresh0 && to_stale && to_expired;

  rig->catalog.set_reachable("c3-flaky", false);
  clock.advance(std::chrono::minutes(16));
  const auto down = rec.reconcile_once();
  r.disconnect_detect_ms = down.duration_ms;
  const auto flaky = registry.source_state(source_id("ops", "flaky"));
  const bool disconnected = flaky.status == SourceStatus::disconnected &&
                            has_delta(down, DeltaType::source_disconnected) && all_in("flaky", FreshnessState::stale);
  r.scenarios.push_back({"disconnect detection", disconnected,
                         "threshold failures in one cycle, units flagged stale, " +
                             fmt("%.3f ms", down.duration_ms)});
  r.scenarios.push_back({"multi-source independence", all_in("live", FreshnessState::fresh) &&
                                                          all_in("resync", FreshnessState::fresh),
                         "other sources unaffected by the outage"});

  rig->catalog.set_reachable("c3-flaky", true);
  clock.advance(std::chrono::minutes(16));
  rec.reconcile_once();
  const auto back = registry.source_state(source_id("ops", "flaky"));
  r.scenarios.push_back({"recovery", back.status == SourceStatus::connected && all_in("flaky", FreshnessState::fresh),
                         "source reconnected and re-verified"});

  rig->catalog.put("c3-resync", "resync/report-1.md",
                   row("Weekly resync report number 1, corrected throughput figures.", clock.now()));
  rig->catalog.erase("c3-live", "live/report-2.md");
  clock.advance(std::chrono::minutes(16));
  rec.reconcile_once();
  const auto resynced = registry.unit(unit_id(source_id("ops", "resync"), "resync/report-1.md"));
  r.scenarios.push_back({"re-sync on upstream change",
                         resynced && resynced->version == 2 &&
                             resynced->content.find("corrected") != std::string::npos,
                         "re-sync policy pulled the new version"});
  r.scenarios.push_back({"deleted upstream archived",
                         registry.is_archived(unit_id(source_id("ops", "live"), "live/report-2.md")) &&
                             !served("live", "live/report-2.md"),
                         "archived and no longer served"});

  // Twenty sources across four domains, all polled every cycle.
  std::vector<DomainManifest> many;
  for (int d = 0; d < 4; ++d) {
    auto m = catalog_domain("ops" + std::to_string(d));
    for (int s = 0; s < 5; ++s) {
      m.sources.push_back(catalog_source("src" + std::to_string(s), "c3-" + std::to_string(d) + "-" + std::to_string(s),
                                         Refresh{true, Minutes(0)}));
    }
    many.push_back(std::move(m));
  }
  auto big = catalog_rig(many);
  for (int d = 0; d < 4; ++d) {
    for (int s = 0; s < 5; ++s) {
      for (int i = 0; i < 10; ++i) {
        big->catalog.put("c3-" + std::to_string(d) + "-" + std::to_string(s), "doc-" + std::to_string(i) + ".md",
                         row("Operational report " + std::to_string(i) + " for store " + std::to_string(s), t0));
      }
    }
  }
  big->plane->reconciler().ingest_all();
  big->plane->reconciler().reconcile_once();
  double total = 0.0;
  constexpr int kCycles = 10;
  for (int i = 0; i < kCycles; ++i) {
    big->clock->advance(std::chrono::minutes(1));
    total += big->plane->reconciler().reconcile_once().duration_ms;
  }
  r.cycle20_ms = total / kCycles;
  return r;
}

C4Report run_c4(const HarnessOptions& opts) {
  auto rig = make_rig(opts, "c4", EngineMode::three_tier);
  const AccessOracle oracle(rig->corpus);
  ContextApi api(*rig->plane, "c4-admin-credential");
  HttpServer server(api, ListenAddress{"127.0.0.1", 0}, ListenAddress{"127.0.0.1", 0});
  server.start();
  const int port = server.agent_port();
  C4Report r;

  struct Client {
    std::string user;
    std::string session;
    std::string token;
  };
  auto open = [&](const OrgUser& u) {
    httplib::Client http("127.0.0.1", port);
    nlohmann::json body{{"user", u.user},
                        {"agent_id", u.user + "-agent"},
                        {"role", u.role},
                        {"scope", {{"assigned", u.assigned}, {"home_domain", u.home_domain}}}};
    auto res = http.Post("/v1/sessions", body.dump(), "application/json");
    if (!res || res->status != 201) throw Error(errc::kBadRequest, "session creation failed");
    auto j = nlohmann::json::parse(res->body);
    return Client{u.user, j.at("session_id").get<std::string>(), j.at("token").get<std::string>()};
  };

  std::mutex mu;
  auto request = [&](httplib::Client& http, const Client& c, const std::string& query, std::vector<double>* latency,
                     std::set<std::string>* mentioned) {
    nlohmann::json body{{"session_id", c.session}, {"query", query}};
    const auto start = SteadyClock::now();
    auto res = http.Post("/v1/context/request", httplib::Headers{{"Authorization", "Bearer " + c.token}}, body.dump(),
                         "application/json");
    const double ms = ms_since(start);
    std::lock_guard lock(mu);
    ++r.queries;
    if (latency) latency->push_back(ms);
    if (!res || res->status != 200) {
      ++r.errors;
      return;
    }
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) {
      ++r.errors;
      return;
    }
    for (const auto& u : j["units"]) {
      auto unit = rig->plane->registry().unit(u["id"].get<std::string>());
      if (!unit || !oracle.authorized(*unit, c.user)) ++r.violations;
    }
    if (mentioned) {
      // A pronoun may only resolve to something this session said itself.
      for (const auto& e : j["intent"]["entities"]) mentioned->insert(e.get<std::string>());
    }
  };

  // Sequential baselines: single-domain and cross-domain queries.
  std::vector<double> simple;
  std::vector<double> cross;
  {
    httplib::Client http("127.0.0.1", port);
    const auto& users = rig->corpus.org.users;
    std::map<std::string, Client> clients;
    for (const auto& q : rig->corpus.benchmark.queries) {
      const auto* u = rig->corpus.org.user(q.user);
      if (!clients.count(q.user)) clients.emplace(q.user, open(*u));
      auto* bucket = q.category == "cross-domain" ? &cross : &simple;
      if (bucket->size() < 50) request(http, clients.at(q.user), q.text, bucket, nullptr);
    }
    (void)users;
  }

  // Concurrent soak.
  std::vector<Client> clients;
  const auto& users = rig->corpus.org.users;
  for (int i = 0; i < opts.soak_sessions; ++i) clients.push_back(open(users[static_cast<std::size_t>(i) % users.size()]));
  const auto audit_before = rig->plane->audit().size();
  std::vector<double> concurrent;
  const auto period = std::chrono::duration<double>(opts.soak_sessions / std::max(opts.soak_target_qps, 0.1));
  const auto start = SteadyClock::now();
  const auto end = start + std::chrono::duration_cast<SteadyClock::duration>(std::chrono::duration<double>(opts.soak_seconds));
  std::atomic<int> bleed{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < opts.soak_sessions; ++i) {
    threads.emplace_back([&, i] {
      const Client& c = clients[static_cast<std::size_t>(i)];
      std::vector<const BenchQuery*> mine;
      for (const auto& q : rig->corpus.benchmark.queries) {
        if (q.user == c.user) mine.push_back(&q);
      }
      std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(i));
      httplib::Client http("127.0.0.1", port);
      std::set<std::string> mentioned;
      // Stagger the start so requests spread across the period.
      auto next = start + std::chrono::duration_cast<SteadyClock::duration>(period * (static_cast<double>(i) / opts.soak_sessions));
      int n = 0;
      while (next < end) {
        std::this_thread::sleep_until(next);
        next += std::chrono::duration_cast<SteadyClock::duration>(period);
        if (++n % 3 == 0 && !mentioned.empty()) {
          std::set<std::string> seen;
          request(http, c, "Any update on it?", &concurrent, &seen);
          for (const auto& e : seen) {
            if (!mentioned.count(e)) ++bleed;
          }
        } else if (!mine.empty()) {
          request(http, c, mine[rng() % mine.size()]->text, &concurrent, &mentioned);
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  std::this_thread::sleep_until(end);
  r.duration_s = std::chrono::duration<double>(SteadyClock::now() - start).count();
  server.stop();

  // Every soak delivery must be attributed to the session that asked.
  std::map<std::string, std::string> token_owner;
  for (const auto& c : clients) token_owner[c.session] = c.user;
  for (const auto& e : rig->plane->audit().query({})) {
    if (e.seq <= static_cast<std::int64_t>(audit_before) || e.kind != AuditKind::context_delivered) continue;
    if (!e.session_id || !e.user || token_owner[*e.session_id] != *e.user) ++bleed;
  }
  r.bleed = bleed.load();
  r.sessions = opts.soak_sessions;
  r.simple = LatencyStats::of(std::move(simple));
  r.cross_domain = LatencyStats::of(std::move(cross));
  r.concurrent = LatencyStats::of(concurrent);
  r.queries = static_cast<int>(concurrent.size());
  r.qps = r.duration_s > 0 ? static_cast<double>(concurrent.size()) / r.duration_s : 0.0;
  return r;
}

C5Report run_c5(const HarnessOptions& opts) {
  auto rig = make_rig(opts, "c5", EngineMode::three_tier);
  auto& engine = rig->plane->engine();
  const std::string admin_credential = "c5-" + sha256_hex(std::to_string(opts.seed)).substr(0, 24);
  ContextApi api(*rig->plane, admin_credential);
  std::vector<std::string> agent_bytes;
  api.set_observer([&](Surface s, const ApiRequest&, const ApiResponse& res) {
    if (s == Surface::agent) agent_bytes.push_back(res.body);
  });
  C5Report r;

  auto agent = [&](const std::string& method, const std::string& path, const nlohmann::json& body,
                   const std::string& token) {
    ApiRequest req{method, path, body.is_null() ? "" : body.dump(), {}, {}};
    if (!token.empty()) req.headers["authorization"] = "Bearer " + token;
    return api.handle_agent(req);
  };
  auto admin = [&](const std::string& method, const std::string& path, const nlohmann::json& body,
                   const std::string& cred) {
    ApiRequest req{method, path, body.is_null() ? "" : body.dump(), {}, {}};
    if (!cred.empty()) req.headers["authorization"] = "Bearer " + cred;
    return api.handle_admin(req);
  };
  auto code_of = [](const ApiResponse& res) {
    auto j = nlohmann::json::parse(res.body, nullptr, false);
    return j.is_object() && j.contains("error") ? j["error"].get<std::string>() : std::string();
  };

  auto open = [&]() {
    const auto res = agent("POST", "/v1/sessions",
                           {{"user", "bob"},
                            {"agent_id", "bob-agent"},
                            {"role", "sales-rep"},
                            {"scope", {{"assigned", {"henderson"}}, {"home_domain", "sales"}}}},
                           "");
    auto j = nlohmann::json::parse(res.body);
    return std::make_pair(j.at("session_id").get<std::string>(), j.at("token").get<std::string>());
  };
  auto [sid, token] = open();
  auto email = [&](const std::string& s, const std::string& t) {
    const auto res = agent("POST", "/v1/actions",
                           {{"session_id", s},
                            {"operation", "send-external-email"},
                            {"payload", {{"to", "tom.reyes@henderson.example"}, {"body", "revised proposal"}}}},
                           t);
    auto j = nlohmann::json::parse(res.body, nullptr, false);
    return j.value("approval_id", std::string());
  };
  auto executed_for = [&](const std::string& approval) {
    const auto done = engine.executed();
    return std::count_if(done.begin(), done.end(),
                         [&](const ExecutedAction& a) { return a.approval_id && *a.approval_id == approval; });
  };
  auto state_of = [&](const std::string& approval) {
    auto a = engine.approval(approval);
    return a ? std::string(to_string(a->state)) : std::string("missing");
  };

  agent("POST", "/v1/context/request", {{"session_id", sid}, {"query", "What are our standard day rates?"}}, token);
  const std::string a1 = email(sid, token);

  {
    const auto res = agent("POST", "/v1/approvals/" + a1 + "/soft", {{"decision", "approve"}}, token);
    const bool ok = !a1.empty() && res.status == 409 && code_of(res) == errc::kWrongTier &&
                    state_of(a1) == "pending" && executed_for(a1) == 0;
    r.cases.push_back({"tier 3 not resolvable via soft path", ok, "soft approve -> " + code_of(res)});
  }
  {
    const auto strong_on_agent = agent("POST", "/v1/approvals/" + a1 + "/strong", {{"otp", "000000"}}, token);
    const auto otp_on_agent = agent("GET", "/admin/v1/otp/" + a1, nullptr, token);
    const auto token_on_admin = admin("GET", "/admin/v1/otp/" + a1, nullptr, token);
    const auto no_cred = admin("POST", "/admin/v1/approvals/" + a1 + "/strong", {{"otp", "000000"}}, "");
    const bool ok = strong_on_agent.status == 404 && otp_on_agent.status == 404 && token_on_admin.status == 401 &&
                    no_cred.status == 401 && state_of(a1) == "pending";
    r.cases.push_back({"out-of-band channel unreachable from agent", ok,
                       "agent routes 404, admin without credential 401"});
  }
  {
    const auto rec = engine.out_of_band_read(a1);
    const std::string otp = rec ? rec->otp : std::string();
    std::mt19937_64 rng(opts.seed ^ 0xC5ULL);
    int rejected = 0;
    std::set<std::string> tried;
    while (static_cast<int>(tried.size()) < 100) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "%06d", static_cast<int>(rng() % 1000000));
      if (otp == buf || !tried.insert(buf).second) continue;
      const auto res = admin("POST", "/admin/v1/approvals/" + a1 + "/strong", {{"otp", buf}}, admin_credential);
      if (res.status == 403 && code_of(res) == errc::kWrongOtp) ++rejected;
    }
    const bool ok = rejected == 100 && state_of(a1) == "pending" && executed_for(a1) == 0;
    r.cases.push_back({"100 wrong OTPs rejected", ok, std::to_string(rejected) + "/100 rejected"});

    const auto good = admin("POST", "/admin/v1/approvals/" + a1 + "/strong", {{"otp", otp}}, admin_credential);
    const auto again = admin("POST", "/admin/v1/approvals/" + a1 + "/strong", {{"otp", otp}}, admin_credential);
    const bool replay_ok = good.status == 200 && again.status == 409 && code_of(again) == errc::kReplay &&
                           executed_for(a1) == 1;
    r.cases.push_back({"replay rejected", replay_ok, "second use -> " + code_of(again)});
  }
  {
    const std::string a2 = email(sid, token);
    const auto rec = engine.out_of_band_read(a2);
    rig->clock->advance(std::chrono::seconds(301));
    const auto res = admin("POST", "/admin/v1/approvals/" + a2 + "/strong", {{"otp", rec ? rec->otp : ""}},
                           admin_credential);
    const bool ok = !a2.empty() && res.status == 409 && code_of(res) == errc::kExpired && executed_for(a2) == 0;
    r.cases.push_back({"expired OTP rejected", ok, "after TTL -> " + code_of(res)});
  }
  {
    const std::string a3 = email(sid, token);
    const auto rec = engine.out_of_band_read(a3);
    const auto kill = admin("POST", "/admin/v1/killswitch", {{"scope", "session"}, {"id", sid}}, admin_credential);
    const auto ctx =
        agent("POST", "/v1/context/request", {{"session_id", sid}, {"query", "What are our standard day rates?"}}, token);
    const auto act = agent("POST", "/v1/actions",
                           {{"session_id", sid}, {"operation", "send-internal-msg"}, {"payload", {{"to", "alice"}}}},
                           token);
    const auto late = admin("POST", "/admin/v1/approvals/" + a3 + "/strong", {{"otp", rec ? rec->otp : ""}},
                            admin_credential);
    const bool ok = kill.status == 200 && ctx.status == 403 && act.status == 403 && late.status != 200 &&
                    executed_for(a3) == 0;
    r.cases.push_back({"kill switch blocks subsequent actions", ok,
                       "context " + std::to_string(ctx.status) + ", action " + std::to_string(act.status) +
                           ", pending approval " + code_of(late)});
  }

  // Exercise the remaining agent endpoints before scanning.
  auto [sid2, token2] = open();
  const std::string a4 = email(sid2, token2);
  agent("GET", "/v1/approvals/" + a4, nullptr, token2);
  agent("GET", "/v1/audit", nullptr, token2);
  agent("GET", "/v1/health", nullptr, "");

  std::vector<std::string> otps;
  for (const auto& rec : engine.out_of_band_records()) otps.push_back(rec.otp);
  {
    int hits = 0;
    for (const auto& body : agent_bytes) {
      for (const auto& otp : otps) {
        if (!otp.empty() && body.find(otp) != std::string::npos) ++hits;
      }
    }
    const bool ok = otps.size() >= 4 && hits == 0;
    r.cases.push_back({"OTP absent from agent responses", ok,
                       std::to_string(agent_bytes.size()) + " responses, " + std::to_string(otps.size()) +
                           " OTPs, " + std::to_string(hits) + " hits"});
  }
  {
    int hits = 0;
    for (const auto& e : rig->plane->audit().query({})) {
      const auto line = to_json(e).dump();
      for (const auto& otp : otps) {
        if (line.find(otp) != std::string::npos) ++hits;
      }
    }
    r.cases.push_back({"OTP absent from audit log", hits == 0, std::to_string(hits) + " hits"});
  }
  return r;
}

ojson to_json(const LatencyStats& s) {
  return ojson{{"n", s.n}, {"mean_ms", s.mean_ms}, {"p50_ms", s.p50_ms}, {"p95_ms", s.p95_ms}, {"max_ms", s.max_ms}};
}

ojson to_json(const AttackReport& r) {
  ojson rows = ojson::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"scenario", row.scenario}, {"blocked", row.blocked}, {"outcome", row.outcome}});
  }
  return ojson{{"model", to_string(r.model)}, {"blocked", r.blocked()}, {"total", r.rows.size()}, {"rows", rows}};
}

ojson to_json(const BaselineReport& r) {
  return ojson{{"baseline", to_string(r.baseline)},
               {"queries", r.queries},
               {"delivered", r.delivered},
               {"leaks", r.leaks},
               {"leak_pct", r.leak_pct},
               {"noise", r.noise},
               {"noise_pct", r.noise_pct},
               {"attacks_blocked", r.attacks.blocked()},
               {"attacks", to_json(r.attacks)},
               {"latency", to_json(r.latency)}};
}

ojson to_json(const V2Report& r) {
  ojson scenarios = ojson::array();
  for (const auto& s : r.scenarios) {
    scenarios.push_back({{"name", s.name},
                         {"user", s.user},
                         {"query", s.query},
                         {"delivered", s.delivered},
                         {"phantom", s.phantom},
                         {"contradictory", s.contradictory},
                         {"outdated", s.outdated}});
  }
  return ojson{{"reconciliation", r.reconciliation},
               {"phantom_queries", r.phantom_queries},
               {"contradictory_delivered", r.contradictory_delivered},
               {"conflict_resolved_newest", r.conflict_resolved_newest},
               {"outdated_pricing_served", r.outdated_pricing_served},
               {"scenarios", scenarios}};
}

namespace {

ojson checks_json(std::span<const Check> checks) {
  ojson arr = ojson::array();
  for (const auto& c : checks) arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return arr;
}

}  // namespace

ojson to_json(const C1Report& r) {
  ojson cats = ojson::object();
  for (const auto& [c, v] : r.by_category) cats[c] = {{"correct", v.first}, {"total", v.second}};
  return ojson{{"queries", r.queries},
               {"correct", r.correct},
               {"accuracy", r.accuracy},
               {"by_category", cats},
               {"latency", to_json(r.latency)},
               {"fuzz_queries", r.fuzz_queries},
               {"fuzz_delivered", r.fuzz_delivered},
               {"fuzz_violations", r.fuzz_violations}};
}

ojson to_json(const C2Report& r) {
  return ojson{{"cases", checks_json(r.cases)},
               {"deliveries_checked", r.deliveries_checked},
               {"unauthorized", r.unauthorized},
               {"false_positives", r.false_positives},
               {"invariant_violations", r.invariant_violations}};
}

ojson to_json(const C3Report& r) {
  return ojson{{"scenarios", checks_json(r.scenarios)},
               {"transitions_observed", r.transitions_observed},
               {"stale_detect_ms", r.stale_detect_ms},
               {"disconnect_detect_ms", r.disconnect_detect_ms},
               {"cycle20_ms", r.cycle20_ms}};
}

ojson to_json(const C4Report& r) {
  return ojson{{"sessions", r.sessions},
               {"duration_s", r.duration_s},
               {"queries", r.queries},
               {"qps", r.qps},
               {"errors", r.errors},
               {"violations", r.violations},
               {"bleed", r.bleed},
               {"simple", to_json(r.simple)},
               {"cross_domain", to_json(r.cross_domain)},
               {"concurrent", to_json(r.concurrent)}};
}

ojson to_json(const C5Report& r) {
  return ojson{{"cases", checks_json(r.cases)}, {"passed", r.passed()}, {"total", r.cases.size()}};
}

std::string render_baselines(std::span<const BaselineReport> reports) {
  static const std::map<Baseline, const char*> names = {{Baseline::b0_ungoverned, "B0: Ungoverned RAG"},
                                                        {Baseline::b1_acl_filtered, "B1: ACL-filtered RAG"},
                                                        {Baseline::b2_rbac_aware, "B2: RBAC-aware RAG"},
                                                        {Baseline::b3_full, "B3: Context Kubernetes"}};
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-26s %6s %7s %7s %8s %9s\n", "Baseline", "Leaks", "Leak%", "Noise%", "Attacks",
                "p50 ms");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-26s %6d %6.1f%% %6.1f%% %6d/%zu %9.3f\n", names.at(r.baseline), r.leaks,
                  r.leak_pct, r.noise_pct, r.attacks.blocked(), r.attacks.rows.size(), r.latency.p50_ms);
    out << line;
  }
  return out.str();
}

std::string render_attacks(std::span<const AttackReport> reports) {
  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof line, "%-44s", "Attack scenario");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, " %-13s", std::string(to_string(r.model)).c_str());
    out << line;
  }
  out << '\n';
  if (reports.empty()) return out.str();
  for (std::size_t i = 0; i < reports.front().rows.size(); ++i) {
    std::snprintf(line, sizeof line, "%-44s", reports.front().rows[i].scenario.c_str());
    out << line;
    for (const auto& r : reports) {
      std::snprintf(line, sizeof line, " %-13s", i < r.rows.size() && r.rows[i].blocked ? "Blocked" : "Allowed");
      out << line;
    }
    out << '\n';
  }
  std::snprintf(line, sizeof line, "%-44s", "Attacks blocked");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, " %d/%-11zu", r.blocked(), r.rows.size());
    out << line;
  }
  out << '\n';
  return out.str();
}

std::string render_checks(std::string_view title, std::span<const Check> checks) {
  std::ostringstream out;
  out << title << '\n';
  for (const auto& c : checks) out << "  " << check_line(c) << '\n';
  return out.str();
}

ojson run_experiment(std::string_view name, const HarnessOptions& opts, std::string* table) {
  const std::string n(name);
  ojson out;
  std::ostringstream text;
  const bool all = n == "all";
  if (!all && n != "v1" && n != "v2" && n != "v3" && n != "c1" && n != "c2" && n != "c3" && n != "c4" && n != "c5") {
    throw Error(errc::kBadRequest, "unknown experiment " + n, "experiment");
  }
  if (all || n == "v1") {
    std::vector<BaselineReport> rs;
    for (auto b : {Baseline::b0_ungoverned, Baseline::b1_acl_filtered, Baseline::b2_rbac_aware, Baseline::b3_full}) {
      rs.push_back(run_baseline(b, opts));
    }
    ojson arr = ojson::array();
    for (const auto& r : rs) arr.push_back(to_json(r));
    out["v1"] = arr;
    text << "V1 governance baselines\n" << render_baselines(rs) << '\n';
  }
  if (all || n == "v2") {
    const auto off = run_freshness_scenarios(false, opts);
    const auto on = run_freshness_scenarios(true, opts);
    out["v2"] = {{"off", to_json(off)}, {"on", to_json(on)}};
    text << "V2 freshness governance\n";
    for (const auto* r : {&off, &on}) {
      text << "  reconciliation " << (r->reconciliation ? "on " : "off") << ": phantom in " << r->phantom_queries
           << "/4 queries, contradictory pair " << (r->contradictory_delivered ? "delivered" : "not delivered")
           << ", outdated pricing " << (r->outdated_pricing_served ? "served" : "not served")
           << ", conflict resolved to newest " << (r->conflict_resolved_newest ? "yes" : "no") << '\n';
    }
    text << '\n';
  }
  if (all || n == "v3") {
    std::vector<AttackReport> rs;
    for (auto m : {AttackModel::no_governance, AttackModel::rbac, AttackModel::full}) rs.push_back(run_attacks(m, opts));
    ojson arr = ojson::array();
    for (const auto& r : rs) arr.push_back(to_json(r));
    out["v3"] = arr;
    text << "V3 attack matrix\n" << render_attacks(rs) << '\n';
  }
  if (all || n == "c1") {
    const auto r = run_c1(opts);
    out["c1"] = to_json(r);
    text << "C1 routing: accuracy " << fmt("%.3f", r.accuracy) << " (" << r.correct << "/" << r.queries
         << "), mean latency " << fmt("%.3f ms", r.latency.mean_ms) << "; fuzz " << r.fuzz_queries << " queries, "
         << r.fuzz_delivered << " units, " << r.fuzz_violations << " violations\n\n";
  }
  if (all || n == "c2") {
    const auto r = run_c2(opts);
    out["c2"] = to_json(r);
    text << render_checks("C2 permission correctness", r.cases) << "  unauthorized " << r.unauthorized
         << ", false positives " << r.false_positives << ", invariant violations " << r.invariant_violations
         << "\n\n";
  }
  if (all || n == "c3") {
    const auto r = run_c3(opts);
    out["c3"] = to_json(r);
    text << render_checks("C3 freshness", r.scenarios) << "  stale detection " << fmt("%.3f ms", r.stale_detect_ms)
         << ", disconnect detection " << fmt("%.3f ms", r.disconnect_detect_ms) << ", 20-source cycle "
         << fmt("%.3f ms", r.cycle20_ms) << "\n\n";
  }
  if (all || n == "c4") {
    const auto r = run_c4(opts);
    out["c4"] = to_json(r);
    text << "C4 latency: simple p50 " << fmt("%.2f ms", r.simple.p50_ms) << ", cross-domain p50 "
         << fmt("%.2f ms", r.cross_domain.p50_ms) << ", concurrent p50 " << fmt("%.2f ms", r.concurrent.p50_ms)
         << " at " << fmt("%.2f", r.qps) << " q/s over " << r.sessions << " sessions; errors " << r.errors
         << ", violations " << r.violations << ", bleed " << r.bleed << "\n\n";
  }
  if (all || n == "c5") {
    const auto r = run_c5(opts);
    out["c5"] = to_json(r);
    text << render_checks("C5 approval isolation", r.cases) << "  " << r.passed() << "/" << r.cases.size()
         << " pass\n\n";
  }
  if (table) *table = text.str();
  return out;
}

}  // namespace ctxk::bench
