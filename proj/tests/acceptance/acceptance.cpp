#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>

#include "ctxk/harness.hpp"
#include "properties.hpp"

using namespace ctxk::bench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool all_pass(const std::vector<Check>& checks, std::string& failed) {
  bool ok = true;
  for (const auto& c : checks) {
    if (!c.pass) {
      ok = false;
      failed += " [" + c.name + ": " + c.detail + "]";
    }
  }
  return ok;
}

int failures = 0;

void criterion(int n, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s criterion %d %s: %s; runtime %.2fs (limit %.0fs)%s\n", pass ? "PASS" : "FAIL", n, name,
              o.detail.c_str(), secs, limit_s, in_time ? "" : " exceeded");
  std::fflush(stdout);
}

}  // namespace

int main() {
  HarnessOptions opts;
  opts.scratch = fs::temp_directory_path() / ("ctxk-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(opts.scratch);

  criterion(1, "permission enforcement", 5, [&] {
    const auto r = run_c2(opts);
    std::string failed;
    const bool cases = all_pass(r.cases, failed);
    return Outcome{cases && r.cases.size() == 7 && r.unauthorized == 0 && r.false_positives == 0 &&
                       r.invariant_violations == 0,
                   fmt("%zu cases, %d deliveries checked, unauthorized %d, false positives %d, invariant violations %d",
                       r.cases.size(), r.deliveries_checked, r.unauthorized, r.false_positives,
                       r.invariant_violations) +
                       failed};
  });

  criterion(2, "approval isolation", 10, [&] {
    const auto r = run_c5(opts);
    std::string failed;
    const bool ok = all_pass(r.cases, failed) && r.cases.size() == 8;
    return Outcome{ok, fmt("%d/%zu cases", r.passed(), r.cases.size()) + failed};
  });

  criterion(3, "freshness lifecycle", 30, [&] {
    const auto r = run_c3(opts);
    std::string failed;
    const bool ok = all_pass(r.scenarios, failed) && r.transitions_observed && r.stale_detect_ms < 10.0 &&
                    r.disconnect_detect_ms < 10.0 && r.cycle20_ms < 250.0;
    return Outcome{ok, fmt("transitions %s, stale %.3fms (<10), disconnect %.3fms (<10), 20-source cycle %.3fms (<250)",
                           r.transitions_observed ? "observed" : "missing", r.stale_detect_ms,
                           r.disconnect_detect_ms, r.cycle20_ms) +
                           failed};
  });

  criterion(4, "attack scenarios", 10, [&] {
    const int none = run_attacks(AttackModel::no_governance, opts).blocked();
    const auto rbac = run_attacks(AttackModel::rbac, opts);
    const int full = run_attacks(AttackModel::full, opts).blocked();
    bool email_missed = false;
    for (const auto& row : rbac.rows) {
      if (!row.blocked) email_missed = row.scenario.find("email") != std::string::npos;
    }
    return Outcome{none == 0 && rbac.blocked() == 4 && email_missed && full == 5,
                   fmt("blocked none %d/5, rbac %d/5 (%s), full %d/5", none, rbac.blocked(),
                       email_missed ? "pricing email missed" : "unexpected miss", full)};
  });

  criterion(5, "baselines", 60, [&] {
    BaselineReport r[4];
    const Baseline all[4] = {Baseline::b0_ungoverned, Baseline::b1_acl_filtered, Baseline::b2_rbac_aware,
                             Baseline::b3_full};
    for (int i = 0; i < 4; ++i) r[i] = run_baseline(all[i], opts);
    const bool leaks = r[1].leaks == 0 && r[0].leaks > 0;
    const bool noise = r[3].noise_pct <= r[2].noise_pct && r[2].noise_pct < r[0].noise_pct;
    const bool attacks = r[0].attacks.blocked() == 0 && r[1].attacks.blocked() == 4 && r[2].attacks.blocked() == 4 &&
                         r[3].attacks.blocked() == 5;
    return Outcome{leaks && noise && attacks,
                   fmt("leaks B0 %d B1 %d; noise B0 %.1f%% B2 %.1f%% B3 %.1f%%; blocked %d/%d/%d/%d", r[0].leaks,
                       r[1].leaks, r[0].noise_pct, r[2].noise_pct, r[3].noise_pct, r[0].attacks.blocked(),
                       r[1].attacks.blocked(), r[2].attacks.blocked(), r[3].attacks.blocked())};
  });

  criterion(6, "freshness governance", 10, [&] {
    const auto off = run_freshness_scenarios(false, opts);
    const auto on = run_freshness_scenarios(true, opts);
    const bool ok = off.phantom_queries >= 1 && off.contradictory_delivered && on.phantom_queries == 0 &&
                    !on.contradictory_delivered && on.conflict_resolved_newest;
    return Outcome{ok, fmt("off: phantom %d/%zu, contradictory %s; on: phantom %d/%zu, newest %s", off.phantom_queries,
                           off.scenarios.size(), off.contradictory_delivered ? "yes" : "no", on.phantom_queries,
                           on.scenarios.size(), on.conflict_resolved_newest ? "yes" : "no")};
  });

  criterion(7, "intent routing", 60, [&] {
    const auto r = run_c1(opts);
    const bool ok = r.queries == 200 && r.accuracy >= 0.55 && r.fuzz_queries >= 1000 && r.fuzz_violations == 0;
    return Outcome{ok, fmt("accuracy %.3f over %d queries (>=0.55); fuzz %d queries, %d violations", r.accuracy,
                           r.queries, r.fuzz_queries, r.fuzz_violations)};
  });

  criterion(8, "property suites", 60, [&] {
    using namespace ctxk::testing;
    const PropertyResult rs[] = {strict_subset_property(kDefaultSeed, 1000), fail_closed_property(kDefaultSeed, 1000),
                                 budget_property(kDefaultSeed, 1000, opts.scratch / "props"),
                                 audit_completeness_property(opts.scratch / "audit")};
    bool ok = true;
    std::string detail;
    for (const auto& r : rs) {
      const bool p = r.pass(r.name == "audit-completeness" ? 1 : 1000);
      ok &= p;
      if (!detail.empty()) detail += ", ";
      detail += fmt("%s %d/%d", r.name.c_str(), r.trials - r.failures, r.trials);
      if (!p && !r.detail.empty()) detail += " (" + r.detail + ")";
    }
    return Outcome{ok, detail};
  });

  criterion(9, "concurrent soak", 120, [&] {
    const auto r = run_c4(opts);
    const bool ok = r.sessions == 50 && r.qps >= 6.0 && r.duration_s >= 30.0 && r.violations == 0 && r.bleed == 0;
    return Outcome{ok, fmt("%d sessions, %.1fs, %.2f q/s (>=6), violations %d, bleed %d, errors %d; "
                           "latency p50 %.2fms p95 %.2fms",
                           r.sessions, r.duration_s, r.qps, r.violations, r.bleed, r.errors, r.concurrent.p50_ms,
                           r.concurrent.p95_ms)};
  });

  std::error_code ec;
  fs::remove_all(opts.scratch, ec);
  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
