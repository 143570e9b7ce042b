#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxk/seed.hpp"

namespace ctxk::bench {

struct LatencyStats {
  std::size_t n = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;

  static LatencyStats of(std::vector<double> samples_ms);
};

enum class Baseline { b0_ungoverned, b1_acl_filtered, b2_rbac_aware, b3_full };
enum class AttackModel { no_governance, rbac, full };

std::string_view to_string(Baseline b);
std::string_view to_string(AttackModel m);

// The one leak and authorisation definition every experiment uses.
class AccessOracle {
 public:
  explicit AccessOracle(const Corpus& corpus);

  // Home domain plus the domains it brokers to.
  std::set<std::string> permitted_domains(std::string_view user) const;
  // Role outside the unit's authorised roles, or domain outside the user's
  // permitted set.
  bool leak(const ContextUnit& unit, std::string_view user) const;
  // Stricter: also requires a matching read glob for the user's role.
  bool authorized(const ContextUnit& unit, std::string_view user) const;

 private:
  const OrgUser& user(std::string_view name) const;

  std::vector<DomainManifest> manifests_;
  std::vector<OrgUser> users_;
};

struct AttackRow {
  std::string scenario;
  bool blocked = false;
  std::string outcome;
};

struct AttackReport {
  AttackModel model = AttackModel::full;
  std::vector<AttackRow> rows;

  int blocked() const;
};

struct BaselineReport {
  Baseline baseline = Baseline::b3_full;
  int queries = 0;
  int delivered = 0;
  int leaks = 0;
  int noise = 0;
  double leak_pct = 0.0;
  double noise_pct = 0.0;
  AttackReport attacks;
  LatencyStats latency;
};

struct ScenarioResult {
  std::string name;
  std::string user;
  std::string query;
  std::vector<std::string> delivered;  // "<unit id>@<version>"
  bool phantom = false;
  bool contradictory = false;
  bool outdated = false;
};

struct V2Report {
  bool reconciliation = false;
  std::vector<ScenarioResult> scenarios;
  int phantom_queries = 0;
  bool contradictory_delivered = false;
  bool conflict_resolved_newest = false;
  bool outdated_pricing_served = false;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct C1Report {
  int queries = 0;
  int correct = 0;
  double accuracy = 0.0;
  std::map<std::string, std::pair<int, int>> by_category;  // correct, total
  LatencyStats latency;
  int fuzz_queries = 0;
  int fuzz_delivered = 0;
  int fuzz_violations = 0;
};

struct C2Report {
  std::vector<Check> cases;
  int deliveries_checked = 0;
  int unauthorized = 0;
  int false_positives = 0;
  int invariant_violations = 0;
};

struct C3Report {
  std::vector<Check> scenarios;
  bool transitions_observed = false;
  double stale_detect_ms = 0.0;
  double disconnect_detect_ms = 0.0;
  double cycle20_ms = 0.0;
};

struct C4Report {
  int sessions = 0;
  double duration_s = 0.0;
  int queries = 0;
  double qps = 0.0;
  int errors = 0;
  int violations = 0;
  int bleed = 0;
  LatencyStats simple;
  LatencyStats cross_domain;
  LatencyStats concurrent;
};

struct C5Report {
  std::vector<Check> cases;

  int passed() const;
};

struct HarnessOptions {
  std::filesystem::path scratch;  // fresh corpora are generated below this
  std::uint64_t seed = kDefaultSeed;
  int fuzz_queries = 1000;
  int soak_sessions = 50;
  double soak_seconds = 30.0;
  double soak_target_qps = 8.0;
};

// Generates a new corpus below opts.scratch, replacing any earlier one with
// the same tag.
Corpus fresh_corpus(const HarnessOptions& opts, std::string_view tag);

AttackReport run_attacks(AttackModel model, const HarnessOptions& opts);
BaselineReport run_baseline(Baseline b, const HarnessOptions& opts);
V2Report run_freshness_scenarios(bool with_reconciliation, const HarnessOptions& opts);
C1Report run_c1(const HarnessOptions& opts);
C2Report run_c2(const HarnessOptions& opts);
C3Report run_c3(const HarnessOptions& opts);
C4Report run_c4(const HarnessOptions& opts);
C5Report run_c5(const HarnessOptions& opts);

nlohmann::ordered_json to_json(const LatencyStats& s);
nlohmann::ordered_json to_json(const AttackReport& r);
nlohmann::ordered_json to_json(const BaselineReport& r);
nlohmann::ordered_json to_json(const V2Report& r);
nlohmann::ordered_json to_json(const C1Report& r);
nlohmann::ordered_json to_json(const C2Report& r);
nlohmann::ordered_json to_json(const C3Report& r);
nlohmann::ordered_json to_json(const C4Report& r);
nlohmann::ordered_json to_json(const C5Report& r);

std::string render_baselines(std::span<const BaselineReport> reports);
std::string render_attacks(std::span<const AttackReport> reports);
std::string render_checks(std::string_view title, std::span<const Check> checks);

// Experiments: v1, v2, v3, c1 .. c5, or all. Throws BadRequest for anything
// else. The rendered tables go to `table` when given.
nlohmann::ordered_json run_experiment(std::string_view name, const HarnessOptions& opts,
                                      std::string* table = nullptr);

}  // namespace ctxk::bench
