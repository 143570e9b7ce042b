#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxk/audit.hpp"
#include "ctxk/context_unit.hpp"
#include "ctxk/freshness_state.hpp"
#include "ctxk/manifest.hpp"
#include "ctxk/permissions.hpp"
#include "ctxk/registry.hpp"

namespace ctxk {

// Domain → keyword list. Keywords are single lower-case terms.
struct Taxonomy {
  std::map<std::string, std::vector<std::string>> keywords;

  static Taxonomy from_json(const nlohmann::json& j);
  static Taxonomy load(const std::filesystem::path& file);
  nlohmann::ordered_json to_json() const;

  // Number of domains listing the keyword (0 when unknown).
  int domain_frequency(std::string_view keyword) const;
  std::uint64_t fingerprint() const;
};

struct DomainScore {
  std::string domain;
  double confidence = 0.0;

  bool operator==(const DomainScore&) const = default;
};

struct Intent {
  std::string raw_query;
  std::string resolved_query;  // after co-reference substitution
  std::vector<DomainScore> domains;
  std::vector<std::string> entities;
  bool cached = false;
};

// Words that refer back to the last-mentioned entity.
bool is_pronoun(std::string_view lower_word);

// Specificity-weighted keyword scoring. A keyword found in k domains adds 1/k
// to each; confidence is the domain's share of the total. Pronouns are
// replaced by `last_entity` before scoring.
Intent classify_intent(std::string_view query, const Taxonomy& taxonomy,
                       const std::optional<std::string>& last_entity,
                       const std::set<std::string>& known_entities = {});

struct SignalBreakdown {
  double semantic_relevance = 0.0;
  double recency = 0.0;
  double authority = 0.0;
  double user_relevance = 0.0;

  double get(Signal s) const;
};

struct Candidate {
  ContextUnit unit;
  FreshnessState state = FreshnessState::fresh;
  Minutes max_age{24 * 60};
};

struct RankedResult {
  ContextUnit unit;
  double score = 0.0;
  SignalBreakdown signals;
  bool truncated = false;
  FreshnessState freshness = FreshnessState::fresh;
};

double recency_signal(Instant timestamp, Minutes max_age, Instant now);
double user_relevance_signal(std::string_view path, std::span<const std::string> assigned);

// Descending weighted score; ties broken by recency then path.
std::vector<RankedResult> rank(std::span<const Candidate> candidates, std::string_view query,
                               std::span<const std::string> assigned, const RoutingSpec& spec, Instant now);

// Greedy prefix within the budget. The first result is always kept, cut to
// the budget when it alone is too large.
std::vector<RankedResult> apply_token_budget(std::vector<RankedResult> ranked, int budget);

struct RouteOptions {
  bool freshness_filter = true;
  std::size_t top_k = 5;
  // Candidates whose semantic relevance is below this are not considered.
  double min_relevance = 0.05;
};

struct Delivery {
  std::vector<RankedResult> results;
  Intent intent;
  std::int64_t audit_ref = 0;
  bool denied = false;
  std::string reason;
  std::vector<std::string> routed_domains;
  std::vector<std::string> unreachable_domains;
  int permission_filtered = 0;
  int expired_filtered = 0;
};

nlohmann::ordered_json to_json(const Delivery& d);

// The Context Endpoint: classify, collect, permission-filter, freshness-filter,
// rank and budget. Safe for concurrent use.
class Router {
 public:
  using Classifier = std::function<Intent(std::string_view query, const std::optional<std::string>& last_entity)>;

  Router(Taxonomy taxonomy, Registry& registry, PermissionEngine& engine, AuditLog& audit, const Clock& clock);

  const Taxonomy& taxonomy() const { return taxonomy_; }
  void set_options(RouteOptions o) { options_ = o; }
  const RouteOptions& options() const { return options_; }

  // Replaces rule-based classification; used to fuzz misrouting.
  void set_classifier(Classifier c) { classifier_ = std::move(c); }
  void set_known_entities(std::set<std::string> entities);

  Intent classify(std::string_view query, const std::optional<std::string>& last_entity);

  // Throws UnknownSession, SessionKilled, PermissionEngineUnavailable or
  // AuditFailure; every outcome is audited before it is returned.
  Delivery route(std::string_view session_id, std::string_view query);

 private:
  Taxonomy taxonomy_;
  std::uint64_t taxonomy_version_;
  Registry& registry_;
  PermissionEngine& engine_;
  AuditLog& audit_;
  const Clock& clock_;
  RouteOptions options_;
  Classifier classifier_;
  std::set<std::string> known_entities_;

  mutable std::shared_mutex cache_mutex_;
  std::unordered_map<std::string, Intent> cache_;
};

}  // namespace ctxk
