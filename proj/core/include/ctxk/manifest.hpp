#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxk/tier.hpp"
#include "ctxk/time.hpp"

namespace ctxk {

inline constexpr std::string_view kApiVersion = "context/v1";
inline constexpr std::string_view kKind = "ContextDomain";

enum class SourceType { git_repo, connector, file_system, database };
enum class Chunking { none, semantic, per_thread, fixed };
enum class StaleAction { re_sync, flag, archive };
enum class CrossDomainMode { brokered, denied };
enum class Signal { semantic_relevance, recency, authority, user_relevance };
enum class IntentParsing { rule_based, llm_assisted };

std::string_view to_string(SourceType v);
std::string_view to_string(Chunking v);
std::string_view to_string(StaleAction v);
std::string_view to_string(CrossDomainMode v);
std::string_view to_string(Signal v);
std::string_view to_string(IntentParsing v);

struct Refresh {
  bool realtime = false;
  Minutes interval{0};

  bool operator==(const Refresh&) const = default;
};

struct Ingestion {
  Chunking chunking = Chunking::none;
  std::optional<int> chunk_size;
  std::optional<Minutes> ttl;
  std::optional<std::string> embedding;

  bool operator==(const Ingestion&) const = default;
};

struct SourceSpec {
  std::string name;
  SourceType type = SourceType::file_system;
  std::map<std::string, std::string> config;
  Refresh refresh;
  std::optional<Ingestion> ingestion;

  bool operator==(const SourceSpec&) const = default;
};

struct RoleAccess {
  std::string role;
  std::vector<std::string> read;
  std::vector<std::string> write;

  bool operator==(const RoleAccess&) const = default;
};

struct AgentPermissions {
  Tier read = Tier::autonomous;
  Tier write_default = Tier::soft_approval;
  // Declaration order matters: the first matching glob wins.
  std::vector<std::pair<std::string, Tier>> write_paths;
  std::map<std::string, Tier> execute;

  Tier write_tier(std::string_view path) const;

  bool operator==(const AgentPermissions&) const = default;
};

struct CrossDomainRule {
  std::string domain;
  CrossDomainMode mode = CrossDomainMode::denied;

  bool operator==(const CrossDomainRule&) const = default;
};

struct AccessSpec {
  std::vector<RoleAccess> roles;
  AgentPermissions agent;
  std::vector<CrossDomainRule> cross_domain;

  const RoleAccess* role(std::string_view name) const;
  std::optional<CrossDomainMode> cross_domain_mode(std::string_view domain) const;

  bool operator==(const AccessSpec&) const = default;
};

struct FreshnessPolicy {
  Minutes max_age{24 * 60};
  StaleAction stale_action = StaleAction::flag;

  bool operator==(const FreshnessPolicy&) const = default;
};

struct FreshnessOverride {
  std::string path;
  FreshnessPolicy policy;

  bool operator==(const FreshnessOverride&) const = default;
};

struct FreshnessPolicySpec {
  FreshnessPolicy defaults;
  std::vector<FreshnessOverride> overrides;

  // First matching override in declaration order, else the defaults.
  const FreshnessPolicy& policy_for(std::string_view path) const;

  bool operator==(const FreshnessPolicySpec&) const = default;
};

struct SignalWeight {
  Signal signal = Signal::semantic_relevance;
  double weight = 0.0;

  bool operator==(const SignalWeight&) const = default;
};

struct RoutingSpec {
  IntentParsing intent_parsing = IntentParsing::rule_based;
  int token_budget = 8000;
  std::vector<SignalWeight> priority = {{Signal::semantic_relevance, 0.40},
                                        {Signal::recency, 0.30},
                                        {Signal::authority, 0.20},
                                        {Signal::user_relevance, 0.10}};

  double weight(Signal s) const;

  bool operator==(const RoutingSpec&) const = default;
};

struct DomainManifest {
  std::string api_version{kApiVersion};
  std::string kind{kKind};
  std::string name;
  std::string ns = "default";
  std::map<std::string, std::string> labels;
  std::vector<SourceSpec> sources;
  AccessSpec access;
  FreshnessPolicySpec freshness;
  RoutingSpec routing;
  // Retained verbatim, never evaluated.
  nlohmann::json operator_section;
  nlohmann::json trust;
  nlohmann::json reliability;

  const SourceSpec* source(std::string_view name) const;
  std::vector<std::string> role_names() const;

  bool operator==(const DomainManifest&) const = default;
};

// Single-document parse. Throws Error{SyntaxError} for malformed YAML and
// Error{SchemaError, path} for structural problems.
DomainManifest parse_manifest(std::string_view yaml);
// Multi-document parse; empty documents are skipped.
std::vector<DomainManifest> parse_manifests(std::string_view yaml);
std::vector<DomainManifest> load_manifest_file(const std::filesystem::path& file);
// Every *.yaml / *.yml file in a directory, in file-name order.
std::vector<DomainManifest> load_manifest_dir(const std::filesystem::path& dir);

std::string serialize_manifest(const DomainManifest& m);

// Relative `root` / `repo` source paths are taken relative to `base`.
void resolve_source_roots(std::vector<DomainManifest>& manifests, const std::filesystem::path& base);

struct Violation {
  std::string message;

  bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_cross_references(std::span<const DomainManifest> manifests);

}  // namespace ctxk
