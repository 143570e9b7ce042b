#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxk/audit.hpp"
#include "ctxk/cxri.hpp"
#include "ctxk/manifest.hpp"
#include "ctxk/permissions.hpp"
#include "ctxk/reconciler.hpp"
#include "ctxk/registry.hpp"
#include "ctxk/router.hpp"

namespace ctxk {

struct OrgUser {
  std::string user;
  std::string role;
  std::vector<std::string> assigned;
  std::string home_domain;
};

// Users, their roles and the agent profiles acting for them.
struct OrgSpec {
  std::vector<UserRole> roles;
  std::vector<OrgUser> users;
  std::vector<AgentProfile> agents;

  static OrgSpec from_json(const nlohmann::json& j);
  static OrgSpec load(const std::filesystem::path& file);
  nlohmann::ordered_json to_json() const;
  const OrgUser* user(std::string_view name) const;
  const AgentProfile* agent_for(std::string_view user) const;
};

struct ControlPlaneConfig {
  std::vector<DomainManifest> manifests;
  Taxonomy taxonomy;
  OrgSpec org;
  EngineMode mode = EngineMode::three_tier;
  std::optional<std::filesystem::path> audit_file;
  std::ostream* audit_mirror = nullptr;
  ConnectOptions connect;
  RouteOptions route;
  int failure_threshold = 3;
  std::set<std::string> known_entities;
  bool ingest = true;
};

// Everything behind the Context API, wired together.
class ControlPlane {
 public:
  // Refuses to start on invalid declarative state (SchemaError).
  ControlPlane(ControlPlaneConfig config, const Clock& clock);

  // Registers a new domain or replaces an existing one. Access changes reach
  // the permission engine on the next reconciliation cycle.
  void apply_manifest(const DomainManifest& m);

  const Clock& clock() const { return clock_; }
  AuditLog& audit() { return *audit_; }
  Registry& registry() { return *registry_; }
  PermissionEngine& engine() { return *engine_; }
  Router& router() { return *router_; }
  Reconciler& reconciler() { return *reconciler_; }
  const OrgSpec& org() const { return org_; }

  // Convenience for harnesses: a session for `user` through their agent.
  Session open_session(const std::string& user);

 private:
  const Clock& clock_;
  OrgSpec org_;
  std::unique_ptr<AuditLog> audit_;
  std::unique_ptr<Registry> registry_;
  std::unique_ptr<PermissionEngine> engine_;
  std::unique_ptr<Router> router_;
  std::unique_ptr<Reconciler> reconciler_;
};

}  // namespace ctxk
