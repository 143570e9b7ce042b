#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxk/audit.hpp"
#include "ctxk/cxri.hpp"
#include "ctxk/freshness_state.hpp"
#include "ctxk/permissions.hpp"
#include "ctxk/registry.hpp"

namespace ctxk {

struct ReconcileAction {
  DeltaType delta = DeltaType::context_stale;
  std::string target;
  std::string action;
  std::string outcome;
};

struct SourceReport {
  std::string source;
  SourceStatus status = SourceStatus::connected;
  int consecutive_failures = 0;
  bool probed = false;
  double probe_ms = 0.0;
};

struct CycleReport {
  std::int64_t cycle_id = 0;
  Instant started_at{};
  double duration_ms = 0.0;
  std::vector<Delta> deltas;
  std::vector<ReconcileAction> actions;
  std::vector<SourceReport> sources;
  std::vector<std::string> not_implemented;
};

nlohmann::ordered_json to_json(const CycleReport& r);

// Most recent timestamp wins; equal timestamps fall back to the higher version.
const ContextUnit& resolve_conflict(std::span<const ContextUnit> versions);

// Compares declared manifests with observed registry and connector state and
// applies corrective policy. One cycle at a time; the registry is locked per
// delta, never for a whole cycle.
class Reconciler {
 public:
  Reconciler(Registry& registry, PermissionEngine& engine, AuditLog& audit, const Clock& clock,
             ConnectOptions connect_options = {});

  // Connects every declared source and ingests its contents.
  void ingest_all();

  CycleReport reconcile_once();

  // Cycles every `interval` until stop is requested. No cycle runs when stop
  // is already requested on entry.
  void run_loop(Millis interval, std::stop_token stop, const std::function<void(const CycleReport&)>& on_cycle);

  // Writes through the source's connection and re-ingests the written unit.
  std::int64_t write_through(const std::string& source, const std::string& path, const std::string& content);

  std::int64_t cycles() const;

 private:
  struct Link {
    std::unique_ptr<Connection> conn;
    std::optional<Subscription> sub;
    std::optional<Instant> last_poll;
  };

  SourceBinding binding_for(const DomainManifest& m, const SourceSpec& s) const;
  Link& link_locked(const DomainManifest& m, const SourceSpec& s);
  bool probe_locked(const DomainManifest& m, const SourceSpec& s);
  void full_sync_locked(const std::string& sid, Link& link, Instant now);
  std::string apply_stale_action(const DomainManifest& m, const std::string& unit_id, StaleAction action,
                                 Instant now);
  void record(CycleReport& report, Delta delta, std::string action, std::string outcome);

  Registry& registry_;
  PermissionEngine& engine_;
  AuditLog& audit_;
  const Clock& clock_;
  ConnectOptions connect_options_;

  std::mutex cycle_mutex_;
  mutable std::recursive_mutex links_mutex_;
  std::map<std::string, Link> links_;
  std::map<std::string, FreshnessState> reported_;
  std::int64_t cycles_ = 0;
};

}  // namespace ctxk
