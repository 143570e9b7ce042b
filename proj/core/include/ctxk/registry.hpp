#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ctxk/context_unit.hpp"
#include "ctxk/freshness_state.hpp"
#include "ctxk/manifest.hpp"

namespace ctxk {

enum class SourceStatus { connected, degraded, disconnected };
std::string_view to_string(SourceStatus s);

struct SourceState {
  std::string source;
  SourceStatus status = SourceStatus::connected;
  int consecutive_failures = 0;
  std::optional<Instant> last_success;
};

struct SourceResult {
  SourceState state;
  bool status_changed = false;
  std::optional<Delta> delta;  // set when the failure threshold is crossed
};

struct DomainHandle {
  std::string name;
  std::uint64_t generation = 0;
};

struct UnitFilter {
  std::optional<std::string> path_glob;
  std::optional<std::int64_t> min_version;
  std::optional<std::vector<FreshnessState>> freshness_states;
};

// One routable version of a unit together with its freshness bookkeeping.
struct UnitView {
  ContextUnit unit;
  FreshnessRecord record;
  FreshnessState state = FreshnessState::fresh;
  bool stale_flagged = false;
};

enum class UpsertMode {
  retain,     // a changed unit keeps its prior version live until reconciled
  supersede,  // the prior version is retained in history but not routable
};

// Authoritative in-process metadata store for domains, sources and units.
// All operations are linearizable; readers share, writers are exclusive.
class Registry {
 public:
  explicit Registry(int failure_threshold = 3);

  int failure_threshold() const { return failure_threshold_; }

  DomainHandle register_domain(const DomainManifest& manifest);
  // Replaces the stored manifest; new sources are added as connected.
  void update_domain(const DomainManifest& manifest);
  std::vector<std::string> list_domains() const;
  std::optional<DomainManifest> domain(std::string_view name) const;
  std::vector<DomainManifest> domains() const;

  std::int64_t upsert_unit(const ContextUnit& unit, Instant now, UpsertMode mode = UpsertMode::retain);

  std::optional<ContextUnit> unit(std::string_view id) const;
  std::optional<ContextUnit> unit_version(std::string_view id, std::int64_t version) const;

  std::vector<ContextUnit> query_units(std::string_view domain, const UnitFilter& filter, Instant now) const;
  std::vector<UnitView> query_views(std::string_view domain, const UnitFilter& filter, Instant now) const;
  // Every stored unit id of a source, archived ones included.
  std::vector<std::string> units_of_source(std::string_view source) const;
  // Current version of every unit that has not been archived, in every domain.
  std::vector<ContextUnit> all_units() const;

  SourceResult record_source_result(std::string_view source, bool ok, Instant now);
  SourceState source_state(std::string_view source) const;
  std::vector<SourceState> list_sources() const;

  // Freshness bookkeeping driven by the reconciler.
  void mark_verified(std::string_view id, Instant now);
  void flag_stale(std::string_view id);
  int flag_source_stale(std::string_view source);
  void archive(std::string_view id);
  bool is_archived(std::string_view id) const;
  // Keeps `version` as the sole live version. When it is the older one it is
  // re-published under a new version number so versions never go backwards.
  std::int64_t keep_version(std::string_view id, std::int64_t version, Instant now);
  std::optional<FreshnessRecord> freshness_record(std::string_view id) const;

  // One JSON object per line for every stored version.
  void export_snapshot(std::ostream& out) const;

 private:
  struct Entry {
    ContextUnit current;
    std::optional<ContextUnit> previous;
    bool previous_live = false;
    Instant last_verified{};
    bool stale_flagged = false;
    bool archived = false;
  };
  struct DomainEntry {
    DomainManifest manifest;
    std::uint64_t generation = 0;
  };

  FreshnessRecord record_for(const Entry& e) const;
  const DomainEntry& domain_or_throw(std::string_view name) const;
  Entry& entry_or_throw(std::string_view id);

  const int failure_threshold_;
  mutable std::shared_mutex mutex_;
  std::uint64_t next_generation_ = 1;
  std::map<std::string, DomainEntry, std::less<>> domains_;
  std::map<std::string, SourceState, std::less<>> sources_;
  std::map<std::string, Entry, std::less<>> units_;
};

}  // namespace ctxk
