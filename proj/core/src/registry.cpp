#include "ctxk/registry.hpp"

#include <algorithm>
#include <mutex>
#include <ostream>

#include "ctxk/error.hpp"
#include "ctxk/glob.hpp"
#include "ctxk/text.hpp"

namespace ctxk {

std::string_view to_string(SourceStatus s) {
  switch (s) {
    case SourceStatus::connected: return "connected";
    case SourceStatus::degraded: return "degraded";
    case SourceStatus::disconnected: return "disconnected";
  }
  return "connected";
}

namespace {

bool same_payload(const ContextUnit& a, const ContextUnit& b) {
  return a.content == b.content && a.unit_type == b.unit_type && a.metadata == b.metadata &&
         a.authorized_roles == b.authorized_roles;
}

}  // namespace

Registry::Registry(int failure_threshold) : failure_threshold_(failure_threshold) {}

DomainHandle Registry::register_domain(const DomainManifest& manifest) {
  std::unique_lock lock(mutex_);
  if (domains_.count(manifest.name)) {
    throw Error(errc::kDuplicateDomain, "domain " + manifest.name + " already registered", "metadata.name");
  }
  const auto gen = next_generation_++;
  domains_.emplace(manifest.name, DomainEntry{manifest, gen});
  for (const auto& s : manifest.sources) {
    const auto id = source_id(manifest.name, s.name);
    sources_[id] = SourceState{id, SourceStatus::connected, 0, std::nullopt};
  }
  return {manifest.name, gen};
}

void Registry::update_domain(const DomainManifest& manifest) {
  std::unique_lock lock(mutex_);
  auto it = domains_.find(manifest.name);
  if (it == domains_.end()) throw Error(errc::kUnknownDomain, manifest.name);
  const std::string prefix = manifest.name + "/";
  std::set<std::string> declared;
  for (const auto& s : manifest.sources) declared.insert(source_id(manifest.name, s.name));
  for (auto s = sources_.begin(); s != sources_.end();) {
    if (s->first.rfind(prefix, 0) == 0 && !declared.count(s->first)) {
      s = sources_.erase(s);
    } else {
      ++s;
    }
  }
  for (const auto& id : declared) {
    if (!sources_.count(id)) sources_[id] = SourceState{id, SourceStatus::connected, 0, std::nullopt};
  }
  it->second.manifest = manifest;
  it->second.generation = next_generation_++;
}

std::vector<std::string> Registry::list_domains() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, _] : domains_) out.push_back(name);
  return out;
}

std::optional<DomainManifest> Registry::domain(std::string_view name) const {
  std::shared_lock lock(mutex_);
  auto it = domains_.find(name);
  if (it == domains_.end()) return std::nullopt;
  return it->second.manifest;
}

std::vector<DomainManifest> Registry::domains() const {
  std::shared_lock lock(mutex_);
  std::vector<DomainManifest> out;
  for (const auto& [_, d] : domains_) out.push_back(d.manifest);
  return out;
}

const Registry::DomainEntry& Registry::domain_or_throw(std::string_view name) const {
  auto it = domains_.find(name);
  if (it == domains_.end()) throw Error(errc::kUnknownDomain, "domain " + std::string(name) + " is not registered");
  return it->second;
}

Registry::Entry& Registry::entry_or_throw(std::string_view id) {
  auto it = units_.find(id);
  if (it == units_.end()) throw Error(errc::kNotFound, "unit " + std::string(id));
  return it->second;
}

std::int64_t Registry::upsert_unit(const ContextUnit& in, Instant now, UpsertMode mode) {
  if (in.authorized_roles.empty()) {
    throw Error(errc::kEmptyAuthorizedRoles, "unit " + in.metadata.path + " has no authorized roles");
  }
  if (text::token_count(in.content) == 0) throw Error(errc::kInvalidUnit, "empty content", "content");
  if (in.metadata.authority < 0.0 || in.metadata.authority > 1.0) {
    throw Error(errc::kInvalidUnit, "authority outside [0,1]", "metadata.authority");
  }
  if (!in.vector.empty() && in.vector.size() != text::kVectorDim) {
    throw Error(errc::kInvalidUnit, "vector dimension mismatch", "vector");
  }

  ContextUnit unit = in;
  unit.id = unit_id(unit.metadata.source, unit.metadata.path);
  if (unit.vector.empty()) unit.vector = text::term_vector(unit.content);

  std::unique_lock lock(mutex_);
  domain_or_throw(unit.metadata.domain);
  if (!sources_.count(unit.metadata.source)) {
    throw Error(errc::kUnknownSource, "source " + unit.metadata.source + " is not registered");
  }

  auto it = units_.find(unit.id);
  if (it == units_.end()) {
    unit.version = 1;
    Entry e;
    e.current = std::move(unit);
    e.last_verified = now;
    units_.emplace(e.current.id, std::move(e));
    return 1;
  }

  Entry& e = it->second;
  if (same_payload(e.current, unit)) {
    e.last_verified = now;
    e.stale_flagged = false;
    e.archived = false;
    return e.current.version;
  }
  unit.version = e.current.version + 1;
  const bool was_routable = !e.archived;
  e.previous = std::move(e.current);
  e.previous_live = mode == UpsertMode::retain && was_routable;
  e.current = std::move(unit);
  e.last_verified = now;
  e.stale_flagged = false;
  e.archived = false;
  return e.current.version;
}

std::optional<ContextUnit> Registry::unit(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = units_.find(id);
  if (it == units_.end()) return std::nullopt;
  return it->second.current;
}

std::optional<ContextUnit> Registry::unit_version(std::string_view id, std::int64_t version) const {
  std::shared_lock lock(mutex_);
  auto it = units_.find(id);
  if (it == units_.end()) return std::nullopt;
  if (it->second.current.version == version) return it->second.current;
  if (it->second.previous && it->second.previous->version == version) return it->second.previous;
  return std::nullopt;
}

FreshnessRecord Registry::record_for(const Entry& e) const {
  FreshnessRecord r;
  r.unit_id = e.current.id;
  r.last_verified = e.last_verified;
  auto d = domains_.find(e.current.metadata.domain);
  if (d != domains_.end()) r.governing_policy = d->second.manifest.freshness.policy_for(e.current.metadata.path);
  r.live_versions = e.previous_live ? 2 : 1;
  return r;
}

std::vector<UnitView> Registry::query_views(std::string_view domain, const UnitFilter& filter, Instant now) const {
  std::shared_lock lock(mutex_);
  domain_or_throw(domain);
  std::vector<UnitView> out;
  for (const auto& [id, e] : units_) {
    if (e.archived || e.current.metadata.domain != domain) continue;
    if (filter.path_glob && !glob_match(*filter.path_glob, e.current.metadata.path)) continue;
    FreshnessRecord rec = record_for(e);
    FreshnessState st = freshness_state(rec, now);
    if (st == FreshnessState::fresh && e.stale_flagged) st = FreshnessState::stale;
    rec.state = st;
    if (filter.freshness_states &&
        std::find(filter.freshness_states->begin(), filter.freshness_states->end(), st) ==
            filter.freshness_states->end()) {
      continue;
    }
    auto emit = [&](const ContextUnit& u) {
      if (filter.min_version && u.version < *filter.min_version) return;
      out.push_back(UnitView{u, rec, st, e.stale_flagged});
    };
    emit(e.current);
    if (e.previous_live && e.previous) emit(*e.previous);
  }
  std::stable_sort(out.begin(), out.end(), [](const UnitView& a, const UnitView& b) {
    if (a.unit.metadata.path != b.unit.metadata.path) return a.unit.metadata.path < b.unit.metadata.path;
    return a.unit.version > b.unit.version;
  });
  return out;
}

std::vector<ContextUnit> Registry::query_units(std::string_view domain, const UnitFilter& filter, Instant now) const {
  std::vector<ContextUnit> out;
  for (auto& v : query_views(domain, filter, now)) out.push_back(std::move(v.unit));
  return out;
}

std::vector<std::string> Registry::units_of_source(std::string_view source) const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, e] : units_) {
    if (e.current.metadata.source == source) out.push_back(id);
  }
  return out;
}

std::vector<ContextUnit> Registry::all_units() const {
  std::shared_lock lock(mutex_);
  std::vector<ContextUnit> out;
  for (const auto& [_, e] : units_) {
    if (!e.archived) out.push_back(e.current);
  }
  return out;
}

SourceResult Registry::record_source_result(std::string_view source, bool ok, Instant now) {
  std::unique_lock lock(mutex_);
  auto it = sources_.find(source);
  if (it == sources_.end()) throw Error(errc::kUnknownSource, "source " + std::string(source) + " is not registered");
  SourceState& s = it->second;
  const auto before = s.status;
  SourceResult r;
  if (ok) {
    s.consecutive_failures = 0;
    s.last_success = now;
    s.status = SourceStatus::connected;
  } else {
    ++s.consecutive_failures;
    s.status = s.consecutive_failures >= failure_threshold_ ? SourceStatus::disconnected : SourceStatus::degraded;
    if (s.consecutive_failures == failure_threshold_) {
      r.delta = Delta{DeltaType::source_disconnected, s.source, now,
                      std::to_string(s.consecutive_failures) + " consecutive failures"};
    }
  }
  r.status_changed = before != s.status;
  r.state = s;
  return r;
}

SourceState Registry::source_state(std::string_view source) const {
  std::shared_lock lock(mutex_);
  auto it = sources_.find(source);
  if (it == sources_.end()) throw Error(errc::kUnknownSource, "source " + std::string(source) + " is not registered");
  return it->second;
}

std::vector<SourceState> Registry::list_sources() const {
  std::shared_lock lock(mutex_);
  std::vector<SourceState> out;
  for (const auto& [_, s] : sources_) out.push_back(s);
  return out;
}

void Registry::mark_verified(std::string_view id, Instant now) {
  std::unique_lock lock(mutex_);
  auto& e = entry_or_throw(id);
  e.last_verified = now;
  e.stale_flagged = false;
}

void Registry::flag_stale(std::string_view id) {
  std::unique_lock lock(mutex_);
  entry_or_throw(id).stale_flagged = true;
}

int Registry::flag_source_stale(std::string_view source) {
  std::unique_lock lock(mutex_);
  int n = 0;
  for (auto& [_, e] : units_) {
    if (e.current.metadata.source == source && !e.archived) {
      e.stale_flagged = true;
      ++n;
    }
  }
  return n;
}

void Registry::archive(std::string_view id) {
  std::unique_lock lock(mutex_);
  auto& e = entry_or_throw(id);
  e.archived = true;
  e.previous_live = false;
}

bool Registry::is_archived(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = units_.find(id);
  return it == units_.end() || it->second.archived;
}

std::int64_t Registry::keep_version(std::string_view id, std::int64_t version, Instant now) {
  std::unique_lock lock(mutex_);
  auto& e = entry_or_throw(id);
  if (e.current.version == version) {
    e.previous_live = false;
  } else if (e.previous && e.previous->version == version) {
    ContextUnit winner = *e.previous;
    winner.version = e.current.version + 1;
    e.previous = std::move(e.current);
    e.current = std::move(winner);
    e.previous_live = false;
  } else {
    throw Error(errc::kNotFound, "unit " + std::string(id) + " has no version " + std::to_string(version));
  }
  e.last_verified = now;
  e.stale_flagged = false;
  return e.current.version;
}

std::optional<FreshnessRecord> Registry::freshness_record(std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto it = units_.find(id);
  if (it == units_.end()) return std::nullopt;
  return record_for(it->second);
}

void Registry::export_snapshot(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  for (const auto& [_, e] : units_) {
    if (e.previous) out << to_json(*e.previous).dump() << '\n';
    out << to_json(e.current).dump() << '\n';
  }
}

}  // namespace ctxk
