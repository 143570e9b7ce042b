#include "ctxk/reconciler.hpp"

#include <algorithm>
#include <condition_variable>
#include <set>
#include <thread>

#include "ctxk/error.hpp"

namespace ctxk {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

int severity(FreshnessState s) {
  switch (s) {
    case FreshnessState::fresh: return 0;
    case FreshnessState::stale: return 1;
    case FreshnessState::expired: return 2;
    case FreshnessState::conflicted: return 1;
  }
  return 0;
}

}  // namespace

nlohmann::ordered_json to_json(const CycleReport& r) {
  nlohmann::ordered_json j;
  j["cycle_id"] = r.cycle_id;
  j["started_at"] = format_rfc3339(r.started_at);
  j["duration_ms"] = r.duration_ms;
  j["deltas"] = nlohmann::ordered_json::array();
  for (const auto& d : r.deltas) {
    j["deltas"].push_back({{"type", to_string(d.type)},
                           {"target", d.target},
                           {"detected_at", format_rfc3339(d.detected_at)},
                           {"detail", d.detail}});
  }
  j["actions"] = nlohmann::ordered_json::array();
  for (const auto& a : r.actions) {
    j["actions"].push_back(
        {{"delta", to_string(a.delta)}, {"target", a.target}, {"action", a.action}, {"outcome", a.outcome}});
  }
  j["sources"] = nlohmann::ordered_json::array();
  for (const auto& s : r.sources) {
    j["sources"].push_back({{"source", s.source},
                            {"status", to_string(s.status)},
                            {"consecutive_failures", s.consecutive_failures},
                            {"probed", s.probed},
                            {"probe_ms", s.probe_ms}});
  }
  j["not_implemented"] = r.not_implemented;
  return j;
}

const ContextUnit& resolve_conflict(std::span<const ContextUnit> versions) {
  if (versions.empty()) throw Error(errc::kNotFound, "no versions to resolve");
  const ContextUnit* best = &versions.front();
  for (const auto& v : versions.subspan(1)) {
    if (v.metadata.timestamp > best->metadata.timestamp ||
        (v.metadata.timestamp == best->metadata.timestamp && v.version > best->version)) {
      best = &v;
    }
  }
  return *best;
}

Reconciler::Reconciler(Registry& registry, PermissionEngine& engine, AuditLog& audit, const Clock& clock,
                       ConnectOptions connect_options)
    : registry_(registry), engine_(engine), audit_(audit), clock_(clock), connect_options_(connect_options) {}

std::int64_t Reconciler::cycles() const {
  std::lock_guard lock(links_mutex_);
  return cycles_;
}

SourceBinding Reconciler::binding_for(const DomainManifest& m, const SourceSpec& s) const {
  const auto roles = m.role_names();
  return SourceBinding{m.name, s.name, std::set<std::string>(roles.begin(), roles.end())};
}

Reconciler::Link& Reconciler::link_locked(const DomainManifest& m, const SourceSpec& s) {
  auto& link = links_[source_id(m.name, s.name)];
  if (!link.conn) link.conn = connect(s, binding_for(m, s), connect_options_);
  return link;
}

bool Reconciler::probe_locked(const DomainManifest& m, const SourceSpec& s) {
  try {
    auto& link = link_locked(m, s);
    if (link.conn->health().status != HealthStatus::disconnected) return true;
  } catch (const Error&) {
  }
  auto& link = links_[source_id(m.name, s.name)];
  link.conn.reset();
  link.sub.reset();
  return false;
}

void Reconciler::full_sync_locked(const std::string& sid, Link& link, Instant now) {
  auto units = link.conn->query("");
  std::set<std::string> present;
  for (auto& u : units) {
    present.insert(u.id);
    registry_.upsert_unit(u, now, UpsertMode::supersede);
  }
  for (const auto& id : registry_.units_of_source(sid)) {
    if (!present.count(id) && !registry_.is_archived(id)) registry_.archive(id);
  }
  link.sub.emplace(link.conn->subscribe("*"));
  link.last_poll = now;
}

void Reconciler::ingest_all() {
  std::lock_guard cycle(cycle_mutex_);
  std::lock_guard lock(links_mutex_);
  const auto now = clock_.now();
  for (const auto& m : registry_.domains()) {
    for (const auto& s : m.sources) {
      const auto sid = source_id(m.name, s.name);
      bool ok = probe_locked(m, s);
      if (ok) {
        try {
          full_sync_locked(sid, links_[sid], now);
        } catch (const Error&) {
          ok = false;
        }
      }
      registry_.record_source_result(sid, ok, now);
    }
  }
}

void Reconciler::record(CycleReport& report, Delta delta, std::string action, std::string outcome) {
  ReconcileAction a{delta.type, delta.target, std::move(action), std::move(outcome)};
  AuditEvent e;
  e.at = delta.detected_at;
  e.kind = AuditKind::reconcile_delta;
  auto slash = delta.target.find('/');
  auto colon = delta.target.find(':');
  e.domain = delta.target.substr(0, std::min(slash, colon));
  e.outcome = a.outcome;
  e.detail = {{"type", std::string(to_string(delta.type))},
              {"target", delta.target},
              {"action", a.action},
              {"cycle", std::to_string(report.cycle_id)}};
  if (!delta.detail.empty()) e.detail["detail"] = delta.detail;
  try {
    audit_.append(std::move(e));
  } catch (const Error& err) {
    a.outcome += " (audit failed: " + err.code() + ")";
  }
  report.deltas.push_back(std::move(delta));
  report.actions.push_back(std::move(a));
}

std::string Reconciler::apply_stale_action(const DomainManifest& m, const std::string& id, StaleAction action,
                                           Instant now) {
  switch (action) {
    case StaleAction::flag:
      registry_.flag_stale(id);
      return "flagged";
    case StaleAction::archive:
      registry_.archive(id);
      return "archived";
    case StaleAction::re_sync: {
      const auto unit = registry_.unit(id);
      if (!unit) return "missing";
      auto it = links_.find(unit->metadata.source);
      if (it == links_.end() || !it->second.conn) {
        registry_.flag_stale(id);
        return "source unavailable; flagged";
      }
      try {
        auto fresh = it->second.conn->read(unit->metadata.path);
        const auto v = registry_.upsert_unit(fresh, now, UpsertMode::supersede);
        registry_.mark_verified(id, now);
        return "re-synced v" + std::to_string(v);
      } catch (const Error& e) {
        if (e.code() == errc::kNotFound) {
          registry_.archive(id);
          return "deleted upstream; archived";
        }
        registry_.flag_stale(id);
        return "re-sync failed (" + e.code() + "); flagged";
      }
    }
  }
  (void)m;
  return "none";
}

CycleReport Reconciler::reconcile_once() {
  std::lock_guard cycle(cycle_mutex_);
  const auto wall = std::chrono::steady_clock::now();
  const auto now = clock_.now();
  CycleReport report;
  {
    std::lock_guard lock(links_mutex_);
    report.cycle_id = ++cycles_;
  }
  report.started_at = now;
  report.not_implemented = {"operator_unhealthy", "anomaly", "reliability_drift"};

  const auto manifests = registry_.domains();

  // Declared access rules that differ from what the engine enforces.
  std::set<std::string> declared;
  for (const auto& m : manifests) {
    declared.insert(m.name);
    const auto installed = engine_.installed_access(m.name);
    if (!installed || !(*installed == m.access)) {
      engine_.install_access(m.name, m.access);
      int live = 0;
      for (const auto& s : engine_.sessions()) live += s.live() ? 1 : 0;
      record(report, Delta{DeltaType::permission_change, m.name, now, "access rules changed"}, "install_access",
             "propagated to " + std::to_string(live) + " live sessions");
    }
  }
  for (const auto& d : engine_.installed_domains()) {
    if (!declared.count(d)) {
      engine_.remove_access(d);
      record(report, Delta{DeltaType::permission_change, d, now, "domain removed"}, "remove_access", "removed");
    }
  }

  std::lock_guard lock(links_mutex_);
  const int threshold = registry_.failure_threshold();
  for (const auto& m : manifests) {
    int dark = 0;
    for (const auto& s : m.sources) {
      const auto sid = source_id(m.name, s.name);
      SourceReport sr;
      sr.source = sid;
      const auto before = registry_.source_state(sid);
      auto& link = links_[sid];
      const bool due = s.refresh.realtime || !link.last_poll || before.status != SourceStatus::connected ||
                       now - *link.last_poll >= s.refresh.interval;
      if (!due) {
        sr.status = before.status;
        sr.consecutive_failures = before.consecutive_failures;
        report.sources.push_back(sr);
        continue;
      }
      sr.probed = true;
      const auto t0 = std::chrono::steady_clock::now();
      bool ok = probe_locked(m, s);
      if (!ok) {
        // Retry within the cycle so a dead source is declared on first sight.
        SourceResult res;
        int attempts = before.status == SourceStatus::disconnected ? 1 : threshold - before.consecutive_failures;
        for (int i = 0; i < std::max(1, attempts); ++i) {
          if (i > 0 && (ok = probe_locked(m, s))) break;
          res = registry_.record_source_result(sid, false, now);
          if (res.delta) break;
        }
        sr.probe_ms = elapsed_ms(t0);
        if (!ok && res.delta) {
          const int n = registry_.flag_source_stale(sid);
          record(report, *res.delta, "flag_dependents_stale", std::to_string(n) + " units flagged stale");
          AuditEvent alert;
          alert.at = now;
          alert.kind = AuditKind::source_state_change;
          alert.domain = m.name;
          alert.outcome = "disconnected";
          alert.detail = {{"source", sid}, {"alert", "true"}};
          try {
            audit_.append(std::move(alert));
          } catch (const Error&) {
          }
        }
      }
      if (ok) {
        sr.probe_ms = elapsed_ms(t0);
        const auto res = registry_.record_source_result(sid, true, now);
        auto& l = links_[sid];
        try {
          if (before.status == SourceStatus::disconnected || !l.sub) {
            full_sync_locked(sid, l, now);
            if (before.status == SourceStatus::disconnected) {
              record(report, Delta{DeltaType::source_disconnected, sid, now, "source recovered"}, "re-sync",
                     "recovered");
            }
          } else {
            for (const auto& ev : l.sub->poll(now)) {
              const auto id = unit_id(sid, ev.path);
              const auto& policy = m.freshness.policy_for(ev.path);
              Delta delta{DeltaType::context_stale, id, now, std::string(to_string(ev.kind)) + " upstream"};
              if (ev.kind == ChangeKind::deleted) {
                if (!registry_.is_archived(id)) registry_.archive(id);
                record(report, delta, "archive", "removed from routable set");
              } else if (ev.kind == ChangeKind::created) {
                const auto v = registry_.upsert_unit(l.conn->read(ev.path), now, UpsertMode::supersede);
                record(report, delta, "ingest", "v" + std::to_string(v));
              } else if (!registry_.unit(id)) {
                const auto v = registry_.upsert_unit(l.conn->read(ev.path), now, UpsertMode::supersede);
                record(report, delta, "ingest", "v" + std::to_string(v));
              } else if (ev.content && !registry_.is_archived(id) && registry_.unit(id)->content == *ev.content) {
                // Touched, or written through this control plane: nothing diverged.
                registry_.mark_verified(id, now);
              } else {
                record(report, delta, std::string(to_string(policy.stale_action)),
                       apply_stale_action(m, id, policy.stale_action, now));
              }
            }
            // Units whose registry content still matches the source are verified.
            const auto& snap = l.sub->snapshot();
            for (const auto& id : registry_.units_of_source(sid)) {
              if (registry_.is_archived(id)) continue;
              const auto u = registry_.unit(id);
              if (!u) continue;
              auto st = snap.find(u->metadata.path);
              if (st != snap.end() && st->second.hash == content_hash(u->content)) registry_.mark_verified(id, now);
            }
            l.last_poll = now;
          }
        } catch (const Error&) {
          l.sub.reset();
          l.conn.reset();
          sr.probe_ms = elapsed_ms(t0);
          const auto fail = registry_.record_source_result(sid, false, now);
          if (fail.delta) {
            const int n = registry_.flag_source_stale(sid);
            record(report, *fail.delta, "flag_dependents_stale", std::to_string(n) + " units flagged stale");
          }
        }
        if (res.status_changed) {
          AuditEvent e;
          e.at = now;
          e.kind = AuditKind::source_state_change;
          e.domain = m.name;
          e.outcome = std::string(to_string(res.state.status));
          e.detail = {{"source", sid}};
          try {
            audit_.append(std::move(e));
          } catch (const Error&) {
          }
        }
      }
      const auto after = registry_.source_state(sid);
      sr.status = after.status;
      sr.consecutive_failures = after.consecutive_failures;
      if (after.status == SourceStatus::disconnected) ++dark;
      report.sources.push_back(sr);
    }
    if (!m.sources.empty() && dark == static_cast<int>(m.sources.size())) {
      // A dark domain has nothing to verify against; all of it is suspect.
      for (const auto& s : m.sources) registry_.flag_source_stale(source_id(m.name, s.name));
    }
  }

  // Time-driven transitions and conflicts.
  for (const auto& m : manifests) {
    const auto views = registry_.query_views(m.name, {}, now);
    std::map<std::string, std::vector<ContextUnit>> by_id;
    for (const auto& v : views) by_id[v.unit.id].push_back(v.unit);
    for (const auto& [id, versions] : by_id) {
      auto rec = registry_.freshness_record(id);
      if (!rec) continue;
      if (versions.size() >= 2) {
        const auto& winner = resolve_conflict(versions);
        const auto kept = registry_.keep_version(id, winner.version, now);
        record(report, Delta{DeltaType::context_stale, id, now, "conflicted"}, "resolve_conflict",
               "kept v" + std::to_string(winner.version) + " as v" + std::to_string(kept));
        reported_.erase(id);
        continue;
      }
      const auto st = age_state(*rec, now);
      auto prev = reported_.find(id);
      const int before = prev == reported_.end() ? 0 : severity(prev->second);
      if (severity(st) > before) {
        reported_[id] = st;
        const auto& policy = rec->governing_policy;
        record(report, Delta{DeltaType::context_stale, id, now, std::string(to_string(st))},
               std::string(to_string(policy.stale_action)), apply_stale_action(m, id, policy.stale_action, now));
        if (auto again = registry_.freshness_record(id); again && age_state(*again, now) == FreshnessState::fresh) {
          reported_.erase(id);
        }
      } else if (st == FreshnessState::fresh) {
        reported_.erase(id);
      }
    }
  }

  report.duration_ms = elapsed_ms(wall);
  return report;
}

void Reconciler::run_loop(Millis interval, std::stop_token stop,
                          const std::function<void(const CycleReport&)>& on_cycle) {
  std::mutex m;
  std::condition_variable_any cv;
  while (!stop.stop_requested()) {
    auto report = reconcile_once();
    if (on_cycle) on_cycle(report);
    std::unique_lock lock(m);
    cv.wait_for(lock, stop, interval, [] { return false; });
  }
}

std::int64_t Reconciler::write_through(const std::string& source, const std::string& path,
                                       const std::string& content) {
  std::lock_guard lock(links_mutex_);
  const auto slash = source.find('/');
  const auto domain = registry_.domain(source.substr(0, slash));
  if (!domain) throw Error(errc::kUnknownSource, "source " + source);
  const SourceSpec* spec = domain->source(source.substr(slash + 1));
  if (!spec) throw Error(errc::kUnknownSource, "source " + source);
  auto& link = link_locked(*domain, *spec);
  link.conn->write(path, content);
  auto unit = link.conn->read(path);
  return registry_.upsert_unit(unit, clock_.now(), UpsertMode::supersede);
}

}  // namespace ctxk
