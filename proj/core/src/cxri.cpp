#include "ctxk/cxri.hpp"

#include <algorithm>

#include "ctxk/error.hpp"
#include "ctxk/glob.hpp"
#include "ctxk/text.hpp"

namespace ctxk {

std::unique_ptr<Connection> make_filesystem_connection(const SourceSpec& spec, const SourceBinding& binding,
                                                       bool git_metadata);
std::unique_ptr<Connection> make_memory_connection(const SourceSpec& spec, const SourceBinding& binding,
                                                   MemoryCatalog& catalog);

std::string_view to_string(ConnectorKind k) {
  switch (k) {
    case ConnectorKind::file_system: return "file-system";
    case ConnectorKind::git_repo: return "git-repo";
    case ConnectorKind::in_memory: return "in-memory";
  }
  return "file-system";
}

std::string_view to_string(HealthStatus s) {
  switch (s) {
    case HealthStatus::connected: return "Connected";
    case HealthStatus::degraded: return "Degraded";
    case HealthStatus::disconnected: return "Disconnected";
  }
  return "Connected";
}

std::string_view to_string(ChangeKind k) {
  switch (k) {
    case ChangeKind::created: return "created";
    case ChangeKind::modified: return "modified";
    case ChangeKind::deleted: return "deleted";
  }
  return "modified";
}

std::uint64_t content_hash(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Subscription::Subscription(Snapshotter snap, Loader load) : snap_(std::move(snap)), load_(std::move(load)) {
  last_ = snap_();
}

std::vector<ChangeEvent> Subscription::poll(Instant now) {
  if (terminated_) throw Error(errc::kConnectionLost, "subscription terminated");
  StampMap cur;
  try {
    cur = snap_();
  } catch (const Error&) {
    terminated_ = true;
    throw;
  }
  struct Pending {
    Instant order;
    ChangeEvent ev;
  };
  std::vector<Pending> pending;
  for (const auto& [path, stamp] : cur) {
    auto it = last_.find(path);
    if (it == last_.end()) {
      pending.push_back({stamp.mtime, {path, ChangeKind::created, now, load_(path)}});
    } else if (!(it->second == stamp)) {
      pending.push_back({stamp.mtime, {path, ChangeKind::modified, now, load_(path)}});
    }
  }
  for (const auto& [path, stamp] : last_) {
    if (!cur.count(path)) pending.push_back({Instant::max(), {path, ChangeKind::deleted, now, std::nullopt}});
  }
  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    if (a.order != b.order) return a.order < b.order;
    return a.ev.path < b.ev.path;
  });
  last_ = std::move(cur);
  std::vector<ChangeEvent> out;
  out.reserve(pending.size());
  for (auto& p : pending) out.push_back(std::move(p.ev));
  return out;
}

Connection::Connection(ConnectorKind kind, std::map<std::string, std::string> spec, SourceBinding binding)
    : kind_(kind), spec_(std::move(spec)), binding_(std::move(binding)) {}

bool Connection::alive() const { return health().status != HealthStatus::disconnected; }

void Connection::require_alive() const {
  const auto h = health();
  if (h.status == HealthStatus::disconnected) throw Error(errc::kConnectionLost, h.detail);
}

UnitType Connection::unit_type_for(const std::string& path) const {
  auto ends_with = [&](std::string_view ext) {
    return path.size() >= ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0;
  };
  if (ends_with(".json") || ends_with(".csv") || ends_with(".yaml")) return UnitType::structured;
  return UnitType::unstructured;
}

ContextUnit Connection::to_unit(const Raw& raw) {
  ContextUnit u;
  u.metadata.source = source();
  u.metadata.path = raw.path;
  u.metadata.domain = binding_.domain;
  u.metadata.author = raw.author.value_or("unknown");
  u.metadata.timestamp = raw.timestamp.value_or(raw.mtime);
  u.metadata.sensitivity = raw.sensitivity.value_or(Sensitivity::internal);
  u.metadata.authority = raw.authority.value_or(0.5);
  u.metadata.entities = raw.entities;
  u.id = unit_id(u.metadata.source, raw.path);
  u.content = raw.content;
  u.unit_type = unit_type_for(raw.path);
  u.vector = text::term_vector(raw.content);
  u.authorized_roles = binding_.authorized_roles;

  const auto h = content_hash(raw.content);
  std::lock_guard lock(versions_mutex_);
  auto it = versions_.find(raw.path);
  if (it == versions_.end()) {
    it = versions_.emplace(raw.path, std::make_pair(h, std::int64_t{1})).first;
  } else if (it->second.first != h) {
    it->second = {h, it->second.second + 1};
  }
  u.version = it->second.second;
  return u;
}

std::vector<ContextUnit> Connection::query(std::string_view q) {
  require_alive();
  const auto needle = text::to_lower(q);
  std::vector<ContextUnit> out;
  for (const auto& raw : list_raw()) {
    auto u = to_unit(raw);
    if (!needle.empty()) {
      std::string hay = text::to_lower(u.content);
      hay += '\n';
      hay += text::to_lower(u.metadata.path);
      hay += '\n';
      hay += text::to_lower(u.metadata.author);
      for (const auto& e : u.metadata.entities) {
        hay += '\n';
        hay += text::to_lower(e);
      }
      if (hay.find(needle) == std::string::npos) continue;
    }
    out.push_back(std::move(u));
  }
  std::sort(out.begin(), out.end(),
            [](const ContextUnit& a, const ContextUnit& b) { return a.metadata.path < b.metadata.path; });
  return out;
}

ContextUnit Connection::read(std::string_view path) {
  require_alive();
  auto raw = read_raw(std::string(path));
  if (!raw) throw Error(errc::kNotFound, std::string(path) + " does not exist", std::string(path));
  return to_unit(*raw);
}

WriteResult Connection::write(std::string_view path, std::string_view content) {
  require_alive();
  const std::string p(path);
  if (p.empty() || p.front() == '/' || p.find("..") != std::string::npos) {
    throw Error(errc::kWriteFailed, "invalid path", p);
  }
  write_raw(p, content);
  std::lock_guard lock(versions_mutex_);
  auto& v = versions_[p];
  v = {content_hash(content), v.second + 1};
  return {v.second};
}

Subscription Connection::subscribe(std::string_view path_glob) {
  require_alive();
  std::string glob(path_glob);
  auto snap = [this, glob] {
    StampMap all = stamps();
    StampMap out;
    for (auto& [path, s] : all) {
      if (glob_match(glob, path)) out.emplace(path, s);
    }
    return out;
  };
  auto load = [this](const std::string& path) -> std::optional<std::string> {
    auto raw = read_raw(path);
    if (!raw) return std::nullopt;
    return raw->content;
  };
  return Subscription(std::move(snap), std::move(load));
}

std::unique_ptr<Connection> connect(const SourceSpec& spec, const SourceBinding& binding,
                                    const ConnectOptions& options) {
  switch (spec.type) {
    case SourceType::file_system: return make_filesystem_connection(spec, binding, false);
    case SourceType::git_repo: return make_filesystem_connection(spec, binding, true);
    case SourceType::connector:
    case SourceType::database:
      return make_memory_connection(spec, binding, options.catalog ? *options.catalog : MemoryCatalog::global());
  }
  throw Error(errc::kConnectFailed, "unsupported source type");
}

}  // namespace ctxk
