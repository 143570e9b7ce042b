#include "ctxk/cxri.hpp"
#include "ctxk/error.hpp"

namespace ctxk {

MemoryCatalog& MemoryCatalog::global() {
  static MemoryCatalog catalog;
  return catalog;
}

void MemoryCatalog::ensure(const std::string& store) {
  std::lock_guard lock(mutex_);
  stores_[store];
}

void MemoryCatalog::put(const std::string& store, const std::string& path, Row row) {
  std::lock_guard lock(mutex_);
  stores_[store].rows[path] = std::move(row);
}

void MemoryCatalog::erase(const std::string& store, const std::string& path) {
  std::lock_guard lock(mutex_);
  stores_[store].rows.erase(path);
}

void MemoryCatalog::set_reachable(const std::string& store, bool reachable) {
  std::lock_guard lock(mutex_);
  stores_[store].reachable = reachable;
}

bool MemoryCatalog::reachable(const std::string& store) const {
  std::lock_guard lock(mutex_);
  auto it = stores_.find(store);
  return it != stores_.end() && it->second.reachable;
}

std::map<std::string, MemoryCatalog::Row> MemoryCatalog::rows(const std::string& store) const {
  std::lock_guard lock(mutex_);
  auto it = stores_.find(store);
  if (it == stores_.end() || !it->second.reachable) throw Error(errc::kConnectionLost, "store " + store);
  return it->second.rows;
}

namespace {

// Tabular rows keyed by path; stands in for SaaS connectors and databases.
class MemoryConnection final : public Connection {
 public:
  MemoryConnection(const SourceSpec& spec, const SourceBinding& binding, MemoryCatalog& catalog, std::string store)
      : Connection(ConnectorKind::in_memory, spec.config, binding), catalog_(catalog), store_(std::move(store)) {}

  Health health() const override {
    if (!catalog_.reachable(store_)) return {HealthStatus::disconnected, "store " + store_ + " is unreachable"};
    return {HealthStatus::connected, {}};
  }

 protected:
  std::vector<Raw> list_raw() override {
    std::vector<Raw> out;
    for (const auto& [path, row] : catalog_.rows(store_)) out.push_back(to_raw(path, row));
    return out;
  }

  std::optional<Raw> read_raw(const std::string& path) override {
    const auto rows = catalog_.rows(store_);
    auto it = rows.find(path);
    if (it == rows.end()) return std::nullopt;
    return to_raw(path, it->second);
  }

  void write_raw(const std::string& path, std::string_view content) override {
    if (!catalog_.reachable(store_)) throw Error(errc::kWriteFailed, "store unreachable", path);
    auto rows = catalog_.rows(store_);
    MemoryCatalog::Row row;
    if (auto it = rows.find(path); it != rows.end()) row = it->second;
    row.content = std::string(content);
    row.mtime = std::chrono::floor<Millis>(std::chrono::system_clock::now());
    catalog_.put(store_, path, std::move(row));
  }

  StampMap stamps() override {
    StampMap out;
    for (const auto& [path, row] : catalog_.rows(store_)) {
      out.emplace(path, EntryStamp{row.mtime, row.content.size(), content_hash(row.content)});
    }
    return out;
  }

  UnitType unit_type_for(const std::string&) const override { return UnitType::structured; }

 private:
  static Raw to_raw(const std::string& path, const MemoryCatalog::Row& row) {
    Raw r;
    r.path = path;
    r.content = row.content;
    r.mtime = row.mtime;
    r.author = row.author;
    r.timestamp = row.timestamp.value_or(row.mtime);
    r.sensitivity = row.sensitivity;
    r.authority = row.authority;
    r.entities = row.entities;
    return r;
  }

  MemoryCatalog& catalog_;
  std::string store_;
};

}  // namespace

std::unique_ptr<Connection> make_memory_connection(const SourceSpec& spec, const SourceBinding& binding,
                                                   MemoryCatalog& catalog) {
  std::string store;
  for (const char* key : {"store", "table", "system"}) {
    if (auto it = spec.config.find(key); it != spec.config.end() && !it->second.empty()) {
      store = it->second;
      break;
    }
  }
  if (store.empty()) store = source_id(binding.domain, spec.name);
  catalog.ensure(store);
  if (!catalog.reachable(store)) throw Error(errc::kConnectFailed, "store " + store + " is unreachable");
  return std::make_unique<MemoryConnection>(spec, binding, catalog, std::move(store));
}

}  // namespace ctxk
