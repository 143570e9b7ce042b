#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ctxk/context_unit.hpp"
#include "ctxk/manifest.hpp"
#include "ctxk/time.hpp"

namespace ctxk {

enum class ConnectorKind { file_system, git_repo, in_memory };
std::string_view to_string(ConnectorKind k);

enum class HealthStatus { connected, degraded, disconnected };
std::string_view to_string(HealthStatus s);

struct Health {
  HealthStatus status = HealthStatus::connected;
  std::string detail;
};

enum class ChangeKind { created, modified, deleted };
std::string_view to_string(ChangeKind k);

struct ChangeEvent {
  std::string path;
  ChangeKind kind = ChangeKind::modified;
  Instant observed_at{};
  std::optional<std::string> content;  // never set for deleted events
};

struct WriteResult {
  std::int64_t new_version = 0;
};

// Observable state of one entry as seen by a polling subscription.
struct EntryStamp {
  Instant mtime{};
  std::uintmax_t size = 0;
  std::uint64_t hash = 0;

  bool operator==(const EntryStamp&) const = default;
};
using StampMap = std::map<std::string, EntryStamp>;

// Polling change stream. Each poll diffs the store against the previous
// snapshot. Once the store is lost the stream is terminated and every later
// poll throws ConnectionLost.
class Subscription {
 public:
  using Snapshotter = std::function<StampMap()>;
  using Loader = std::function<std::optional<std::string>(const std::string&)>;

  Subscription(Snapshotter snap, Loader load);

  std::vector<ChangeEvent> poll(Instant now);
  bool terminated() const { return terminated_; }
  // State as of the last poll.
  const StampMap& snapshot() const { return last_; }

 private:
  Snapshotter snap_;
  Loader load_;
  StampMap last_;
  bool terminated_ = false;
};

// Where the units of a source belong once ingested.
struct SourceBinding {
  std::string domain;
  std::string source_name;
  std::set<std::string> authorized_roles;
};

class MemoryCatalog;

// The six-operation connector contract. connect() is the only place that
// knows about concrete connector kinds.
class Connection {
 public:
  virtual ~Connection() = default;

  ConnectorKind kind() const { return kind_; }
  const std::map<std::string, std::string>& spec() const { return spec_; }
  const SourceBinding& binding() const { return binding_; }
  std::string source() const { return source_id(binding_.domain, binding_.source_name); }
  bool alive() const;

  std::vector<ContextUnit> query(std::string_view q);
  ContextUnit read(std::string_view path);
  WriteResult write(std::string_view path, std::string_view content);
  Subscription subscribe(std::string_view path_glob);
  virtual Health health() const = 0;

 protected:
  struct Raw {
    std::string path;
    std::string content;
    Instant mtime{};
    std::optional<std::string> author;
    std::optional<Instant> timestamp;
    std::optional<Sensitivity> sensitivity;
    std::optional<double> authority;
    std::vector<std::string> entities;
  };

  Connection(ConnectorKind kind, std::map<std::string, std::string> spec, SourceBinding binding);

  virtual std::vector<Raw> list_raw() = 0;
  virtual std::optional<Raw> read_raw(const std::string& path) = 0;
  virtual void write_raw(const std::string& path, std::string_view content) = 0;
  virtual StampMap stamps() = 0;
  virtual UnitType unit_type_for(const std::string& path) const;

 private:
  void require_alive() const;
  ContextUnit to_unit(const Raw& raw);

  ConnectorKind kind_;
  std::map<std::string, std::string> spec_;
  SourceBinding binding_;
  std::mutex versions_mutex_;
  std::map<std::string, std::pair<std::uint64_t, std::int64_t>> versions_;
};

struct ConnectOptions {
  MemoryCatalog* catalog = nullptr;  // defaults to MemoryCatalog::global()
};

// Throws ConnectFailed for unsupported kinds, missing directories or bad config.
std::unique_ptr<Connection> connect(const SourceSpec& spec, const SourceBinding& binding,
                                    const ConnectOptions& options = {});

// Backing store for the in-memory tabular connector, which stands in for
// SaaS connectors and databases. Stores are created on first use.
class MemoryCatalog {
 public:
  struct Row {
    std::string content;
    Instant mtime{};
    std::string author = "system";
    std::optional<Instant> timestamp;
    Sensitivity sensitivity = Sensitivity::internal;
    double authority = 0.5;
    std::vector<std::string> entities;
  };

  static MemoryCatalog& global();

  void put(const std::string& store, const std::string& path, Row row);
  void erase(const std::string& store, const std::string& path);
  void set_reachable(const std::string& store, bool reachable);
  bool reachable(const std::string& store) const;
  std::map<std::string, Row> rows(const std::string& store) const;
  void ensure(const std::string& store);

 private:
  struct Store {
    bool reachable = true;
    std::map<std::string, Row> rows;
  };
  mutable std::mutex mutex_;
  std::map<std::string, Store> stores_;
};

std::uint64_t content_hash(std::string_view s);

}  // namespace ctxk
