#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxk/time.hpp"

namespace ctxk {

enum class AuditKind {
  session_created,
  session_killed,
  context_requested,
  context_delivered,
  context_denied,
  action_submitted,
  action_executed,
  approval_requested,
  approval_resolved,
  approval_rejected,
  otp_issued,
  reconcile_delta,
  source_state_change,
};

std::string_view to_string(AuditKind k);
std::optional<AuditKind> parse_audit_kind(std::string_view s);

struct AuditEvent {
  std::int64_t seq = 0;
  Instant at{};
  AuditKind kind = AuditKind::context_requested;
  std::optional<std::string> session_id;
  std::optional<std::string> user;
  std::optional<std::string> agent_id;
  std::optional<std::string> domain;
  std::string outcome;
  std::map<std::string, std::string> detail;
};

// Fixed key order: seq, at, kind, session_id, user, agent_id, domain, outcome, detail.
nlohmann::ordered_json to_json(const AuditEvent& e);
AuditEvent audit_event_from_json(const nlohmann::json& j);

struct AuditFilter {
  std::optional<std::string> session_id;
  std::optional<std::string> user;
  std::optional<AuditKind> kind;
  std::optional<Instant> from;  // inclusive
  std::optional<Instant> to;    // exclusive
};

class AuditSink {
 public:
  virtual ~AuditSink() = default;
  // Must be durable on return; throws on failure.
  virtual void write(const std::string& line) = 0;
};

// Appends one line per event and flushes before returning.
class JsonlFileSink final : public AuditSink {
 public:
  explicit JsonlFileSink(const std::filesystem::path& file);
  void write(const std::string& line) override;

 private:
  std::ofstream out_;
  std::filesystem::path file_;
};

// Append-only, in-memory log with an optional durable sink. A failed sink
// write surfaces as Error{AuditFailure} and the event is not recorded.
class AuditLog {
 public:
  explicit AuditLog(const Clock& clock);

  void set_sink(std::unique_ptr<AuditSink> sink);
  void set_mirror(std::ostream* out);

  // Values that must never be logged (issued OTPs).
  void register_secret(const std::string& secret);

  // Assigns seq and, when unset, the timestamp. Throws OtpInAuditDetail or
  // AuditFailure; either way nothing is appended.
  std::int64_t append(AuditEvent event);

  std::vector<AuditEvent> query(const AuditFilter& filter = {}) const;
  std::size_t size() const;

 private:
  const Clock& clock_;
  mutable std::shared_mutex mutex_;
  std::vector<AuditEvent> events_;
  std::unique_ptr<AuditSink> sink_;
  std::ostream* mirror_ = nullptr;
  std::set<std::string> secrets_;
};

}  // namespace ctxk
