#include "ctxk/audit.hpp"

#include <array>

#include "ctxk/error.hpp"

namespace ctxk {

namespace {

constexpr std::array kKinds = {
    AuditKind::session_created,   AuditKind::session_killed,     AuditKind::context_requested,
    AuditKind::context_delivered, AuditKind::context_denied,     AuditKind::action_submitted,
    AuditKind::action_executed,   AuditKind::approval_requested, AuditKind::approval_resolved,
    AuditKind::approval_rejected, AuditKind::otp_issued,         AuditKind::reconcile_delta,
    AuditKind::source_state_change,
};

}  // namespace

std::string_view to_string(AuditKind k) {
  switch (k) {
    case AuditKind::session_created: return "session_created";
    case AuditKind::session_killed: return "session_killed";
    case AuditKind::context_requested: return "context_requested";
    case AuditKind::context_delivered: return "context_delivered";
    case AuditKind::context_denied: return "context_denied";
    case AuditKind::action_submitted: return "action_submitted";
    case AuditKind::action_executed: return "action_executed";
    case AuditKind::approval_requested: return "approval_requested";
    case AuditKind::approval_resolved: return "approval_resolved";
    case AuditKind::approval_rejected: return "approval_rejected";
    case AuditKind::otp_issued: return "otp_issued";
    case AuditKind::reconcile_delta: return "reconcile_delta";
    case AuditKind::source_state_change: return "source_state_change";
  }
  return "context_requested";
}

std::optional<AuditKind> parse_audit_kind(std::string_view s) {
  for (auto k : kKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

nlohmann::ordered_json to_json(const AuditEvent& e) {
  nlohmann::ordered_json j;
  j["seq"] = e.seq;
  j["at"] = format_rfc3339(e.at);
  j["kind"] = to_string(e.kind);
  if (e.session_id) j["session_id"] = *e.session_id;
  if (e.user) j["user"] = *e.user;
  if (e.agent_id) j["agent_id"] = *e.agent_id;
  if (e.domain) j["domain"] = *e.domain;
  j["outcome"] = e.outcome;
  j["detail"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : e.detail) j["detail"][k] = v;
  return j;
}

AuditEvent audit_event_from_json(const nlohmann::json& j) {
  AuditEvent e;
  e.seq = j.at("seq").get<std::int64_t>();
  e.at = parse_rfc3339(j.at("at").get<std::string>()).value_or(Instant{});
  e.kind = parse_audit_kind(j.at("kind").get<std::string>()).value_or(AuditKind::context_requested);
  auto opt = [&](const char* key, std::optional<std::string>& out) {
    if (j.contains(key)) out = j.at(key).get<std::string>();
  };
  opt("session_id", e.session_id);
  opt("user", e.user);
  opt("agent_id", e.agent_id);
  opt("domain", e.domain);
  e.outcome = j.at("outcome").get<std::string>();
  e.detail = j.at("detail").get<std::map<std::string, std::string>>();
  return e;
}

JsonlFileSink::JsonlFileSink(const std::filesystem::path& file) : out_(file, std::ios::app), file_(file) {
  if (!out_) throw Error(errc::kAuditFailure, "cannot open " + file.string());
}

void JsonlFileSink::write(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw Error(errc::kAuditFailure, "write to " + file_.string() + " failed");
}

AuditLog::AuditLog(const Clock& clock) : clock_(clock) {}

void AuditLog::set_sink(std::unique_ptr<AuditSink> sink) {
  std::unique_lock lock(mutex_);
  sink_ = std::move(sink);
}

void AuditLog::set_mirror(std::ostream* out) {
  std::unique_lock lock(mutex_);
  mirror_ = out;
}

void AuditLog::register_secret(const std::string& secret) {
  std::unique_lock lock(mutex_);
  secrets_.insert(secret);
}

std::int64_t AuditLog::append(AuditEvent event) {
  std::unique_lock lock(mutex_);
  for (const auto& [k, v] : event.detail) {
    if (k == "otp" || secrets_.count(v)) {
      throw Error(errc::kOtpInAuditDetail, "audit detail must not carry an OTP", "detail." + k);
    }
  }
  if (secrets_.count(event.outcome)) throw Error(errc::kOtpInAuditDetail, "outcome carries an OTP", "outcome");
  if (event.at == Instant{}) event.at = clock_.now();
  event.seq = static_cast<std::int64_t>(events_.size()) + 1;
  const auto line = to_json(event).dump();
  if (sink_) {
    try {
      sink_->write(line);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(errc::kAuditFailure, e.what());
    }
  }
  if (mirror_) *mirror_ << line << '\n';
  events_.push_back(std::move(event));
  return events_.back().seq;
}

std::vector<AuditEvent> AuditLog::query(const AuditFilter& f) const {
  std::shared_lock lock(mutex_);
  std::vector<AuditEvent> out;
  for (const auto& e : events_) {
    if (f.session_id && e.session_id != f.session_id) continue;
    if (f.user && e.user != f.user) continue;
    if (f.kind && e.kind != *f.kind) continue;
    if (f.from && e.at < *f.from) continue;
    if (f.to && e.at >= *f.to) continue;
    out.push_back(e);
  }
  return out;
}

std::size_t AuditLog::size() const {
  std::shared_lock lock(mutex_);
  return events_.size();
}

}  // namespace ctxk
