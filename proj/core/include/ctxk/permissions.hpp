#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxk/audit.hpp"
#include "ctxk/context_unit.hpp"
#include "ctxk/manifest.hpp"
#include "ctxk/tier.hpp"
#include "ctxk/time.hpp"

namespace ctxk {

// Operation names with built-in meaning. Everything else is opaque.
inline constexpr std::string_view kReadContext = "read-context";
inline constexpr std::string_view kWriteContext = "write-context";

enum class EngineMode {
  no_governance,  // every check allows, every action executes
  rbac,           // the agent inherits its user's role verbatim, all autonomous
  three_tier,     // strict-subset profiles and tiered approvals
};
std::string_view to_string(EngineMode m);

struct UserRole {
  std::string role;
  std::vector<std::string> read_paths;
  std::vector<std::string> write_paths;
  std::set<std::string> operations;
  std::map<std::string, Tier> tier_of;  // unlisted operations are autonomous

  Tier tier(std::string_view op) const;
};

struct AgentProfile {
  std::string agent_id;
  std::string user;
  std::string role;
  std::set<std::string> operations;
  std::map<std::string, Tier> tier_of;  // unlisted operations take the user's tier
  std::set<std::string> excluded;
};

enum class SessionState { live, killed };

struct Session {
  std::string id;
  std::string token;
  std::string agent_id;
  std::string user;
  std::string role;
  std::vector<std::string> assigned;
  std::optional<std::string> last_entity;
  std::string home_domain;
  SessionState state = SessionState::live;
  Instant created_at{};

  bool live() const { return state == SessionState::live; }
};

enum class AccessOp { read, write };

struct AccessDecision {
  bool allowed = false;
  std::string reason;  // empty when allowed

  explicit operator bool() const { return allowed; }
};

enum class ApprovalState { pending, approved, rejected, expired, consumed };
std::string_view to_string(ApprovalState s);

enum class Channel { agent, out_of_band };

struct PendingApproval {
  std::string approval_id;
  std::string session_id;
  std::string operation;
  std::string payload_digest;
  nlohmann::json payload;
  Tier tier = Tier::soft_approval;
  Instant issued_at{};
  std::optional<Instant> expires_at;
  ApprovalState state = ApprovalState::pending;
  int failed_attempts = 0;
};

// Agent-safe view of an approval: never carries the OTP.
nlohmann::ordered_json to_json(const PendingApproval& a);

struct ExecutedAction {
  std::string session_id;
  std::string operation;
  nlohmann::json payload;
  std::string payload_digest;
  std::optional<std::string> approval_id;
};

enum class ActionStatus { executed, pending, refused };
std::string_view to_string(ActionStatus s);

struct ActionOutcome {
  ActionStatus status = ActionStatus::refused;
  Tier tier = Tier::excluded;
  std::optional<std::string> approval_id;
  std::string reason;
};

struct Resolution {
  std::string approval_id;
  ApprovalState state = ApprovalState::pending;
  bool executed = false;
};

struct OtpRecord {
  std::string approval_id;
  std::string otp;
  Instant issued_at{};
};

enum class KillScope { session, user, global };

struct KillRequest {
  KillScope scope = KillScope::session;
  std::string id;  // session id or user; ignored for global
};

std::string sha256_hex(std::string_view data);
// Six decimal digits from a cryptographically strong generator.
std::string generate_otp();

// The Permission Engine: roles, agent profiles, sessions, approvals and kill
// switches. All public operations are linearizable.
class PermissionEngine {
 public:
  using Executor = std::function<void(const ExecutedAction&)>;

  PermissionEngine(AuditLog& audit, const Clock& clock, EngineMode mode = EngineMode::three_tier);

  EngineMode mode() const { return mode_; }
  void set_mode(EngineMode m) { mode_ = m; }

  // While unavailable every check denies and every action is refused.
  void set_available(bool up) { available_ = up; }
  bool available() const { return available_; }

  void set_executor(Executor ex);
  void set_otp_ttl(Millis ttl) { otp_ttl_ = ttl; }

  void register_role(const UserRole& role);
  void register_user(const std::string& user, const std::string& role);
  std::optional<UserRole> role(std::string_view name) const;

  // Strict-subset and tier checks; nothing is stored on rejection.
  void register_agent_profile(const AgentProfile& profile);
  std::optional<AgentProfile> profile(std::string_view agent_id) const;

  // Access rules per domain, replaced wholesale when manifests change.
  void install_access(const std::string& domain, const AccessSpec& access);
  void remove_access(const std::string& domain);
  std::optional<AccessSpec> installed_access(std::string_view domain) const;
  std::vector<std::string> installed_domains() const;

  Session create_session(const std::string& user, const std::string& agent_id, const std::string& role,
                         std::vector<std::string> assigned, std::string home_domain);
  void end_session(const std::string& session_id);
  std::optional<Session> session(std::string_view id) const;
  std::optional<Session> session_by_token(std::string_view token) const;
  std::vector<Session> sessions() const;
  void set_last_entity(const std::string& session_id, const std::string& entity);
  void set_assigned(const std::string& session_id, std::vector<std::string> assigned);

  // Domains the session may draw context from: its home domain plus brokered targets.
  std::vector<std::string> reachable_domains(const Session& s) const;
  bool domain_reachable(const Session& s, std::string_view domain) const;

  AccessDecision check_access(std::string_view session_id, AccessOp op, const ContextUnit& unit) const;
  AccessDecision check_path(std::string_view session_id, AccessOp op, std::string_view domain,
                            std::string_view path) const;

  Tier classify_action(std::string_view session_id, std::string_view operation, const nlohmann::json& payload) const;
  ActionOutcome submit_action(std::string_view session_id, const std::string& operation,
                              const nlohmann::json& payload);

  Resolution resolve_soft(std::string_view approval_id, bool approve, std::string_view actor);
  Resolution resolve_strong(std::string_view approval_id, std::string_view otp, Channel channel);

  std::optional<PendingApproval> approval(std::string_view approval_id) const;
  std::vector<PendingApproval> approvals() const;

  // Out-of-band store: reachable only through the admin surface.
  std::optional<OtpRecord> out_of_band_read(std::string_view approval_id) const;
  std::vector<OtpRecord> out_of_band_records() const;

  int kill_switch(const KillRequest& request);

  std::vector<ExecutedAction> executed() const;

 private:
  const UserRole* role_locked(std::string_view name) const;
  AgentProfile effective_profile_locked(const Session& s) const;
  AccessDecision check_locked(const Session* s, AccessOp op, std::string_view domain, std::string_view path,
                              const std::set<std::string>* authorized_roles) const;
  Tier classify_locked(const Session& s, std::string_view operation, const nlohmann::json& payload) const;
  void audit(AuditKind kind, const Session* s, std::string outcome, std::map<std::string, std::string> detail,
             std::optional<std::string> domain = std::nullopt);
  void execute(const ExecutedAction& action);

  AuditLog& audit_;
  const Clock& clock_;
  std::atomic<EngineMode> mode_;
  std::atomic<bool> available_{true};
  Millis otp_ttl_{std::chrono::seconds(300)};

  mutable std::mutex mutex_;
  Executor executor_;
  std::map<std::string, UserRole, std::less<>> roles_;
  std::map<std::string, std::set<std::string>, std::less<>> user_roles_;
  std::map<std::string, AgentProfile, std::less<>> profiles_;
  std::map<std::string, AccessSpec, std::less<>> access_;
  std::map<std::string, Session, std::less<>> sessions_;
  std::map<std::string, std::string, std::less<>> tokens_;
  std::map<std::string, PendingApproval, std::less<>> approvals_;
  std::map<std::string, OtpRecord, std::less<>> otp_store_;
  std::vector<ExecutedAction> executed_;
  std::uint64_t next_session_ = 1;
  std::uint64_t next_approval_ = 1;
};

}  // namespace ctxk
