#include "ctxk/permissions.hpp"

#include <algorithm>
#include <cstdio>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include "ctxk/error.hpp"
#include "ctxk/glob.hpp"

namespace ctxk {

std::string_view to_string(EngineMode m) {
  switch (m) {
    case EngineMode::no_governance: return "no_governance";
    case EngineMode::rbac: return "rbac";
    case EngineMode::three_tier: return "three_tier";
  }
  return "three_tier";
}

std::string_view to_string(ApprovalState s) {
  switch (s) {
    case ApprovalState::pending: return "pending";
    case ApprovalState::approved: return "approved";
    case ApprovalState::rejected: return "rejected";
    case ApprovalState::expired: return "expired";
    case ApprovalState::consumed: return "consumed";
  }
  return "pending";
}

std::string_view to_string(ActionStatus s) {
  switch (s) {
    case ActionStatus::executed: return "executed";
    case ActionStatus::pending: return "pending";
    case ActionStatus::refused: return "refused";
  }
  return "refused";
}

Tier UserRole::tier(std::string_view op) const {
  auto it = tier_of.find(std::string(op));
  return it == tier_of.end() ? Tier::autonomous : it->second;
}

nlohmann::ordered_json to_json(const PendingApproval& a) {
  nlohmann::ordered_json j;
  j["approval_id"] = a.approval_id;
  j["session_id"] = a.session_id;
  j["operation"] = a.operation;
  j["payload_digest"] = a.payload_digest;
  j["tier"] = to_string(a.tier);
  j["state"] = to_string(a.state);
  j["issued_at"] = format_rfc3339(a.issued_at);
  if (a.expires_at) j["expires_at"] = format_rfc3339(*a.expires_at);
  j["failed_attempts"] = a.failed_attempts;
  return j;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

namespace {

std::uint32_t strong_random_u32() {
  std::uint32_t v = 0;
  if (RAND_bytes(reinterpret_cast<unsigned char*>(&v), sizeof v) != 1) {
    throw Error(errc::kPermissionEngineUnavailable, "random generator failure");
  }
  return v;
}

std::string random_token() {
  unsigned char bytes[16];
  if (RAND_bytes(bytes, sizeof bytes) != 1) throw Error(errc::kPermissionEngineUnavailable, "random generator failure");
  std::string out;
  char buf[3];
  for (unsigned char b : bytes) {
    std::snprintf(buf, sizeof buf, "%02x", b);
    out += buf;
  }
  return out;
}

bool otp_equal(std::string_view a, std::string_view b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

std::string payload_string(const nlohmann::json& payload, const char* key) {
  if (payload.is_object()) {
    auto it = payload.find(key);
    if (it != payload.end() && it->is_string()) return it->get<std::string>();
  }
  return {};
}

}  // namespace

std::string generate_otp() {
  // Rejection sampling keeps the six digits uniform.
  constexpr std::uint32_t kLimit = 4294000000u;
  std::uint32_t v;
  do {
    v = strong_random_u32();
  } while (v >= kLimit);
  char buf[8];
  std::snprintf(buf, sizeof buf, "%06u", v % 1000000u);
  return buf;
}

PermissionEngine::PermissionEngine(AuditLog& audit, const Clock& clock, EngineMode mode)
    : audit_(audit), clock_(clock), mode_(mode) {}

void PermissionEngine::set_executor(Executor ex) {
  std::lock_guard lock(mutex_);
  executor_ = std::move(ex);
}

void PermissionEngine::register_role(const UserRole& role) {
  std::lock_guard lock(mutex_);
  roles_[role.role] = role;
}

void PermissionEngine::register_user(const std::string& user, const std::string& role) {
  std::lock_guard lock(mutex_);
  if (!roles_.count(role)) throw Error(errc::kUnknownRole, "role " + role + " is not registered");
  user_roles_[user].insert(role);
}

std::optional<UserRole> PermissionEngine::role(std::string_view name) const {
  std::lock_guard lock(mutex_);
  if (auto* r = role_locked(name)) return *r;
  return std::nullopt;
}

const UserRole* PermissionEngine::role_locked(std::string_view name) const {
  auto it = roles_.find(name);
  return it == roles_.end() ? nullptr : &it->second;
}

void PermissionEngine::register_agent_profile(const AgentProfile& p) {
  std::lock_guard lock(mutex_);
  const UserRole* r = role_locked(p.role);
  if (!r) throw Error(errc::kUnknownRole, "role " + p.role + " is not registered", "role");
  auto held = user_roles_.find(p.user);
  if (held != user_roles_.end() && !held->second.count(p.role)) {
    throw Error(errc::kUnknownRole, "user " + p.user + " does not hold role " + p.role, "role");
  }
  for (const auto& op : p.operations) {
    if (!r->operations.count(op)) {
      throw Error(errc::kSupersetViolation, "operation " + op + " is not granted to role " + p.role, "operations");
    }
  }
  if (p.operations == r->operations) {
    throw Error(errc::kEqualSetViolation, "agent operations equal the role's; the inclusion must be strict",
                "operations");
  }
  for (const auto& op : p.operations) {
    auto it = p.tier_of.find(op);
    if (it == p.tier_of.end()) continue;
    if (!at_least_as_restrictive(it->second, r->tier(op))) {
      throw Error(errc::kTierViolation,
                  "operation " + op + " is " + std::string(to_string(it->second)) + " for the agent but " +
                      std::string(to_string(r->tier(op))) + " for the user",
                  "tier_of." + op);
    }
  }
  profiles_[p.agent_id] = p;
}

std::optional<AgentProfile> PermissionEngine::profile(std::string_view agent_id) const {
  std::lock_guard lock(mutex_);
  auto it = profiles_.find(agent_id);
  if (it == profiles_.end()) return std::nullopt;
  return it->second;
}

void PermissionEngine::install_access(const std::string& domain, const AccessSpec& access) {
  std::lock_guard lock(mutex_);
  access_[domain] = access;
}

void PermissionEngine::remove_access(const std::string& domain) {
  std::lock_guard lock(mutex_);
  access_.erase(domain);
}

std::optional<AccessSpec> PermissionEngine::installed_access(std::string_view domain) const {
  std::lock_guard lock(mutex_);
  auto it = access_.find(domain);
  if (it == access_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> PermissionEngine::installed_domains() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [d, _] : access_) out.push_back(d);
  return out;
}

void PermissionEngine::audit(AuditKind kind, const Session* s, std::string outcome,
                             std::map<std::string, std::string> detail, std::optional<std::string> domain) {
  AuditEvent e;
  e.at = clock_.now();
  e.kind = kind;
  if (s) {
    e.session_id = s->id;
    e.user = s->user;
    e.agent_id = s->agent_id;
  }
  e.domain = std::move(domain);
  e.outcome = std::move(outcome);
  e.detail = std::move(detail);
  audit_.append(std::move(e));
}

Session PermissionEngine::create_session(const std::string& user, const std::string& agent_id,
                                         const std::string& role, std::vector<std::string> assigned,
                                         std::string home_domain) {
  std::lock_guard lock(mutex_);
  if (!role_locked(role)) throw Error(errc::kUnknownRole, "role " + role + " is not registered", "role");
  auto held = user_roles_.find(user);
  if (held == user_roles_.end() || !held->second.count(role)) {
    throw Error(errc::kUnknownRole, "user " + user + " does not hold role " + role, "role");
  }
  if (mode_ == EngineMode::three_tier) {
    auto p = profiles_.find(agent_id);
    if (p == profiles_.end()) throw Error(errc::kUnknownAgent, "agent " + agent_id + " has no profile", "agent_id");
    if (p->second.user != user || p->second.role != role) {
      throw Error(errc::kUnknownAgent, "agent " + agent_id + " is not registered for " + user + "/" + role,
                  "agent_id");
    }
  }
  if (home_domain.empty()) {
    for (const auto& [d, spec] : access_) {
      if (spec.role(role)) {
        home_domain = d;
        break;
      }
    }
  }
  Session s;
  s.id = "s-" + std::to_string(next_session_);
  s.token = random_token();
  s.agent_id = agent_id;
  s.user = user;
  s.role = role;
  s.assigned = std::move(assigned);
  s.home_domain = std::move(home_domain);
  s.created_at = clock_.now();
  audit(AuditKind::session_created, &s, "created", {{"role", role}, {"home_domain", s.home_domain}},
        s.home_domain);
  ++next_session_;
  tokens_[s.token] = s.id;
  sessions_[s.id] = s;
  return s;
}

void PermissionEngine::end_session(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(errc::kUnknownSession, "session " + session_id);
  Session& s = it->second;
  if (s.live()) {
    audit(AuditKind::session_killed, &s, "ended", {{"scope", "end"}});
    s.state = SessionState::killed;
  }
  for (auto& [_, a] : approvals_) {
    if (a.session_id == session_id && a.state == ApprovalState::pending) a.state = ApprovalState::rejected;
  }
}

std::optional<Session> PermissionEngine::session(std::string_view id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::optional<Session> PermissionEngine::session_by_token(std::string_view token) const {
  std::lock_guard lock(mutex_);
  auto t = tokens_.find(token);
  if (t == tokens_.end()) return std::nullopt;
  auto it = sessions_.find(t->second);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::vector<Session> PermissionEngine::sessions() const {
  std::lock_guard lock(mutex_);
  std::vector<Session> out;
  for (const auto& [_, s] : sessions_) out.push_back(s);
  return out;
}

void PermissionEngine::set_last_entity(const std::string& session_id, const std::string& entity) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it != sessions_.end()) it->second.last_entity = entity;
}

void PermissionEngine::set_assigned(const std::string& session_id, std::vector<std::string> assigned) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(errc::kUnknownSession, "session " + session_id);
  it->second.assigned = std::move(assigned);
}

std::vector<std::string> PermissionEngine::reachable_domains(const Session& s) const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  if (mode_ == EngineMode::no_governance) {
    for (const auto& [d, _] : access_) out.push_back(d);
    return out;
  }
  auto home = access_.find(s.home_domain);
  if (home == access_.end()) return out;
  out.push_back(s.home_domain);
  for (const auto& rule : home->second.cross_domain) {
    if (rule.mode == CrossDomainMode::brokered && access_.count(rule.domain)) out.push_back(rule.domain);
  }
  return out;
}

bool PermissionEngine::domain_reachable(const Session& s, std::string_view domain) const {
  const auto ds = reachable_domains(s);
  return std::find(ds.begin(), ds.end(), domain) != ds.end();
}

AgentProfile PermissionEngine::effective_profile_locked(const Session& s) const {
  if (mode_ == EngineMode::three_tier) {
    auto it = profiles_.find(s.agent_id);
    if (it != profiles_.end()) return it->second;
    return AgentProfile{s.agent_id, s.user, s.role, {}, {}, {}};
  }
  AgentProfile p{s.agent_id, s.user, s.role, {}, {}, {}};
  if (const UserRole* r = role_locked(s.role)) p.operations = r->operations;
  return p;
}

AccessDecision PermissionEngine::check_locked(const Session* s, AccessOp op, std::string_view domain,
                                              std::string_view path,
                                              const std::set<std::string>* authorized_roles) const {
  if (!available_) return {false, "fail_closed"};
  if (!s) return {false, "unknown_session"};
  if (!s->live()) return {false, "killed"};
  if (mode_ == EngineMode::no_governance) return {true, {}};
  if (authorized_roles && !authorized_roles->count(s->role)) return {false, "role"};

  auto spec = access_.find(domain);
  if (spec == access_.end()) return {false, "unknown_domain"};
  if (domain != s->home_domain) {
    auto home = access_.find(s->home_domain);
    if (home == access_.end() || home->second.cross_domain_mode(domain) != CrossDomainMode::brokered) {
      return {false, "cross_domain"};
    }
  }
  const RoleAccess* ra = spec->second.role(s->role);
  if (!ra) return {false, "path"};
  const auto& globs = op == AccessOp::read ? ra->read : ra->write;
  const bool matched = std::any_of(globs.begin(), globs.end(),
                                   [&](const std::string& g) { return glob_match(g, path, s->assigned); });
  if (!matched) return {false, "path"};

  const AgentProfile p = effective_profile_locked(*s);
  const std::string opname(op == AccessOp::read ? kReadContext : kWriteContext);
  if (!p.operations.count(opname) || p.excluded.count(opname)) return {false, "operation"};
  if (mode_ == EngineMode::three_tier && op == AccessOp::read &&
      spec->second.agent.read != Tier::autonomous) {
    return {false, "tier"};
  }
  return {true, {}};
}

AccessDecision PermissionEngine::check_access(std::string_view session_id, AccessOp op,
                                              const ContextUnit& unit) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  const Session* s = it == sessions_.end() ? nullptr : &it->second;
  return check_locked(s, op, unit.metadata.domain, unit.metadata.path, &unit.authorized_roles);
}

AccessDecision PermissionEngine::check_path(std::string_view session_id, AccessOp op, std::string_view domain,
                                            std::string_view path) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  const Session* s = it == sessions_.end() ? nullptr : &it->second;
  return check_locked(s, op, domain, path, nullptr);
}

Tier PermissionEngine::classify_locked(const Session& s, std::string_view operation,
                                       const nlohmann::json& payload) const {
  if (mode_ == EngineMode::no_governance) return Tier::autonomous;
  const AgentProfile p = effective_profile_locked(s);
  const std::string op(operation);
  if (!p.operations.count(op) || p.excluded.count(op)) return Tier::excluded;
  if (mode_ == EngineMode::rbac) return Tier::autonomous;

  const UserRole* r = role_locked(s.role);
  const Tier user_tier = r ? r->tier(op) : Tier::excluded;
  auto at = p.tier_of.find(op);
  Tier t = most_restrictive(user_tier, at == p.tier_of.end() ? user_tier : at->second);

  std::string domain = payload_string(payload, "domain");
  if (domain.empty()) domain = s.home_domain;
  auto spec = access_.find(domain);
  if (spec != access_.end()) {
    const auto& agent = spec->second.agent;
    if (op == kWriteContext) {
      t = most_restrictive(t, agent.write_tier(payload_string(payload, "path")));
    } else if (auto e = agent.execute.find(op); e != agent.execute.end()) {
      t = most_restrictive(t, e->second);
    }
  }
  return t;
}

Tier PermissionEngine::classify_action(std::string_view session_id, std::string_view operation,
                                       const nlohmann::json& payload) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end() || !it->second.live()) return Tier::excluded;
  return classify_locked(it->second, operation, payload);
}

void PermissionEngine::execute(const ExecutedAction& action) {
  executed_.push_back(action);
  if (executor_) executor_(action);
}

ActionOutcome PermissionEngine::submit_action(std::string_view session_id, const std::string& operation,
                                              const nlohmann::json& payload) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  const Session* s = it == sessions_.end() ? nullptr : &it->second;
  const std::string digest = sha256_hex(payload.dump());
  std::map<std::string, std::string> detail{{"operation", operation}, {"payload_digest", digest}};

  auto refuse = [&](std::string reason, Tier tier) {
    ActionOutcome out{ActionStatus::refused, tier, std::nullopt, reason};
    detail["reason"] = reason;
    try {
      audit(AuditKind::action_submitted, s, "refused", detail);
    } catch (const Error&) {
      // Already refusing; the refusal itself stands.
    }
    return out;
  };

  if (!s) return refuse("unknown_session", Tier::excluded);
  if (!s->live()) return refuse("killed", Tier::excluded);
  if (!available_) return refuse("fail_closed", Tier::excluded);

  const Tier tier = classify_locked(*s, operation, payload);
  if (tier == Tier::excluded) return refuse("excluded", tier);
  if (operation == kWriteContext && mode_ != EngineMode::no_governance) {
    std::string domain = payload_string(payload, "domain");
    if (domain.empty()) domain = s->home_domain;
    const auto path = payload_string(payload, "path");
    if (path.empty()) return refuse("path", tier);
    auto d = check_locked(s, AccessOp::write, domain, path, nullptr);
    if (!d) return refuse(d.reason, tier);
  }

  detail["tier"] = std::string(to_string(tier));
  try {
    audit(AuditKind::action_submitted, s, "accepted", detail);
  } catch (const Error&) {
    return ActionOutcome{ActionStatus::refused, tier, std::nullopt, "audit_failure"};
  }

  const auto now = clock_.now();
  if (tier == Tier::autonomous) {
    ExecutedAction action{s->id, operation, payload, digest, std::nullopt};
    try {
      audit(AuditKind::action_executed, s, "executed", detail);
    } catch (const Error&) {
      return ActionOutcome{ActionStatus::refused, tier, std::nullopt, "audit_failure"};
    }
    try {
      execute(action);
    } catch (const Error& e) {
      return ActionOutcome{ActionStatus::refused, tier, std::nullopt, e.code()};
    }
    return ActionOutcome{ActionStatus::executed, tier, std::nullopt, {}};
  }

  PendingApproval a;
  a.approval_id = "apr-" + std::to_string(next_approval_);
  a.session_id = s->id;
  a.operation = operation;
  a.payload_digest = digest;
  a.payload = payload;
  a.tier = tier;
  a.issued_at = now;
  detail["approval_id"] = a.approval_id;
  std::optional<OtpRecord> otp;
  if (tier == Tier::strong_approval) {
    a.expires_at = now + otp_ttl_;
    otp = OtpRecord{a.approval_id, generate_otp(), now};
    audit_.register_secret(otp->otp);
  }
  try {
    audit(AuditKind::approval_requested, s, "pending", detail);
    if (otp) audit(AuditKind::otp_issued, s, "issued", {{"approval_id", a.approval_id}, {"channel", "out_of_band"}});
  } catch (const Error&) {
    return ActionOutcome{ActionStatus::refused, tier, std::nullopt, "audit_failure"};
  }
  ++next_approval_;
  if (otp) otp_store_[a.approval_id] = *otp;
  const auto id = a.approval_id;
  approvals_[id] = std::move(a);
  return ActionOutcome{ActionStatus::pending, tier, id, {}};
}

Resolution PermissionEngine::resolve_soft(std::string_view approval_id, bool approve, std::string_view actor) {
  std::lock_guard lock(mutex_);
  auto it = approvals_.find(approval_id);
  if (it == approvals_.end()) throw Error(errc::kUnknownApproval, "approval " + std::string(approval_id));
  PendingApproval& a = it->second;
  auto sit = sessions_.find(a.session_id);
  const Session* s = sit == sessions_.end() ? nullptr : &sit->second;
  std::map<std::string, std::string> detail{{"approval_id", a.approval_id}, {"channel", "soft"}};

  if (a.tier != Tier::soft_approval) {
    detail["reason"] = "wrong_tier";
    audit(AuditKind::approval_rejected, s, "refused", detail);
    throw Error(errc::kWrongTier, "approval " + a.approval_id + " requires strong approval");
  }
  if (a.state != ApprovalState::pending) {
    detail["reason"] = "not_pending";
    audit(AuditKind::approval_rejected, s, "refused", detail);
    throw Error(errc::kNotPending, "approval " + a.approval_id + " is " + std::string(to_string(a.state)));
  }
  if (!s || actor != s->user) {
    detail["reason"] = "actor";
    audit(AuditKind::approval_rejected, s, "refused", detail);
    throw Error(errc::kUnauthorized, "only the session's user may resolve this approval");
  }
  if (!approve) {
    detail["decision"] = "reject";
    audit(AuditKind::approval_rejected, s, "rejected", detail);
    a.state = ApprovalState::rejected;
    return {a.approval_id, a.state, false};
  }
  detail["decision"] = "approve";
  audit(AuditKind::approval_resolved, s, "approved", detail);
  a.state = ApprovalState::approved;
  ExecutedAction action{a.session_id, a.operation, a.payload, a.payload_digest, a.approval_id};
  audit(AuditKind::action_executed, s, "executed",
        {{"approval_id", a.approval_id}, {"operation", a.operation}, {"payload_digest", a.payload_digest}});
  execute(action);
  return {a.approval_id, a.state, true};
}

Resolution PermissionEngine::resolve_strong(std::string_view approval_id, std::string_view otp, Channel channel) {
  std::lock_guard lock(mutex_);
  auto it = approvals_.find(approval_id);
  const PendingApproval* found = it == approvals_.end() ? nullptr : &it->second;
  const Session* s = nullptr;
  if (found) {
    auto sit = sessions_.find(found->session_id);
    if (sit != sessions_.end()) s = &sit->second;
  }
  std::map<std::string, std::string> detail{{"approval_id", std::string(approval_id)}, {"channel", "strong"}};
  auto reject = [&](const char* code, const char* reason, std::string msg) {
    detail["reason"] = reason;
    audit(AuditKind::approval_rejected, s, "refused", detail);
    throw Error(code, std::move(msg));
  };

  if (channel != Channel::out_of_band) reject(errc::kWrongChannel, "wrong_channel", "strong approval requires the out-of-band channel");
  if (!found) throw Error(errc::kUnknownApproval, "approval " + std::string(approval_id));
  PendingApproval& a = it->second;
  if (a.tier != Tier::strong_approval) reject(errc::kWrongTier, "wrong_tier", "approval " + a.approval_id + " is not strong");
  if (a.state == ApprovalState::consumed) reject(errc::kReplay, "replay", "approval " + a.approval_id + " already consumed");
  if (a.state != ApprovalState::pending) {
    reject(errc::kNotPending, "not_pending", "approval " + a.approval_id + " is " + std::string(to_string(a.state)));
  }
  const auto now = clock_.now();
  if (a.expires_at && now > *a.expires_at) {
    a.state = ApprovalState::expired;
    reject(errc::kExpired, "expired", "approval " + a.approval_id + " expired");
  }
  auto rec = otp_store_.find(a.approval_id);
  if (rec == otp_store_.end() || !otp_equal(rec->second.otp, otp)) {
    ++a.failed_attempts;
    detail["attempts"] = std::to_string(a.failed_attempts);
    reject(errc::kWrongOtp, "wrong_otp", "one-time code rejected");
  }
  audit(AuditKind::approval_resolved, s, "approved", detail);
  a.state = ApprovalState::consumed;
  ExecutedAction action{a.session_id, a.operation, a.payload, a.payload_digest, a.approval_id};
  audit(AuditKind::action_executed, s, "executed",
        {{"approval_id", a.approval_id}, {"operation", a.operation}, {"payload_digest", a.payload_digest}});
  execute(action);
  return {a.approval_id, a.state, true};
}

std::optional<PendingApproval> PermissionEngine::approval(std::string_view approval_id) const {
  std::lock_guard lock(mutex_);
  auto it = approvals_.find(approval_id);
  if (it == approvals_.end()) return std::nullopt;
  return it->second;
}

std::vector<PendingApproval> PermissionEngine::approvals() const {
  std::lock_guard lock(mutex_);
  std::vector<PendingApproval> out;
  for (const auto& [_, a] : approvals_) out.push_back(a);
  return out;
}

std::optional<OtpRecord> PermissionEngine::out_of_band_read(std::string_view approval_id) const {
  std::lock_guard lock(mutex_);
  auto it = otp_store_.find(approval_id);
  if (it == otp_store_.end()) return std::nullopt;
  return it->second;
}

std::vector<OtpRecord> PermissionEngine::out_of_band_records() const {
  std::lock_guard lock(mutex_);
  std::vector<OtpRecord> out;
  for (const auto& [_, r] : otp_store_) out.push_back(r);
  return out;
}

int PermissionEngine::kill_switch(const KillRequest& request) {
  std::lock_guard lock(mutex_);
  std::vector<Session*> hit;
  for (auto& [id, s] : sessions_) {
    if (!s.live()) continue;
    const bool match = request.scope == KillScope::global ||
                       (request.scope == KillScope::session && id == request.id) ||
                       (request.scope == KillScope::user && s.user == request.id);
    if (match) hit.push_back(&s);
  }
  std::set<std::string> killed;
  for (Session* s : hit) {
    s->state = SessionState::killed;
    killed.insert(s->id);
  }
  for (auto& [_, a] : approvals_) {
    if (a.state == ApprovalState::pending && killed.count(a.session_id)) a.state = ApprovalState::rejected;
  }
  const char* scope = request.scope == KillScope::global ? "global"
                      : request.scope == KillScope::user ? "user"
                                                         : "session";
  for (Session* s : hit) audit(AuditKind::session_killed, s, "killed", {{"scope", scope}});
  if (hit.empty()) audit(AuditKind::session_killed, nullptr, "no_match", {{"scope", scope}, {"target", request.id}});
  return static_cast<int>(hit.size());
}

std::vector<ExecutedAction> PermissionEngine::executed() const {
  std::lock_guard lock(mutex_);
  return executed_;
}

}  // namespace ctxk
