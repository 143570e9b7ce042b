#include "ctxk/api.hpp"

#include <vector>

namespace ctxk {

namespace {

using ojson = nlohmann::ordered_json;

std::vector<std::string> segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < path.size()) {
    auto end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    if (end > start) out.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

ApiResponse json_response(int status, const ojson& j) { return {status, j.dump()}; }

nlohmann::json parse_body(const ApiRequest& req) {
  if (req.body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(errc::kBadRequest, "body must be a JSON object");
  return j;
}

std::string require_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw Error(errc::kBadRequest, std::string("missing string field ") + key, key);
  }
  return it->get<std::string>();
}

std::string bearer(const ApiRequest& req) {
  auto it = req.headers.find("authorization");
  if (it == req.headers.end()) return {};
  constexpr std::string_view kPrefix = "Bearer ";
  if (it->second.rfind(kPrefix, 0) != 0) return {};
  return it->second.substr(kPrefix.size());
}

AuditFilter audit_filter(const ApiRequest& req) {
  AuditFilter f;
  if (auto it = req.query.find("session"); it != req.query.end()) f.session_id = it->second;
  if (auto it = req.query.find("user"); it != req.query.end()) f.user = it->second;
  if (auto it = req.query.find("kind"); it != req.query.end()) {
    f.kind = parse_audit_kind(it->second);
    if (!f.kind) throw Error(errc::kBadRequest, "unknown audit kind " + it->second, "kind");
  }
  auto instant = [&](const char* key, std::optional<Instant>& out) {
    if (auto it = req.query.find(key); it != req.query.end()) {
      out = parse_rfc3339(it->second);
      if (!out) throw Error(errc::kBadRequest, "bad instant", key);
    }
  };
  instant("from", f.from);
  instant("to", f.to);
  return f;
}

ojson events_json(const std::vector<AuditEvent>& events) {
  ojson arr = ojson::array();
  for (const auto& e : events) arr.push_back(to_json(e));
  return ojson{{"events", std::move(arr)}};
}

ojson session_json(const Session& s, bool with_token) {
  ojson j;
  j["session_id"] = s.id;
  if (with_token) j["token"] = s.token;
  j["user"] = s.user;
  j["agent_id"] = s.agent_id;
  j["role"] = s.role;
  j["assigned"] = s.assigned;
  j["home_domain"] = s.home_domain;
  j["state"] = s.live() ? "live" : "killed";
  j["created_at"] = format_rfc3339(s.created_at);
  return j;
}

ojson health_json(ControlPlane& plane) {
  ojson j;
  j["status"] = "ok";
  j["engine"] = plane.engine().available() ? "up" : "down";
  j["domains"] = plane.registry().list_domains();
  j["domain_count"] = plane.registry().list_domains().size();
  j["sources"] = ojson::array();
  for (const auto& s : plane.registry().list_sources()) {
    ojson src{{"source", s.source},
              {"status", to_string(s.status)},
              {"consecutive_failures", s.consecutive_failures}};
    if (s.last_success) src["last_success"] = format_rfc3339(*s.last_success);
    j["sources"].push_back(std::move(src));
  }
  j["reconcile_cycles"] = plane.reconciler().cycles();
  return j;
}

ojson outcome_json(const ActionOutcome& o) {
  ojson j;
  j["status"] = to_string(o.status);
  j["tier"] = to_string(o.tier);
  if (o.approval_id) j["approval_id"] = *o.approval_id;
  if (!o.reason.empty()) j["reason"] = o.reason;
  return j;
}

ojson resolution_json(const Resolution& r) {
  return ojson{{"approval_id", r.approval_id}, {"state", to_string(r.state)}, {"executed", r.executed}};
}

}  // namespace

int http_status_for(std::string_view code) {
  if (code == errc::kBadRequest || code == errc::kSchemaError || code == errc::kSyntaxError ||
      code == errc::kInvalidUnit || code == errc::kUnknownRole || code == errc::kUnknownAgent ||
      code == errc::kSupersetViolation || code == errc::kEqualSetViolation || code == errc::kTierViolation) {
    return 400;
  }
  if (code == errc::kUnauthorized) return 401;
  if (code == errc::kSessionKilled || code == errc::kWrongChannel || code == errc::kWrongOtp) return 403;
  if (code == errc::kNotFound || code == errc::kUnknownSession || code == errc::kUnknownApproval ||
      code == errc::kUnknownDomain || code == errc::kUnknownSource) {
    return 404;
  }
  if (code == errc::kWrongTier || code == errc::kNotPending || code == errc::kReplay || code == errc::kExpired ||
      code == errc::kDuplicateDomain) {
    return 409;
  }
  if (code == errc::kPermissionEngineUnavailable || code == errc::kAuditFailure) return 503;
  return 500;
}

nlohmann::ordered_json error_body(const Error& e) {
  ojson j;
  j["error"] = e.code();
  if (!e.path().empty()) j["path"] = e.path();
  j["detail"] = e.detail();
  return j;
}

ContextApi::ContextApi(ControlPlane& plane, std::string admin_credential)
    : plane_(plane), admin_credential_(std::move(admin_credential)) {}

ApiResponse ContextApi::handle_agent(const ApiRequest& req) {
  ApiResponse res;
  try {
    res = dispatch_agent(req);
  } catch (const Error& e) {
    res = json_response(http_status_for(e.code()), error_body(e));
  } catch (const std::exception& e) {
    res = json_response(500, error_body(Error("InternalError", e.what())));
  }
  if (observer_) observer_(Surface::agent, req, res);
  return res;
}

ApiResponse ContextApi::handle_admin(const ApiRequest& req) {
  ApiResponse res;
  try {
    const auto cred = bearer(req);
    if (admin_credential_.empty() || cred.size() != admin_credential_.size() || cred != admin_credential_) {
      throw Error(errc::kUnauthorized, "admin credential required");
    }
    res = dispatch_admin(req);
  } catch (const Error& e) {
    res = json_response(http_status_for(e.code()), error_body(e));
  } catch (const std::exception& e) {
    res = json_response(500, error_body(Error("InternalError", e.what())));
  }
  if (observer_) observer_(Surface::admin, req, res);
  return res;
}

ApiResponse ContextApi::dispatch_agent(const ApiRequest& req) {
  const auto seg = segments(req.path);
  auto& engine = plane_.engine();
  auto caller = [&]() {
    auto s = engine.session_by_token(bearer(req));
    if (!s) throw Error(errc::kUnauthorized, "session token required");
    return *s;
  };
  auto own_session = [&](const nlohmann::json& body) {
    const Session s = caller();
    if (require_string(body, "session_id") != s.id) throw Error(errc::kUnauthorized, "token does not match session");
    return s;
  };

  if (seg.size() < 2 || seg[0] != "v1") throw Error(errc::kNotFound, "no route " + req.path);

  if (seg[1] == "health" && seg.size() == 2 && req.method == "GET") return json_response(200, health_json(plane_));

  if (seg[1] == "sessions") {
    if (seg.size() == 2 && req.method == "POST") {
      const auto body = parse_body(req);
      std::vector<std::string> assigned;
      std::string home;
      if (auto sc = body.find("scope"); sc != body.end() && sc->is_object()) {
        if (auto a = sc->find("assigned"); a != sc->end()) assigned = a->get<std::vector<std::string>>();
        if (auto h = sc->find("home_domain"); h != sc->end() && h->is_string()) home = h->get<std::string>();
      }
      const auto user = require_string(body, "user");
      if (home.empty()) {
        if (const auto* u = plane_.org().user(user)) home = u->home_domain;
      }
      const auto s = engine.create_session(user, require_string(body, "agent_id"), require_string(body, "role"),
                                           std::move(assigned), home);
      return json_response(201, session_json(s, true));
    }
    if (seg.size() == 3 && req.method == "DELETE") {
      const Session s = caller();
      if (s.id != seg[2]) throw Error(errc::kUnauthorized, "token does not match session");
      engine.end_session(s.id);
      return json_response(200, ojson{{"session_id", s.id}, {"state", "ended"}});
    }
  }

  if (seg[1] == "context" && seg.size() == 3 && seg[2] == "request" && req.method == "POST") {
    const auto body = parse_body(req);
    const Session s = own_session(body);
    auto d = plane_.router().route(s.id, require_string(body, "query"));
    auto j = to_json(d);
    return json_response(200, j);
  }

  if (seg[1] == "actions" && seg.size() == 2 && req.method == "POST") {
    const auto body = parse_body(req);
    const Session s = own_session(body);
    const auto payload = body.value("payload", nlohmann::json::object());
    const auto out = engine.submit_action(s.id, require_string(body, "operation"), payload);
    const int status = out.status == ActionStatus::executed ? 200 : out.status == ActionStatus::pending ? 202 : 403;
    return json_response(status, outcome_json(out));
  }

  if (seg[1] == "approvals" && seg.size() >= 3) {
    const Session s = caller();
    const auto a = engine.approval(seg[2]);
    const auto owner = a ? engine.session(a->session_id) : std::nullopt;
    if (!a || !owner || owner->user != s.user) throw Error(errc::kUnknownApproval, "approval " + seg[2]);
    if (seg.size() == 3 && req.method == "GET") return json_response(200, to_json(*a));
    if (seg.size() == 4 && seg[3] == "soft" && req.method == "POST") {
      if (!s.live()) throw Error(errc::kSessionKilled, "session " + s.id + " is killed");
      const auto body = parse_body(req);
      const auto decision = require_string(body, "decision");
      if (decision != "approve" && decision != "reject") throw Error(errc::kBadRequest, "decision", "decision");
      return json_response(200, resolution_json(engine.resolve_soft(seg[2], decision == "approve", s.user)));
    }
  }

  if (seg[1] == "audit" && seg.size() == 2 && req.method == "GET") {
    const Session s = caller();
    AuditFilter f = audit_filter(req);
    f.session_id = s.id;
    return json_response(200, events_json(plane_.audit().query(f)));
  }

  throw Error(errc::kNotFound, "no route " + req.method + " " + req.path);
}

ApiResponse ContextApi::dispatch_admin(const ApiRequest& req) {
  const auto seg = segments(req.path);
  auto& engine = plane_.engine();
  if (seg.size() < 3 || seg[0] != "admin" || seg[1] != "v1") throw Error(errc::kNotFound, "no route " + req.path);
  const auto& what = seg[2];

  if (what == "approvals" && seg.size() == 5 && seg[4] == "strong" && req.method == "POST") {
    const auto body = parse_body(req);
    return json_response(200,
                         resolution_json(engine.resolve_strong(seg[3], require_string(body, "otp"), Channel::out_of_band)));
  }
  if (what == "killswitch" && seg.size() == 3 && req.method == "POST") {
    const auto body = parse_body(req);
    const auto scope = require_string(body, "scope");
    KillRequest k;
    if (scope == "global" || scope == "all") {
      k.scope = KillScope::global;
    } else if (scope == "session" || scope == "user") {
      k.scope = scope == "session" ? KillScope::session : KillScope::user;
      k.id = require_string(body, "id");
    } else {
      throw Error(errc::kBadRequest, "scope must be session, user or global", "scope");
    }
    return json_response(200, ojson{{"killed", engine.kill_switch(k)}});
  }
  if (what == "otp" && seg.size() == 4 && req.method == "GET") {
    const auto rec = engine.out_of_band_read(seg[3]);
    if (!rec) throw Error(errc::kUnknownApproval, "no OTP for " + seg[3]);
    return json_response(
        200, ojson{{"approval_id", rec->approval_id}, {"otp", rec->otp}, {"issued_at", format_rfc3339(rec->issued_at)}});
  }
  if (what == "manifests" && seg.size() == 3 && req.method == "POST") {
    const auto manifests = parse_manifests(req.body);
    ojson applied = ojson::array();
    for (const auto& m : manifests) {
      plane_.apply_manifest(m);
      applied.push_back(m.name);
    }
    return json_response(200, ojson{{"applied", std::move(applied)}});
  }
  if (what == "domains" && seg.size() == 3 && req.method == "GET") {
    ojson arr = ojson::array();
    for (const auto& m : plane_.registry().domains()) {
      ojson sources = ojson::array();
      for (const auto& s : m.sources) sources.push_back(source_id(m.name, s.name));
      arr.push_back({{"name", m.name}, {"namespace", m.ns}, {"roles", m.role_names()}, {"sources", sources}});
    }
    return json_response(200, ojson{{"domains", std::move(arr)}});
  }
  if (what == "sources" && seg.size() == 3 && req.method == "GET") return json_response(200, health_json(plane_));
  if (what == "sessions" && seg.size() == 3 && req.method == "GET") {
    ojson arr = ojson::array();
    for (const auto& s : engine.sessions()) arr.push_back(session_json(s, false));
    return json_response(200, ojson{{"sessions", std::move(arr)}});
  }
  if (what == "reconcile" && seg.size() == 3 && req.method == "POST") {
    return json_response(200, to_json(plane_.reconciler().reconcile_once()));
  }
  if (what == "audit" && seg.size() == 3 && req.method == "GET") {
    return json_response(200, events_json(plane_.audit().query(audit_filter(req))));
  }
  if (what == "health" && seg.size() == 3 && req.method == "GET") return json_response(200, health_json(plane_));
  throw Error(errc::kNotFound, "no route " + req.method + " " + req.path);
}

}  // namespace ctxk
