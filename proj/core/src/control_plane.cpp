#include "ctxk/control_plane.hpp"

#include <fstream>

#include "ctxk/error.hpp"

namespace ctxk {

namespace {

std::map<std::string, Tier> parse_tiers(const nlohmann::json& j, const std::string& where) {
  std::map<std::string, Tier> out;
  if (j.is_null()) return out;
  for (const auto& [op, v] : j.items()) {
    auto t = v.is_string() ? parse_tier(v.get<std::string>()) : std::nullopt;
    if (!t) throw Error(errc::kSchemaError, "bad tier", where + ".tiers." + op);
    out[op] = *t;
  }
  return out;
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

nlohmann::ordered_json tiers_json(const std::map<std::string, Tier>& tiers) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [op, t] : tiers) j[op] = to_string(t);
  return j;
}

}  // namespace

OrgSpec OrgSpec::from_json(const nlohmann::json& j) {
  OrgSpec org;
  try {
    for (const auto& r : j.at("roles")) {
      UserRole role;
      role.role = r.at("role").get<std::string>();
      role.read_paths = get_or<std::vector<std::string>>(r, "read", {});
      role.write_paths = get_or<std::vector<std::string>>(r, "write", {});
      role.operations = r.at("operations").get<std::set<std::string>>();
      role.tier_of = parse_tiers(r.value("tiers", nlohmann::json()), "roles." + role.role);
      org.roles.push_back(std::move(role));
    }
    for (const auto& u : j.at("users")) {
      org.users.push_back(OrgUser{u.at("user").get<std::string>(), u.at("role").get<std::string>(),
                                  get_or<std::vector<std::string>>(u, "assigned", {}),
                                  get_or<std::string>(u, "home_domain", "")});
    }
    for (const auto& a : j.value("agents", nlohmann::json::array())) {
      AgentProfile p;
      p.agent_id = a.at("agent_id").get<std::string>();
      p.user = a.at("user").get<std::string>();
      p.role = a.at("role").get<std::string>();
      p.operations = a.at("operations").get<std::set<std::string>>();
      p.tier_of = parse_tiers(a.value("tiers", nlohmann::json()), "agents." + p.agent_id);
      p.excluded = get_or<std::set<std::string>>(a, "excluded", {});
      org.agents.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kSchemaError, e.what(), "org");
  }
  return org;
}

OrgSpec OrgSpec::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(errc::kNotFound, "cannot read " + file.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(errc::kSyntaxError, e.what(), file.string());
  }
}

nlohmann::ordered_json OrgSpec::to_json() const {
  nlohmann::ordered_json j;
  j["roles"] = nlohmann::ordered_json::array();
  for (const auto& r : roles) {
    j["roles"].push_back({{"role", r.role},
                          {"read", r.read_paths},
                          {"write", r.write_paths},
                          {"operations", r.operations},
                          {"tiers", tiers_json(r.tier_of)}});
  }
  j["users"] = nlohmann::ordered_json::array();
  for (const auto& u : users) {
    j["users"].push_back(
        {{"user", u.user}, {"role", u.role}, {"assigned", u.assigned}, {"home_domain", u.home_domain}});
  }
  j["agents"] = nlohmann::ordered_json::array();
  for (const auto& a : agents) {
    j["agents"].push_back({{"agent_id", a.agent_id},
                           {"user", a.user},
                           {"role", a.role},
                           {"operations", a.operations},
                           {"tiers", tiers_json(a.tier_of)},
                           {"excluded", a.excluded}});
  }
  return j;
}

const OrgUser* OrgSpec::user(std::string_view name) const {
  for (const auto& u : users) {
    if (u.user == name) return &u;
  }
  return nullptr;
}

const AgentProfile* OrgSpec::agent_for(std::string_view user) const {
  for (const auto& a : agents) {
    if (a.user == user) return &a;
  }
  return nullptr;
}

ControlPlane::ControlPlane(ControlPlaneConfig config, const Clock& clock) : clock_(clock), org_(config.org) {
  const auto violations = validate_cross_references(config.manifests);
  if (!violations.empty()) throw Error(errc::kSchemaError, violations.front().message, "crossDomain");

  audit_ = std::make_unique<AuditLog>(clock_);
  if (config.audit_file) audit_->set_sink(std::make_unique<JsonlFileSink>(*config.audit_file));
  audit_->set_mirror(config.audit_mirror);
  registry_ = std::make_unique<Registry>(config.failure_threshold);
  engine_ = std::make_unique<PermissionEngine>(*audit_, clock_, config.mode);
  router_ = std::make_unique<Router>(std::move(config.taxonomy), *registry_, *engine_, *audit_, clock_);
  router_->set_options(config.route);
  router_->set_known_entities(config.known_entities);
  reconciler_ = std::make_unique<Reconciler>(*registry_, *engine_, *audit_, clock_, config.connect);

  for (const auto& m : config.manifests) {
    registry_->register_domain(m);
    engine_->install_access(m.name, m.access);
  }
  for (const auto& r : org_.roles) engine_->register_role(r);
  for (const auto& u : org_.users) engine_->register_user(u.user, u.role);
  for (const auto& a : org_.agents) engine_->register_agent_profile(a);

  engine_->set_executor([this](const ExecutedAction& a) {
    if (a.operation != kWriteContext) return;
    const auto domain = a.payload.value("domain", std::string());
    auto source = a.payload.value("source", std::string());
    if (source.empty()) {
      auto m = registry_->domain(domain);
      if (!m) throw Error(errc::kUnknownDomain, domain);
      for (const auto& s : m->sources) {
        if (s.type == SourceType::file_system || s.type == SourceType::git_repo) {
          source = s.name;
          break;
        }
      }
      if (source.empty() && !m->sources.empty()) source = m->sources.front().name;
    }
    reconciler_->write_through(source_id(domain, source), a.payload.value("path", std::string()),
                               a.payload.value("content", std::string()));
  });

  if (config.ingest) reconciler_->ingest_all();
}

void ControlPlane::apply_manifest(const DomainManifest& m) {
  auto all = registry_->domains();
  bool replaced = false;
  for (auto& d : all) {
    if (d.name == m.name) {
      d = m;
      replaced = true;
    }
  }
  if (!replaced) all.push_back(m);
  const auto violations = validate_cross_references(all);
  if (!violations.empty()) throw Error(errc::kSchemaError, violations.front().message, "crossDomain");
  if (replaced) {
    registry_->update_domain(m);
  } else {
    registry_->register_domain(m);
  }
}

Session ControlPlane::open_session(const std::string& user) {
  const OrgUser* u = org_.user(user);
  if (!u) throw Error(errc::kUnknownRole, "user " + user + " is not in the organisation");
  const AgentProfile* a = org_.agent_for(user);
  const std::string agent = a ? a->agent_id : user + "-agent";
  return engine_->create_session(u->user, agent, u->role, u->assigned, u->home_domain);
}

}  // namespace ctxk
