#include "ctxk/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ctxk/error.hpp"
#include "ctxk/glob.hpp"

namespace ctxk {

// ---- enum spellings --------------------------------------------------------

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::autonomous: return "autonomous";
    case Tier::soft_approval: return "soft-approval";
    case Tier::strong_approval: return "strong-approval";
    case Tier::excluded: return "excluded";
  }
  return "excluded";
}

std::optional<Tier> parse_tier(std::string_view s) {
  if (s == "autonomous") return Tier::autonomous;
  if (s == "soft-approval") return Tier::soft_approval;
  if (s == "strong-approval") return Tier::strong_approval;
  if (s == "excluded") return Tier::excluded;
  return std::nullopt;
}

std::string_view to_string(SourceType v) {
  switch (v) {
    case SourceType::git_repo: return "git-repo";
    case SourceType::connector: return "connector";
    case SourceType::file_system: return "file-system";
    case SourceType::database: return "database";
  }
  return "file-system";
}

std::string_view to_string(Chunking v) {
  switch (v) {
    case Chunking::none: return "none";
    case Chunking::semantic: return "semantic";
    case Chunking::per_thread: return "per-thread";
    case Chunking::fixed: return "fixed";
  }
  return "none";
}

std::string_view to_string(StaleAction v) {
  switch (v) {
    case StaleAction::re_sync: return "re-sync";
    case StaleAction::flag: return "flag";
    case StaleAction::archive: return "archive";
  }
  return "flag";
}

std::string_view to_string(CrossDomainMode v) {
  return v == CrossDomainMode::brokered ? "brokered" : "denied";
}

std::string_view to_string(Signal v) {
  switch (v) {
    case Signal::semantic_relevance: return "semantic_relevance";
    case Signal::recency: return "recency";
    case Signal::authority: return "authority";
    case Signal::user_relevance: return "user_relevance";
  }
  return "semantic_relevance";
}

std::string_view to_string(IntentParsing v) {
  return v == IntentParsing::rule_based ? "rule-based" : "llm-assisted";
}

namespace {

template <typename E>
std::optional<E> parse_enum(std::string_view s, std::initializer_list<E> values) {
  for (E v : values) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

// ---- accessors -------------------------------------------------------------

[[noreturn]] void schema(const std::string& path, const std::string& detail) {
  throw Error(errc::kSchemaError, detail, path);
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string index(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void expect_map(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) schema(path, "expected a mapping");
}

void expect_seq(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) schema(path, "expected a list");
}

void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<std::string_view> allowed) {
  std::set<std::string> seen;
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema(join(path, key), "unknown field");
    }
    if (!seen.insert(key).second) schema(join(path, key), "duplicate key");
  }
}

std::string scalar(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) schema(path, "expected a scalar");
  return n.Scalar();
}

YAML::Node required(const YAML::Node& parent, const char* key, const std::string& path) {
  const YAML::Node n = parent[key];
  if (!n.IsDefined() || n.IsNull()) schema(join(path, key), "missing required field");
  return n;
}

bool present(const YAML::Node& parent, const char* key) {
  const YAML::Node n = parent[key];
  return n.IsDefined() && !n.IsNull();
}

bool valid_identifier(std::string_view s) {
  if (s.empty() || !std::isalnum(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

std::string identifier(const YAML::Node& n, const std::string& path) {
  auto s = scalar(n, path);
  if (!valid_identifier(s)) schema(path, "invalid identifier '" + s + "'");
  return s;
}

std::string glob(const YAML::Node& n, const std::string& path) {
  auto s = scalar(n, path);
  std::string why;
  if (!valid_glob(s, &why)) schema(path, "invalid glob '" + s + "': " + why);
  return s;
}

Minutes duration(const YAML::Node& n, const std::string& path) {
  const auto s = scalar(n, path);
  const auto d = parse_duration(s);
  if (!d) schema(path, "invalid duration '" + s + "' (expected <n>m|h|d|y, n > 0)");
  return *d;
}

Tier tier(const YAML::Node& n, const std::string& path) {
  const auto s = scalar(n, path);
  const auto t = parse_tier(s);
  if (!t) schema(path, "invalid tier '" + s + "'");
  return *t;
}

template <typename E>
E enum_value(const YAML::Node& n, const std::string& path, std::initializer_list<E> values) {
  const auto s = scalar(n, path);
  const auto v = parse_enum(s, values);
  if (!v) schema(path, "invalid value '" + s + "'");
  return *v;
}

long long integer(const YAML::Node& n, const std::string& path) {
  const auto s = scalar(n, path);
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) schema(path, "expected an integer");
  return v;
}

double number(const YAML::Node& n, const std::string& path) {
  const auto s = scalar(n, path);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) schema(path, "expected a number");
  return v;
}

std::map<std::string, std::string> string_map(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  std::map<std::string, std::string> out;
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!out.emplace(key, scalar(kv.second, join(path, key))).second) schema(join(path, key), "duplicate key");
  }
  return out;
}

std::vector<std::string> glob_list(const YAML::Node& n, const std::string& path) {
  expect_seq(n, path);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(glob(n[i], index(path, i)));
  return out;
}

nlohmann::json to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json obj = nlohmann::json::object();
      for (const auto& kv : n) obj[kv.first.as<std::string>()] = to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& item : n) arr.push_back(to_json(item));
      return arr;
    }
    case YAML::NodeType::Scalar: {
      // Quoted scalars carry the "!" tag and stay strings.
      if (n.Tag() != "!") {
        bool b;
        long long i;
        double d;
        if (YAML::convert<bool>::decode(n, b)) return b;
        if (YAML::convert<long long>::decode(n, i)) return i;
        if (YAML::convert<double>::decode(n, d)) return d;
      }
      return n.Scalar();
    }
    case YAML::NodeType::Null: return nullptr;
    default: return nullptr;
  }
}

// ---- sections --------------------------------------------------------------

Ingestion parse_ingestion(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path, {"chunking", "chunkSize", "ttl", "embedding"});
  Ingestion ing;
  if (present(n, "chunking")) {
    ing.chunking = enum_value(n["chunking"], join(path, "chunking"),
                              {Chunking::none, Chunking::semantic, Chunking::per_thread, Chunking::fixed});
  }
  if (present(n, "chunkSize")) {
    const auto v = integer(n["chunkSize"], join(path, "chunkSize"));
    if (v <= 0) schema(join(path, "chunkSize"), "must be > 0");
    ing.chunk_size = static_cast<int>(v);
  }
  if (present(n, "ttl")) ing.ttl = duration(n["ttl"], join(path, "ttl"));
  if (present(n, "embedding")) ing.embedding = scalar(n["embedding"], join(path, "embedding"));
  return ing;
}

std::vector<SourceSpec> parse_sources(const YAML::Node& n, const std::string& path) {
  expect_seq(n, path);
  if (n.size() == 0) schema(path, "at least one source is required");
  std::vector<SourceSpec> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto p = index(path, i);
    const YAML::Node s = n[i];
    expect_map(s, p);
    check_keys(s, p, {"name", "type", "config", "refresh", "ingestion"});
    SourceSpec src;
    src.name = identifier(required(s, "name", p), join(p, "name"));
    if (!names.insert(src.name).second) schema(join(p, "name"), "duplicate source name '" + src.name + "'");
    src.type = enum_value(required(s, "type", p), join(p, "type"),
                          {SourceType::git_repo, SourceType::connector, SourceType::file_system,
                           SourceType::database});
    if (present(s, "config")) src.config = string_map(s["config"], join(p, "config"));
    src.refresh.realtime = true;
    if (present(s, "refresh")) {
      const auto r = scalar(s["refresh"], join(p, "refresh"));
      if (r != "realtime") {
        src.refresh.realtime = false;
        src.refresh.interval = duration(s["refresh"], join(p, "refresh"));
      }
    }
    if (present(s, "ingestion")) src.ingestion = parse_ingestion(s["ingestion"], join(p, "ingestion"));
    out.push_back(std::move(src));
  }
  return out;
}

AgentPermissions parse_agent_permissions(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path, {"read", "write", "execute"});
  AgentPermissions ap;
  if (present(n, "read")) ap.read = tier(n["read"], join(path, "read"));
  if (present(n, "write")) {
    const YAML::Node w = n["write"];
    const auto wp = join(path, "write");
    if (w.IsScalar()) {
      ap.write_default = tier(w, wp);
    } else {
      expect_map(w, wp);
      check_keys(w, wp, {"default", "paths"});
      if (present(w, "default")) ap.write_default = tier(w["default"], join(wp, "default"));
      if (present(w, "paths")) {
        const YAML::Node paths = w["paths"];
        const auto pp = join(wp, "paths");
        expect_map(paths, pp);
        std::set<std::string> seen;
        for (const auto& kv : paths) {
          const auto key = kv.first.as<std::string>();
          const auto kp = pp + "[\"" + key + "\"]";
          std::string why;
          if (!valid_glob(key, &why)) schema(kp, "invalid glob '" + key + "': " + why);
          if (!seen.insert(key).second) schema(kp, "path appears more than once");
          ap.write_paths.emplace_back(key, tier(kv.second, kp));
        }
      }
    }
  }
  if (present(n, "execute")) {
    const YAML::Node e = n["execute"];
    const auto ep = join(path, "execute");
    expect_map(e, ep);
    for (const auto& kv : e) {
      const auto op = kv.first.as<std::string>();
      if (!valid_identifier(op)) schema(join(ep, op), "invalid operation name");
      if (!ap.execute.emplace(op, tier(kv.second, join(ep, op))).second) schema(join(ep, op), "duplicate key");
    }
  }
  return ap;
}

AccessSpec parse_access(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path, {"roles", "agentPermissions", "crossDomain"});
  AccessSpec access;
  const auto rp = join(path, "roles");
  const YAML::Node roles = required(n, "roles", path);
  expect_seq(roles, rp);
  if (roles.size() == 0) schema(rp, "at least one role is required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    const auto p = index(rp, i);
    const YAML::Node r = roles[i];
    expect_map(r, p);
    check_keys(r, p, {"role", "read", "write"});
    RoleAccess ra;
    ra.role = identifier(required(r, "role", p), join(p, "role"));
    if (!names.insert(ra.role).second) schema(join(p, "role"), "duplicate role '" + ra.role + "'");
    if (present(r, "read")) ra.read = glob_list(r["read"], join(p, "read"));
    if (present(r, "write")) ra.write = glob_list(r["write"], join(p, "write"));
    access.roles.push_back(std::move(ra));
  }
  if (present(n, "agentPermissions")) {
    access.agent = parse_agent_permissions(n["agentPermissions"], join(path, "agentPermissions"));
  }
  if (present(n, "crossDomain")) {
    const auto cp = join(path, "crossDomain");
    const YAML::Node cd = n["crossDomain"];
    expect_seq(cd, cp);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < cd.size(); ++i) {
      const auto p = index(cp, i);
      expect_map(cd[i], p);
      check_keys(cd[i], p, {"domain", "mode"});
      CrossDomainRule rule;
      rule.domain = identifier(required(cd[i], "domain", p), join(p, "domain"));
      if (!seen.insert(rule.domain).second) schema(join(p, "domain"), "duplicate crossDomain target");
      rule.mode = enum_value(required(cd[i], "mode", p), join(p, "mode"),
                             {CrossDomainMode::brokered, CrossDomainMode::denied});
      access.cross_domain.push_back(std::move(rule));
    }
  }
  return access;
}

FreshnessPolicy parse_policy(const YAML::Node& n, const std::string& path, const FreshnessPolicy& base) {
  FreshnessPolicy p = base;
  if (present(n, "maxAge")) p.max_age = duration(n["maxAge"], join(path, "maxAge"));
  if (present(n, "staleAction")) {
    p.stale_action = enum_value(n["staleAction"], join(path, "staleAction"),
                                {StaleAction::re_sync, StaleAction::flag, StaleAction::archive});
  }
  return p;
}

FreshnessPolicySpec parse_freshness(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path, {"defaults", "overrides"});
  FreshnessPolicySpec f;
  if (present(n, "defaults")) {
    const auto dp = join(path, "defaults");
    expect_map(n["defaults"], dp);
    check_keys(n["defaults"], dp, {"maxAge", "staleAction"});
    f.defaults = parse_policy(n["defaults"], dp, f.defaults);
  }
  if (present(n, "overrides")) {
    const auto op = join(path, "overrides");
    const YAML::Node ov = n["overrides"];
    expect_seq(ov, op);
    for (std::size_t i = 0; i < ov.size(); ++i) {
      const auto p = index(op, i);
      expect_map(ov[i], p);
      check_keys(ov[i], p, {"path", "maxAge", "staleAction"});
      FreshnessOverride o;
      o.path = glob(required(ov[i], "path", p), join(p, "path"));
      o.policy = parse_policy(ov[i], p, f.defaults);
      f.overrides.push_back(std::move(o));
    }
  }
  return f;
}

std::string format_weight_sum(double sum) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", sum);
  return buf;
}

RoutingSpec parse_routing(const YAML::Node& n, const std::string& path) {
  expect_map(n, path);
  check_keys(n, path, {"intentParsing", "tokenBudget", "priority"});
  RoutingSpec r;
  if (present(n, "intentParsing")) {
    r.intent_parsing = enum_value(n["intentParsing"], join(path, "intentParsing"),
                                  {IntentParsing::rule_based, IntentParsing::llm_assisted});
  }
  if (present(n, "tokenBudget")) {
    const auto b = integer(n["tokenBudget"], join(path, "tokenBudget"));
    if (b <= 0 || b > 100'000'000) schema(join(path, "tokenBudget"), "must be a positive token count");
    r.token_budget = static_cast<int>(b);
  }
  if (present(n, "priority")) {
    const auto pp = join(path, "priority");
    const YAML::Node pr = n["priority"];
    expect_seq(pr, pp);
    r.priority.clear();
    std::set<Signal> seen;
    double sum = 0.0;
    for (std::size_t i = 0; i < pr.size(); ++i) {
      const auto p = index(pp, i);
      expect_map(pr[i], p);
      check_keys(pr[i], p, {"signal", "weight"});
      SignalWeight sw;
      sw.signal = enum_value(required(pr[i], "signal", p), join(p, "signal"),
                             {Signal::semantic_relevance, Signal::recency, Signal::authority,
                              Signal::user_relevance});
      if (!seen.insert(sw.signal).second) schema(join(p, "signal"), "signal listed more than once");
      sw.weight = number(required(pr[i], "weight", p), join(p, "weight"));
      if (sw.weight < 0.0 || sw.weight > 1.0) schema(join(p, "weight"), "weight must lie in [0,1]");
      sum += sw.weight;
      r.priority.push_back(sw);
    }
    if (seen.size() != 4) schema(pp, "all four signals must be listed exactly once");
    if (std::abs(sum - 1.0) > 1e-9) schema(pp, "weights sum to " + format_weight_sum(sum));
  }
  return r;
}

DomainManifest parse_document(const YAML::Node& doc) {
  expect_map(doc, "");
  check_keys(doc, "", {"apiVersion", "kind", "metadata", "spec"});
  DomainManifest m;
  m.api_version = scalar(required(doc, "apiVersion", ""), "apiVersion");
  if (m.api_version != kApiVersion) schema("apiVersion", "must equal \"context/v1\"");
  m.kind = scalar(required(doc, "kind", ""), "kind");
  if (m.kind != kKind) schema("kind", "must equal \"ContextDomain\"");

  const YAML::Node meta = required(doc, "metadata", "");
  expect_map(meta, "metadata");
  check_keys(meta, "metadata", {"name", "namespace", "labels"});
  m.name = identifier(required(meta, "name", "metadata"), "metadata.name");
  if (present(meta, "namespace")) m.ns = identifier(meta["namespace"], "metadata.namespace");
  if (present(meta, "labels")) m.labels = string_map(meta["labels"], "metadata.labels");

  const YAML::Node spec = required(doc, "spec", "");
  expect_map(spec, "spec");
  check_keys(spec, "spec", {"sources", "access", "freshness", "routing", "operator", "trust", "reliability"});
  m.sources = parse_sources(required(spec, "sources", ""), "sources");
  m.access = parse_access(required(spec, "access", ""), "access");
  if (present(spec, "freshness")) m.freshness = parse_freshness(spec["freshness"], "freshness");
  if (present(spec, "routing")) m.routing = parse_routing(spec["routing"], "routing");
  if (present(spec, "operator")) m.operator_section = to_json(spec["operator"]);
  if (present(spec, "trust")) m.trust = to_json(spec["trust"]);
  if (present(spec, "reliability")) m.reliability = to_json(spec["reliability"]);
  return m;
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const YAML::ParserException& e) {
    throw Error(errc::kSyntaxError, e.what());
  } catch (const YAML::Exception& e) {
    throw Error(errc::kSchemaError, e.what());
  }
}

// ---- emitter ---------------------------------------------------------------

void emit_json(YAML::Emitter& out, const nlohmann::json& j) {
  if (j.is_object()) {
    out << YAML::BeginMap;
    for (const auto& [k, v] : j.items()) {
      out << YAML::Key << k << YAML::Value;
      emit_json(out, v);
    }
    out << YAML::EndMap;
  } else if (j.is_array()) {
    out << YAML::BeginSeq;
    for (const auto& v : j) emit_json(out, v);
    out << YAML::EndSeq;
  } else if (j.is_string()) {
    out << YAML::DoubleQuoted << j.get<std::string>();
  } else if (j.is_null()) {
    out << YAML::Null;
  } else {
    out << j.dump();
  }
}

std::string weight_literal(double w) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", w);
  return buf;
}

}  // namespace

// ---- lookups ---------------------------------------------------------------

Tier AgentPermissions::write_tier(std::string_view path) const {
  for (const auto& [pattern, t] : write_paths) {
    if (glob_match(pattern, path)) return t;
  }
  return write_default;
}

const RoleAccess* AccessSpec::role(std::string_view name) const {
  for (const auto& r : roles) {
    if (r.role == name) return &r;
  }
  return nullptr;
}

std::optional<CrossDomainMode> AccessSpec::cross_domain_mode(std::string_view domain) const {
  for (const auto& r : cross_domain) {
    if (r.domain == domain) return r.mode;
  }
  return std::nullopt;
}

const FreshnessPolicy& FreshnessPolicySpec::policy_for(std::string_view path) const {
  for (const auto& o : overrides) {
    if (glob_match(o.path, path)) return o.policy;
  }
  return defaults;
}

double RoutingSpec::weight(Signal s) const {
  for (const auto& sw : priority) {
    if (sw.signal == s) return sw.weight;
  }
  return 0.0;
}

const SourceSpec* DomainManifest::source(std::string_view n) const {
  for (const auto& s : sources) {
    if (s.name == n) return &s;
  }
  return nullptr;
}

std::vector<std::string> DomainManifest::role_names() const {
  std::vector<std::string> out;
  for (const auto& r : access.roles) out.push_back(r.role);
  return out;
}

// ---- entry points ----------------------------------------------------------

DomainManifest parse_manifest(std::string_view yaml) {
  return guarded([&] {
    const YAML::Node doc = YAML::Load(std::string(yaml));
    if (!doc.IsDefined() || doc.IsNull()) schema("", "empty document");
    return parse_document(doc);
  });
}

std::vector<DomainManifest> parse_manifests(std::string_view yaml) {
  return guarded([&] {
    std::vector<DomainManifest> out;
    for (const auto& doc : YAML::LoadAll(std::string(yaml))) {
      if (!doc.IsDefined() || doc.IsNull()) continue;
      out.push_back(parse_document(doc));
    }
    return out;
  });
}

std::vector<DomainManifest> load_manifest_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(errc::kSchemaError, "cannot read manifest file", file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_manifests(ss.str());
  } catch (const Error& e) {
    // Prefix the file so multi-file loads stay attributable.
    throw Error(e.code(), e.detail(), file.filename().string() + (e.path().empty() ? "" : ":" + e.path()));
  }
}

std::vector<DomainManifest> load_manifest_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".yaml" || ext == ".yml")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<DomainManifest> out;
  for (const auto& f : files) {
    auto ms = load_manifest_file(f);
    out.insert(out.end(), std::make_move_iterator(ms.begin()), std::make_move_iterator(ms.end()));
  }
  return out;
}

std::string serialize_manifest(const DomainManifest& m) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "apiVersion" << YAML::Value << m.api_version;
  out << YAML::Key << "kind" << YAML::Value << m.kind;
  out << YAML::Key << "metadata" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << m.name;
  out << YAML::Key << "namespace" << YAML::Value << m.ns;
  if (!m.labels.empty()) {
    out << YAML::Key << "labels" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : m.labels) out << YAML::Key << k << YAML::Value << YAML::DoubleQuoted << v;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "spec" << YAML::Value << YAML::BeginMap;

  out << YAML::Key << "sources" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : m.sources) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << s.name;
    out << YAML::Key << "type" << YAML::Value << std::string(to_string(s.type));
    if (!s.config.empty()) {
      out << YAML::Key << "config" << YAML::Value << YAML::BeginMap;
      for (const auto& [k, v] : s.config) out << YAML::Key << k << YAML::Value << YAML::DoubleQuoted << v;
      out << YAML::EndMap;
    }
    out << YAML::Key << "refresh" << YAML::Value
        << (s.refresh.realtime ? std::string("realtime") : format_duration(s.refresh.interval));
    if (s.ingestion) {
      out << YAML::Key << "ingestion" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "chunking" << YAML::Value << std::string(to_string(s.ingestion->chunking));
      if (s.ingestion->chunk_size) out << YAML::Key << "chunkSize" << YAML::Value << *s.ingestion->chunk_size;
      if (s.ingestion->ttl) out << YAML::Key << "ttl" << YAML::Value << format_duration(*s.ingestion->ttl);
      if (s.ingestion->embedding) {
        out << YAML::Key << "embedding" << YAML::Value << YAML::DoubleQuoted << *s.ingestion->embedding;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "access" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "roles" << YAML::Value << YAML::BeginSeq;
  for (const auto& r : m.access.roles) {
    out << YAML::BeginMap << YAML::Key << "role" << YAML::Value << r.role;
    out << YAML::Key << "read" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& g : r.read) out << YAML::DoubleQuoted << g;
    out << YAML::EndSeq;
    out << YAML::Key << "write" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& g : r.write) out << YAML::DoubleQuoted << g;
    out << YAML::EndSeq << YAML::EndMap;
  }
  out << YAML::EndSeq;
  const auto& ap = m.access.agent;
  out << YAML::Key << "agentPermissions" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "read" << YAML::Value << std::string(to_string(ap.read));
  out << YAML::Key << "write" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "default" << YAML::Value << std::string(to_string(ap.write_default));
  if (!ap.write_paths.empty()) {
    out << YAML::Key << "paths" << YAML::Value << YAML::BeginMap;
    for (const auto& [g, t] : ap.write_paths) {
      out << YAML::Key << YAML::DoubleQuoted << g << YAML::Value << std::string(to_string(t));
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  if (!ap.execute.empty()) {
    out << YAML::Key << "execute" << YAML::Value << YAML::BeginMap;
    for (const auto& [op, t] : ap.execute) out << YAML::Key << op << YAML::Value << std::string(to_string(t));
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  if (!m.access.cross_domain.empty()) {
    out << YAML::Key << "crossDomain" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : m.access.cross_domain) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "domain" << YAML::Value << c.domain << YAML::Key
          << "mode" << YAML::Value << std::string(to_string(c.mode)) << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;

  out << YAML::Key << "freshness" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "defaults" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "maxAge"
      << YAML::Value << format_duration(m.freshness.defaults.max_age) << YAML::Key << "staleAction"
      << YAML::Value << std::string(to_string(m.freshness.defaults.stale_action)) << YAML::EndMap;
  if (!m.freshness.overrides.empty()) {
    out << YAML::Key << "overrides" << YAML::Value << YAML::BeginSeq;
    for (const auto& o : m.freshness.overrides) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << o.path
          << YAML::Key << "maxAge" << YAML::Value << format_duration(o.policy.max_age) << YAML::Key
          << "staleAction" << YAML::Value << std::string(to_string(o.policy.stale_action)) << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;

  out << YAML::Key << "routing" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "intentParsing" << YAML::Value << std::string(to_string(m.routing.intent_parsing));
  out << YAML::Key << "tokenBudget" << YAML::Value << m.routing.token_budget;
  out << YAML::Key << "priority" << YAML::Value << YAML::BeginSeq;
  for (const auto& sw : m.routing.priority) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "signal" << YAML::Value
        << std::string(to_string(sw.signal)) << YAML::Key << "weight" << YAML::Value
        << weight_literal(sw.weight) << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;

  if (!m.operator_section.is_null()) {
    out << YAML::Key << "operator" << YAML::Value;
    emit_json(out, m.operator_section);
  }
  if (!m.trust.is_null()) {
    out << YAML::Key << "trust" << YAML::Value;
    emit_json(out, m.trust);
  }
  if (!m.reliability.is_null()) {
    out << YAML::Key << "reliability" << YAML::Value;
    emit_json(out, m.reliability);
  }
  out << YAML::EndMap;  // spec
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::vector<Violation> validate_cross_references(std::span<const DomainManifest> manifests) {
  std::vector<Violation> out;
  std::set<std::string> names;
  std::set<std::string> reported;
  for (const auto& m : manifests) {
    if (!names.insert(m.name).second && reported.insert(m.name).second) {
      out.push_back({"duplicate domain name " + m.name});
    }
  }
  for (const auto& m : manifests) {
    for (const auto& rule : m.access.cross_domain) {
      if (!names.count(rule.domain)) {
        out.push_back({m.name + ": crossDomain target " + rule.domain + " not found"});
      }
    }
  }
  return out;
}

}  // namespace ctxk

namespace ctxk {

void resolve_source_roots(std::vector<DomainManifest>& manifests, const std::filesystem::path& base) {
  for (auto& m : manifests) {
    for (auto& s : m.sources) {
      for (const char* key : {"root", "repo"}) {
        auto it = s.config.find(key);
        if (it == s.config.end() || it->second.empty()) continue;
        std::filesystem::path p(it->second);
        if (p.is_relative()) it->second = (base / p).lexically_normal().string();
      }
    }
  }
}

}  // namespace ctxk
