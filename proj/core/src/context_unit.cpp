#include "ctxk/context_unit.hpp"

#include "ctxk/error.hpp"

namespace ctxk {

std::string_view to_string(UnitType t) {
  switch (t) {
    case UnitType::unstructured: return "unstructured";
    case UnitType::structured: return "structured";
    case UnitType::hybrid: return "hybrid";
  }
  return "unstructured";
}

std::string_view to_string(Sensitivity s) {
  switch (s) {
    case Sensitivity::public_: return "public";
    case Sensitivity::internal: return "internal";
    case Sensitivity::confidential: return "confidential";
  }
  return "internal";
}

UnitType parse_unit_type(std::string_view s) {
  if (s == "structured") return UnitType::structured;
  if (s == "hybrid") return UnitType::hybrid;
  if (s == "unstructured") return UnitType::unstructured;
  throw Error(errc::kInvalidUnit, "unknown unit type '" + std::string(s) + "'");
}

Sensitivity parse_sensitivity(std::string_view s) {
  if (s == "public") return Sensitivity::public_;
  if (s == "internal") return Sensitivity::internal;
  if (s == "confidential") return Sensitivity::confidential;
  throw Error(errc::kInvalidUnit, "unknown sensitivity '" + std::string(s) + "'");
}

std::string unit_id(std::string_view source, std::string_view path) {
  std::string id(source);
  id += ':';
  id += path;
  return id;
}

std::string source_id(std::string_view domain, std::string_view source_name) {
  std::string id(domain);
  id += '/';
  id += source_name;
  return id;
}

nlohmann::ordered_json to_json(const ContextUnit& u) {
  nlohmann::ordered_json meta;
  meta["author"] = u.metadata.author;
  meta["timestamp"] = format_rfc3339(u.metadata.timestamp);
  meta["domain"] = u.metadata.domain;
  meta["sensitivity"] = to_string(u.metadata.sensitivity);
  meta["entities"] = u.metadata.entities;
  meta["source"] = u.metadata.source;
  meta["path"] = u.metadata.path;
  meta["authority"] = u.metadata.authority;

  nlohmann::ordered_json j;
  j["id"] = u.id;
  j["content"] = u.content;
  j["unit_type"] = to_string(u.unit_type);
  j["metadata"] = std::move(meta);
  j["version"] = u.version;
  j["vector"] = u.vector;
  j["authorized_roles"] = u.authorized_roles;
  return j;
}

ContextUnit unit_from_json(const nlohmann::ordered_json& j) {
  try {
    ContextUnit u;
    u.id = j.at("id").get<std::string>();
    u.content = j.at("content").get<std::string>();
    u.unit_type = parse_unit_type(j.at("unit_type").get<std::string>());
    const auto& m = j.at("metadata");
    u.metadata.author = m.at("author").get<std::string>();
    const auto ts = parse_rfc3339(m.at("timestamp").get<std::string>());
    if (!ts) throw Error(errc::kInvalidUnit, "bad timestamp", "metadata.timestamp");
    u.metadata.timestamp = *ts;
    u.metadata.domain = m.at("domain").get<std::string>();
    u.metadata.sensitivity = parse_sensitivity(m.at("sensitivity").get<std::string>());
    u.metadata.entities = m.at("entities").get<std::vector<std::string>>();
    u.metadata.source = m.at("source").get<std::string>();
    u.metadata.path = m.at("path").get<std::string>();
    u.metadata.authority = m.at("authority").get<double>();
    u.version = j.at("version").get<std::int64_t>();
    u.vector = j.at("vector").get<std::vector<double>>();
    u.authorized_roles = j.at("authorized_roles").get<std::set<std::string>>();
    return u;
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kInvalidUnit, e.what());
  }
}

}  // namespace ctxk
