#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxk/time.hpp"

namespace ctxk {

enum class UnitType { unstructured, structured, hybrid };
enum class Sensitivity { public_, internal, confidential };

std::string_view to_string(UnitType t);
std::string_view to_string(Sensitivity s);
UnitType parse_unit_type(std::string_view s);
Sensitivity parse_sensitivity(std::string_view s);

struct UnitMetadata {
  std::string author;
  Instant timestamp{};
  std::string domain;
  Sensitivity sensitivity = Sensitivity::internal;
  std::vector<std::string> entities;
  std::string source;  // source identifier, "<domain>/<source-name>"
  std::string path;    // source-relative, '/'-separated
  double authority = 0.5;

  bool operator==(const UnitMetadata&) const = default;
};

// The smallest addressable element of organisational knowledge.
struct ContextUnit {
  std::string id;
  std::string content;
  UnitType unit_type = UnitType::unstructured;
  UnitMetadata metadata;
  std::int64_t version = 0;
  std::vector<double> vector;
  std::set<std::string> authorized_roles;

  bool operator==(const ContextUnit&) const = default;
};

// Stable identifier for a (source, path) pair; identical across versions.
std::string unit_id(std::string_view source, std::string_view path);
std::string source_id(std::string_view domain, std::string_view source_name);

// Snapshot line format: exactly the ContextUnit fields, instants as RFC 3339.
nlohmann::ordered_json to_json(const ContextUnit& u);
ContextUnit unit_from_json(const nlohmann::ordered_json& j);

}  // namespace ctxk
