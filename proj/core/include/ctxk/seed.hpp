#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxk/control_plane.hpp"
#include "ctxk/manifest.hpp"
#include "ctxk/router.hpp"

namespace ctxk::bench {

inline constexpr std::uint64_t kDefaultSeed = 42;

struct BenchQuery {
  std::string id;
  std::string category;  // sales, delivery, hr, finance or cross-domain
  std::string user;
  std::string text;
  std::vector<std::string> domains;       // labelled domains
  std::vector<std::string> ground_truth;  // relevant unit ids
};

struct Benchmark {
  std::uint64_t seed = kDefaultSeed;
  std::vector<BenchQuery> queries;

  static Benchmark from_json(const nlohmann::json& j);
  static Benchmark load(const std::filesystem::path& file);
  nlohmann::ordered_json to_json() const;
};

// Writes a consulting-firm corpus under `dir`: manifests/, sources/ with
// metadata sidecars, taxonomy.json, org.json, entities.json, benchmark.json
// and the freshness fixtures under fixtures/v2. Throws DirectoryNotEmpty.
void generate_seed(const std::filesystem::path& dir, std::uint64_t seed = kDefaultSeed);

struct Corpus {
  std::filesystem::path root;
  std::vector<DomainManifest> manifests;
  Taxonomy taxonomy;
  OrgSpec org;
  std::set<std::string> known_entities;
  Benchmark benchmark;

  const DomainManifest* manifest(std::string_view name) const;
  std::filesystem::path fixture(std::string_view name) const;
  std::filesystem::path source_file(std::string_view domain, std::string_view path) const;
};

Corpus load_corpus(const std::filesystem::path& dir);

ControlPlaneConfig plane_config(const Corpus& corpus, EngineMode mode);

// Unit id of a seeded file, e.g. seed_unit("hr", "salaries/compensation.md").
std::string seed_unit(std::string_view domain, std::string_view path);

// Fixed instant the harness clocks start from.
Instant seed_epoch();

}  // namespace ctxk::bench
