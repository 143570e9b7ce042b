#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <unistd.h>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ctxk/error.hpp"
#include "ctxk/harness.hpp"
#include "ctxk/http_server.hpp"
#include "ctxk/manifest.hpp"
#include "ctxk/seed.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

int fail(const std::string& code, const std::string& detail, const std::string& path = {}) {
  ojson j{{"error", code}};
  if (!path.empty()) j["path"] = path;
  j["detail"] = detail;
  std::cerr << j.dump() << '\n';
  return 1;
}

struct Admin {
  std::string address;
  std::string credential;

  int call(const std::string& method, const std::string& path, const std::string& body = {},
           const std::string& content_type = "application/json") const {
    const auto addr = ctxk::ListenAddress::parse(address);
    httplib::Client http(addr.host, addr.port);
    http.set_read_timeout(600, 0);
    httplib::Headers headers{{"Authorization", "Bearer " + credential}};
    httplib::Result res = method == "GET" ? http.Get(path.c_str(), headers)
                                          : http.Post(path.c_str(), headers, body, content_type.c_str());
    if (!res) return fail("Unavailable", "admin surface unreachable at " + address);
    if (res->status >= 300) {
      std::cerr << res->body << '\n';
      return 1;
    }
    const auto j = nlohmann::json::parse(res->body, nullptr, false);
    std::cout << (j.is_discarded() ? res->body : j.dump(2)) << '\n';
    return 0;
  }
};

std::string query_string(const std::vector<std::pair<std::string, std::string>>& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (v.empty()) continue;
    out += out.empty() ? "?" : "&";
    out += k + "=" + httplib::detail::encode_query_param(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctxctl: operate a context control plane"};
  app.require_subcommand(1);
  Admin admin{env_or("CTXK_ADMIN_ADDR", "127.0.0.1:8443"), env_or("CTXK_ADMIN_CREDENTIAL", "")};
  app.add_option("--admin", admin.address, "Admin listener address (CTXK_ADMIN_ADDR)");
  app.add_option("--credential", admin.credential, "Admin credential (CTXK_ADMIN_CREDENTIAL)");

  std::string file;
  auto* apply = app.add_subcommand("apply", "Apply manifests to a running control plane");
  apply->add_option("-f,--file", file, "Manifest YAML")->required();
  auto* validate = app.add_subcommand("validate", "Validate manifests offline");
  validate->add_option("-f,--file", file, "Manifest YAML or directory")->required();
  bool strict = false;
  validate->add_flag("--strict", strict, "Treat cross-reference problems as errors");

  std::string kind;
  auto* get = app.add_subcommand("get", "List domains, sources or sessions");
  get->add_option("kind", kind)->required()->check(CLI::IsMember({"domains", "sources", "sessions"}));

  std::string a_session;
  std::string a_user;
  std::string a_kind;
  auto* audit = app.add_subcommand("audit", "Query the audit log");
  audit->add_option("--session", a_session);
  audit->add_option("--user", a_user);
  audit->add_option("--kind", a_kind);

  std::string approval;
  std::string otp;
  auto* approve = app.add_subcommand("approve", "Resolve a strong approval with its one-time code");
  approve->add_option("id", approval)->required();
  approve->add_option("--otp", otp)->required();

  std::string k_session;
  std::string k_user;
  bool k_all = false;
  auto* kill = app.add_subcommand("killswitch", "Revoke sessions");
  auto* ks = kill->add_option("--session", k_session);
  auto* ku = kill->add_option("--user", k_user);
  auto* ka = kill->add_flag("--all", k_all);
  ks->excludes(ku)->excludes(ka);
  ku->excludes(ka);

  bool once = false;
  auto* reconcile = app.add_subcommand("reconcile", "Run a reconciliation cycle");
  reconcile->add_flag("--once", once)->required();

  std::string experiment;
  std::string scratch;
  std::uint64_t seed = ctxk::bench::kDefaultSeed;
  bool json_out = false;
  double soak_seconds = 30.0;
  auto* bench = app.add_subcommand("bench", "Run evaluation experiments");
  bench->require_subcommand(1);
  auto* run = bench->add_subcommand("run", "Run one experiment");
  run->add_option("experiment", experiment, "v1 v2 v3 c1 c2 c3 c4 c5 or all")->required();
  run->add_option("--scratch", scratch, "Directory for generated corpora");
  run->add_option("--seed", seed);
  run->add_option("--soak-seconds", soak_seconds);
  run->add_flag("--json", json_out, "Print the JSON report instead of tables");

  std::string seed_dir;
  auto* seedcmd = app.add_subcommand("seed", "Generate the demonstration corpus");
  seedcmd->add_option("dir", seed_dir)->required();
  seedcmd->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const fs::path p(file);
      auto ms = fs::is_directory(p) ? ctxk::load_manifest_dir(p) : ctxk::load_manifest_file(p);
      const auto violations = ctxk::validate_cross_references(ms);
      if (strict && !violations.empty()) {
        std::string detail;
        for (const auto& v : violations) detail += (detail.empty() ? "" : "; ") + v.message;
        return fail(ctxk::errc::kSchemaError, detail);
      }
      ojson names = ojson::array();
      for (const auto& m : ms) names.push_back(m.name);
      ojson warnings = ojson::array();
      for (const auto& v : violations) warnings.push_back(v.message);
      std::cout << ojson{{"valid", names}, {"warnings", warnings}}.dump() << '\n';
      return 0;
    }
    if (*apply) {
      const fs::path p = fs::absolute(file);
      auto ms = ctxk::load_manifest_file(p);
      ctxk::resolve_source_roots(ms, p.parent_path());
      std::string body;
      for (const auto& m : ms) body += "---\n" + ctxk::serialize_manifest(m);
      return admin.call("POST", "/admin/v1/manifests", body, "application/yaml");
    }
    if (*get) return admin.call("GET", "/admin/v1/" + kind);
    if (*audit) {
      return admin.call("GET", "/admin/v1/audit" + query_string({{"session", a_session}, {"user", a_user}, {"kind", a_kind}}));
    }
    if (*approve) {
      return admin.call("POST", "/admin/v1/approvals/" + approval + "/strong", nlohmann::json{{"otp", otp}}.dump());
    }
    if (*kill) {
      nlohmann::json body;
      if (!k_session.empty()) body = {{"scope", "session"}, {"id", k_session}};
      else if (!k_user.empty()) body = {{"scope", "user"}, {"id", k_user}};
      else if (k_all) body = {{"scope", "all"}};
      else return fail(ctxk::errc::kBadRequest, "one of --session, --user or --all is required");
      return admin.call("POST", "/admin/v1/killswitch", body.dump());
    }
    if (*reconcile) return admin.call("POST", "/admin/v1/reconcile", "{}");
    if (*run) {
      ctxk::bench::HarnessOptions opts;
      opts.seed = seed;
      opts.soak_seconds = soak_seconds;
      opts.scratch = scratch.empty() ? fs::temp_directory_path() / ("ctxk-bench-" + std::to_string(::getpid()))
                                     : fs::path(scratch);
      std::string table;
      const auto report = ctxk::bench::run_experiment(experiment, opts, &table);
      if (scratch.empty()) fs::remove_all(opts.scratch);
      std::cout << (json_out ? report.dump(2) + "\n" : table);
      return 0;
    }
    if (*seedcmd) {
      ctxk::bench::generate_seed(seed_dir, seed);
      std::cout << ojson{{"seeded", fs::absolute(seed_dir).string()}}.dump() << '\n';
      return 0;
    }
  } catch (const ctxk::Error& e) {
    return fail(e.code(), e.detail(), e.path());
  } catch (const std::exception& e) {
    return fail("InternalError", e.what());
  }
  return 0;
}
