#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ctxk/api.hpp"
#include "ctxk/control_plane.hpp"
#include "ctxk/error.hpp"
#include "ctxk/http_server.hpp"

namespace fs = std::filesystem;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

int fail(const std::string& code, const std::string& detail, const std::string& path = {}) {
  nlohmann::ordered_json j{{"error", code}};
  if (!path.empty()) j["path"] = path;
  j["detail"] = detail;
  std::cerr << j.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctxd: context orchestration control plane"};
  std::string corpus;
  std::string manifests;
  std::string taxonomy;
  std::string org;
  std::string entities;
  std::string audit_file;
  std::string mode = "three-tier";
  int interval_s = 30;
  bool mirror = false;
  app.add_option("--corpus", corpus, "Directory holding manifests/, taxonomy.json and org.json");
  app.add_option("--manifests", manifests, "Manifest directory (overrides --corpus)");
  app.add_option("--taxonomy", taxonomy, "Taxonomy JSON (overrides --corpus)");
  app.add_option("--org", org, "Org JSON (overrides --corpus)");
  app.add_option("--entities", entities, "Known entity names, JSON array");
  app.add_option("--audit-file", audit_file, "Append audit events to this JSONL file");
  app.add_option("--mode", mode, "Permission model")->check(CLI::IsMember({"three-tier", "rbac", "none"}));
  app.add_option("--reconcile-interval", interval_s, "Seconds between reconciliation cycles")
      ->check(CLI::PositiveNumber);
  app.add_flag("--audit-stdout", mirror, "Mirror audit events to stdout");
  CLI11_PARSE(app, argc, argv);

  const std::string agent_addr = env_or("CTXK_AGENT_ADDR", "127.0.0.1:8080");
  const std::string admin_addr = env_or("CTXK_ADMIN_ADDR", "127.0.0.1:8443");
  const std::string credential = env_or("CTXK_ADMIN_CREDENTIAL", "");
  if (credential.empty()) return fail("BadRequest", "CTXK_ADMIN_CREDENTIAL must be set");

  // Handled by sigwait below; block before any thread starts.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    const fs::path root = corpus.empty() ? fs::current_path() : fs::path(corpus);
    const fs::path mdir = manifests.empty() ? root / "manifests" : fs::path(manifests);
    ctxk::ControlPlaneConfig cfg;
    cfg.manifests = ctxk::load_manifest_dir(mdir);
    ctxk::resolve_source_roots(cfg.manifests, corpus.empty() ? mdir.parent_path() : root);
    cfg.taxonomy = ctxk::Taxonomy::load(taxonomy.empty() ? root / "taxonomy.json" : fs::path(taxonomy));
    cfg.org = ctxk::OrgSpec::load(org.empty() ? root / "org.json" : fs::path(org));
    const fs::path ent = entities.empty() ? root / "entities.json" : fs::path(entities);
    if (std::ifstream in(ent); in) {
      auto j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_array()) cfg.known_entities = j.get<std::set<std::string>>();
    }
    cfg.mode = mode == "rbac" ? ctxk::EngineMode::rbac
               : mode == "none" ? ctxk::EngineMode::no_governance
                                : ctxk::EngineMode::three_tier;
    if (!audit_file.empty()) cfg.audit_file = audit_file;
    if (mirror) cfg.audit_mirror = &std::cout;

    ctxk::SystemClock clock;
    ctxk::ControlPlane plane(std::move(cfg), clock);
    ctxk::ContextApi api(plane, credential);
    ctxk::HttpServer server(api, ctxk::ListenAddress::parse(agent_addr), ctxk::ListenAddress::parse(admin_addr));
    server.start();
    std::cerr << nlohmann::ordered_json{{"agent", agent_addr},
                                        {"agent_port", server.agent_port()},
                                        {"admin", admin_addr},
                                        {"admin_port", server.admin_port()},
                                        {"domains", plane.registry().list_domains().size()}}
                     .dump()
              << '\n';

    std::jthread loop([&](std::stop_token stop) {
      plane.reconciler().run_loop(std::chrono::seconds(interval_s), stop, [](const ctxk::CycleReport&) {});
    });

    int sig = 0;
    sigwait(&signals, &sig);
    loop.request_stop();
    loop.join();
    server.stop();
    return 0;
  } catch (const ctxk::Error& e) {
    return fail(e.code(), e.detail(), e.path());
  } catch (const std::exception& e) {
    return fail("InternalError", e.what());
  }
}
