#include <gtest/gtest.h>

#include <cstdio>
#include <sys/wait.h>

#include <httplib.h>

#include "ctxk/api.hpp"
#include "ctxk/http_server.hpp"
#include "fixtures.hpp"

using namespace ctxk;
using namespace std::chrono_literals;
using ctxk::testing::TempDir;
using ctxk::testing::write_file;
using json = nlohmann::json;

namespace {

const Instant t0 = Instant{Millis{1'780'000'000'000}};
const std::string kCred = "admin-secret-for-tests";

struct Service {
  TempDir dir;
  ManualClock clock{t0};
  std::unique_ptr<ControlPlane> cp;
  std::unique_ptr<ContextApi> api;
  std::vector<std::string> agent_bodies;

  Service() {
    write_file(dir / "runbooks/deploy.md", "deploy runbook for the payments service");
    write_file(dir / "runbooks/rollback.md", "rollback runbook for the payments service");
    auto m = parse_manifest(ctxk::testing::minimal_manifest("ops", dir.path().string()));
    m.access.agent.execute = {{"send-internal-msg", Tier::soft_approval}, {"send-external-email", Tier::strong_approval}};
    ControlPlaneConfig cfg;
    cfg.manifests = {m};
    cfg.taxonomy.keywords = {{"ops", {"deploy", "rollback", "runbook"}}};
    const std::set<std::string> ops{std::string(kReadContext), std::string(kWriteContext), "send-internal-msg",
                                    "send-external-email", "delete-repo"};
    cfg.org.roles = {{"analyst", {}, {}, ops, {}}};
    cfg.org.users = {{"olga", "analyst", {}, "ops"}, {"omar", "analyst", {}, "ops"}};
    auto agent_ops = ops;
    agent_ops.erase("delete-repo");
    cfg.org.agents = {{"olga-agent", "olga", "analyst", agent_ops, {}, {}},
                      {"omar-agent", "omar", "analyst", agent_ops, {}, {}}};
    cp = std::make_unique<ControlPlane>(cfg, clock);
    api = std::make_unique<ContextApi>(*cp, kCred);
    api->set_observer([this](Surface s, const ApiRequest&, const ApiResponse& r) {
      if (s == Surface::agent) agent_bodies.push_back(r.body);
    });
  }

  ApiResponse agent(const std::string& method, const std::string& path, const json& body = nullptr,
                    const std::string& token = {}) {
    ApiRequest r{method, path, body.is_null() ? "" : body.dump(), {}, {}};
    if (!token.empty()) r.headers["authorization"] = "Bearer " + token;
    return api->handle_agent(r);
  }

  ApiResponse admin(const std::string& method, const std::string& path, const json& body = nullptr,
                    const std::string& cred = kCred) {
    ApiRequest r{method, path, body.is_null() ? "" : body.dump(), {}, {}};
    if (!cred.empty()) r.headers["authorization"] = "Bearer " + cred;
    return api->handle_admin(r);
  }

  json session(const std::string& user) {
    const auto res = agent("POST", "/v1/sessions", {{"user", user}, {"agent_id", user + "-agent"}, {"role", "analyst"}});
    EXPECT_EQ(res.status, 201) << res.body;
    return json::parse(res.body);
  }
};

std::string error_of(const ApiResponse& r) { return json::parse(r.body).value("error", ""); }

#ifdef CTXK_CTXCTL_PATH
struct RunResult {
  int status;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(CTXK_CTXCTL_PATH) + " " + args + " 2>&1";
  RunResult r{-1, {}};
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.output.append(buf, n);
  const int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}
#endif

}  // namespace

TEST(Api, SessionsAndContextRequests) {
  Service s;
  const auto sess = s.session("olga");
  const std::string token = sess["token"];
  const std::string id = sess["session_id"];
  EXPECT_EQ(sess["home_domain"], "ops");

  auto res = s.agent("POST", "/v1/context/request", {{"session_id", id}, {"query", "deploy runbook"}});
  EXPECT_EQ(res.status, 401);
  res = s.agent("POST", "/v1/context/request", {{"session_id", id}, {"query", "deploy runbook"}}, "wrong");
  EXPECT_EQ(res.status, 401);
  const auto other = s.session("omar");
  res = s.agent("POST", "/v1/context/request", {{"session_id", other["session_id"]}, {"query", "deploy"}}, token);
  EXPECT_EQ(res.status, 401);

  res = s.agent("POST", "/v1/context/request", {{"session_id", id}, {"query", "deploy runbook"}}, token);
  ASSERT_EQ(res.status, 200) << res.body;
  const auto body = json::parse(res.body);
  ASSERT_FALSE(body["units"].empty());
  EXPECT_EQ(body["units"][0]["id"], "ops/docs:runbooks/deploy.md");

  EXPECT_EQ(s.agent("POST", "/v1/context/request", {{"session_id", id}}, token).status, 400);
  EXPECT_EQ(s.agent("GET", "/v1/nothing", nullptr, token).status, 404);
  EXPECT_EQ(s.agent("GET", "/v1/health").status, 200);
}

TEST(Api, StrongApprovalNeverLeaksToAgentSurface) {
  Service s;
  const auto sess = s.session("olga");
  const std::string token = sess["token"];
  const std::string id = sess["session_id"];
  auto res = s.agent("POST", "/v1/actions",
                     {{"session_id", id}, {"operation", "send-external-email"}, {"payload", {{"to", "x@y.example"}}}},
                     token);
  ASSERT_EQ(res.status, 202) << res.body;
  const auto out = json::parse(res.body);
  EXPECT_EQ(out["tier"], "strong-approval");
  const std::string apr = out["approval_id"];

  EXPECT_EQ(error_of(s.agent("POST", "/v1/approvals/" + apr + "/soft", {{"decision", "approve"}}, token)),
            errc::kWrongTier);
  EXPECT_EQ(s.agent("POST", "/v1/approvals/" + apr + "/strong", {{"otp", "123456"}}, token).status, 404);
  EXPECT_EQ(s.agent("GET", "/admin/v1/otp/" + apr, nullptr, token).status, 404);
  EXPECT_EQ(s.agent("GET", "/v1/approvals/" + apr, nullptr, token).status, 200);

  EXPECT_EQ(s.admin("GET", "/admin/v1/otp/" + apr, nullptr, "").status, 401);
  EXPECT_EQ(s.admin("GET", "/admin/v1/otp/" + apr, nullptr, "nope").status, 401);
  EXPECT_EQ(s.admin("GET", "/admin/v1/otp/" + apr, nullptr, token).status, 401);
  res = s.admin("GET", "/admin/v1/otp/" + apr);
  ASSERT_EQ(res.status, 200);
  const std::string otp = json::parse(res.body)["otp"];

  const std::string wrong = otp == "000000" ? "000001" : "000000";
  res = s.admin("POST", "/admin/v1/approvals/" + apr + "/strong", {{"otp", wrong}});
  EXPECT_EQ(res.status, 403);
  EXPECT_EQ(error_of(res), errc::kWrongOtp);
  res = s.admin("POST", "/admin/v1/approvals/" + apr + "/strong", {{"otp", otp}});
  ASSERT_EQ(res.status, 200) << res.body;
  EXPECT_EQ(json::parse(res.body)["executed"], true);
  res = s.admin("POST", "/admin/v1/approvals/" + apr + "/strong", {{"otp", otp}});
  EXPECT_EQ(res.status, 409);
  EXPECT_EQ(error_of(res), errc::kReplay);

  s.agent("GET", "/v1/audit", nullptr, token);
  ASSERT_FALSE(s.agent_bodies.empty());
  for (const auto& b : s.agent_bodies) EXPECT_EQ(b.find(otp), std::string::npos) << b;
}

TEST(Api, SoftApprovalAndOwnership) {
  Service s;
  const auto olga = s.session("olga");
  const auto omar = s.session("omar");
  auto res = s.agent("POST", "/v1/actions",
                     {{"session_id", olga["session_id"]}, {"operation", "send-internal-msg"}, {"payload", {{"to", "team"}}}},
                     olga["token"]);
  ASSERT_EQ(res.status, 202);
  const std::string apr = json::parse(res.body)["approval_id"];
  EXPECT_EQ(s.agent("POST", "/v1/approvals/" + apr + "/soft", {{"decision", "approve"}}, omar["token"]).status, 404);
  EXPECT_EQ(s.agent("POST", "/v1/approvals/" + apr + "/soft", {{"decision", "maybe"}}, olga["token"]).status, 400);
  res = s.agent("POST", "/v1/approvals/" + apr + "/soft", {{"decision", "approve"}}, olga["token"]);
  ASSERT_EQ(res.status, 200);
  EXPECT_EQ(json::parse(res.body)["executed"], true);

  res = s.agent("POST", "/v1/actions", {{"session_id", olga["session_id"]}, {"operation", "delete-repo"}}, olga["token"]);
  EXPECT_EQ(res.status, 403);
  EXPECT_EQ(json::parse(res.body)["reason"], "excluded");
}

TEST(Api, KillSwitchAuditScopeAndAdminViews) {
  Service s;
  const auto olga = s.session("olga");
  const auto omar = s.session("omar");
  auto res = s.admin("POST", "/admin/v1/killswitch", {{"scope", "user"}, {"id", "olga"}});
  ASSERT_EQ(res.status, 200);
  EXPECT_EQ(json::parse(res.body)["killed"], 1);
  res = s.agent("POST", "/v1/context/request", {{"session_id", olga["session_id"]}, {"query", "deploy"}}, olga["token"]);
  EXPECT_EQ(res.status, 403);
  EXPECT_EQ(error_of(res), errc::kSessionKilled);
  EXPECT_EQ(s.admin("POST", "/admin/v1/killswitch", {{"scope", "planet"}}).status, 400);

  // The agent surface only ever shows the caller's own session.
  res = s.agent("GET", "/v1/audit", nullptr, omar["token"]);
  ASSERT_EQ(res.status, 200);
  const auto own = json::parse(res.body);
  ASSERT_FALSE(own["events"].empty());
  for (const auto& e : own["events"]) EXPECT_EQ(e["session_id"], omar["session_id"]);
  res = s.admin("GET", "/admin/v1/audit");
  std::set<std::string> sessions;
  const auto all = json::parse(res.body);
  for (const auto& e : all["events"]) {
    if (e.contains("session_id")) sessions.insert(e["session_id"].get<std::string>());
  }
  EXPECT_EQ(sessions.size(), 2u);

  EXPECT_EQ(json::parse(s.admin("GET", "/admin/v1/sessions").body)["sessions"].size(), 2u);
  EXPECT_EQ(json::parse(s.admin("GET", "/admin/v1/domains").body)["domains"][0]["name"], "ops");
  res = s.admin("POST", "/admin/v1/reconcile", json::object());
  EXPECT_EQ(json::parse(res.body)["cycle_id"], 1);
}

TEST(Api, ManifestApply) {
  Service s;
  auto res = s.admin("POST", "/admin/v1/manifests", nullptr);
  auto yaml = ctxk::testing::minimal_manifest("finance", s.dir.path().string());
  ApiRequest r{"POST", "/admin/v1/manifests", yaml, {{"authorization", "Bearer " + kCred}}, {}};
  res = s.api->handle_admin(r);
  ASSERT_EQ(res.status, 200) << res.body;
  EXPECT_EQ(s.cp->registry().list_domains(), (std::vector<std::string>{"finance", "ops"}));
  r.body = "apiVersion: context/v1\nkind: ContextDomain\nmetadata: {name: x}\nspec: {sources: 3}\n";
  res = s.api->handle_admin(r);
  EXPECT_EQ(res.status, 400);
  EXPECT_EQ(error_of(res), errc::kSchemaError);
}

TEST(Api, StatusMapping) {
  EXPECT_EQ(http_status_for(errc::kSchemaError), 400);
  EXPECT_EQ(http_status_for(errc::kUnauthorized), 401);
  EXPECT_EQ(http_status_for(errc::kWrongOtp), 403);
  EXPECT_EQ(http_status_for(errc::kSessionKilled), 403);
  EXPECT_EQ(http_status_for(errc::kUnknownApproval), 404);
  EXPECT_EQ(http_status_for(errc::kReplay), 409);
  EXPECT_EQ(http_status_for(errc::kExpired), 409);
  EXPECT_EQ(http_status_for(errc::kPermissionEngineUnavailable), 503);
  EXPECT_EQ(http_status_for("Whatever"), 500);
  const auto body = error_body(Error(errc::kSchemaError, "weights", "spec.routing.priority"));
  EXPECT_EQ(body.dump(), R"({"error":"SchemaError","path":"spec.routing.priority","detail":"weights"})");
}

TEST(Http, TwoListenersOverSockets) {
  Service s;
  HttpServer server(*s.api, {"127.0.0.1", 0}, {"127.0.0.1", 0});
  server.start();
  ASSERT_GT(server.agent_port(), 0);
  ASSERT_NE(server.agent_port(), server.admin_port());

  httplib::Client agent("127.0.0.1", server.agent_port());
  auto r = agent.Get("/v1/health");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(agent.Get("/admin/v1/health")->status, 404);

  httplib::Client admin("127.0.0.1", server.admin_port());
  EXPECT_EQ(admin.Get("/admin/v1/health")->status, 401);
  r = admin.Get("/admin/v1/health", {{"Authorization", "Bearer " + kCred}});
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(admin.Get("/v1/health", {{"Authorization", "Bearer " + kCred}})->status, 404);

  r = agent.Post("/v1/sessions", json{{"user", "olga"}, {"agent_id", "olga-agent"}, {"role", "analyst"}}.dump(),
                 "application/json");
  ASSERT_EQ(r->status, 201);
  server.stop();

  EXPECT_EQ(ListenAddress::parse("0.0.0.0:8443").to_string(), "0.0.0.0:8443");
  EXPECT_EQ(ListenAddress::parse("9000").port, 9000);
  EXPECT_THROW(ListenAddress::parse("host:notaport"), Error);
  EXPECT_THROW(ListenAddress::parse("host:70000"), Error);
}

#ifdef CTXK_CTXCTL_PATH
TEST(Cli, ValidateListing) {
  const auto listing = (ctxk::testing::data_dir() / "sales-listing.yaml").string();
  auto r = run("validate -f " + listing);
  EXPECT_EQ(r.status, 0) << r.output;
  const auto j = json::parse(r.output);
  EXPECT_EQ(j["valid"], json::array({"sales"}));
  EXPECT_EQ(j["warnings"].size(), 3u);
  r = run("validate --strict -f " + listing);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("SchemaError"), std::string::npos);

  TempDir dir;
  write_file(dir / "bad.yaml", "apiVersion: context/v1\nkind: ContextDomain\nmetadata: {name: x}\nspec: {sources: []}\nbogus: 1\n");
  r = run("validate -f " + (dir / "bad.yaml").string());
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("SchemaError"), std::string::npos);
}

TEST(Cli, AdminCommandsAgainstLiveServer) {
  Service s;
  HttpServer server(*s.api, {"127.0.0.1", 0}, {"127.0.0.1", 0});
  server.start();
  const auto sess = s.session("olga");
  s.agent("POST", "/v1/actions",
          {{"session_id", sess["session_id"]}, {"operation", "send-external-email"}, {"payload", {{"to", "a@b.example"}}}},
          sess["token"]);
  const std::string base = "--admin 127.0.0.1:" + std::to_string(server.admin_port()) + " --credential " + kCred + " ";
  const auto otp = s.cp->engine().out_of_band_read("apr-1")->otp;
  const std::string wrong = otp == "000000" ? "000001" : "000000";

  auto r = run(base + "approve apr-1 --otp " + wrong);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("WrongOtp"), std::string::npos) << r.output;
  r = run(base + "approve apr-1 --otp " + otp);
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(s.cp->engine().executed().size(), 1u);

  r = run(base + "get sessions");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(json::parse(r.output)["sessions"].size(), 1u);
  r = run(base + "audit --kind approval_rejected");
  EXPECT_EQ(json::parse(r.output)["events"].size(), 1u);
  r = run(base + "killswitch --session " + std::string(sess["session_id"]) + " --all");
  EXPECT_NE(r.status, 0);
  r = run(base + "killswitch --all");
  EXPECT_EQ(json::parse(r.output)["killed"], 1);
  r = run("--admin 127.0.0.1:" + std::to_string(server.admin_port()) + " --credential wrong get domains");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("Unauthorized"), std::string::npos);
  server.stop();

  r = run(base + "get domains");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("Unavailable"), std::string::npos);
}

TEST(Cli, SeedCommand) {
  TempDir dir;
  auto r = run("seed " + (dir / "corpus").string());
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(std::filesystem::exists(dir / "corpus" / "benchmark.json"));
  r = run("seed " + (dir / "corpus").string());
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("DirectoryNotEmpty"), std::string::npos);
}
#endif
