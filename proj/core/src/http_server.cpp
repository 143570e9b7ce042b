#include "ctxk/http_server.hpp"

#include <algorithm>
#include <cctype>
#include <thread>

#include <httplib.h>

#include "ctxk/error.hpp"

namespace ctxk {

ListenAddress ListenAddress::parse(const std::string& text) {
  ListenAddress a;
  const auto colon = text.rfind(':');
  try {
    if (colon == std::string::npos) {
      a.port = std::stoi(text);
    } else {
      if (colon > 0) a.host = text.substr(0, colon);
      a.port = std::stoi(text.substr(colon + 1));
    }
  } catch (const std::exception&) {
    throw Error(errc::kBadRequest, "bad listen address " + text);
  }
  if (a.port < 0 || a.port > 65535) throw Error(errc::kBadRequest, "bad port in " + text);
  return a;
}

std::string ListenAddress::to_string() const { return host + ":" + std::to_string(port); }

struct HttpServer::Impl {
  ContextApi& api;
  ListenAddress agent_addr;
  ListenAddress admin_addr;
  httplib::Server agent;
  httplib::Server admin;
  int agent_port = -1;
  int admin_port = -1;
  std::thread agent_thread;
  std::thread admin_thread;

  Impl(ContextApi& a, ListenAddress ag, ListenAddress ad) : api(a), agent_addr(std::move(ag)), admin_addr(std::move(ad)) {}
};

namespace {

ApiRequest to_api(const httplib::Request& r) {
  ApiRequest req;
  req.method = r.method;
  req.path = r.path;
  req.body = r.body;
  for (const auto& [k, v] : r.headers) {
    std::string key = k;
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    req.headers[key] = v;
  }
  for (const auto& [k, v] : r.params) req.query[k] = v;
  return req;
}

template <typename Fn>
void install(httplib::Server& srv, Fn handle) {
  auto h = [handle](const httplib::Request& r, httplib::Response& w) {
    const ApiResponse res = handle(to_api(r));
    w.status = res.status;
    w.set_content(res.body, "application/json");
  };
  const char* any = R"(/.*)";
  srv.Get(any, h);
  srv.Post(any, h);
  srv.Delete(any, h);
  srv.Put(any, h);
}

int bind(httplib::Server& srv, const ListenAddress& a) {
  if (a.port == 0) {
    const int p = srv.bind_to_any_port(a.host);
    if (p <= 0) throw Error(errc::kBindFailure, "cannot bind " + a.to_string());
    return p;
  }
  if (!srv.bind_to_port(a.host, a.port)) throw Error(errc::kBindFailure, "cannot bind " + a.to_string());
  return a.port;
}

}  // namespace

HttpServer::HttpServer(ContextApi& api, ListenAddress agent, ListenAddress admin)
    : impl_(std::make_unique<Impl>(api, std::move(agent), std::move(admin))) {
  install(impl_->agent, [this](const ApiRequest& r) { return impl_->api.handle_agent(r); });
  install(impl_->admin, [this](const ApiRequest& r) { return impl_->api.handle_admin(r); });
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::start() {
  impl_->agent_port = bind(impl_->agent, impl_->agent_addr);
  try {
    impl_->admin_port = bind(impl_->admin, impl_->admin_addr);
  } catch (...) {
    impl_->agent.stop();
    throw;
  }
  impl_->agent_thread = std::thread([this] { impl_->agent.listen_after_bind(); });
  impl_->admin_thread = std::thread([this] { impl_->admin.listen_after_bind(); });
  impl_->agent.wait_until_ready();
  impl_->admin.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->agent.stop();
  impl_->admin.stop();
  if (impl_->agent_thread.joinable()) impl_->agent_thread.join();
  if (impl_->admin_thread.joinable()) impl_->admin_thread.join();
}

int HttpServer::agent_port() const { return impl_->agent_port; }
int HttpServer::admin_port() const { return impl_->admin_port; }

}  // namespace ctxk
