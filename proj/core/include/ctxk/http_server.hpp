#pragma once

#include <memory>
#include <string>

#include "ctxk/api.hpp"

namespace ctxk {

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port

  static ListenAddress parse(const std::string& text);
  std::string to_string() const;
};

// Two HTTP listeners over one ContextApi: the agent surface and the admin
// surface. They share no routes.
class HttpServer {
 public:
  HttpServer(ContextApi& api, ListenAddress agent, ListenAddress admin);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds both listeners and starts serving on background threads.
  // Throws BindFailure.
  void start();
  void stop();

  int agent_port() const;
  int admin_port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ctxk
