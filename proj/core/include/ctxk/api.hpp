#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ctxk/control_plane.hpp"
#include "ctxk/error.hpp"

namespace ctxk {

struct ApiRequest {
  std::string method;
  std::string path;
  std::string body;
  std::map<std::string, std::string> headers;  // lower-case names
  std::map<std::string, std::string> query;
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

enum class Surface { agent, admin };

int http_status_for(std::string_view error_code);
nlohmann::ordered_json error_body(const Error& e);

// Transport-independent request dispatch for both listeners. The agent
// surface never reads the out-of-band store and never resolves strong
// approvals; the admin surface requires the static admin credential.
class ContextApi {
 public:
  using Observer = std::function<void(Surface, const ApiRequest&, const ApiResponse&)>;

  ContextApi(ControlPlane& plane, std::string admin_credential);

  ApiResponse handle_agent(const ApiRequest& req);
  ApiResponse handle_admin(const ApiRequest& req);

  // Sees every response before it leaves; used for hygiene checks.
  void set_observer(Observer o) { observer_ = std::move(o); }

 private:
  ApiResponse dispatch_agent(const ApiRequest& req);
  ApiResponse dispatch_admin(const ApiRequest& req);

  ControlPlane& plane_;
  std::string admin_credential_;
  Observer observer_;
};

}  // namespace ctxk
