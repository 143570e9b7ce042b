#include "ctxk/error.hpp"

namespace ctxk {

namespace {

std::string render(const std::string& code, const std::string& detail, const std::string& path) {
  std::string out = code;
  out += ": ";
  if (!path.empty()) {
    out += path;
    out += ": ";
  }
  out += detail;
  return out;
}

}  // namespace

Error::Error(std::string code, std::string detail, std::string path)
    : std::runtime_error(render(code, detail, path)),
      code_(std::move(code)),
      detail_(std::move(detail)),
      path_(std::move(path)) {}

}  // namespace ctxk
