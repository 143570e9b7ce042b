#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ctxk/cxri.hpp"
#include "ctxk/error.hpp"

namespace ctxk {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSidecar = ".ctxmeta.json";

Instant to_instant(fs::file_time_type t) {
  return std::chrono::floor<Millis>(std::chrono::file_clock::to_sys(t));
}

std::optional<std::string> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool hidden(const fs::path& rel) {
  for (const auto& part : rel) {
    const auto s = part.string();
    if (!s.empty() && s.front() == '.') return true;
  }
  return false;
}

// Directory tree connector. With git metadata enabled it also requires the
// per-root sidecar carrying author and commit timestamp for each path.
class FileSystemConnection final : public Connection {
 public:
  FileSystemConnection(const SourceSpec& spec, const SourceBinding& binding, fs::path root, bool git)
      : Connection(git ? ConnectorKind::git_repo : ConnectorKind::file_system, spec.config, binding),
        root_(std::move(root)),
        git_(git) {
    auto ro = spec.config.find("readOnly");
    read_only_ = ro != spec.config.end() && (ro->second == "true" || ro->second == "1");
  }

  Health health() const override {
    std::error_code ec;
    if (!fs::is_directory(root_, ec)) return {HealthStatus::disconnected, root_.string() + " is unreachable"};
    if (git_ && !fs::is_regular_file(root_ / kSidecar, ec)) {
      return {HealthStatus::degraded, "metadata sidecar missing"};
    }
    return {HealthStatus::connected, {}};
  }

 protected:
  std::vector<Raw> list_raw() override {
    const auto meta = sidecar();
    std::vector<Raw> out;
    for (const auto& rel : files()) {
      if (auto r = load(rel, meta)) out.push_back(std::move(*r));
    }
    return out;
  }

  std::optional<Raw> read_raw(const std::string& path) override {
    if (path.find("..") != std::string::npos || hidden(fs::path(path))) return std::nullopt;
    return load(path, sidecar());
  }

  void write_raw(const std::string& path, std::string_view content) override {
    if (read_only_) throw Error(errc::kWriteFailed, "source is read-only", path);
    const auto target = root_ / fs::path(path);
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(errc::kWriteFailed, "cannot open for writing", path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(errc::kWriteFailed, "short write", path);
    if (git_) {
      auto meta = sidecar();
      auto& entry = meta[path];
      if (!entry.is_object()) entry = nlohmann::json::object();
      entry["timestamp"] = format_rfc3339(std::chrono::floor<Millis>(std::chrono::system_clock::now()));
      std::ofstream side(root_ / kSidecar, std::ios::trunc);
      side << meta.dump(2) << '\n';
      if (!side) throw Error(errc::kWriteFailed, "cannot update metadata sidecar", path);
    }
  }

  StampMap stamps() override {
    std::error_code ec;
    if (!fs::is_directory(root_, ec)) throw Error(errc::kConnectionLost, root_.string() + " is unreachable");
    StampMap out;
    for (const auto& rel : files()) {
      const auto p = root_ / fs::path(rel);
      auto content = slurp(p);
      if (!content) continue;
      EntryStamp s;
      s.mtime = to_instant(fs::last_write_time(p, ec));
      s.size = content->size();
      s.hash = content_hash(*content);
      out.emplace(rel, s);
    }
    return out;
  }

 private:
  std::vector<std::string> files() const {
    std::vector<std::string> out;
    std::error_code ec;
    fs::recursive_directory_iterator it(root_, ec), end;
    if (ec) throw Error(errc::kConnectionLost, root_.string() + " is unreachable");
    for (; it != end; it.increment(ec)) {
      if (ec) break;
      if (!it->is_regular_file(ec)) continue;
      const auto rel = fs::relative(it->path(), root_, ec);
      if (ec || hidden(rel)) continue;
      out.push_back(rel.generic_string());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  nlohmann::json sidecar() const {
    auto text = slurp(root_ / kSidecar);
    if (!text) return nlohmann::json::object();
    auto j = nlohmann::json::parse(*text, nullptr, false);
    return j.is_object() ? j : nlohmann::json::object();
  }

  std::optional<Raw> load(const std::string& rel, const nlohmann::json& meta) const {
    const auto p = root_ / fs::path(rel);
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) return std::nullopt;
    auto content = slurp(p);
    if (!content) return std::nullopt;
    Raw r;
    r.path = rel;
    r.content = std::move(*content);
    r.mtime = to_instant(fs::last_write_time(p, ec));
    auto m = meta.find(rel);
    if (m != meta.end() && m->is_object()) {
      if (auto a = m->find("author"); a != m->end() && a->is_string()) r.author = a->get<std::string>();
      if (auto t = m->find("timestamp"); t != m->end() && t->is_string()) {
        r.timestamp = parse_rfc3339(t->get<std::string>());
      }
      if (auto s = m->find("sensitivity"); s != m->end() && s->is_string()) {
        r.sensitivity = parse_sensitivity(s->get<std::string>());
      }
      if (auto a = m->find("authority"); a != m->end() && a->is_number()) r.authority = a->get<double>();
      if (auto e = m->find("entities"); e != m->end() && e->is_array()) {
        for (const auto& x : *e) {
          if (x.is_string()) r.entities.push_back(x.get<std::string>());
        }
      }
    }
    return r;
  }

  fs::path root_;
  bool git_;
  bool read_only_ = false;
};

}  // namespace

std::unique_ptr<Connection> make_filesystem_connection(const SourceSpec& spec, const SourceBinding& binding,
                                                       bool git_metadata) {
  std::string key = git_metadata ? "repo" : "root";
  auto it = spec.config.find(key);
  if (it == spec.config.end()) it = spec.config.find("root");
  if (it == spec.config.end() || it->second.empty()) {
    throw Error(errc::kConnectFailed, "missing config." + key, "config." + key);
  }
  fs::path root(it->second);
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(errc::kConnectFailed, it->second + " is not a directory");
  if (git_metadata && !fs::is_regular_file(root / kSidecar, ec)) {
    throw Error(errc::kConnectFailed, it->second + " has no " + kSidecar);
  }
  return std::make_unique<FileSystemConnection>(spec, binding, std::move(root), git_metadata);
}

}  // namespace ctxk
