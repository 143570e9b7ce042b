#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <unistd.h>

#include "ctxk/manifest.hpp"
#include "ctxk/router.hpp"

namespace ctxk::testing {

inline std::filesystem::path data_dir() { return CTXK_TEST_DATA_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ctxk-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// Regex restatement of the glob dialect.
inline bool glob_oracle(const std::string& pattern, const std::string& path, const std::vector<std::string>& assigned) {
  if (pattern == "*") return true;
  std::vector<std::string> expansions;
  const std::string var = "${assigned}";
  if (pattern.find(var) != std::string::npos) {
    for (const auto& a : assigned) {
      std::string p = pattern;
      for (auto pos = p.find(var); pos != std::string::npos; pos = p.find(var)) p.replace(pos, var.size(), a);
      expansions.push_back(p);
    }
  } else {
    expansions.push_back(pattern);
  }
  for (const auto& p : expansions) {
    std::string re;
    for (char c : p) {
      if (c == '*') {
        re += "[^/]*";
      } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '/' || c == '_' || c == '-') {
        re += c;
      } else {
        re += '\\';
        re += c;
      }
    }
    if (std::regex_match(path, std::regex(re))) return true;
  }
  return false;
}

// Keyword-count restatement of intent classification: every distinct query
// term listed by k domains adds 1/k to each of them.
inline std::map<std::string, double> keyword_oracle(const std::string& query, const Taxonomy& taxonomy) {
  std::set<std::string> terms;
  std::string cur;
  for (char c : query + " ") {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      terms.insert(cur);
      cur.clear();
    }
  }
  std::map<std::string, double> score;
  for (const auto& t : terms) {
    int k = 0;
    for (const auto& [d, kws] : taxonomy.keywords) k += std::count(kws.begin(), kws.end(), t) > 0;
    if (k == 0) continue;
    for (const auto& [d, kws] : taxonomy.keywords) {
      if (std::count(kws.begin(), kws.end(), t)) score[d] += 1.0 / k;
    }
  }
  return score;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) s += a[i] * b[i];
  return s;
}

// Smallest manifest the parser accepts, with a file-system source at `root`.
inline std::string minimal_manifest(const std::string& name, const std::string& root) {
  return "apiVersion: context/v1\n"
         "kind: ContextDomain\n"
         "metadata:\n"
         "  name: " + name + "\n"
         "spec:\n"
         "  sources:\n"
         "    - name: docs\n"
         "      type: file-system\n"
         "      config: {root: \"" + root + "\"}\n"
         "      refresh: 1h\n"
         "  access:\n"
         "    roles:\n"
         "      - role: analyst\n"
         "        read: [\"*\"]\n"
         "        write: [\"*\"]\n";
}

}  // namespace ctxk::testing
