#include "ctxk/glob.hpp"

#include <vector>

namespace ctxk {

namespace {

constexpr std::string_view kAssigned = "${assigned}";

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto slash = s.find('/', start);
    if (slash == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, slash - start));
    start = slash + 1;
  }
}

// Classic iterative wildcard match with single-star backtracking.
bool segment_match(std::string_view pat, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pat.size() && pat[p] == '*') {
      star = p++;
      mark = t;
    } else if (p < pat.size() && pat[p] == text[t]) {
      ++p;
      ++t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

bool match_concrete(std::string_view pattern, std::string_view path) {
  if (pattern == "*") return true;
  const auto pats = split(pattern);
  const auto segs = split(path);
  if (pats.size() != segs.size()) return false;
  for (std::size_t i = 0; i < pats.size(); ++i) {
    if (!segment_match(pats[i], segs[i])) return false;
  }
  return true;
}

std::string substitute(std::string_view pattern, std::string_view value) {
  std::string out;
  std::size_t start = 0;
  while (true) {
    const auto at = pattern.find(kAssigned, start);
    if (at == std::string_view::npos) break;
    out.append(pattern.substr(start, at - start));
    out.append(value);
    start = at + kAssigned.size();
  }
  out.append(pattern.substr(start));
  return out;
}

}  // namespace

bool glob_uses_assigned(std::string_view pattern) {
  return pattern.find(kAssigned) != std::string_view::npos;
}

bool valid_glob(std::string_view pattern, std::string* why) {
  auto fail = [&](const char* reason) {
    if (why) *why = reason;
    return false;
  };
  if (pattern.empty()) return fail("empty pattern");
  if (pattern.front() == '/') return fail("absolute paths are not allowed");
  if (pattern.find("**") != std::string_view::npos) return fail("'**' is not supported");
  for (auto seg : split(pattern)) {
    if (seg.empty()) return fail("empty path segment");
  }
  // Any "${" must begin the one supported variable.
  std::size_t at = 0;
  while ((at = pattern.find("${", at)) != std::string_view::npos) {
    if (pattern.substr(at, kAssigned.size()) != kAssigned) return fail("unknown variable");
    at += kAssigned.size();
  }
  return true;
}

bool glob_match(std::string_view pattern, std::string_view path, std::span<const std::string> assigned) {
  if (!glob_uses_assigned(pattern)) return match_concrete(pattern, path);
  for (const auto& value : assigned) {
    // An assigned value must stay within one segment.
    if (value.empty() || value.find('/') != std::string::npos) continue;
    if (match_concrete(substitute(pattern, value), path)) return true;
  }
  return false;
}

}  // namespace ctxk
