#include "ctxk/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cmath>
#include <map>

namespace ctxk::text {

namespace {

constexpr std::array<std::string_view, 64> kStopwords = {
    "a",     "about", "all",   "an",    "and",   "any",   "are",   "as",    "at",    "be",
    "by",    "can",   "do",    "does",  "for",   "from",  "get",   "give",  "has",   "have",
    "how",   "i",     "in",    "is",    "it",    "its",   "me",    "my",    "of",    "on",
    "or",    "our",   "please","show",  "so",    "tell",  "than",  "that",  "the",   "their",
    "them",  "there", "these", "they",  "this",  "to",    "up",    "us",    "was",   "we",
    "were",  "what",  "when",  "where", "which", "who",   "why",   "will",  "with",  "you",
    "your",  "should","would", "current"};

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_stopword(std::string_view w) {
  return std::find(kStopwords.begin(), kStopwords.end(), w) != kStopwords.end();
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : s) {
    if (is_word_byte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  auto all = words(s);
  std::vector<std::string> out;
  out.reserve(all.size());
  for (auto& w : all) {
    if (w.size() < 2 || is_stopword(w)) continue;
    out.push_back(std::move(w));
  }
  return out;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::size_t token_count(std::string_view s) { return (utf8_length(s) + 3) / 4; }

std::string truncate_to_tokens(std::string_view s, std::size_t tokens) {
  const std::size_t max_chars = tokens * 4;
  std::size_t chars = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if ((c & 0xC0) != 0x80) {
      if (chars == max_chars) return std::string(s.substr(0, i));
      ++chars;
    }
  }
  return std::string(s);
}

std::size_t bucket(std::string_view term) {
  // FNV-1a, 64-bit.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : term) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h % kVectorDim);
}

std::vector<double> term_vector(std::string_view s) {
  std::map<std::string, int> tf;
  for (auto& t : tokenize(s)) ++tf[t];
  std::vector<double> v(kVectorDim, 0.0);
  for (const auto& [term, n] : tf) v[bucket(term)] += 1.0 + std::log(static_cast<double>(n));
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

std::vector<double> idf(std::span<const std::vector<double>> docs) {
  std::vector<double> out(kVectorDim, 0.0);
  std::vector<std::size_t> df(kVectorDim, 0);
  for (const auto& d : docs) {
    for (std::size_t i = 0; i < kVectorDim && i < d.size(); ++i) {
      if (d[i] != 0.0) ++df[i];
    }
  }
  const double n = static_cast<double>(docs.size());
  for (std::size_t i = 0; i < kVectorDim; ++i) {
    out[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i]))) + 1.0;
  }
  return out;
}

std::vector<double> reweight(std::span<const double> v, std::span<const double> weights) {
  std::vector<double> out(v.size(), 0.0);
  double norm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i] * (i < weights.size() ? weights[i] : 1.0);
    norm += out[i] * out[i];
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : out) x /= norm;
  }
  return out;
}

}  // namespace ctxk::text
