#include <algorithm>
#include <cctype>
#include <fstream>

#include "ctxk/error.hpp"
#include "ctxk/router.hpp"
#include "ctxk/text.hpp"

namespace ctxk {

namespace {

const std::set<std::string, std::less<>> kPronouns = {"they", "them", "their", "theirs", "it", "its",
                                                      "he",   "him",  "his",   "she",    "her", "hers"};

struct Word {
  std::string text;
  bool capitalized = false;
  bool all_caps = false;
  bool has_digit = false;
};

std::vector<Word> split_words(std::string_view s) {
  std::vector<Word> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    Word w;
    w.text = cur;
    w.capitalized = std::isupper(static_cast<unsigned char>(cur.front())) != 0;
    w.all_caps = std::none_of(cur.begin(), cur.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)); });
    w.has_digit = std::any_of(cur.begin(), cur.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    out.push_back(std::move(w));
    cur.clear();
  };
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += c;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace

bool is_pronoun(std::string_view lower_word) { return kPronouns.count(lower_word) > 0; }

Taxonomy Taxonomy::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(errc::kSchemaError, "taxonomy must be an object of domain to keyword list");
  Taxonomy t;
  for (const auto& [domain, list] : j.items()) {
    if (!list.is_array()) throw Error(errc::kSchemaError, "keyword list expected", domain);
    auto& kws = t.keywords[domain];
    for (const auto& k : list) {
      if (!k.is_string()) throw Error(errc::kSchemaError, "keyword must be a string", domain);
      kws.push_back(text::to_lower(k.get<std::string>()));
    }
  }
  return t;
}

Taxonomy Taxonomy::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(errc::kNotFound, "cannot read " + file.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::kSyntaxError, e.what(), file.string());
  }
}

nlohmann::ordered_json Taxonomy::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [d, kws] : keywords) j[d] = kws;
  return j;
}

int Taxonomy::domain_frequency(std::string_view keyword) const {
  int n = 0;
  for (const auto& [_, kws] : keywords) {
    if (std::find(kws.begin(), kws.end(), keyword) != kws.end()) ++n;
  }
  return n;
}

std::uint64_t Taxonomy::fingerprint() const {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (const auto& [d, kws] : keywords) {
    mix(d);
    for (const auto& k : kws) mix(k);
  }
  return h;
}

Intent classify_intent(std::string_view query, const Taxonomy& taxonomy,
                       const std::optional<std::string>& last_entity,
                       const std::set<std::string>& known_entities) {
  Intent intent;
  intent.raw_query = std::string(query);

  const auto words = split_words(query);
  std::string resolved;
  std::vector<std::string> entities;
  auto add_entity = [&](const std::string& e) {
    if (std::find(entities.begin(), entities.end(), e) == entities.end()) entities.push_back(e);
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    const auto lower = text::to_lower(w.text);
    std::string emitted = w.text;
    if (last_entity && is_pronoun(lower)) {
      emitted = *last_entity;
      add_entity(*last_entity);
    } else if (known_entities.count(lower)) {
      std::string e = lower;
      e.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(e.front())));
      add_entity(e);
    } else if (i > 0 && w.capitalized && !w.all_caps && !w.has_digit && !text::is_stopword(lower) &&
               taxonomy.domain_frequency(lower) == 0) {
      add_entity(w.text);
    }
    if (!resolved.empty()) resolved += ' ';
    resolved += emitted;
  }
  intent.resolved_query = resolved;
  intent.entities = std::move(entities);

  std::map<std::string, double> score;
  double total = 0.0;
  std::set<std::string> seen;
  for (const auto& tok : text::tokenize(resolved)) {
    if (!seen.insert(tok).second) continue;
    const int k = taxonomy.domain_frequency(tok);
    if (k == 0) continue;
    for (const auto& [d, kws] : taxonomy.keywords) {
      if (std::find(kws.begin(), kws.end(), tok) != kws.end()) {
        score[d] += 1.0 / k;
        total += 1.0 / k;
      }
    }
  }
  for (const auto& [d, s] : score) {
    if (s > 0) intent.domains.push_back({d, s / total});
  }
  std::stable_sort(intent.domains.begin(), intent.domains.end(), [](const DomainScore& a, const DomainScore& b) {
    return a.confidence > b.confidence;
  });
  return intent;
}

}  // namespace ctxk
