#include "ctxk/router.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "ctxk/error.hpp"
#include "ctxk/text.hpp"

namespace ctxk {

double SignalBreakdown::get(Signal s) const {
  switch (s) {
    case Signal::semantic_relevance: return semantic_relevance;
    case Signal::recency: return recency;
    case Signal::authority: return authority;
    case Signal::user_relevance: return user_relevance;
  }
  return 0.0;
}

double recency_signal(Instant timestamp, Minutes max_age, Instant now) {
  if (max_age.count() <= 0) return 0.0;
  const double age = std::chrono::duration<double>(now - timestamp).count();
  const double scale = std::chrono::duration<double>(max_age).count();
  if (age <= 0) return 1.0;
  return std::exp(-age / scale);
}

double user_relevance_signal(std::string_view path, std::span<const std::string> assigned) {
  std::size_t start = 0;
  while (start <= path.size()) {
    auto end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    const auto seg = path.substr(start, end - start);
    for (const auto& a : assigned) {
      if (!a.empty() && seg == a) return 1.0;
    }
    start = end + 1;
  }
  return 0.25;
}

std::vector<RankedResult> rank(std::span<const Candidate> candidates, std::string_view query,
                               std::span<const std::string> assigned, const RoutingSpec& spec, Instant now) {
  std::vector<std::vector<double>> docs;
  docs.reserve(candidates.size());
  for (const auto& c : candidates) {
    docs.push_back(c.unit.vector.size() == text::kVectorDim ? c.unit.vector : text::term_vector(c.unit.content));
  }
  const auto weights = text::idf(docs);
  const auto q = text::reweight(text::term_vector(query), weights);

  std::vector<RankedResult> out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    RankedResult r;
    r.unit = c.unit;
    r.freshness = c.state;
    r.signals.semantic_relevance = text::cosine(q, text::reweight(docs[i], weights));
    r.signals.recency = recency_signal(c.unit.metadata.timestamp, c.max_age, now);
    r.signals.authority = std::clamp(c.unit.metadata.authority, 0.0, 1.0);
    r.signals.user_relevance = user_relevance_signal(c.unit.metadata.path, assigned);
    for (const auto& sw : spec.priority) r.score += sw.weight * r.signals.get(sw.signal);
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedResult& a, const RankedResult& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.signals.recency != b.signals.recency) return a.signals.recency > b.signals.recency;
    if (a.unit.metadata.path != b.unit.metadata.path) return a.unit.metadata.path < b.unit.metadata.path;
    if (a.unit.id != b.unit.id) return a.unit.id < b.unit.id;
    return a.unit.version > b.unit.version;
  });
  return out;
}

std::vector<RankedResult> apply_token_budget(std::vector<RankedResult> ranked, int budget) {
  std::vector<RankedResult> out;
  if (ranked.empty() || budget <= 0) return out;
  const auto cap = static_cast<std::size_t>(budget);
  std::size_t used = 0;
  for (auto& r : ranked) {
    const auto n = text::token_count(r.unit.content);
    if (out.empty() && n > cap) {
      r.unit.content = text::truncate_to_tokens(r.unit.content, cap);
      r.truncated = true;
      out.push_back(std::move(r));
      break;
    }
    if (used + n > cap) break;
    used += n;
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::ordered_json to_json(const Delivery& d) {
  auto round4 = [](double v) { return std::round(v * 1e4) / 1e4; };
  nlohmann::ordered_json j;
  j["audit_ref"] = d.audit_ref;
  j["denied"] = d.denied;
  if (!d.reason.empty()) j["reason"] = d.reason;
  nlohmann::ordered_json intent;
  intent["query"] = d.intent.raw_query;
  intent["resolved_query"] = d.intent.resolved_query;
  intent["domains"] = nlohmann::ordered_json::array();
  for (const auto& ds : d.intent.domains) {
    intent["domains"].push_back({{"domain", ds.domain}, {"confidence", round4(ds.confidence)}});
  }
  intent["entities"] = d.intent.entities;
  intent["cached"] = d.intent.cached;
  j["intent"] = std::move(intent);
  j["units"] = nlohmann::ordered_json::array();
  for (const auto& r : d.results) {
    nlohmann::ordered_json u;
    u["id"] = r.unit.id;
    u["version"] = r.unit.version;
    u["domain"] = r.unit.metadata.domain;
    u["path"] = r.unit.metadata.path;
    u["content"] = r.unit.content;
    u["author"] = r.unit.metadata.author;
    u["timestamp"] = format_rfc3339(r.unit.metadata.timestamp);
    u["sensitivity"] = to_string(r.unit.metadata.sensitivity);
    u["freshness"] = to_string(r.freshness);
    u["stale"] = r.freshness == FreshnessState::stale;
    u["conflicted"] = r.freshness == FreshnessState::conflicted;
    u["score"] = round4(r.score);
    u["signals"] = {{"semantic_relevance", round4(r.signals.semantic_relevance)},
                    {"recency", round4(r.signals.recency)},
                    {"authority", round4(r.signals.authority)},
                    {"user_relevance", round4(r.signals.user_relevance)}};
    u["truncated"] = r.truncated;
    j["units"].push_back(std::move(u));
  }
  return j;
}

Router::Router(Taxonomy taxonomy, Registry& registry, PermissionEngine& engine, AuditLog& audit, const Clock& clock)
    : taxonomy_(std::move(taxonomy)),
      taxonomy_version_(taxonomy_.fingerprint()),
      registry_(registry),
      engine_(engine),
      audit_(audit),
      clock_(clock) {}

void Router::set_known_entities(std::set<std::string> entities) {
  std::unique_lock lock(cache_mutex_);
  known_entities_.clear();
  for (const auto& e : entities) known_entities_.insert(text::to_lower(e));
  cache_.clear();
}

Intent Router::classify(std::string_view query, const std::optional<std::string>& last_entity) {
  if (classifier_) return classifier_(query, last_entity);
  // Co-reference depends on the session, so the cache key is the resolved query.
  Intent fresh;
  {
    std::shared_lock lock(cache_mutex_);
    fresh = classify_intent(query, taxonomy_, last_entity, known_entities_);
    auto it = cache_.find(fresh.resolved_query);
    if (it != cache_.end()) {
      Intent hit = it->second;
      hit.raw_query = fresh.raw_query;
      hit.cached = true;
      return hit;
    }
  }
  std::unique_lock lock(cache_mutex_);
  cache_.emplace(fresh.resolved_query, fresh);
  return fresh;
}

Delivery Router::route(std::string_view session_id, std::string_view query) {
  const auto now = clock_.now();
  const auto session = engine_.session(session_id);
  if (!session) throw Error(errc::kUnknownSession, "session " + std::string(session_id));

  auto event = [&](AuditKind kind, std::string outcome, std::map<std::string, std::string> detail) {
    AuditEvent e;
    e.at = now;
    e.kind = kind;
    e.session_id = session->id;
    e.user = session->user;
    e.agent_id = session->agent_id;
    e.domain = session->home_domain;
    e.outcome = std::move(outcome);
    e.detail = std::move(detail);
    return audit_.append(std::move(e));
  };

  event(AuditKind::context_requested, "received", {{"query_digest", sha256_hex(query).substr(0, 16)}});
  if (!session->live()) {
    event(AuditKind::context_denied, "denied", {{"reason", "killed"}});
    throw Error(errc::kSessionKilled, "session " + session->id + " is killed");
  }
  if (!engine_.available()) {
    event(AuditKind::context_denied, "denied", {{"reason", "fail_closed"}});
    throw Error(errc::kPermissionEngineUnavailable, "permission engine unavailable; request denied");
  }

  Delivery d;
  d.intent = classify(query, session->last_entity);
  std::vector<std::string> wanted;
  for (const auto& ds : d.intent.domains) wanted.push_back(ds.domain);
  if (wanted.empty()) wanted.push_back(session->home_domain);

  const auto reachable = engine_.reachable_domains(*session);
  for (const auto& dom : wanted) {
    if (!registry_.domain(dom)) continue;
    if (std::find(reachable.begin(), reachable.end(), dom) == reachable.end()) {
      d.unreachable_domains.push_back(dom);
    } else {
      d.routed_domains.push_back(dom);
    }
  }

  const auto qvec = text::term_vector(d.intent.resolved_query);
  std::vector<Candidate> candidates;
  for (const auto& dom : d.routed_domains) {
    for (auto& v : registry_.query_views(dom, {}, now)) {
      if (text::cosine(qvec, v.unit.vector) < options_.min_relevance) continue;
      if (!engine_.check_access(session->id, AccessOp::read, v.unit)) {
        ++d.permission_filtered;
        continue;
      }
      if (options_.freshness_filter && v.state == FreshnessState::expired) {
        ++d.expired_filtered;
        continue;
      }
      candidates.push_back(Candidate{std::move(v.unit), v.state, v.record.governing_policy.max_age});
    }
  }

  RoutingSpec spec;
  if (auto home = registry_.domain(session->home_domain)) spec = home->routing;
  auto ranked = rank(candidates, d.intent.resolved_query, session->assigned, spec, now);
  if (ranked.size() > options_.top_k) ranked.resize(options_.top_k);
  d.results = apply_token_budget(std::move(ranked), spec.token_budget);

  std::map<std::string, std::string> detail;
  std::string ids;
  for (const auto& r : d.results) {
    if (!ids.empty()) ids += ',';
    ids += r.unit.id + "@" + std::to_string(r.unit.version);
  }
  std::string doms;
  for (const auto& x : d.routed_domains) doms += (doms.empty() ? "" : ",") + x;
  detail["domains"] = doms;
  detail["permission_filtered"] = std::to_string(d.permission_filtered);
  detail["expired_filtered"] = std::to_string(d.expired_filtered);
  if (!d.unreachable_domains.empty()) {
    std::string u;
    for (const auto& x : d.unreachable_domains) u += (u.empty() ? "" : ",") + x;
    detail["unreachable"] = u;
  }
  if (d.results.empty()) {
    d.denied = true;
    d.reason = !d.unreachable_domains.empty() ? "cross_domain"
               : d.permission_filtered > 0    ? "permission"
                                              : "no_match";
    detail["reason"] = d.reason;
    d.audit_ref = event(AuditKind::context_denied, "denied", detail);
  } else {
    detail["units"] = ids;
    d.audit_ref = event(AuditKind::context_delivered, "delivered", detail);
  }
  if (!d.intent.entities.empty()) engine_.set_last_entity(session->id, d.intent.entities.back());
  return d;
}

}  // namespace ctxk
