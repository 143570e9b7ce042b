#include "ctxk/freshness_state.hpp"

namespace ctxk {

std::string_view to_string(FreshnessState s) {
  switch (s) {
    case FreshnessState::fresh: return "fresh";
    case FreshnessState::stale: return "stale";
    case FreshnessState::expired: return "expired";
    case FreshnessState::conflicted: return "conflicted";
  }
  return "fresh";
}

std::string_view to_string(DeltaType t) {
  switch (t) {
    case DeltaType::source_disconnected: return "source_disconnected";
    case DeltaType::context_stale: return "context_stale";
    case DeltaType::permission_change: return "permission_change";
    case DeltaType::operator_unhealthy: return "operator_unhealthy";
    case DeltaType::anomaly: return "anomaly";
    case DeltaType::reliability_drift: return "reliability_drift";
  }
  return "context_stale";
}

std::optional<DeltaType> parse_delta_type(std::string_view s) {
  for (auto t : {DeltaType::source_disconnected, DeltaType::context_stale, DeltaType::permission_change,
                 DeltaType::operator_unhealthy, DeltaType::anomaly, DeltaType::reliability_drift}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

bool delta_implemented(DeltaType t) {
  return t == DeltaType::source_disconnected || t == DeltaType::context_stale ||
         t == DeltaType::permission_change;
}

FreshnessState age_state(const FreshnessRecord& r, Instant now) {
  const auto age = now - r.last_verified;
  const auto max_age = std::chrono::duration_cast<Millis>(r.governing_policy.max_age);
  if (age <= max_age) return FreshnessState::fresh;
  if (age <= kExpiredFactor * max_age) return FreshnessState::stale;
  return FreshnessState::expired;
}

FreshnessState freshness_state(const FreshnessRecord& r, Instant now) {
  if (r.live_versions >= 2) return FreshnessState::conflicted;
  return age_state(r, now);
}

}  // namespace ctxk
