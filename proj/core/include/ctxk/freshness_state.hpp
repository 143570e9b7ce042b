#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ctxk/manifest.hpp"
#include "ctxk/time.hpp"

namespace ctxk {

enum class FreshnessState { fresh, stale, expired, conflicted };

std::string_view to_string(FreshnessState s);

// A unit expires at kExpiredFactor * maxAge since it was last verified.
inline constexpr int kExpiredFactor = 2;

struct FreshnessRecord {
  std::string unit_id;
  FreshnessState state = FreshnessState::fresh;
  Instant last_verified{};
  FreshnessPolicy governing_policy;
  int live_versions = 1;
};

// Drift between declared and observed state. Only the first three kinds are
// acted on; the rest parse but are reported as not implemented.
enum class DeltaType {
  source_disconnected,
  context_stale,
  permission_change,
  operator_unhealthy,
  anomaly,
  reliability_drift
};

std::string_view to_string(DeltaType t);
std::optional<DeltaType> parse_delta_type(std::string_view s);
bool delta_implemented(DeltaType t);

struct Delta {
  DeltaType type = DeltaType::context_stale;
  std::string target;
  Instant detected_at{};
  std::string detail;
};

// Age-only classification: fresh, stale or expired.
FreshnessState age_state(const FreshnessRecord& r, Instant now);

// age_state() unless two or more versions are live, which is conflicted.
FreshnessState freshness_state(const FreshnessRecord& r, Instant now);

}  // namespace ctxk
