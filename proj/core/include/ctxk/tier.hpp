#pragma once

#include <optional>
#include <string_view>

namespace ctxk {

// Approval tiers, totally ordered from least to most restrictive.
// `excluded` operations cannot be requested by any agent.
enum class Tier { autonomous = 0, soft_approval = 1, strong_approval = 2, excluded = 3 };

constexpr bool at_least_as_restrictive(Tier a, Tier b) { return static_cast<int>(a) >= static_cast<int>(b); }
constexpr Tier most_restrictive(Tier a, Tier b) { return at_least_as_restrictive(a, b) ? a : b; }

// Manifest spelling: autonomous, soft-approval, strong-approval, excluded.
std::string_view to_string(Tier t);
std::optional<Tier> parse_tier(std::string_view s);

}  // namespace ctxk
