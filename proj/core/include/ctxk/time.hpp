#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace ctxk {

using Millis = std::chrono::milliseconds;
using Minutes = std::chrono::minutes;
using Instant = std::chrono::sys_time<Millis>;

// RFC 3339 UTC with millisecond precision: 2026-09-01T08:30:00.000Z
std::string format_rfc3339(Instant t);
// Accepts a trailing 'Z' or "+00:00"; fractional seconds optional.
std::optional<Instant> parse_rfc3339(std::string_view text);

// Manifest durations: a positive integer followed by one of m, h, d, y.
// A year is 365 days.
std::optional<Minutes> parse_duration(std::string_view text);
// Renders with the largest unit that divides the value exactly.
std::string format_duration(Minutes d);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Instant now() const = 0;
};

class SystemClock final : public Clock {
 public:
  Instant now() const override;
};

// Deterministic clock for tests and the experiment harness.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Instant start) : now_(start.time_since_epoch().count()) {}

  Instant now() const override { return Instant{Millis{now_.load()}}; }
  void set(Instant t) { now_.store(t.time_since_epoch().count()); }
  void advance(Millis d) { now_.fetch_add(d.count()); }

 private:
  std::atomic<Millis::rep> now_;
};

}  // namespace ctxk
