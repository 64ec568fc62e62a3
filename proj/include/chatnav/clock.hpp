#pragma once

#include <chrono>
#include <memory>
#include <mutex>

namespace chatnav {

// Time source in seconds since the Unix epoch. All stamps on the bus and in
// interaction logs come from one of these.
class Clock {
 public:
  virtual ~Clock() = default;

  virtual double now() const = 0;

  // Blocks (real clock) or advances time (fake clock).
  virtual void sleep_for(double seconds) = 0;
};

// Epoch time anchored once at construction and advanced by the steady clock,
// so readings never go backwards even if the wall clock is adjusted.
class SystemClock final : public Clock {
 public:
  SystemClock();

  double now() const override;
  void sleep_for(double seconds) override;

 private:
  double epoch_at_start_;
  std::chrono::steady_clock::time_point steady_at_start_;
};

// Manually driven clock for deterministic tests and accelerated simulation.
class FakeClock final : public Clock {
 public:
  explicit FakeClock(double start = 0.0) : now_(start) {}

  double now() const override;
  void sleep_for(double seconds) override { advance(seconds); }

  void advance(double seconds);
  void set(double t);

 private:
  mutable std::mutex mutex_;
  double now_;
};

std::shared_ptr<Clock> make_system_clock();

}  // namespace chatnav
