#include "chatnav/clock.hpp"

#include <thread>

namespace chatnav {

SystemClock::SystemClock()
    : epoch_at_start_(std::chrono::duration<double>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count()),
      steady_at_start_(std::chrono::steady_clock::now()) {}

double SystemClock::now() const {
  auto elapsed = std::chrono::steady_clock::now() - steady_at_start_;
  return epoch_at_start_ + std::chrono::duration<double>(elapsed).count();
}

void SystemClock::sleep_for(double seconds) {
  if (seconds > 0) {
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  }
}

double FakeClock::now() const {
  std::lock_guard lock(mutex_);
  return now_;
}

void FakeClock::advance(double seconds) {
  std::lock_guard lock(mutex_);
  if (seconds > 0) now_ += seconds;
}

void FakeClock::set(double t) {
  std::lock_guard lock(mutex_);
  if (t > now_) now_ = t;
}

std::shared_ptr<Clock> make_system_clock() { return std::make_shared<SystemClock>(); }

}  // namespace chatnav
