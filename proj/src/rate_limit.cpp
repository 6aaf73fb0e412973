#include "metaphor/rate_limit.hpp"

#include <algorithm>

#include "metaphor/errors.hpp"

namespace metaphor {

RequestGate::RequestGate(std::size_t max_concurrent, std::size_t per_minute_budget)
    : max_concurrent_(max_concurrent), budget_(per_minute_budget) {
  if (max_concurrent_ == 0) throw ArgumentError("concurrency cap must be at least 1");
}

void RequestGate::acquire() {
  std::unique_lock lock(mu_);
  for (;;) {
    cv_.wait(lock, [&] { return in_flight_ < max_concurrent_; });
    if (budget_ == 0) break;
    const auto now = Clock::now();
    while (!started_.empty() && now - started_.front() >= std::chrono::minutes(1)) started_.pop_front();
    if (started_.size() < budget_) break;
    cv_.wait_until(lock, started_.front() + std::chrono::minutes(1));
  }
  ++in_flight_;
  peak_ = std::max(peak_, in_flight_);
  if (budget_ != 0) started_.push_back(Clock::now());
}

void RequestGate::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_all();
}

std::size_t RequestGate::peak_in_flight() const {
  std::lock_guard lock(mu_);
  return peak_;
}

}  // namespace metaphor
