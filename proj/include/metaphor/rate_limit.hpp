#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>

namespace metaphor {

/// Caps in-flight provider calls and the number of calls started per rolling
/// minute. A budget of 0 disables the per-minute limit.
class RequestGate {
 public:
  RequestGate(std::size_t max_concurrent, std::size_t per_minute_budget);

  class Permit {
   public:
    explicit Permit(RequestGate& gate) : gate_(&gate) { gate_->acquire(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;
    ~Permit() { gate_->release(); }

   private:
    RequestGate* gate_;
  };

  Permit enter() { return Permit(*this); }
  std::size_t max_concurrent() const { return max_concurrent_; }
  std::size_t peak_in_flight() const;

 private:
  void acquire();
  void release();

  using Clock = std::chrono::steady_clock;

  std::size_t max_concurrent_;
  std::size_t budget_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  std::size_t peak_ = 0;
  std::deque<Clock::time_point> started_;
};

}  // namespace metaphor
