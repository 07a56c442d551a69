#pragma once

#include <chrono>

#include "anomkit/errors.hpp"

namespace anomkit {

// Cooperative time budget. Long-running fits check it in their outer loops
// and abort with TimeoutError; the benchmark turns that into a DNF row.
class Deadline {
 public:
  Deadline() = default;

  static Deadline after_seconds(double seconds) {
    Deadline d;
    d.enabled_ = true;
    d.at_ = std::chrono::steady_clock::now() +
            std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                std::chrono::duration<double>(seconds));
    return d;
  }

  static const Deadline& none() {
    static const Deadline d;
    return d;
  }

  bool expired() const {
    return enabled_ && std::chrono::steady_clock::now() > at_;
  }

  void check() const {
    if (expired()) throw TimeoutError("time budget exceeded");
  }

 private:
  bool enabled_ = false;
  std::chrono::steady_clock::time_point at_{};
};

}  // namespace anomkit
