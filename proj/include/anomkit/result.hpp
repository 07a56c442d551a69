#pragma once

#include <string>
#include <vector>

namespace anomkit {

// Per-row outcome of one detector run. `flags` is the authoritative anomaly
// verdict; the score/threshold semantics are method-specific (documented per
// detector: distance-style methods flag score > threshold, decision-value
// methods flag score < threshold).
struct AnomalyResult {
  std::string method;
  std::vector<double> scores;
  std::vector<bool> flags;
  double threshold = 0.0;
  double runtime_seconds = 0.0;

  std::size_t flagged_count() const {
    std::size_t c = 0;
    for (bool f : flags) c += f ? 1 : 0;
    return c;
  }
};

}  // namespace anomkit
