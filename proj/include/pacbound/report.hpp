#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>

namespace pacbound {

/// Outcome of any bound calculator. `bound` is reported raw; `clipped` is the
/// probability-scale value; `vacuous` flags clipped >= 1/2 (blind guessing).
struct BoundReport {
  std::string method;
  double bound = 0.0;
  double clipped = 0.0;
  std::optional<double> lambda_opt;
  std::optional<int> k_opt;
  bool vacuous = false;
  bool infinite = false;
  std::map<std::string, double> inputs;
  std::map<std::string, double> extras;

  void finalize() {
    clipped = std::clamp(bound, 0.0, 1.0);
    vacuous = clipped >= 0.5;
  }
};

}  // namespace pacbound
