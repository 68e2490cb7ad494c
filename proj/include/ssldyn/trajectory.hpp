#pragma once

#include <map>
#include <string>
#include <vector>

namespace ssldyn {

/// Time-stamped states emitted by an integrator, with named per-step
/// diagnostic scalars (all series share `times`' stamps).
template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::map<std::string, std::vector<double>> diagnostics;

  long size() const { return static_cast<long>(times.size()); }
};

/// Recording stride: every step up to 10^4 steps, else every
/// ceil(steps/10^4)-th step (the final step is always recorded).
inline long record_stride(long steps, long cap = 10000) {
  if (steps <= cap) return 1;
  return (steps + cap - 1) / cap;
}

}  // namespace ssldyn
