#pragma once

#include <cmath>
#include <concepts>
#include <string>
#include <utility>

#include "ssldyn/errors.hpp"
#include "ssldyn/trajectory.hpp"

namespace ssldyn {

enum class Method { euler, rk4 };

inline double state_norm(double x) { return std::abs(x); }
inline bool state_finite(double x) { return std::isfinite(x); }

// Dense vector/matrix states (e.g. Eigen types) expose these members.
template <class State>
  requires requires(const State& s) { { s.norm() } -> std::convertible_to<double>; }
double state_norm(const State& s) {
  return s.norm();
}
template <class State>
  requires requires(const State& s) { { s.allFinite() } -> std::convertible_to<bool>; }
bool state_finite(const State& s) {
  return s.allFinite();
}

namespace detail {

template <class State, class Rhs>
State step_once(const State& y, double dt, Method method, const Rhs& rhs) {
  if (method == Method::euler) {
    return y + dt * rhs(y);
  }
  State k1 = rhs(y);
  State k2 = rhs(y + (0.5 * dt) * k1);
  State k3 = rhs(y + (0.5 * dt) * k2);
  State k4 = rhs(y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Fixed-step integration of y' = rhs(y) over `steps` steps of size `dt`.
/// Records the state every `stride` steps (0 = automatic stride rule) plus
/// the final step; `diag(t, y, out)` may append named scalars at each
/// recorded step. Any non-finite entry or norm above `divergence_norm`
/// aborts with a DivergenceError carrying the last finite step index.
template <class State, class Rhs, class Diag>
Trajectory<State> integrate_fixed(const State& init, const Rhs& rhs, double dt,
                                  long steps, Method method, long stride,
                                  const Diag& diag,
                                  double divergence_norm = 1e8) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ValidationError("integrate: dt must be positive and finite");
  if (steps < 1) throw ValidationError("integrate: steps must be >= 1");
  if (stride <= 0) stride = record_stride(steps);

  Trajectory<State> traj;
  State y = init;
  if (!state_finite(y)) throw ValidationError("integrate: non-finite initial state");

  auto record = [&](long k) {
    traj.times.push_back(k * dt);
    traj.states.push_back(y);
    diag(k * dt, y, traj.diagnostics);
  };
  record(0);
  for (long k = 1; k <= steps; ++k) {
    y = detail::step_once(y, dt, method, rhs);
    if (!state_finite(y) || state_norm(y) > divergence_norm)
      throw DivergenceError(
          "integrate: state diverged at step " + std::to_string(k), k - 1);
    if (k % stride == 0 || k == steps) record(k);
  }
  return traj;
}

struct NoDiag {
  template <class State>
  void operator()(double, const State&,
                  std::map<std::string, std::vector<double>>&) const {}
};

}  // namespace ssldyn
