#pragma once

#include <utility>
#include <vector>

#include "ssldyn/eigen_dyn.hpp"
#include "ssldyn/hyper.hpp"

namespace ssldyn {

struct GridSpec {
  double psi_min = -0.2, psi_max = 0.5;
  double gamma_min = -0.2, gamma_max = 0.6;
  int nx = 40, ny = 40;

  void validate() const;
  double psi(int ix) const {
    return psi_min + (psi_max - psi_min) * ix / (nx - 1);
  }
  double gamma(int iy) const {
    return gamma_min + (gamma_max - gamma_min) * iy / (ny - 1);
  }
};

struct FieldSample {
  double psi, gamma, dpsi, dgamma;
};

/// rhs_reduced at every grid node, ordered row-major (iy * nx + ix).
std::vector<FieldSample> vector_field(const Hyper& hyper, const GridSpec& grid);

struct Polyline {
  std::vector<std::pair<double, double>> pts;  // (psi, gamma)
};

struct NullclineSet {
  std::vector<Polyline> psi_null;    // psi' = 0 branches (incl. psi = 0 line)
  std::vector<Polyline> gamma_null;  // gamma' = 0 curve
};

/// gamma' = 0 emitted explicitly as gamma = psi^3 {1-(1+s2) psi} / rho over
/// psi_range; psi' = 0 as the psi = 0 line plus, per gamma sample, the real
/// roots of (1+s2)(1+g^2) psi^2 - (1+g) psi + rho = 0. Requires rho > 0.
NullclineSet nullclines(const Hyper& hyper, const GridSpec& grid);

/// Basin-of-attraction map for the reduced dynamics: integrates every grid
/// node for `horizon` time units (rk4, step dt) and labels it by the nearest
/// sink within kAttractionRadius, else -1. Divergence (|psi| or |gamma| > 10)
/// labels -1 early. Nodes are independent and evaluated in parallel.
struct BasinMap {
  GridSpec grid;
  std::vector<int> labels;              // row-major, iy * nx + ix
  std::vector<Equilibrium> attractors;  // sinks
};

inline constexpr double kAttractionRadius = 0.02;
inline constexpr double kDivergenceBound = 10.0;

/// Default integration horizon; stretched at small rho where the slowest
/// stable eigenvalue is O(rho).
double default_basin_horizon(double rho);

BasinMap basin_map(const Hyper& hyper, const GridSpec& grid, double horizon,
                   double dt = 0.01);

/// Label for a single seed under the reduced dynamics (same rules).
int classify_seed(const Hyper& hyper, double psi0, double gamma0,
                  const std::vector<Equilibrium>& sinks, double horizon,
                  double dt = 0.01);

/// 1-D analogue over psi seeds for the univariate SimSiam dynamics; the
/// returned grid has ny = 1 and gamma fixed at 0.
BasinMap simsiam_basin(const Hyper& hyper, double psi_min, double psi_max,
                       int n, double horizon, double dt = 0.01);

int classify_seed_simsiam(const Hyper& hyper, double psi0,
                          const std::vector<Equilibrium>& sinks,
                          double horizon, double dt = 0.01);

}  // namespace ssldyn
