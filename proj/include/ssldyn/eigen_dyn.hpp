#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "ssldyn/hyper.hpp"
#include "ssldyn/integrate.hpp"
#include "ssldyn/trajectory.hpp"

namespace ssldyn {

/// Joint eigenvalue state: phi (Gram eigenvalue), psi (predictor h),
/// gamma (predictor g), in the aligned eigenbasis.
struct EigenState {
  double phi = 0.0;
  double psi = 0.0;
  double gamma = 0.0;
};

inline EigenState operator+(const EigenState& a, const EigenState& b) {
  return {a.phi + b.phi, a.psi + b.psi, a.gamma + b.gamma};
}
inline EigenState operator*(double c, const EigenState& s) {
  return {c * s.phi, c * s.psi, c * s.gamma};
}
inline double state_norm(const EigenState& s) {
  return std::sqrt(s.phi * s.phi + s.psi * s.psi + s.gamma * s.gamma);
}
inline bool state_finite(const EigenState& s) {
  return std::isfinite(s.phi) && std::isfinite(s.psi) && std::isfinite(s.gamma);
}

/// Joint (phi, psi, gamma) dynamics:
///   phi'   = -2 psi phi {(1+s2)(1+g^2) psi - (1+g)} - 2 rho phi
///   psi'   = -  phi     {(1+s2)(1+g^2) psi - (1+g)} -   rho psi
///   gamma' = -psi phi   {(1+s2) psi - 1}            -   rho gamma
EigenState rhs_full(const EigenState& s, const Hyper& hyper);

/// Reduced dynamics on the invariant parabola phi = psi^2:
///   psi'   = {(1+g) - (1+s2)(1+g^2) psi} psi^2 - rho psi
///   gamma' = {1 - (1+s2) psi} psi^3           - rho gamma
Eigen::Vector2d rhs_reduced(double psi, double gamma, const Hyper& hyper);

/// Univariate SimSiam dynamics: psi' = {1 - (1+s2) psi} psi^2 - rho psi.
double rhs_simsiam(double psi, const Hyper& hyper);

/// Analytic Jacobian of rhs_reduced at (psi, gamma).
Eigen::Matrix2d jacobian_reduced(double psi, double gamma, const Hyper& hyper);

Trajectory<EigenState> integrate_eigen_full(const EigenState& init,
                                            const Hyper& hyper, double dt,
                                            long steps, Method method,
                                            long stride = 0);
Trajectory<Eigen::Vector2d> integrate_reduced(const Eigen::Vector2d& init,
                                              const Hyper& hyper, double dt,
                                              long steps, Method method,
                                              long stride = 0);
Trajectory<double> integrate_simsiam(double init, const Hyper& hyper,
                                     double dt, long steps, Method method,
                                     long stride = 0);

enum class StabilityClass { sink, source, saddle, degenerate };

const char* to_string(StabilityClass k);

/// Fixed point with its Jacobian spectrum. For the univariate SimSiam system
/// jac_eigs holds one number; for the planar system two.
struct Equilibrium {
  double psi = 0.0;
  double gamma = 0.0;
  std::vector<std::complex<double>> jac_eigs;
  StabilityClass klass = StabilityClass::degenerate;
};

/// Classification tolerance on Jacobian real parts.
inline constexpr double kStabilityTol = 1e-9;

StabilityClass classify(const std::vector<std::complex<double>>& eigs,
                        double tol = kStabilityTol);

/// SimSiam equilibria: psi = 0 plus the real roots of
/// (1+s2) psi^2 - psi + rho = 0 when 1 - 4 rho (1+s2) >= 0, each classified
/// by the sign of d(psi')/dpsi.
std::vector<Equilibrium> simsiam_equilibria(const Hyper& hyper);

/// Weight decay at which the SimSiam pair of nonzero equilibria appears:
/// 1 / (4 (1+s2)).
double simsiam_critical_rho(double sigma2);

/// Default psi search window half-width for the reduced system.
double default_psi_window(double sigma2);

/// All equilibria of the reduced system with psi in [psi_lo, psi_hi]:
/// substitutes the gamma-nullcline gamma(psi) = psi^3 {1-(1+s2) psi} / rho
/// into psi' = 0, brackets sign changes on a dense grid, polishes by
/// bisection + Newton, dedupes within 1e-8, always includes the origin, and
/// classifies via the analytic planar Jacobian. Requires rho > 0 and
/// resolution >= 100.
std::vector<Equilibrium> find_equilibria_reduced(const Hyper& hyper,
                                                 double psi_lo, double psi_hi,
                                                 int resolution);
std::vector<Equilibrium> find_equilibria_reduced(const Hyper& hyper,
                                                 int resolution = 4000);

enum class RegimeKind { strong, medium, light, weak, other };

const char* to_string(RegimeKind k);

struct RegimeReport {
  Hyper hyper;
  std::vector<Equilibrium> equilibria;
  int sink_count = 0;
  RegimeKind regime = RegimeKind::other;
};

/// Weight-decay regime by sink count: 1/2/3/4 -> strong/medium/light/weak.
RegimeReport regime(const Hyper& hyper);

/// SimSiam analogue (sink count of the univariate system).
RegimeReport regime_simsiam(const Hyper& hyper);

struct RhoSweep {
  std::vector<std::pair<double, RegimeReport>> grid;  // ascending rho
  std::vector<double> boundaries;                     // ascending
};

/// Evaluates the regime on a log-spaced rho grid and bisects every
/// sink-count change to relative tolerance 1e-4.
RhoSweep sweep_rho(double sigma2, double rho_min, double rho_max, int grid_n);
RhoSweep sweep_rho_simsiam(double sigma2, double rho_min, double rho_max,
                           int grid_n);

}  // namespace ssldyn
