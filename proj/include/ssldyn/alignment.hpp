#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "ssldyn/eigen_dyn.hpp"
#include "ssldyn/hyper.hpp"
#include "ssldyn/matrix_params.hpp"
#include "ssldyn/trajectory.hpp"

namespace ssldyn {

/// The three pairwise commutators of (Phi, Wg, Wh) with Phi = wf wf^T:
/// c1 = [Phi, Wg], c2 = [Phi, Wh], c3 = [Wg, Wh].
struct CommutatorSnapshot {
  Eigen::MatrixXd c1, c2, c3;
  std::array<double, 3> norms{};  // Frobenius
};

CommutatorSnapshot commutators(const MatrixParams& params);

/// Column-stacked commutators (vec c1; vec c2; vec c3), length 3 m^2.
Eigen::VectorXd stack_commutators(const MatrixParams& params);

/// The 3m^2 x 3m^2 block operator K such that, along the two-predictor
/// matrix flow with symmetric wg and wh, the stacked commutators satisfy
/// Xi' = -(3 rho I + K) Xi exactly. Column-stacking convention
/// vec(A X B) = (B^T (x) A) vec X. The lower-right block carries a -rho I
/// shift: [Wg, Wh] carries weight decay 2 rho, not 3 rho, so the shift keeps
/// the uniform 3 rho I wrapper exact. Inputs must be symmetric within 1e-10.
Eigen::MatrixXd build_K(const MatrixParams& params, const Hyper& hyper);

/// Alignment diagnostics along an integrated matrix flow. All series share
/// `times`. parabola_residuals[k][i] = psi_i^2 - u_i^T Phi u_i over the
/// eigenpairs (psi_i, u_i) of sym(wh), sorted by eigenvalue.
struct AlignmentReport {
  std::vector<double> times;
  std::vector<std::array<double, 3>> comm_norms;   // |c1|, |c2|, |c3|
  std::vector<double> xi_norm;                     // |(vec c1;vec c2;vec c3)|
  std::vector<double> min_sym_eig;                 // lambda_min sym(3rhoI+K)
  std::vector<std::vector<double>> parabola_residuals;
  std::vector<double> asymmetry;                   // max |w - w^T| over wg, wh
  double fitted_decay_rate = 0.0;   // slope of log xi_norm, tail half
  bool decay_rate_defined = false;
  double parabola_rate = 0.0;       // slope of log sum |residual|, tail half
  bool parabola_rate_defined = false;
};

/// Integrates the matrix flow (rk4) from `init` and records the report.
/// K is evaluated on the symmetrized state (the operator is defined under
/// the symmetry assumption; the integrated state may drift while
/// commutators are nonzero -- the drift is recorded in `asymmetry`).
AlignmentReport track_alignment(const MatrixParams& init, const Hyper& hyper,
                                double dt, long steps, long stride = 0);

/// Exponential-law fit of psi(t)^2 - phi(t) along a joint eigenvalue
/// trajectory: the residual obeys d/dt (psi^2 - phi) = -2 rho (psi^2 - phi)
/// exactly, so log |residual| is linear in t.
struct ParabolaFit {
  double c0 = 0.0;           // fitted residual at t = 0
  double rate = 0.0;         // fitted d log|residual| / dt
  double max_residual = 0.0; // max |residual - c0 exp(rate t)|
  bool rate_defined = false; // false when the residual is identically ~0
};

ParabolaFit parabola_fit(const Trajectory<EigenState>& traj);

}  // namespace ssldyn
