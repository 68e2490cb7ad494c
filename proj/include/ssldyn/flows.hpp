#pragma once

#include "ssldyn/hyper.hpp"
#include "ssldyn/integrate.hpp"
#include "ssldyn/matrix_params.hpp"
#include "ssldyn/trajectory.hpp"

namespace ssldyn {

/// Closed-form expectation of the population loss
///   1/2 E[ ||Wh Wf x1 - Vf x2||^2 (+ ||Wg Wh Wf x1 - Vf x||^2) ]
/// under x ~ N(0, I), x1, x2 ~ N(x, sigma2 I). Stop-gradient branches read
/// the encoder from `target` (Vf); online branches read `online`. SimSiam
/// mode (wg absent) evaluates the first term only.
double expected_loss(const MatrixParams& online, const MatrixParams& target,
                     const Hyper& hyper);

/// The two terms of expected_loss separately (term2 = 0 in SimSiam mode).
std::pair<double, double> expected_loss_terms(const MatrixParams& online,
                                              const MatrixParams& target,
                                              const Hyper& hyper);

/// Exact analytic gradient of expected_loss with respect to the online
/// parameters, target held fixed (no weight-decay term). This is the field
/// a finite-difference oracle of expected_loss reproduces. Note: its g-block
/// differs from the published flow below by a leading Wg factor.
MatrixParams loss_gradient(const MatrixParams& online,
                           const MatrixParams& target, const Hyper& hyper);

/// The published two-predictor matrix flow (including the -rho W terms):
///   Wf' = -Wh^T {(1+s2)(I + Wg^T Wg) Wh - (I + Wg^T)} Wf        - rho Wf
///   Wg' = -{(1+s2) Wh - I} Wf Wf^T Wh^T                         - rho Wg
///   Wh' = -{(1+s2)(I + Wg^T Wg) Wh - (I + Wg^T)} Wf Wf^T        - rho Wh
/// Requires wg present.
MatrixParams grad_flow_rhs(const MatrixParams& params, const Hyper& hyper);

/// The encoder+predictor (SimSiam) flow: the flow above with every Wg term
/// deleted. Requires wg absent.
MatrixParams simsiam_grad_flow_rhs(const MatrixParams& params,
                                   const Hyper& hyper);

/// Dispatches on wg presence.
MatrixParams flow_rhs(const MatrixParams& params, const Hyper& hyper);

/// Fixed-step integration of flow_rhs. Diagnostics per recorded step:
/// "loss" (expected_loss at target = current state) and Frobenius norms
/// "wf_norm", "wh_norm" (+ "wg_norm" when g is present). stride 0 applies
/// the default recording rule.
Trajectory<MatrixParams> integrate_flow(const MatrixParams& init,
                                        const Hyper& hyper, double dt,
                                        long steps, Method method,
                                        long stride = 0);

}  // namespace ssldyn
