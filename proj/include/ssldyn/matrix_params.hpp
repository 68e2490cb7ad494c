#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "ssldyn/errors.hpp"

namespace ssldyn {

/// Weight matrices of the linear analysis model. `wg` is absent in SimSiam
/// mode (encoder + single predictor); present for the two-predictor model.
struct MatrixParams {
  Eigen::MatrixXd wf;                 // encoder, m x d
  Eigen::MatrixXd wh;                 // predictor h, m x m
  std::optional<Eigen::MatrixXd> wg;  // predictor g, m x m

  long m() const { return wf.rows(); }
  long d() const { return wf.cols(); }
  bool has_g() const { return wg.has_value(); }

  void validate() const;
};

MatrixParams operator+(const MatrixParams& a, const MatrixParams& b);
MatrixParams operator*(double c, const MatrixParams& p);

double state_norm(const MatrixParams& p);  // Frobenius over all blocks
bool state_finite(const MatrixParams& p);

/// Gram matrix of the encoder, symmetrized against round-off.
Eigen::MatrixXd phi_of(const MatrixParams& p);

enum class InitKind { iid, symmetric, spectral };

/// Random parameters for experiments. `iid`: every entry N(0, scale^2).
/// `symmetric`: iid wf, symmetrized wg/wh. `spectral`: wf, wg, wh share a
/// random orthogonal eigenbasis with eigenvalues drawn uniformly from
/// [scale/4, scale] (requires d == m); such states are simultaneously
/// diagonalizable and stay on the aligned manifold under the flow.
MatrixParams random_params(long m, long d, InitKind kind, double scale,
                           std::uint64_t seed, bool with_g);

/// Parameters with prescribed spectra in a shared random orthogonal basis
/// (d == m). phi entries must be nonnegative; wf = Q diag(sqrt(phi)) Q^T.
MatrixParams spectral_params(const Eigen::VectorXd& phi,
                             const Eigen::VectorXd& psi,
                             const Eigen::VectorXd& gamma, std::uint64_t seed,
                             bool with_g);

}  // namespace ssldyn
