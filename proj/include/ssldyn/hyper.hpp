#pragma once

#include <cmath>

#include "ssldyn/errors.hpp"

namespace ssldyn {

/// Hyperparameter pair shared by every dynamical system in the lab:
/// augmentation variance sigma^2 and weight-decay intensity rho.
struct Hyper {
  double sigma2 = 0.0;
  double rho = 0.0;

  void validate() const {
    if (!std::isfinite(sigma2) || !std::isfinite(rho))
      throw ValidationError("hyper: sigma2 and rho must be finite");
    if (sigma2 < 0.0) throw ValidationError("hyper: sigma2 must be >= 0");
    if (rho < 0.0) throw ValidationError("hyper: rho must be >= 0");
  }

  /// 1 + sigma^2, the second moment of an augmented view.
  double a() const { return 1.0 + sigma2; }
};

}  // namespace ssldyn
