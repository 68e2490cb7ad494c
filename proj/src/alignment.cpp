#include "ssldyn/alignment.hpp"

#include <cmath>

#include "ssldyn/common.hpp"
#include "ssldyn/flows.hpp"

namespace ssldyn {

namespace {

Eigen::MatrixXd comm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a * b - b * a;
}

Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// A (+) B = A (x) B + B (x) A
Eigen::MatrixXd oplus(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return kron(a, b) + kron(b, a);
}

}  // namespace

CommutatorSnapshot commutators(const MatrixParams& params) {
  params.validate();
  if (!params.wg) throw ModeError("commutators: wg absent");
  const Eigen::MatrixXd phi = phi_of(params);
  CommutatorSnapshot s;
  s.c1 = comm(phi, *params.wg);
  s.c2 = comm(phi, params.wh);
  s.c3 = comm(*params.wg, params.wh);
  s.norms = {s.c1.norm(), s.c2.norm(), s.c3.norm()};
  return s;
}

Eigen::VectorXd stack_commutators(const MatrixParams& params) {
  const CommutatorSnapshot s = commutators(params);
  const long n = s.c1.size();
  Eigen::VectorXd xi(3 * n);
  xi.segment(0, n) = vec(s.c1);
  xi.segment(n, n) = vec(s.c2);
  xi.segment(2 * n, n) = vec(s.c3);
  return xi;
}

Eigen::MatrixXd build_K(const MatrixParams& params, const Hyper& hyper) {
  params.validate();
  hyper.validate();
  if (!params.wg) throw ModeError("build_K: wg absent");
  const Eigen::MatrixXd& wg = *params.wg;
  const Eigen::MatrixXd& wh = params.wh;
  if ((wg - wg.transpose()).cwiseAbs().maxCoeff() > 1e-10 ||
      (wh - wh.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw AssumptionError("build_K: wg and wh must be symmetric within 1e-10");

  const double a = hyper.a();
  const long m = params.m();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd Im2 = Eigen::MatrixXd::Identity(m * m, m * m);
  const Eigen::MatrixXd phi = phi_of(params);
  const Eigen::MatrixXd wg2 = wg * wg;
  const Eigen::MatrixXd M = wh * (I + wg2) * wh;

  const Eigen::MatrixXd K11 = a * oplus(I, M) - oplus(I, wh) - oplus(wg * wh, I);
  const Eigen::MatrixXd K12 = a * oplus(wh * phi, I) - kron(I, phi);
  const Eigen::MatrixXd K13 =
      oplus(phi, I) + oplus(wg * phi, I) -
      a * (oplus(phi * wh, I) + oplus(phi, wh) +
           (kron(phi, I) + kron(I, phi)) * oplus(wh * wg2, I));
  const Eigen::MatrixXd K21 =
      a * kron(phi * wh, I) * oplus(I, wg) - kron(phi, I);
  const Eigen::MatrixXd K22 = a * oplus(I, M) + a * kron(phi, I + wg2) -
                              oplus(I, wh) - oplus(wh * wg, I);
  const Eigen::MatrixXd K23 =
      a * (oplus(phi * wh, wh * wg) + oplus(phi * wh * wg, wh)) -
      oplus(phi, wh);
  const Eigen::MatrixXd K31 = -a * kron(I, (I + wg2) * wh) + kron(I, I + wg);
  const Eigen::MatrixXd K32 = -kron(wh, I - a * wh);
  const Eigen::MatrixXd K33 = a * kron(phi, I + wg2) - hyper.rho * Im2;

  Eigen::MatrixXd K(3 * m * m, 3 * m * m);
  K << K11, K12, K13, K21, K22, K23, K31, K32, K33;
  return K;
}

namespace {

MatrixParams symmetrized(const MatrixParams& p) {
  MatrixParams s = p;
  s.wh = 0.5 * (p.wh + p.wh.transpose()).eval();
  if (p.wg) s.wg = 0.5 * (*p.wg + p.wg->transpose()).eval();
  return s;
}

// Tail-half log-linear fit; skips values at or below the noise floor.
bool tail_log_fit(const std::vector<double>& t, const std::vector<double>& v,
                  double floor, double* slope) {
  std::vector<double> xs, ys;
  const size_t start = t.size() / 2;
  for (size_t i = start; i < t.size(); ++i) {
    if (v[i] > floor) {
      xs.push_back(t[i]);
      ys.push_back(std::log(v[i]));
    }
  }
  if (xs.size() < 3) return false;
  *slope = fit_line(xs, ys).slope;
  return true;
}

}  // namespace

AlignmentReport track_alignment(const MatrixParams& init, const Hyper& hyper,
                                double dt, long steps, long stride) {
  init.validate();
  hyper.validate();
  if (!init.wg) throw ModeError("track_alignment: wg absent");

  const Trajectory<MatrixParams> traj =
      integrate_flow(init, hyper, dt, steps, Method::rk4, stride);

  AlignmentReport rep;
  rep.times = traj.times;
  const long n = traj.size();
  rep.comm_norms.resize(n);
  rep.xi_norm.resize(n);
  rep.min_sym_eig.resize(n);
  rep.parabola_residuals.resize(n);
  rep.asymmetry.resize(n);

  for (long k = 0; k < n; ++k) {
    const MatrixParams& p = traj.states[k];
    const CommutatorSnapshot cs = commutators(p);
    rep.comm_norms[k] = cs.norms;
    rep.xi_norm[k] = std::sqrt(cs.c1.squaredNorm() + cs.c2.squaredNorm() +
                               cs.c3.squaredNorm());
    const double asym_g = (*p.wg - p.wg->transpose()).cwiseAbs().maxCoeff();
    const double asym_h = (p.wh - p.wh.transpose()).cwiseAbs().maxCoeff();
    rep.asymmetry[k] = std::max(asym_g, asym_h);

    const MatrixParams sym = symmetrized(p);
    const Eigen::MatrixXd K = build_K(sym, hyper);
    const Eigen::MatrixXd H =
        3.0 * hyper.rho * Eigen::MatrixXd::Identity(K.rows(), K.cols()) + K;
    const Eigen::MatrixXd Hs = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hs,
                                                      Eigen::EigenvaluesOnly);
    rep.min_sym_eig[k] = es.eigenvalues().minCoeff();

    const Eigen::MatrixXd phi = phi_of(p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hs(sym.wh);
    std::vector<double> res(p.m());
    for (long i = 0; i < p.m(); ++i) {
      const double psi = hs.eigenvalues()(i);
      const Eigen::VectorXd u = hs.eigenvectors().col(i);
      res[i] = psi * psi - u.dot(phi * u);
    }
    rep.parabola_residuals[k] = std::move(res);
  }

  rep.decay_rate_defined =
      tail_log_fit(rep.times, rep.xi_norm, 1e-14, &rep.fitted_decay_rate);
  std::vector<double> res_sum(n);
  for (long k = 0; k < n; ++k) {
    double s = 0.0;
    for (double r : rep.parabola_residuals[k]) s += std::abs(r);
    res_sum[k] = s;
  }
  rep.parabola_rate_defined =
      tail_log_fit(rep.times, res_sum, 1e-14, &rep.parabola_rate);
  return rep;
}

ParabolaFit parabola_fit(const Trajectory<EigenState>& traj) {
  if (traj.size() < 3)
    throw ValidationError("parabola_fit: need >= 3 recorded states");
  ParabolaFit fit;
  std::vector<double> xs, ys;
  double max_abs = 0.0;
  for (long k = 0; k < traj.size(); ++k) {
    const EigenState& s = traj.states[k];
    const double r = s.psi * s.psi - s.phi;
    max_abs = std::max(max_abs, std::abs(r));
    if (std::abs(r) > 1e-12) {
      xs.push_back(traj.times[k]);
      ys.push_back(std::log(std::abs(r)));
    }
  }
  if (max_abs <= 1e-12 || xs.size() < 3) {
    fit.c0 = 0.0;
    fit.rate_defined = false;
    fit.max_residual = max_abs;
    return fit;
  }
  const LineFit lf = fit_line(xs, ys);
  fit.rate = lf.slope;
  fit.rate_defined = true;
  const double sign =
      (traj.states.front().psi * traj.states.front().psi -
       traj.states.front().phi) >= 0.0
          ? 1.0
          : -1.0;
  fit.c0 = sign * std::exp(lf.intercept);
  double dev = 0.0;
  for (long k = 0; k < traj.size(); ++k) {
    const EigenState& s = traj.states[k];
    const double r = s.psi * s.psi - s.phi;
    dev = std::max(dev,
                   std::abs(r - fit.c0 * std::exp(fit.rate * traj.times[k])));
  }
  fit.max_residual = dev;
  return fit;
}

}  // namespace ssldyn
