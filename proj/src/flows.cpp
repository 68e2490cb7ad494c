#include "ssldyn/flows.hpp"

#include <random>

namespace ssldyn {

namespace {

bool finite(const Eigen::MatrixXd& w) { return w.allFinite(); }

void check_pair(const MatrixParams& online, const MatrixParams& target) {
  online.validate();
  if (target.wf.rows() != online.wf.rows() ||
      target.wf.cols() != online.wf.cols())
    throw ValidationError("expected_loss: online/target encoder shapes differ");
  if (!finite(target.wf))
    throw ValidationError("expected_loss: non-finite target encoder");
}

}  // namespace

void MatrixParams::validate() const {
  if (wf.size() == 0 || wh.size() == 0)
    throw ValidationError("params: empty matrices");
  if (wh.rows() != wh.cols() || wh.rows() != wf.rows())
    throw ValidationError("params: wh must be m x m with m = rows(wf)");
  if (wg) {
    if (wg->rows() != wg->cols() || wg->rows() != wf.rows())
      throw ValidationError("params: wg must be m x m with m = rows(wf)");
    if (!finite(*wg)) throw ValidationError("params: non-finite wg");
  }
  if (!finite(wf) || !finite(wh))
    throw ValidationError("params: non-finite entries");
}

MatrixParams operator+(const MatrixParams& a, const MatrixParams& b) {
  MatrixParams r;
  r.wf = a.wf + b.wf;
  r.wh = a.wh + b.wh;
  if (a.wg && b.wg) r.wg = *a.wg + *b.wg;
  return r;
}

MatrixParams operator*(double c, const MatrixParams& p) {
  MatrixParams r;
  r.wf = c * p.wf;
  r.wh = c * p.wh;
  if (p.wg) r.wg = c * *p.wg;
  return r;
}

double state_norm(const MatrixParams& p) {
  double s = p.wf.squaredNorm() + p.wh.squaredNorm();
  if (p.wg) s += p.wg->squaredNorm();
  return std::sqrt(s);
}

bool state_finite(const MatrixParams& p) {
  return finite(p.wf) && finite(p.wh) && (!p.wg || finite(*p.wg));
}

Eigen::MatrixXd phi_of(const MatrixParams& p) {
  if (!finite(p.wf)) throw ValidationError("phi_of: non-finite encoder");
  Eigen::MatrixXd phi = p.wf * p.wf.transpose();
  return 0.5 * (phi + phi.transpose());
}

std::pair<double, double> expected_loss_terms(const MatrixParams& online,
                                              const MatrixParams& target,
                                              const Hyper& hyper) {
  check_pair(online, target);
  hyper.validate();
  const double a = hyper.a();
  const Eigen::MatrixXd& vf = target.wf;
  const Eigen::MatrixXd hf = online.wh * online.wf;
  const double vf2 = vf.squaredNorm();
  const double t1 =
      a * hf.squaredNorm() - 2.0 * (hf * vf.transpose()).trace() + a * vf2;
  if (!online.wg) return {0.5 * t1, 0.0};
  const Eigen::MatrixXd ghf = *online.wg * hf;
  const double t2 =
      a * ghf.squaredNorm() - 2.0 * (ghf * vf.transpose()).trace() + vf2;
  return {0.5 * t1, 0.5 * t2};
}

double expected_loss(const MatrixParams& online, const MatrixParams& target,
                     const Hyper& hyper) {
  auto [t1, t2] = expected_loss_terms(online, target, hyper);
  return t1 + t2;
}

MatrixParams loss_gradient(const MatrixParams& online,
                           const MatrixParams& target, const Hyper& hyper) {
  check_pair(online, target);
  hyper.validate();
  const double a = hyper.a();
  const long m = online.m();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd& wf = online.wf;
  const Eigen::MatrixXd& wh = online.wh;
  const Eigen::MatrixXd& vf = target.wf;
  const Eigen::MatrixXd phi = wf * wf.transpose();

  MatrixParams g;
  if (!online.wg) {
    g.wf = wh.transpose() * (a * wh * wf - vf);
    g.wh = a * wh * phi - vf * wf.transpose();
    return g;
  }
  const Eigen::MatrixXd& wg = *online.wg;
  const Eigen::MatrixXd gtg = I + wg.transpose() * wg;
  g.wf = wh.transpose() *
         (a * gtg * wh * wf - vf - wg.transpose() * vf);
  g.wg = a * wg * wh * phi * wh.transpose() -
         vf * wf.transpose() * wh.transpose();
  g.wh = a * gtg * wh * phi - (I + wg.transpose()) * vf * wf.transpose();
  return g;
}

MatrixParams grad_flow_rhs(const MatrixParams& params, const Hyper& hyper) {
  params.validate();
  hyper.validate();
  if (!params.wg)
    throw ModeError("grad_flow_rhs: wg absent; use simsiam_grad_flow_rhs");
  const double a = hyper.a();
  const double rho = hyper.rho;
  const long m = params.m();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd& wf = params.wf;
  const Eigen::MatrixXd& wh = params.wh;
  const Eigen::MatrixXd& wg = *params.wg;
  const Eigen::MatrixXd phi = wf * wf.transpose();
  const Eigen::MatrixXd bracket =
      a * (I + wg.transpose() * wg) * wh - (I + wg.transpose());

  MatrixParams r;
  r.wf = -wh.transpose() * bracket * wf - rho * wf;
  r.wg = -(a * wh - I) * phi * wh.transpose() - rho * wg;
  r.wh = -bracket * phi - rho * wh;
  return r;
}

MatrixParams simsiam_grad_flow_rhs(const MatrixParams& params,
                                   const Hyper& hyper) {
  params.validate();
  hyper.validate();
  if (params.wg)
    throw ModeError("simsiam_grad_flow_rhs: wg present; use grad_flow_rhs");
  const double a = hyper.a();
  const double rho = hyper.rho;
  const long m = params.m();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd& wf = params.wf;
  const Eigen::MatrixXd& wh = params.wh;
  const Eigen::MatrixXd bracket = a * wh - I;

  MatrixParams r;
  r.wf = -wh.transpose() * bracket * wf - rho * wf;
  r.wh = -bracket * wf * wf.transpose() - rho * wh;
  return r;
}

MatrixParams flow_rhs(const MatrixParams& params, const Hyper& hyper) {
  return params.wg ? grad_flow_rhs(params, hyper)
                   : simsiam_grad_flow_rhs(params, hyper);
}

Trajectory<MatrixParams> integrate_flow(const MatrixParams& init,
                                        const Hyper& hyper, double dt,
                                        long steps, Method method,
                                        long stride) {
  init.validate();
  hyper.validate();
  auto rhs = [&](const MatrixParams& p) { return flow_rhs(p, hyper); };
  auto diag = [&](double, const MatrixParams& p,
                  std::map<std::string, std::vector<double>>& out) {
    out["loss"].push_back(expected_loss(p, p, hyper));
    out["wf_norm"].push_back(p.wf.norm());
    out["wh_norm"].push_back(p.wh.norm());
    if (p.wg) out["wg_norm"].push_back(p.wg->norm());
  };
  return integrate_fixed(init, rhs, dt, steps, method, stride, diag);
}

MatrixParams random_params(long m, long d, InitKind kind, double scale,
                           std::uint64_t seed, bool with_g) {
  if (m < 1 || d < 1) throw ValidationError("random_params: bad dimensions");
  if (!(scale > 0.0)) throw ValidationError("random_params: scale must be > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](long r, long c) {
    Eigen::MatrixXd w(r, c);
    for (long i = 0; i < r; ++i)
      for (long j = 0; j < c; ++j) w(i, j) = scale * normal(rng);
    return w;
  };
  if (kind == InitKind::spectral) {
    if (m != d)
      throw ValidationError("random_params: spectral init requires d == m");
    std::uniform_real_distribution<double> uni(scale / 4.0, scale);
    Eigen::VectorXd psi(m), gamma(m), phi(m);
    for (long i = 0; i < m; ++i) psi(i) = uni(rng);
    for (long i = 0; i < m; ++i) gamma(i) = uni(rng);
    for (long i = 0; i < m; ++i) phi(i) = psi(i) * psi(i);
    return spectral_params(phi, psi, gamma, rng(), with_g);
  }
  MatrixParams p;
  p.wf = fill(m, d);
  p.wh = fill(m, m);
  if (with_g) p.wg = fill(m, m);
  if (kind == InitKind::symmetric) {
    p.wh = 0.5 * (p.wh + p.wh.transpose()).eval();
    if (p.wg) *p.wg = 0.5 * (*p.wg + p.wg->transpose()).eval();
  }
  return p;
}

MatrixParams spectral_params(const Eigen::VectorXd& phi,
                             const Eigen::VectorXd& psi,
                             const Eigen::VectorXd& gamma, std::uint64_t seed,
                             bool with_g) {
  const long m = phi.size();
  if (psi.size() != m || gamma.size() != m || m < 1)
    throw ValidationError("spectral_params: spectra must share a length >= 1");
  if ((phi.array() < 0.0).any())
    throw ValidationError("spectral_params: phi entries must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(m, m);
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < m; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  MatrixParams p;
  p.wf = q * phi.array().sqrt().matrix().asDiagonal() * q.transpose();
  p.wh = q * psi.asDiagonal() * q.transpose();
  if (with_g) p.wg = q * gamma.asDiagonal() * q.transpose();
  return p;
}

}  // namespace ssldyn
