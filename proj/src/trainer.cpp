#include "ssldyn/trainer.hpp"

#include <cmath>
#include <limits>

#include "ssldyn/flows.hpp"
#include "ssldyn/integrate.hpp"

namespace ssldyn {

namespace {

constexpr double kCosEps = 1e-12;
constexpr double kGuardThreshold = 1e-8;
constexpr double kDivergenceNorm = 1e8;

using Eigen::MatrixXd;

MatrixXd relu(const MatrixXd& x) { return x.cwiseMax(0.0); }

struct PredictorPass {
  MatrixXd pre;     // mlp1 hidden pre-activation
  MatrixXd hidden;  // relu(pre)
  MatrixXd ypre;    // pre-tanh output (mlp1 g with tanh)
  MatrixXd out;
};

PredictorPass apply_linear(const MatrixXd& w, const MatrixXd& z) {
  PredictorPass p;
  p.out = z * w.transpose();
  return p;
}

PredictorPass apply_mlp(const MatrixXd& u, const MatrixXd& v, const MatrixXd& z,
                        bool tanh_out) {
  PredictorPass p;
  p.pre = z * u.transpose();
  p.hidden = relu(p.pre);
  p.ypre = p.hidden * v.transpose();
  p.out = tanh_out ? p.ypre.array().tanh().matrix() : p.ypre;
  return p;
}

// Backprop through one predictor; accumulates parameter grads and returns
// the gradient w.r.t. the predictor input.
MatrixXd back_linear(const MatrixXd& w, const MatrixXd& z, const MatrixXd& dout,
                     MatrixXd& dw) {
  dw += dout.transpose() * z;
  return dout * w;
}

MatrixXd back_mlp(const MatrixXd& u, const MatrixXd& v, const MatrixXd& z,
                  const PredictorPass& pass, bool tanh_out, MatrixXd dout,
                  MatrixXd& du, MatrixXd& dv) {
  if (tanh_out)
    dout = (dout.array() * (1.0 - pass.out.array().square())).matrix();
  dv += dout.transpose() * pass.hidden;
  MatrixXd dh = dout * v;
  dh = (dh.array() * (pass.pre.array() > 0.0).cast<double>()).matrix();
  du += dh.transpose() * z;
  return dh * u;
}

// Per-row negative cosine with stop-gradient target rows; accumulates the
// gradient w.r.t. the online rows. Returns the mean negative cosine.
double neg_cosine(const MatrixXd& online, const MatrixXd& target, double weight,
                  MatrixXd& donline, long* guard_hits) {
  const long n = online.rows();
  double total = 0.0;
  for (long i = 0; i < n; ++i) {
    const Eigen::RowVectorXd u = online.row(i);
    const Eigen::RowVectorXd v = target.row(i);
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu < kGuardThreshold || nv < kGuardThreshold) ++(*guard_hits);
    const double du_den = nu + kCosEps;
    const double dv_den = nv + kCosEps;
    const double c = u.dot(v) / (du_den * dv_den);
    total += c;
    // d/du [u.v / ((|u|+e)(|v|+e))] = v/((|u|+e)(|v|+e)) - c u / (|u|(|u|+e))
    const double unorm_guard = std::max(nu, kCosEps);
    donline.row(i) +=
        -weight * (v / (du_den * dv_den) - (c / (unorm_guard * du_den)) * u);
  }
  return -weight * total;
}

double mse_half(const MatrixXd& online, const MatrixXd& target, double weight,
                MatrixXd& donline) {
  const MatrixXd r = online - target;
  donline += (2.0 * weight) * r;
  return weight * r.squaredNorm();
}

struct Forward {
  MatrixXd z1, z2;          // online projections
  MatrixXd z1_sg, z2_sg;    // stop-gradient targets (frozen encoder copy)
  MatrixXd z0;              // stop-gradient sim-2 target
  PredictorPass h1, h2, g1, g2;
};

Forward forward_pass(const ModelState& state, const Batch& batch,
                     const TrainerConfig& config, const ModelState& sg_state) {
  Forward f;
  f.z1 = batch.x1 * state.wf.transpose();
  f.z2 = batch.x2 * state.wf.transpose();
  f.z1_sg = batch.x1 * sg_state.wf.transpose();
  f.z2_sg = batch.x2 * sg_state.wf.transpose();
  if (config.arch == ArchKind::linear) {
    f.h1 = apply_linear(state.wh, f.z1);
    f.h2 = apply_linear(state.wh, f.z2);
  } else {
    f.h1 = apply_mlp(state.uh, state.vh, f.z1, false);
    f.h2 = apply_mlp(state.uh, state.vh, f.z2, false);
  }
  if (config.has_g()) {
    const MatrixXd& x0 = config.sim2_augmented_input ? batch.x3 : batch.x;
    const MatrixXd& enc = config.model == ModelKind::xphinet
                              ? sg_state.wf_long
                              : sg_state.wf;
    f.z0 = x0 * enc.transpose();
    if (config.arch == ArchKind::linear) {
      f.g1 = apply_linear(state.wg, f.h1.out);
      f.g2 = apply_linear(state.wg, f.h2.out);
    } else {
      f.g1 = apply_mlp(state.ug, state.vg, f.h1.out, config.g_output_tanh);
      f.g2 = apply_mlp(state.ug, state.vg, f.h2.out, config.g_output_tanh);
    }
  }
  return f;
}

ModelGrads zero_grads(const ModelState& state) {
  ModelGrads g;
  auto z = [](const MatrixXd& w) { return MatrixXd::Zero(w.rows(), w.cols()); };
  g.wf = z(state.wf);
  if (state.wh.size()) g.wh = z(state.wh);
  if (state.wg.size()) g.wg = z(state.wg);
  if (state.uh.size()) g.uh = z(state.uh);
  if (state.vh.size()) g.vh = z(state.vh);
  if (state.ug.size()) g.ug = z(state.ug);
  if (state.vg.size()) g.vg = z(state.vg);
  return g;
}

}  // namespace

void TrainerConfig::validate() const {
  hyper.validate();
  if (d < 1 || m < 1) throw ValidationError("trainer: dims must be >= 1");
  if (!(lr > 0.0)) throw ValidationError("trainer: lr must be > 0");
  if (batch < 1) throw ValidationError("trainer: batch must be >= 1");
  if (steps < 1) throw ValidationError("trainer: steps must be >= 1");
  if (ema_beta < 0.0 || ema_beta > 1.0)
    throw ValidationError("trainer: ema_beta must be in [0, 1]");
  if (arch == ArchKind::mlp1 && hidden_width < 1)
    throw ValidationError("trainer: hidden_width must be >= 1");
  if (exact_expectation) {
    if (arch != ArchKind::linear || sim1_loss != LossKind::mse ||
        (has_g() && sim2_loss != LossKind::mse))
      throw ValidationError(
          "trainer: exact-expectation mode requires linear arch and mse "
          "losses");
    if (model == ModelKind::xphinet)
      throw ValidationError(
          "trainer: exact-expectation mode not defined for xphinet (slow "
          "encoder target)");
  }
  if (init == InitKind::spectral && d != m)
    throw ValidationError("trainer: spectral init requires d == m");
}

Batch sample_batch(int n, int d, double sigma2, std::mt19937_64& rng,
                   bool with_x3) {
  if (n < 1 || d < 1) throw ValidationError("sample_batch: bad shape");
  if (sigma2 < 0.0 || !std::isfinite(sigma2))
    throw ValidationError("sample_batch: bad sigma2");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = std::sqrt(sigma2);
  auto fill = [&](MatrixXd& w) {
    for (long i = 0; i < w.rows(); ++i)
      for (long j = 0; j < w.cols(); ++j) w(i, j) = normal(rng);
  };
  Batch b;
  b.x.resize(n, d);
  fill(b.x);
  auto aug = [&](MatrixXd& out) {
    out.resize(n, d);
    fill(out);
    out = b.x + sigma * out;
  };
  aug(b.x1);
  aug(b.x2);
  if (with_x3) aug(b.x3);
  return b;
}

ModelState init_state(const TrainerConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](long r, long c, double scale) {
    MatrixXd w(r, c);
    for (long i = 0; i < r; ++i)
      for (long j = 0; j < c; ++j) w(i, j) = scale * normal(rng);
    return w;
  };
  auto scale_for = [&](long fan_in) {
    return config.init_scale > 0.0 ? config.init_scale
                                   : 1.0 / std::sqrt(double(fan_in));
  };
  ModelState s;
  if (config.init == InitKind::spectral) {
    const double sc = config.init_scale > 0.0 ? config.init_scale : 0.4;
    const MatrixParams p = random_params(config.m, config.d, InitKind::spectral,
                                         sc, config.seed, config.has_g());
    s.wf = p.wf;
    if (config.arch == ArchKind::linear) {
      s.wh = p.wh;
      if (config.has_g()) s.wg = *p.wg;
    }
  } else {
    s.wf = fill(config.m, config.d, scale_for(config.d));
    if (config.init == InitKind::symmetric && config.arch == ArchKind::linear) {
      s.wh = fill(config.m, config.m, scale_for(config.m));
      s.wh = 0.5 * (s.wh + s.wh.transpose()).eval();
      if (config.has_g()) {
        s.wg = fill(config.m, config.m, scale_for(config.m));
        s.wg = 0.5 * (s.wg + s.wg.transpose()).eval();
      }
    } else if (config.arch == ArchKind::linear) {
      s.wh = fill(config.m, config.m, scale_for(config.m));
      if (config.has_g()) s.wg = fill(config.m, config.m, scale_for(config.m));
    }
  }
  if (config.arch == ArchKind::mlp1) {
    const int w = config.hidden_width;
    s.uh = fill(w, config.m, scale_for(config.m));
    s.vh = fill(config.m, w, scale_for(w));
    if (config.has_g()) {
      s.ug = fill(w, config.m, scale_for(config.m));
      s.vg = fill(config.m, w, scale_for(w));
    }
  }
  if (config.model == ModelKind::xphinet) s.wf_long = s.wf;
  return s;
}

LossBreakdown forward_loss(const ModelState& state, const Batch& batch,
                           const TrainerConfig& config,
                           const ModelState& sg_state) {
  const Forward f = forward_pass(state, batch, config, sg_state);
  const double n = static_cast<double>(batch.x1.rows());
  LossBreakdown out;
  MatrixXd scratch = MatrixXd::Zero(f.h1.out.rows(), f.h1.out.cols());
  if (config.sim1_loss == LossKind::mse) {
    out.sim1 = (0.25 / n) * ((f.h1.out - f.z2_sg).squaredNorm() +
                             (f.h2.out - f.z1_sg).squaredNorm());
  } else {
    long hits = 0;
    out.sim1 = neg_cosine(f.h1.out, f.z2_sg, 0.5 / n, scratch, &hits) +
               neg_cosine(f.h2.out, f.z1_sg, 0.5 / n, scratch, &hits);
    out.cos_guard_hits += hits;
  }
  if (config.has_g()) {
    if (config.sim2_loss == LossKind::mse) {
      out.sim2 = (0.25 / n) * ((f.g1.out - f.z0).squaredNorm() +
                               (f.g2.out - f.z0).squaredNorm());
    } else {
      long hits = 0;
      MatrixXd scratch2 = MatrixXd::Zero(f.g1.out.rows(), f.g1.out.cols());
      out.sim2 = neg_cosine(f.g1.out, f.z0, 0.5 / n, scratch2, &hits) +
                 neg_cosine(f.g2.out, f.z0, 0.5 / n, scratch2, &hits);
      out.cos_guard_hits += hits;
    }
  }
  return out;
}

std::pair<LossBreakdown, ModelGrads> loss_and_grads(
    const ModelState& state, const Batch& batch, const TrainerConfig& config,
    const ModelState& sg_state) {
  const Forward f = forward_pass(state, batch, config, sg_state);
  const double n = static_cast<double>(batch.x1.rows());
  LossBreakdown losses;
  ModelGrads g = zero_grads(state);

  MatrixXd dp1 = MatrixXd::Zero(f.h1.out.rows(), f.h1.out.cols());
  MatrixXd dp2 = MatrixXd::Zero(f.h2.out.rows(), f.h2.out.cols());

  if (config.sim1_loss == LossKind::mse) {
    losses.sim1 = mse_half(f.h1.out, f.z2_sg, 0.25 / n, dp1) +
                  mse_half(f.h2.out, f.z1_sg, 0.25 / n, dp2);
  } else {
    long hits = 0;
    losses.sim1 = neg_cosine(f.h1.out, f.z2_sg, 0.5 / n, dp1, &hits) +
                  neg_cosine(f.h2.out, f.z1_sg, 0.5 / n, dp2, &hits);
    losses.cos_guard_hits += hits;
  }

  if (config.has_g()) {
    MatrixXd dy1 = MatrixXd::Zero(f.g1.out.rows(), f.g1.out.cols());
    MatrixXd dy2 = MatrixXd::Zero(f.g2.out.rows(), f.g2.out.cols());
    if (config.sim2_loss == LossKind::mse) {
      losses.sim2 = mse_half(f.g1.out, f.z0, 0.25 / n, dy1) +
                    mse_half(f.g2.out, f.z0, 0.25 / n, dy2);
    } else {
      long hits = 0;
      losses.sim2 = neg_cosine(f.g1.out, f.z0, 0.5 / n, dy1, &hits) +
                    neg_cosine(f.g2.out, f.z0, 0.5 / n, dy2, &hits);
      losses.cos_guard_hits += hits;
    }
    if (config.arch == ArchKind::linear) {
      dp1 += back_linear(state.wg, f.h1.out, dy1, g.wg);
      dp2 += back_linear(state.wg, f.h2.out, dy2, g.wg);
    } else {
      dp1 += back_mlp(state.ug, state.vg, f.h1.out, f.g1, config.g_output_tanh,
                      dy1, g.ug, g.vg);
      dp2 += back_mlp(state.ug, state.vg, f.h2.out, f.g2, config.g_output_tanh,
                      dy2, g.ug, g.vg);
    }
  }

  MatrixXd dz1, dz2;
  if (config.arch == ArchKind::linear) {
    dz1 = back_linear(state.wh, f.z1, dp1, g.wh);
    dz2 = back_linear(state.wh, f.z2, dp2, g.wh);
  } else {
    dz1 = back_mlp(state.uh, state.vh, f.z1, f.h1, false, dp1, g.uh, g.vh);
    dz2 = back_mlp(state.uh, state.vh, f.z2, f.h2, false, dp2, g.uh, g.vh);
  }
  g.wf = dz1.transpose() * batch.x1 + dz2.transpose() * batch.x2;
  return {losses, std::move(g)};
}

ModelGrads expected_grads(const ModelState& state,
                          const TrainerConfig& config) {
  const double a = config.hyper.a();
  const long m = config.m;
  const MatrixXd I = MatrixXd::Identity(m, m);
  const MatrixXd phi = state.wf * state.wf.transpose();
  ModelGrads g = zero_grads(state);
  if (!config.has_g()) {
    const MatrixXd bracket = a * state.wh - I;
    g.wf = state.wh.transpose() * bracket * state.wf;
    g.wh = bracket * phi;
    return g;
  }
  const MatrixXd bracket =
      a * (I + state.wg.transpose() * state.wg) * state.wh -
      (I + state.wg.transpose());
  g.wf = state.wh.transpose() * bracket * state.wf;
  g.wg = (a * state.wh - I) * phi * state.wh.transpose();
  g.wh = bracket * phi;
  return g;
}

void sgd_step(ModelState& state, const ModelGrads& grads,
              const TrainerConfig& config) {
  const double lr = config.lr;
  const double rho = config.hyper.rho;
  auto upd = [&](MatrixXd& w, const MatrixXd& dw) {
    if (w.size() == 0) return;
    w -= lr * (dw + rho * w);
  };
  upd(state.wf, grads.wf);
  upd(state.wh, grads.wh);
  upd(state.wg, grads.wg);
  upd(state.uh, grads.uh);
  upd(state.vh, grads.vh);
  upd(state.ug, grads.ug);
  upd(state.vg, grads.vg);
}

void ema_update(ModelState& state, const TrainerConfig& config) {
  if (config.model != ModelKind::xphinet)
    throw ModeError("ema_update: only the xphinet model keeps a slow encoder");
  state.wf_long =
      config.ema_beta * state.wf_long + (1.0 - config.ema_beta) * state.wf;
}

double stable_rank(const Eigen::MatrixXd& m) {
  const double fro2 = m.squaredNorm();
  if (fro2 == 0.0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const double smax = svd.singularValues()(0);
  return fro2 / (smax * smax);
}

double top_eigenvalue_phi(const ModelState& state) {
  const MatrixXd phi = state.wf * state.wf.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (phi + phi.transpose()),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double principal_angle_max(const ModelState& state,
                           const TrainerConfig& config) {
  if (config.arch != ArchKind::linear)
    return std::numeric_limits<double>::quiet_NaN();
  const MatrixXd phi = state.wf * state.wf.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (phi + phi.transpose()));
  const double phi_max = es.eigenvalues().maxCoeff();
  // Collapsed directions (phi eigenvalue near zero) carry noise-dominated
  // eigenvectors; alignment is measured on the surviving eigenspace only.
  const double phi_floor = std::max(1e-10, 1e-2 * phi_max);
  double worst = 0.0;
  auto check = [&](const MatrixXd& braw) {
    const MatrixXd b = 0.5 * (braw + braw.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> bs(b, Eigen::EigenvaluesOnly);
    const double bspec = bs.eigenvalues().cwiseAbs().maxCoeff();
    for (long i = 0; i < es.eigenvectors().cols(); ++i) {
      if (es.eigenvalues()(i) < phi_floor) continue;
      const Eigen::VectorXd u = es.eigenvectors().col(i);
      const Eigen::VectorXd bu = b * u;
      const double nb = bu.norm();
      if (nb < 1e-9 * std::max(1.0, bspec)) continue;  // null direction of b
      const double c = std::min(1.0, std::abs(u.dot(bu)) / nb);
      worst = std::max(worst, std::acos(c) * 180.0 / M_PI);
    }
  };
  check(state.wh);
  if (config.has_g()) check(state.wg);
  return worst;
}

MatrixParams to_matrix_params(const ModelState& state,
                              const TrainerConfig& config) {
  if (config.arch != ArchKind::linear)
    throw ModeError("to_matrix_params: linear arch only");
  MatrixParams p;
  p.wf = state.wf;
  p.wh = state.wh;
  if (config.has_g()) p.wg = state.wg;
  return p;
}

namespace {

double state_param_norm(const ModelState& s) {
  double sq = s.wf.squaredNorm() + s.wh.squaredNorm() + s.wg.squaredNorm() +
              s.uh.squaredNorm() + s.vh.squaredNorm() + s.ug.squaredNorm() +
              s.vg.squaredNorm() + s.wf_long.squaredNorm();
  return std::sqrt(sq);
}

bool state_all_finite(const ModelState& s) {
  auto ok = [](const MatrixXd& w) { return w.size() == 0 || w.allFinite(); };
  return ok(s.wf) && ok(s.wh) && ok(s.wg) && ok(s.uh) && ok(s.vh) &&
         ok(s.ug) && ok(s.vg) && ok(s.wf_long);
}

}  // namespace

TrainResult train(const TrainerConfig& config) {
  config.validate();
  ModelState state = init_state(config);
  std::mt19937_64 rng(config.seed + 0x9e3779b97f4a7c15ULL);

  TrainResult out;
  const long stride = config.record_stride > 0 ? config.record_stride
                                               : record_stride(config.steps);
  auto record = [&](long step, const LossBreakdown& losses) {
    out.metrics.steps.push_back(step);
    auto& s = out.metrics.series;
    s["loss_sim1"].push_back(losses.sim1);
    s["loss_sim2"].push_back(losses.sim2);
    s["loss"].push_back(losses.total());
    s["top_eig_phi"].push_back(top_eigenvalue_phi(state));
    s["stable_rank_wf"].push_back(stable_rank(state.wf));
    s["principal_angle_deg"].push_back(principal_angle_max(state, config));
    s["wf_norm"].push_back(state.wf.norm());
    s["wh_norm"].push_back(config.arch == ArchKind::linear
                               ? state.wh.norm()
                               : std::hypot(state.uh.norm(), state.vh.norm()));
    if (config.has_g())
      s["wg_norm"].push_back(
          config.arch == ArchKind::linear
              ? state.wg.norm()
              : std::hypot(state.ug.norm(), state.vg.norm()));
    if (config.model == ModelKind::xphinet)
      s["wf_long_norm"].push_back(state.wf_long.norm());
    s["cos_guard_hits"].push_back(static_cast<double>(losses.cos_guard_hits));
  };

  for (long step = 1; step <= config.steps; ++step) {
    LossBreakdown losses;
    ModelGrads grads;
    if (config.exact_expectation) {
      grads = expected_grads(state, config);
      MatrixParams p = to_matrix_params(state, config);
      auto [t1, t2] = expected_loss_terms(p, p, config.hyper);
      losses.sim1 = t1;
      losses.sim2 = t2;
    } else {
      const Batch batch =
          sample_batch(config.batch, config.d, config.hyper.sigma2, rng,
                       config.sim2_augmented_input);
      std::tie(losses, grads) = loss_and_grads(state, batch, config, state);
    }
    sgd_step(state, grads, config);
    if (config.model == ModelKind::xphinet) ema_update(state, config);
    if (!state_all_finite(state) || state_param_norm(state) > kDivergenceNorm)
      throw DivergenceError("train: parameters diverged at step " +
                                std::to_string(step),
                            step - 1);
    if (step % stride == 0 || step == config.steps) record(step, losses);
  }
  out.state = std::move(state);
  return out;
}

double flow_agreement(const TrainerConfig& config, double horizon) {
  TrainerConfig cfg = config;
  cfg.validate();
  if (cfg.arch != ArchKind::linear || cfg.sim1_loss != LossKind::mse ||
      (cfg.has_g() && cfg.sim2_loss != LossKind::mse))
    throw ValidationError("flow_agreement: linear arch with mse losses only");
  if (!cfg.exact_expectation && cfg.batch < 10000)
    throw ValidationError(
        "flow_agreement: needs exact-expectation mode or batch >= 1e4");
  if (!(horizon > 0.0)) throw ValidationError("flow_agreement: bad horizon");
  const long steps = std::lround(horizon / cfg.lr);
  if (steps < 1)
    throw ValidationError("flow_agreement: horizon shorter than one step");
  cfg.steps = steps;

  const MatrixParams p0 = to_matrix_params(init_state(cfg), cfg);
  const TrainResult tr = train(cfg);
  const MatrixParams pt = to_matrix_params(tr.state, cfg);
  const Trajectory<MatrixParams> flow =
      integrate_flow(p0, cfg.hyper, cfg.lr, steps, Method::rk4);
  const MatrixParams& fl = flow.states.back();
  double dev = (pt.wf - fl.wf).cwiseAbs().maxCoeff();
  dev = std::max(dev, (pt.wh - fl.wh).cwiseAbs().maxCoeff());
  if (cfg.has_g())
    dev = std::max(dev, (*pt.wg - *fl.wg).cwiseAbs().maxCoeff());
  return dev;
}

}  // namespace ssldyn
