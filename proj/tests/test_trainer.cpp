#include <random>

#include "doctest.h"
#include "ssldyn/eigen_dyn.hpp"
#include "ssldyn/flows.hpp"
#include "ssldyn/trainer.hpp"

using namespace ssldyn;
using Eigen::MatrixXd;

namespace {

TrainerConfig base_config() {
  TrainerConfig c;
  c.model = ModelKind::phinet;
  c.sim1_loss = LossKind::mse;
  c.sim2_loss = LossKind::mse;
  c.arch = ArchKind::linear;
  c.d = 3;
  c.m = 3;
  c.hyper = {1.5, 0.03};
  c.lr = 1e-3;
  c.batch = 8;
  c.steps = 10;
  c.seed = 7;
  return c;
}

std::vector<MatrixXd ModelState::*> online_fields(const TrainerConfig& c) {
  std::vector<MatrixXd ModelState::*> fields{&ModelState::wf};
  if (c.arch == ArchKind::linear) {
    fields.push_back(&ModelState::wh);
    if (c.has_g()) fields.push_back(&ModelState::wg);
  } else {
    fields.push_back(&ModelState::uh);
    fields.push_back(&ModelState::vh);
    if (c.has_g()) {
      fields.push_back(&ModelState::ug);
      fields.push_back(&ModelState::vg);
    }
  }
  return fields;
}

const MatrixXd& grad_field(const ModelGrads& g, MatrixXd ModelState::* f) {
  if (f == &ModelState::wf) return g.wf;
  if (f == &ModelState::wh) return g.wh;
  if (f == &ModelState::wg) return g.wg;
  if (f == &ModelState::uh) return g.uh;
  if (f == &ModelState::vh) return g.vh;
  if (f == &ModelState::ug) return g.ug;
  return g.vg;
}

// Finite differences of forward_loss over the online parameters with the
// stop-gradient copy frozen at the unperturbed state.
double fd_vs_analytic_relerr(const TrainerConfig& config, const Batch& batch) {
  const ModelState state = init_state(config);
  const auto [losses, grads] = loss_and_grads(state, batch, config, state);
  (void)losses;
  const double eps = 1e-6;
  double num = 0.0, den = 0.0;
  for (auto field : online_fields(config)) {
    const MatrixXd& g = grad_field(grads, field);
    for (long i = 0; i < g.rows(); ++i) {
      for (long j = 0; j < g.cols(); ++j) {
        ModelState hi = state, lo = state;
        (hi.*field)(i, j) += eps;
        (lo.*field)(i, j) -= eps;
        const double fd = (forward_loss(hi, batch, config, state).total() -
                           forward_loss(lo, batch, config, state).total()) /
                          (2 * eps);
        num += (fd - g(i, j)) * (fd - g(i, j));
        den += g(i, j) * g(i, j);
      }
    }
  }
  return std::sqrt(num / std::max(den, 1e-30));
}

}  // namespace

TEST_SUITE_BEGIN("trainer");

TEST_CASE("zero augmentation reproduces the clean input in both views") {
  std::mt19937_64 rng(3);
  const Batch b = sample_batch(32, 5, 0.0, rng);
  CHECK((b.x1 - b.x).norm() == 0.0);
  CHECK((b.x2 - b.x).norm() == 0.0);
}

TEST_CASE("augmented view covariance approaches (1 + sigma2) I") {
  std::mt19937_64 rng(19);
  const Batch b = sample_batch(100000, 4, 1.0, rng);
  const MatrixXd cov = b.x1.transpose() * b.x1 / 100000.0;
  const MatrixXd want = 2.0 * MatrixXd::Identity(4, 4);
  CHECK((cov - want).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("batches are deterministic given the generator state") {
  std::mt19937_64 a(11), b(11);
  const Batch ba = sample_batch(16, 3, 1.5, a);
  const Batch bb = sample_batch(16, 3, 1.5, b);
  CHECK((ba.x - bb.x).norm() == 0.0);
  CHECK((ba.x1 - bb.x1).norm() == 0.0);
  CHECK((ba.x2 - bb.x2).norm() == 0.0);
}

TEST_CASE("zero parameters give zero mse loss and zero gradients") {
  TrainerConfig c = base_config();
  ModelState s = init_state(c);
  s.wf.setZero();
  s.wh.setZero();
  s.wg.setZero();
  std::mt19937_64 rng(5);
  const Batch b = sample_batch(8, c.d, c.hyper.sigma2, rng);
  const auto [losses, grads] = loss_and_grads(s, b, c, s);
  CHECK(losses.total() == 0.0);
  CHECK(grads.wf.norm() == 0.0);
  CHECK(grads.wh.norm() == 0.0);
  CHECK(grads.wg.norm() == 0.0);
}

TEST_CASE("reverse-mode gradients match finite differences") {
  std::mt19937_64 rng(29);
  for (int variant = 0; variant < 4; ++variant) {
    TrainerConfig c = base_config();
    c.seed = 100 + variant;
    switch (variant) {
      case 0: break;  // linear mse/mse phinet
      case 1:
        c.sim1_loss = LossKind::cosine;
        c.sim2_loss = LossKind::cosine;
        break;
      case 2:
        c.model = ModelKind::simsiam;
        c.sim1_loss = LossKind::cosine;
        break;
      case 3:
        c.arch = ArchKind::mlp1;
        c.hidden_width = 5;
        c.sim1_loss = LossKind::cosine;
        c.g_output_tanh = true;
        break;
    }
    const Batch b = sample_batch(8, c.d, c.hyper.sigma2, rng);
    CHECK(fd_vs_analytic_relerr(c, b) < 1e-5);
  }
}

TEST_CASE("xphinet gradients ignore the slow encoder branch") {
  TrainerConfig c = base_config();
  c.model = ModelKind::xphinet;
  const ModelState state = init_state(c);
  std::mt19937_64 rng(31);
  const Batch b = sample_batch(8, c.d, c.hyper.sigma2, rng);
  // same batch, two different frozen slow encoders: f-gradients see only the
  // residual change, and the finite-difference check still holds exactly
  CHECK(fd_vs_analytic_relerr(c, b) < 1e-5);
  ModelState other = state;
  other.wf_long = 0.5 * state.wf_long;
  const auto [l1, g1] = loss_and_grads(state, b, c, state);
  const auto [l2, g2] = loss_and_grads(state, b, c, other);
  CHECK(l1.total() != l2.total());  // the branch feeds the residual
  CHECK(g1.wf.rows() == g2.wf.rows());
}

TEST_CASE("cosine objective is invariant under swapping the two views") {
  TrainerConfig c = base_config();
  c.sim1_loss = LossKind::cosine;
  const ModelState s = init_state(c);
  std::mt19937_64 rng(37);
  Batch b = sample_batch(16, c.d, c.hyper.sigma2, rng);
  const double l1 = forward_loss(s, b, c, s).sim1;
  std::swap(b.x1, b.x2);
  const double l2 = forward_loss(s, b, c, s).sim1;
  CHECK(l1 == l2);
}

TEST_CASE("sgd step with zero gradient applies pure weight decay") {
  TrainerConfig c = base_config();
  ModelState s = init_state(c);
  const ModelState before = s;
  ModelGrads zero;
  zero.wf = MatrixXd::Zero(c.m, c.d);
  zero.wh = MatrixXd::Zero(c.m, c.m);
  zero.wg = MatrixXd::Zero(c.m, c.m);

  TrainerConfig no_decay = c;
  no_decay.hyper.rho = 0.0;
  sgd_step(s, zero, no_decay);
  CHECK((s.wf - before.wf).norm() == 0.0);

  s = before;
  sgd_step(s, zero, c);
  const double shrink = 1.0 - c.lr * c.hyper.rho;
  CHECK((s.wf - shrink * before.wf).norm() < 1e-15);
  CHECK((s.wh - shrink * before.wh).norm() < 1e-15);
}

TEST_CASE("one exact-expectation step is an explicit Euler step of the flow") {
  TrainerConfig c = base_config();
  c.exact_expectation = true;
  ModelState s = init_state(c);
  const MatrixParams p0 = to_matrix_params(s, c);
  const ModelGrads g = expected_grads(s, c);
  sgd_step(s, g, c);
  const auto flow = integrate_flow(p0, c.hyper, c.lr, 1, Method::euler);
  const MatrixParams p1 = flow.states.back();
  CHECK((s.wf - p1.wf).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((s.wh - p1.wh).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((s.wg - *p1.wg).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("ema update endpoints and the two-step example") {
  TrainerConfig c = base_config();
  c.model = ModelKind::xphinet;
  c.d = 2;
  c.m = 2;
  ModelState s = init_state(c);
  const MatrixXd frozen = s.wf_long;

  c.ema_beta = 1.0;
  ema_update(s, c);
  CHECK((s.wf_long - frozen).norm() == 0.0);

  c.ema_beta = 0.0;
  ema_update(s, c);
  CHECK((s.wf_long - s.wf).norm() == 0.0);

  c.ema_beta = 0.99;
  s.wf_long.setZero();
  s.wf.setOnes();
  ema_update(s, c);
  ema_update(s, c);
  CHECK(s.wf_long(0, 0) == doctest::Approx(0.0199).epsilon(1e-12));

  TrainerConfig plain = base_config();
  CHECK_THROWS_AS(ema_update(s, plain), ModeError);
}

TEST_CASE("stable rank on documented matrices") {
  Eigen::Vector3d d1(1, 1, 0);
  CHECK(stable_rank(MatrixXd(d1.asDiagonal())) == doctest::Approx(2.0));
  Eigen::Vector2d d2(2, 1);
  CHECK(stable_rank(MatrixXd(d2.asDiagonal())) == doctest::Approx(1.25));
  CHECK(stable_rank(MatrixXd::Identity(5, 5)) == doctest::Approx(5.0));
  CHECK(stable_rank(MatrixXd::Zero(3, 3)) == 0.0);
}

TEST_CASE("batch-averaged gradients approach the closed-form expectation") {
  TrainerConfig c = base_config();
  c.seed = 61;
  const ModelState s = init_state(c);
  std::mt19937_64 rng(71);
  const Batch b = sample_batch(100000, c.d, c.hyper.sigma2, rng);
  const auto [losses, grads] = loss_and_grads(s, b, c, s);
  (void)losses;
  const MatrixParams p = to_matrix_params(s, c);
  const MatrixParams expect = loss_gradient(p, p, c.hyper);
  CHECK((grads.wf - expect.wf).norm() / expect.wf.norm() < 2e-2);
  CHECK((grads.wh - expect.wh).norm() / expect.wh.norm() < 2e-2);
  CHECK((grads.wg - *expect.wg).norm() / expect.wg->norm() < 2e-2);
}

TEST_CASE("training is bit-deterministic in the config seed") {
  TrainerConfig c = base_config();
  c.steps = 50;
  c.batch = 16;
  const TrainResult a = train(c);
  const TrainResult b = train(c);
  CHECK((a.state.wf - b.state.wf).norm() == 0.0);
  for (const auto& [name, series] : a.metrics.series) {
    const auto& other = b.metrics.series.at(name);
    REQUIRE(series.size() == other.size());
    for (size_t i = 0; i < series.size(); ++i) {
      if (std::isnan(series[i])) {
        CHECK(std::isnan(other[i]));
      } else {
        CHECK(series[i] == other[i]);
      }
    }
  }
}

TEST_CASE("strong weight decay collapses both trainers") {
  for (ModelKind model : {ModelKind::simsiam, ModelKind::phinet}) {
    TrainerConfig c = base_config();
    c.model = model;
    c.d = 4;
    c.m = 4;
    c.hyper = {1.5, 0.12};
    c.lr = 0.02;
    c.batch = 256;
    c.steps = 8000;
    c.seed = model == ModelKind::simsiam ? 5 : 6;
    const TrainResult r = train(c);
    CHECK(r.metrics.series.at("top_eig_phi").back() <= 1e-3);
  }
}

TEST_CASE("converged runs align the three eigenspaces") {
  TrainerConfig c = base_config();
  c.d = 3;
  c.m = 3;
  c.lr = 0.01;
  c.batch = 512;
  c.steps = 20000;
  c.seed = 12;
  const TrainResult r = train(c);
  CHECK(r.metrics.series.at("top_eig_phi").back() > 0.05);  // non-collapsed
  CHECK(r.metrics.series.at("principal_angle_deg").back() <= 5.0);
}

TEST_CASE("xphinet with unit ema keeps the slow encoder at its init") {
  TrainerConfig c = base_config();
  c.model = ModelKind::xphinet;
  c.ema_beta = 1.0;
  c.steps = 40;
  c.batch = 16;
  const MatrixXd init_long = init_state(c).wf_long;
  const TrainResult r = train(c);
  CHECK((r.state.wf_long - init_long).norm() == 0.0);
  CHECK((r.state.wf - init_long).norm() > 0.0);  // online encoder moved
}

TEST_CASE("mlp predictors train and keep metrics finite") {
  TrainerConfig c = base_config();
  c.arch = ArchKind::mlp1;
  c.hidden_width = 8;
  c.sim1_loss = LossKind::cosine;
  c.steps = 300;
  c.batch = 64;
  c.seed = 3;
  const TrainResult r = train(c);
  const auto& sim2 = r.metrics.series.at("loss_sim2");
  CHECK(sim2.back() < sim2.front());
  for (double v : r.metrics.series.at("top_eig_phi")) CHECK(std::isfinite(v));
}

TEST_CASE("flow agreement at an equilibrium initialization is exact") {
  // Embed the reduced-system sink as spectral matrices; both the trainer and
  // the flow stand still there.
  const Hyper hyper{1.5, 0.03};
  const Equilibrium* sink = nullptr;
  static std::vector<Equilibrium> eqs = find_equilibria_reduced(hyper);
  for (const auto& e : eqs)
    if (e.klass == StabilityClass::sink && e.psi > 0.1) sink = &e;
  REQUIRE(sink != nullptr);

  TrainerConfig c = base_config();
  c.d = 2;
  c.m = 2;
  c.exact_expectation = true;
  c.hyper = hyper;
  // init_state(spectral) must land exactly on the sink: craft via train's
  // init machinery is random, so check agreement through the library call
  // with the deterministic spectral seed and a short horizon instead.
  c.init = InitKind::spectral;
  c.init_scale = 0.4;
  const double dev_eq = [&] {
    // replace the random spectral draw with the sink spectrum
    Eigen::VectorXd phi(2), psi(2), gamma(2);
    phi << sink->psi * sink->psi, sink->psi * sink->psi;
    psi << sink->psi, sink->psi;
    gamma << sink->gamma, sink->gamma;
    const MatrixParams p0 = spectral_params(phi, psi, gamma, 9, true);
    // hand-rolled: one hundred euler steps of the closed-form gradient
    ModelState s;
    s.wf = p0.wf;
    s.wh = p0.wh;
    s.wg = *p0.wg;
    TrainerConfig ec = c;
    for (int k = 0; k < 100; ++k) sgd_step(s, expected_grads(s, ec), ec);
    const auto flow = integrate_flow(p0, hyper, c.lr, 100, Method::rk4);
    const MatrixParams& ft = flow.states.back();
    double dev = (s.wf - ft.wf).cwiseAbs().maxCoeff();
    dev = std::max(dev, (s.wh - ft.wh).cwiseAbs().maxCoeff());
    dev = std::max(dev, (s.wg - *ft.wg).cwiseAbs().maxCoeff());
    return dev;
  }();
  CHECK(dev_eq <= 1e-8);
}

TEST_CASE("trainer-flow deviation scales linearly in the learning rate") {
  TrainerConfig c = base_config();
  c.d = 2;
  c.m = 2;
  c.exact_expectation = true;
  c.init = InitKind::spectral;
  c.init_scale = 0.4;
  c.seed = 21;
  auto dev_at = [&](double lr) {
    TrainerConfig run = c;
    run.lr = lr;
    return flow_agreement(run, 1.0);
  };
  const double d4 = dev_at(4e-3);
  const double d2 = dev_at(2e-3);
  const double d1 = dev_at(1e-3);
  CHECK(d4 > d2);
  CHECK(d2 > d1);
  CHECK(d2 / d1 == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("exact-expectation phinet converges to the reduced-system sink") {
  TrainerConfig c = base_config();
  c.d = 2;
  c.m = 2;
  c.exact_expectation = true;
  c.init = InitKind::spectral;
  c.init_scale = 0.4;
  c.lr = 0.01;
  c.steps = 40000;
  c.seed = 33;
  const TrainResult r = train(c);
  const MatrixXd phi = r.state.wf * r.state.wf.transpose();
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(phi);
  const double psi_star_sq = 0.15150591;
  for (int i = 0; i < 2; ++i) {
    const double ev = es.eigenvalues()(i);
    if (ev > 1e-6) CHECK(std::abs(ev - psi_star_sq) / psi_star_sq < 0.10);
  }
  CHECK(es.eigenvalues().maxCoeff() > 1e-3);
}

TEST_CASE("trainer config validation") {
  TrainerConfig c = base_config();
  c.lr = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = base_config();
  c.ema_beta = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = base_config();
  c.exact_expectation = true;
  c.sim1_loss = LossKind::cosine;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = base_config();
  c.model = ModelKind::xphinet;
  c.exact_expectation = true;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_SUITE_END();
