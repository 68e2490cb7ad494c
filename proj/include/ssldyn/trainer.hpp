#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ssldyn/hyper.hpp"
#include "ssldyn/matrix_params.hpp"

namespace ssldyn {

enum class ModelKind { simsiam, phinet, xphinet };
enum class LossKind { mse, cosine };
enum class ArchKind { linear, mlp1 };

struct TrainerConfig {
  ModelKind model = ModelKind::phinet;
  LossKind sim1_loss = LossKind::cosine;
  LossKind sim2_loss = LossKind::mse;
  ArchKind arch = ArchKind::linear;
  int hidden_width = 16;  // mlp1 predictors
  int d = 8;
  int m = 8;
  Hyper hyper{};
  double lr = 1e-3;
  int batch = 256;
  long steps = 1000;
  double ema_beta = 0.996;  // xphinet
  std::uint64_t seed = 0;
  // Replaces sampled batches by the closed-form expected gradients of the
  // published flow (linear + mse only); removes Monte-Carlo noise from
  // theory-match runs.
  bool exact_expectation = false;
  // Feed an augmented view (instead of the clean input) to the sim-2 target.
  bool sim2_augmented_input = false;
  // Squash the g output with tanh (mlp1 only).
  bool g_output_tanh = false;
  InitKind init = InitKind::iid;
  double init_scale = 0.0;  // <= 0: 1/sqrt(fan-in) per layer
  long record_stride = 0;   // 0 = automatic rule

  bool has_g() const { return model != ModelKind::simsiam; }
  void validate() const;
};

/// Online parameters (f, h, g) plus the slow encoder f_long for x-phinet.
/// Linear arch uses wh/wg; mlp1 uses (uh, vh)/(ug, vg) with a rectifier
/// between. The encoder f is linear in every arch.
struct ModelState {
  Eigen::MatrixXd wf;       // m x d
  Eigen::MatrixXd wh, wg;   // linear predictors, m x m
  Eigen::MatrixXd uh, vh;   // mlp1 h: w x m, m x w
  Eigen::MatrixXd ug, vg;   // mlp1 g
  Eigen::MatrixXd wf_long;  // xphinet slow encoder, m x d
};

struct ModelGrads {
  Eigen::MatrixXd wf, wh, wg, uh, vh, ug, vg;
};

struct Batch {
  Eigen::MatrixXd x, x1, x2;  // n x d
  Eigen::MatrixXd x3;         // augmented sim-2 input (optional, n x d)
};

struct LossBreakdown {
  double sim1 = 0.0;
  double sim2 = 0.0;
  long cos_guard_hits = 0;  // near-zero-norm cosine normalizations
  double total() const { return sim1 + sim2; }
};

/// x ~ N(0, I_d); x1, x2 ~ N(x, sigma2 I) independently (and x3 when
/// requested). Deterministic given the generator state.
Batch sample_batch(int n, int d, double sigma2, std::mt19937_64& rng,
                   bool with_x3 = false);

ModelState init_state(const TrainerConfig& config);

/// Losses and exact reverse-mode gradients for one batch. Stop-gradient
/// branches (the z targets) are evaluated under `sg_state` and contribute no
/// gradient; callers pass the online state itself, the finite-difference
/// oracle freezes a copy.
std::pair<LossBreakdown, ModelGrads> loss_and_grads(const ModelState& state,
                                                    const Batch& batch,
                                                    const TrainerConfig& config,
                                                    const ModelState& sg_state);

/// Loss only, for finite-difference checks.
LossBreakdown forward_loss(const ModelState& state, const Batch& batch,
                           const TrainerConfig& config,
                           const ModelState& sg_state);

/// Closed-form expected gradients of the published flow (linear/mse), used
/// by exact-expectation mode.
ModelGrads expected_grads(const ModelState& state, const TrainerConfig& config);

/// theta <- theta - lr (grad + rho theta) over online parameters only.
void sgd_step(ModelState& state, const ModelGrads& grads,
              const TrainerConfig& config);

/// xi_long <- beta xi_long + (1-beta) xi over the encoder parameters.
void ema_update(ModelState& state, const TrainerConfig& config);

/// srank(M) = |M|_F^2 / |M|_2^2; zero matrix -> 0.
double stable_rank(const Eigen::MatrixXd& m);

/// Largest eigenvalue of wf wf^T.
double top_eigenvalue_phi(const ModelState& state);

/// Max angle (degrees) between Phi's eigenvectors u_i and B u_i for
/// B in {sym(wh), sym(wg)}; 0 when the three matrices share an eigenbasis.
/// Linear arch only (NaN otherwise).
double principal_angle_max(const ModelState& state, const TrainerConfig& config);

struct TrainMetrics {
  std::vector<long> steps;
  std::map<std::string, std::vector<double>> series;
};

struct TrainResult {
  ModelState state;
  TrainMetrics metrics;
};

/// Full training loop: sample -> loss/grads -> sgd -> (ema). Deterministic
/// given the config seed. Divergence aborts with the failing step index.
TrainResult train(const TrainerConfig& config);

/// Converts the trainer's linear-mode state to flow parameters.
MatrixParams to_matrix_params(const ModelState& state,
                              const TrainerConfig& config);

/// Runs the exact-expectation (or large-batch) linear/mse trainer and the
/// rk4 matrix flow from the same init to the same physical time
/// (steps * lr = horizon); returns the max parameter deviation.
double flow_agreement(const TrainerConfig& config, double horizon);

}  // namespace ssldyn
