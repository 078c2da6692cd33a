#pragma once

// Loss assembly, optimizer and training loop.
//
//   L = L_IC + L_f + C * R
//   L_f  = mean_i |x'(t_i) - f(x(t_i))|^2
//   R    = mean_i R_SE(t_i) * R_LS(t_i)
//   R_LS = sum over the spectrum of J(x(t)) of max(Re(lambda), 0)
//   R_SE = exp(-|x'(t)|^2 / epsilon)
//   C    = max(c0 * (gamma - epoch / n_epochs), 0)
//
// The per-point terms are templates over the scalar type so the same code
// evaluates plain doubles, tape variables for the batched trainer, and the
// fully taped network used to validate it.

#include "pinnstab/autodiff.hpp"
#include "pinnstab/network.hpp"
#include "pinnstab/random.hpp"
#include "pinnstab/systems.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pinnstab {

struct RegularizationConfig {
  double epsilon = 0.01;
  double c0 = 1.0;
  double gamma = 0.5;
  /// false drops the local-stability factor (R_SE-only ablation).
  bool include_ls = true;

  void validate() const;
  bool operator==(const RegularizationConfig&) const = default;
};

struct TrainingConfig {
  std::string system = "pitchfork";
  StateVec x0 = StateVec::Constant(1, 0.1);
  double T = 10.0;
  int n_collocation = 1024;
  int n_epochs = 25000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::optional<RegularizationConfig> regularization;
  /// Unset: hard for first-order systems, soft for oscillators.
  std::optional<ConstraintMode::Kind> constraint;
  /// Hidden widths and activation; the output width follows the system.
  NetworkArchitecture architecture;
  /// Loss history is kept every `history_stride` epochs (and at the last one).
  int history_stride = 250;

  void validate() const;
  SystemDynamics dynamics() const { return SystemDynamics::from_name(system); }
  ConstraintMode constraint_mode() const;
  NetworkArchitecture network() const;
};

struct LossBreakdown {
  double l_ic = 0.0;
  double l_f = 0.0;
  double r = 0.0;
  double c = 0.0;
  double total = 0.0;
};

struct CollocationBatch {
  Eigen::RowVectorXd times;
};

/// n independent uniform draws on (0, T].
CollocationBatch sample_collocation(Rng& rng, int n, double T);

template <typename Scalar>
struct CandidatePoint {
  State<Scalar> x;
  State<Scalar> xdot;
};

template <typename Scalar>
Scalar squared_norm(const State<Scalar>& v) {
  Scalar s = v(0) * v(0);
  for (Eigen::Index i = 1; i < v.size(); ++i) s = s + v(i) * v(i);
  return s;
}

/// |x' - f(x)|^2 at one point.
template <typename Scalar>
Scalar residual_sq(const SystemDynamics& system, const CandidatePoint<Scalar>& p) {
  const State<Scalar> fx = system.f(p.x);
  State<Scalar> d(fx.size());
  for (Eigen::Index i = 0; i < fx.size(); ++i) d(i) = p.xdot(i) - fx(i);
  return squared_norm(d);
}

/// Sum of positive real parts of the Jacobian spectrum at x.
template <typename Scalar>
Scalar reg_ls(const SystemDynamics& system, const State<Scalar>& x) {
  using ad::relu;
  const State<Scalar> re = real_eigen_parts<Scalar>(system.jacobian(x));
  Scalar s = relu(re(0));
  for (Eigen::Index i = 1; i < re.size(); ++i) s = s + relu(re(i));
  return s;
}

/// exp(-|x'|^2 / epsilon)
template <typename Scalar>
Scalar reg_se(const State<Scalar>& xdot, double epsilon) {
  using std::exp;
  using ad::exp;
  if (!(epsilon > 0.0)) throw std::invalid_argument("reg_se: epsilon must be positive");
  return exp(squared_norm(xdot) * (-1.0 / epsilon));
}

template <typename Scalar>
Scalar reg_point(const SystemDynamics& system, const CandidatePoint<Scalar>& p, double epsilon, bool include_ls) {
  const Scalar se = reg_se(p.xdot, epsilon);
  return include_ls ? se * reg_ls(system, p.x) : se;
}

template <typename Scalar>
Scalar physics_loss(const SystemDynamics& system, std::span<const CandidatePoint<Scalar>> points) {
  Scalar sum(0.0);
  for (const auto& p : points) sum = sum + residual_sq(system, p);
  return sum * (1.0 / static_cast<double>(points.size()));
}

template <typename Scalar>
Scalar regularization(const SystemDynamics& system, std::span<const CandidatePoint<Scalar>> points, double epsilon,
                      bool include_ls) {
  Scalar sum(0.0);
  for (const auto& p : points) sum = sum + reg_point(system, p, epsilon, include_ls);
  return sum * (1.0 / static_cast<double>(points.size()));
}

/// |x(0) - x0|^2 under soft constraints; exactly 0 (and off the graph) under
/// hard constraints.
template <typename Scalar>
Scalar ic_loss(const ConstraintMode& mode, const State<Scalar>& x_at_zero) {
  if (mode.is_hard()) return Scalar(0.0);
  if (x_at_zero.size() != mode.x0.size()) throw DimensionError("ic_loss: dimension mismatch");
  State<Scalar> d(x_at_zero.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = x_at_zero(i) - mode.x0(i);
  return squared_norm(d);
}

/// max(c0 * (gamma - epoch / n_epochs), 0)
double decay_coefficient(double c0, double gamma, double epoch, double n_epochs);

template <typename Scalar>
struct LossTerms {
  Scalar l_ic;
  Scalar l_f;
  Scalar r;
  double c;
  Scalar total;

  LossBreakdown breakdown() const {
    using ad::value_of;
    return {value_of(l_ic), value_of(l_f), value_of(r), c, value_of(total)};
  }
};

template <typename Scalar>
LossTerms<Scalar> total_loss(const SystemDynamics& system, std::span<const CandidatePoint<Scalar>> points,
                             const ConstraintMode& mode, const State<Scalar>& x_at_zero,
                             const std::optional<RegularizationConfig>& reg, int epoch, int n_epochs) {
  LossTerms<Scalar> out{ic_loss(mode, x_at_zero), physics_loss(system, points), Scalar(0.0), 0.0, Scalar(0.0)};
  out.total = out.l_ic + out.l_f;
  if (reg) {
    out.r = regularization(system, points, reg->epsilon, reg->include_ls);
    out.c = decay_coefficient(reg->c0, reg->gamma, epoch, n_epochs);
    if (out.c > 0.0) out.total = out.total + out.c * out.r;
  }
  return out;
}

/// Total loss of a fully taped network (validation route).
LossTerms<ad::Var> tape_total_loss(const NetworkArchitecture& arch, std::span<const ad::Var> theta,
                                   const SystemDynamics& system, const ConstraintMode& mode,
                                   const CollocationBatch& batch, const std::optional<RegularizationConfig>& reg,
                                   int epoch, int n_epochs);

/// Batched loss evaluation and parameter gradient for one epoch. The network
/// body runs through `BatchedNetwork`; each point's loss head is taped.
class BatchedLoss {
 public:
  LossBreakdown evaluate(const NetworkParams& params, const SystemDynamics& system, const ConstraintMode& mode,
                         const CollocationBatch& batch, const std::optional<RegularizationConfig>& reg, int epoch,
                         int n_epochs, Eigen::VectorXd& grad);

 private:
  BatchedNetwork net_;
  ad::Tape tape_;
  std::vector<double> adjoints_;
  Eigen::RowVectorXd times_;
  Eigen::MatrixXd x_, xt_, g_x_, g_xt_;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;

  AdamState() = default;
  explicit AdamState(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

/// One bias-corrected Adam update with a constant learning rate.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state, double lr);

struct HistoryEntry {
  int epoch;
  LossBreakdown loss;
};

struct TrainResult {
  NetworkParams params;
  std::vector<HistoryEntry> history;
  bool diverged = false;
  /// Adam steps applied.
  int epochs_completed = 0;
  double wall_seconds = 0.0;
};

using ProgressFn = std::function<void(const HistoryEntry&)>;

/// Full training run. The run's generator is seeded from config.seed and
/// used first for parameter initialization, then for one collocation batch
/// per epoch. A non-finite total loss stops the run and marks it diverged.
TrainResult train(const TrainingConfig& config, const ProgressFn& progress = {});

}  // namespace pinnstab
