#include "pinnstab/training.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace pinnstab {

void RegularizationConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("regularization: epsilon must be > 0");
  if (!(c0 >= 0.0)) throw std::invalid_argument("regularization: c0 must be >= 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("regularization: gamma must lie in (0, 1)");
}

void TrainingConfig::validate() const {
  const SystemDynamics sys = dynamics();
  if (x0.size() != sys.dimension())
    throw std::invalid_argument("initial condition for " + system + " needs " + std::to_string(sys.dimension()) +
                                " component(s)");
  if (!(T > 0.0)) throw std::invalid_argument("simulation time T must be > 0");
  if (n_collocation < 1) throw std::invalid_argument("n_collocation must be >= 1");
  if (n_epochs < 1) throw std::invalid_argument("n_epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (history_stride < 1) throw std::invalid_argument("history_stride must be >= 1");
  if (regularization) regularization->validate();
  network().validate();
}

ConstraintMode TrainingConfig::constraint_mode() const {
  const SystemDynamics sys = dynamics();
  if (!constraint) return ConstraintMode::for_system(sys, x0);
  return *constraint == ConstraintMode::Kind::Hard ? ConstraintMode::hard(x0) : ConstraintMode::soft(x0);
}

NetworkArchitecture TrainingConfig::network() const {
  NetworkArchitecture arch = architecture;
  arch.output_dim = dynamics().dimension();
  return arch;
}

CollocationBatch sample_collocation(Rng& rng, int n, double T) {
  if (n < 1) throw std::invalid_argument("sample_collocation: n must be >= 1");
  if (!(T > 0.0)) throw std::invalid_argument("sample_collocation: T must be > 0");
  CollocationBatch batch{Eigen::RowVectorXd(n)};
  // 1 - u maps [0, 1) onto (0, 1].
  for (int i = 0; i < n; ++i) batch.times[i] = T * (1.0 - rng.uniform());
  return batch;
}

double decay_coefficient(double c0, double gamma, double epoch, double n_epochs) {
  return std::max(c0 * (gamma - epoch / n_epochs), 0.0);
}

LossTerms<ad::Var> tape_total_loss(const NetworkArchitecture& arch, std::span<const ad::Var> theta,
                                   const SystemDynamics& system, const ConstraintMode& mode,
                                   const CollocationBatch& batch, const std::optional<RegularizationConfig>& reg,
                                   int epoch, int n_epochs) {
  const int n = system.dimension();
  auto to_point = [n](const std::vector<ad::DualScalar>& out) {
    CandidatePoint<ad::Var> p{State<ad::Var>(n), State<ad::Var>(n)};
    for (int k = 0; k < n; ++k) {
      p.x(k) = out[static_cast<std::size_t>(k)].value;
      p.xdot(k) = out[static_cast<std::size_t>(k)].tangent;
    }
    return p;
  };
  std::vector<CandidatePoint<ad::Var>> points;
  points.reserve(static_cast<std::size_t>(batch.times.size()));
  for (Eigen::Index i = 0; i < batch.times.size(); ++i)
    points.push_back(to_point(candidate_solution(arch, theta, mode, batch.times[i])));
  State<ad::Var> x_at_zero(n);
  if (!mode.is_hard()) x_at_zero = to_point(candidate_solution(arch, theta, mode, 0.0)).x;
  return total_loss<ad::Var>(system, points, mode, x_at_zero, reg, epoch, n_epochs);
}

LossBreakdown BatchedLoss::evaluate(const NetworkParams& params, const SystemDynamics& system,
                                    const ConstraintMode& mode, const CollocationBatch& batch,
                                    const std::optional<RegularizationConfig>& reg, int epoch, int n_epochs,
                                    Eigen::VectorXd& grad) {
  const Eigen::Index n_col = batch.times.size();
  const int n = system.dimension();
  const bool soft = !mode.is_hard();
  times_.resize(n_col + (soft ? 1 : 0));
  times_.head(n_col) = batch.times;
  if (soft) times_[n_col] = 0.0;

  net_.forward(params, times_);
  apply_constraint(mode, times_, net_.value(), net_.tangent(), x_, xt_);
  g_x_.setZero(n, times_.size());
  g_xt_.setZero(n, times_.size());

  const double c = reg ? decay_coefficient(reg->c0, reg->gamma, epoch, n_epochs) : 0.0;
  const bool reg_in_graph = reg && c > 0.0;
  const double inv_n = 1.0 / static_cast<double>(n_col);
  double sum_f = 0.0;
  double sum_r = 0.0;

  CandidatePoint<ad::Var> p{State<ad::Var>(n), State<ad::Var>(n)};
  for (Eigen::Index i = 0; i < n_col; ++i) {
    tape_.clear();
    for (int k = 0; k < n; ++k) {
      p.x(k) = tape_.variable(x_(k, i));
      p.xdot(k) = tape_.variable(xt_(k, i));
    }
    const ad::Var res = residual_sq(system, p);
    sum_f += res.value();
    ad::Var local;
    if (reg_in_graph) {
      const ad::Var r = reg_point(system, p, reg->epsilon, reg->include_ls);
      sum_r += r.value();
      local = (res + c * r) * inv_n;
    } else {
      local = res * inv_n;
      if (reg) {
        const CandidatePoint<double> pd{x_.col(i), xt_.col(i)};
        sum_r += reg_point(system, pd, reg->epsilon, reg->include_ls);
      }
    }
    tape_.adjoints(local, adjoints_);
    for (int k = 0; k < n; ++k) {
      g_x_(k, i) = adjoints_[static_cast<std::size_t>(p.x(k).index())];
      g_xt_(k, i) = adjoints_[static_cast<std::size_t>(p.xdot(k).index())];
    }
  }

  LossBreakdown out;
  out.l_f = sum_f * inv_n;
  out.r = reg ? sum_r * inv_n : 0.0;
  out.c = c;
  if (soft) {
    tape_.clear();
    State<ad::Var> x0(n);
    for (int k = 0; k < n; ++k) x0(k) = tape_.variable(x_(k, n_col));
    const ad::Var lic = ic_loss(mode, x0);
    out.l_ic = lic.value();
    tape_.adjoints(lic, adjoints_);
    for (int k = 0; k < n; ++k) g_x_(k, n_col) = adjoints_[static_cast<std::size_t>(x0(k).index())];
  }
  out.total = out.l_ic + out.l_f;
  if (reg_in_graph) out.total += c * out.r;

  constraint_backward(mode, times_, g_x_, g_xt_);
  net_.backward(params, g_x_, g_xt_, grad);
  return out;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state, double lr) {
  if (grad.size() != params.size()) throw std::invalid_argument("adam_step: gradient size mismatch");
  if (state.m.size() != params.size()) {
    state.m.setZero(params.size());
    state.v.setZero(params.size());
  }
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -= lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + state.eps_hat);
}

TrainResult train(const TrainingConfig& config, const ProgressFn& progress) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const SystemDynamics system = config.dynamics();
  const ConstraintMode mode = config.constraint_mode();

  Rng rng(config.seed);
  TrainResult result{init_params(config.network(), rng), {}, false, 0, 0.0};
  AdamState adam(result.params.values.size());
  BatchedLoss loss;
  Eigen::VectorXd grad;

  for (int epoch = 0; epoch < config.n_epochs; ++epoch) {
    const CollocationBatch batch = sample_collocation(rng, config.n_collocation, config.T);
    const LossBreakdown lb =
        loss.evaluate(result.params, system, mode, batch, config.regularization, epoch, config.n_epochs, grad);
    const bool last = epoch + 1 == config.n_epochs;
    if (!std::isfinite(lb.total)) {
      result.diverged = true;
      result.history.push_back({epoch, lb});
      if (progress) progress(result.history.back());
      break;
    }
    adam_step(result.params.values, grad, adam, config.learning_rate);
    ++result.epochs_completed;
    if (epoch % config.history_stride == 0 || last) {
      result.history.push_back({epoch, lb});
      if (progress) progress(result.history.back());
    }
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace pinnstab
