#include "pinnstab/reference.hpp"

#include "pinnstab/io.hpp"

#include <cmath>
#include <sstream>

namespace pinnstab {

namespace {

StateVec rk4_step(const SystemDynamics& system, const StateVec& x, double h) {
  const StateVec k1 = system.f(x);
  const StateVec k2 = system.f(StateVec(x + 0.5 * h * k1));
  const StateVec k3 = system.f(StateVec(x + 0.5 * h * k2));
  const StateVec k4 = system.f(StateVec(x + h * k3));
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_finite(const StateVec& x, double t) {
  if (!x.allFinite()) throw IntegrationBlowup(t, "RK4 state became non-finite at t=" + std::to_string(t));
}

}  // namespace

Trajectory rk4_integrate(const SystemDynamics& system, const StateVec& x0, double T, double h) {
  if (!(T > 0.0)) throw std::invalid_argument("rk4_integrate: T must be > 0");
  if (!(h > 0.0) || h > T) throw std::invalid_argument("rk4_integrate: need 0 < h <= T");
  if (x0.size() != system.dimension()) throw DimensionError("rk4_integrate: initial condition has wrong dimension");
  const auto full_steps = static_cast<long>(std::floor(T / h * (1.0 + 1e-12)));
  const double remainder = T - static_cast<double>(full_steps) * h;
  const bool partial = remainder > 1e-12 * T;
  const long n = full_steps + (partial ? 1 : 0) + 1;

  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(n));
  traj.states.resize(x0.size(), n);
  StateVec x = x0;
  traj.times.push_back(0.0);
  traj.states.col(0) = x;
  for (long i = 1; i <= full_steps; ++i) {
    x = rk4_step(system, x, h);
    const double t = static_cast<double>(i) * h;
    check_finite(x, t);
    traj.times.push_back(t);
    traj.states.col(i) = x;
  }
  if (partial) {
    x = rk4_step(system, x, remainder);
    check_finite(x, T);
    traj.times.push_back(T);
    traj.states.col(n - 1) = x;
  } else {
    traj.times.back() = T;
  }
  return traj;
}

std::vector<double> equidistant_grid(double T, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("equidistant_grid: spacing must be > 0");
  if (T < 0.0) throw std::invalid_argument("equidistant_grid: T must be >= 0");
  const auto count = static_cast<long>(std::floor(T / spacing + 1e-9)) + 1;
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = static_cast<double>(i) * spacing;
  return grid;
}

Trajectory rk4_on_grid(const SystemDynamics& system, const StateVec& x0, double T, double spacing, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rk4_on_grid: h must be > 0");
  const double ratio = spacing / h;
  const long sub = std::lround(ratio);
  if (sub < 1 || std::abs(ratio - static_cast<double>(sub)) > 1e-9 * ratio)
    throw std::invalid_argument("rk4_on_grid: step size must divide the grid spacing");
  if (x0.size() != system.dimension()) throw DimensionError("rk4_on_grid: initial condition has wrong dimension");
  const double step = spacing / static_cast<double>(sub);

  Trajectory traj;
  traj.times = equidistant_grid(T, spacing);
  traj.states.resize(x0.size(), traj.size());
  StateVec x = x0;
  traj.states.col(0) = x;
  for (Eigen::Index i = 1; i < traj.size(); ++i) {
    for (long s = 0; s < sub; ++s) x = rk4_step(system, x, step);
    check_finite(x, traj.times[static_cast<std::size_t>(i)]);
    traj.states.col(i) = x;
  }
  return traj;
}

double pitchfork_analytic(double x0, double t) {
  if (t < 0.0) throw std::invalid_argument("pitchfork_analytic: t must be >= 0");
  const double e = std::exp(-2.0 * t);
  return x0 / std::sqrt(e + x0 * x0 * (1.0 - e));
}

Trajectory sample_equidistant(const std::function<StateVec(double)>& producer, double T, double spacing) {
  Trajectory traj;
  traj.times = equidistant_grid(T, spacing);
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    const StateVec x = producer(traj.times[static_cast<std::size_t>(i)]);
    if (i == 0) traj.states.resize(x.size(), traj.size());
    traj.states.col(i) = x;
  }
  return traj;
}

Trajectory reference_solution(const SystemDynamics& system, const StateVec& x0, double T, double spacing) {
  if (system.kind() == SystemKind::Pitchfork) {
    const double a = x0(0);
    return sample_equidistant([a](double t) { return StateVec::Constant(1, pitchfork_analytic(a, t)); }, T, spacing);
  }
  return rk4_on_grid(system, x0, T, spacing, 1e-3);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << 't';
  for (Eigen::Index k = 0; k < traj.states.rows(); ++k) out << ",x" << (k + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    out << format_double17(traj.times[static_cast<std::size_t>(i)]);
    for (Eigen::Index k = 0; k < traj.states.rows(); ++k) out << ',' << format_double17(traj.states(k, i));
    out << '\n';
  }
  return out.str();
}

void export_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  write_file_atomic(path, trajectory_csv(traj));
}

}  // namespace pinnstab
