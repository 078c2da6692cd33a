#pragma once

#include "pinnstab/systems.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <vector>

namespace pinnstab {

/// Times 0 = t_0 < t_1 < ... and one state per time (columns of `states`).
struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd states;  // n x N

  Eigen::Index size() const { return static_cast<Eigen::Index>(times.size()); }
  StateVec state(Eigen::Index i) const { return states.col(i); }
};

/// A state became non-finite during integration.
class IntegrationBlowup : public std::runtime_error {
 public:
  IntegrationBlowup(double t, const std::string& what) : std::runtime_error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Classical fixed-step RK4 from 0 to T; the last step is shortened to land
/// exactly on T. Returns every step.
Trajectory rk4_integrate(const SystemDynamics& system, const StateVec& x0, double T, double h = 1e-3);

/// Grid t_i = i * spacing for i = 0..floor(T / spacing).
std::vector<double> equidistant_grid(double T, double spacing = 0.01);

/// RK4 sampled on the equidistant grid by sub-stepping; h must divide spacing.
Trajectory rk4_on_grid(const SystemDynamics& system, const StateVec& x0, double T, double spacing = 0.01,
                       double h = 1e-3);

/// Closed-form solution of x' = x - x^3:
///   x(t) = x0 e^t / sqrt(1 + x0^2 (e^{2t} - 1)),
/// evaluated as x0 / sqrt(e^{-2t} + x0^2 (1 - e^{-2t})) to avoid overflow.
double pitchfork_analytic(double x0, double t);

/// Evaluates `producer` on the equidistant grid.
Trajectory sample_equidistant(const std::function<StateVec(double)>& producer, double T, double spacing = 0.01);

/// Ground truth used for scoring: analytic for the pitchfork, RK4 otherwise.
Trajectory reference_solution(const SystemDynamics& system, const StateVec& x0, double T, double spacing = 0.01);

/// CSV with header `t,x1[,x2]` and 17-significant-digit values.
std::string trajectory_csv(const Trajectory& traj);
void export_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace pinnstab
