#include "pinnstab/systems.hpp"

#include <cmath>
#include <limits>

namespace pinnstab {

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::AsymptoticallyStable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Saddle: return "saddle";
  }
  return "?";
}

namespace {

StateVec point(std::initializer_list<double> xs) {
  StateVec s(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) s(i++) = x;
  return s;
}

}  // namespace

SystemDynamics::SystemDynamics(SystemKind kind) : kind_(kind) {
  using S = Stability;
  switch (kind) {
    case SystemKind::Pitchfork:
      name_ = "pitchfork";
      dimension_ = 1;
      fixed_points_ = {{point({0.0}), S::Unstable},
                       {point({1.0}), S::AsymptoticallyStable},
                       {point({-1.0}), S::AsymptoticallyStable}};
      break;
    case SystemKind::Duffing:
      name_ = "duffing";
      dimension_ = 2;
      fixed_points_ = {{point({0.0, 0.0}), S::Saddle},
                       {point({1.0, 0.0}), S::AsymptoticallyStable},
                       {point({-1.0, 0.0}), S::AsymptoticallyStable}};
      break;
    case SystemKind::VanDerPol:
      name_ = "vanderpol";
      dimension_ = 2;
      fixed_points_ = {{point({0.0, 0.0}), S::Unstable}};
      break;
    case SystemKind::LotkaVolterra:
      name_ = "lotka-volterra";
      dimension_ = 2;
      fixed_points_ = {{point({0.0, 0.0}), S::Unstable},
                       {point({1.0, 1.0}), S::Saddle},
                       {point({0.0, 2.0}), S::AsymptoticallyStable},
                       {point({3.0, 0.0}), S::AsymptoticallyStable}};
      break;
  }
}

const std::vector<std::string>& SystemDynamics::names() {
  static const std::vector<std::string> all = {"pitchfork", "duffing", "vanderpol", "lotka-volterra"};
  return all;
}

SystemDynamics SystemDynamics::from_name(std::string_view name) {
  if (name == "pitchfork") return SystemDynamics(SystemKind::Pitchfork);
  if (name == "duffing") return SystemDynamics(SystemKind::Duffing);
  if (name == "vanderpol") return SystemDynamics(SystemKind::VanDerPol);
  if (name == "lotka-volterra") return SystemDynamics(SystemKind::LotkaVolterra);
  throw std::invalid_argument("unknown system '" + std::string(name) + "'");
}

bool has_real_spectrum(const Jacobian<double>& J) {
  if (J.rows() == 1) return true;
  const double tr = J.trace();
  const double det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
  return tr * tr - 4.0 * det >= 0.0;
}

Stability classify_fixed_point(const SystemDynamics& system, const StateVec& p) {
  const StateVec fx = system.f(p);
  if (fx.norm() > 1e-9) throw std::invalid_argument("classify_fixed_point: not a fixed point");
  const Jacobian<double> J = system.jacobian(p);
  const StateVec re = real_eigen_parts(J);
  if ((re.array() < 0.0).all()) return Stability::AsymptoticallyStable;
  const bool any_pos = (re.array() > 0.0).any();
  const bool any_neg = (re.array() < 0.0).any();
  if (any_pos && any_neg && has_real_spectrum(J)) return Stability::Saddle;
  if (any_pos) return Stability::Unstable;
  throw std::domain_error("classify_fixed_point: non-hyperbolic fixed point");
}

std::pair<const FixedPoint*, double> nearest_fixed_point(const SystemDynamics& system, const StateVec& x) {
  const FixedPoint* best = nullptr;
  double dist = std::numeric_limits<double>::infinity();
  for (const FixedPoint& fp : system.fixed_points()) {
    const double d = (fp.location - x).norm();
    if (d < dist) {
      dist = d;
      best = &fp;
    }
  }
  return {best, dist};
}

}  // namespace pinnstab
