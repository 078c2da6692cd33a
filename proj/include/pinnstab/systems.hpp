#pragma once

// Benchmark ODE systems x' = f(x) in first-order form, n in {1, 2}.
// Second-order oscillators are written with state (x, v), v = x'.

#include "pinnstab/autodiff.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pinnstab {

template <typename Scalar>
using State = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, 2, 1>;
template <typename Scalar>
using Jacobian = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

using StateVec = State<double>;

enum class SystemKind { Pitchfork, Duffing, VanDerPol, LotkaVolterra };

enum class Stability { AsymptoticallyStable, Unstable, Saddle };

std::string_view to_string(Stability s);

struct FixedPoint {
  StateVec location;
  Stability classification;
};

/// Thrown for states or matrices of the wrong size.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SystemDynamics {
 public:
  explicit SystemDynamics(SystemKind kind);

  /// Accepts "pitchfork", "duffing", "vanderpol", "lotka-volterra".
  static SystemDynamics from_name(std::string_view name);
  static const std::vector<std::string>& names();

  SystemKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int dimension() const { return dimension_; }
  const std::vector<FixedPoint>& fixed_points() const { return fixed_points_; }

  /// Whether the system is trained with the hard initial-condition
  /// parameterization (genuinely first-order systems).
  bool first_order() const { return kind_ == SystemKind::Pitchfork || kind_ == SystemKind::LotkaVolterra; }

  template <typename Scalar>
  State<Scalar> f(const State<Scalar>& x) const;

  template <typename Scalar>
  Jacobian<Scalar> jacobian(const State<Scalar>& x) const;

 private:
  template <typename Scalar>
  void check(const State<Scalar>& x) const {
    if (x.size() != dimension_)
      throw DimensionError(name_ + ": expected state of dimension " + std::to_string(dimension_) +
                           ", got " + std::to_string(x.size()));
  }

  SystemKind kind_;
  std::string name_;
  int dimension_;
  std::vector<FixedPoint> fixed_points_;
};

template <typename Scalar>
State<Scalar> SystemDynamics::f(const State<Scalar>& s) const {
  check(s);
  State<Scalar> out(dimension_);
  switch (kind_) {
    case SystemKind::Pitchfork:
      out(0) = s(0) - s(0) * s(0) * s(0);
      break;
    case SystemKind::Duffing: {
      const Scalar& x = s(0);
      const Scalar& v = s(1);
      out(0) = v;
      out(1) = -v + x - x * x * x;
      break;
    }
    case SystemKind::VanDerPol: {
      const Scalar& x = s(0);
      const Scalar& v = s(1);
      out(0) = v;
      out(1) = (1.0 - x * x) * v - x;
      break;
    }
    case SystemKind::LotkaVolterra: {
      const Scalar& x = s(0);
      const Scalar& y = s(1);
      out(0) = x * (3.0 - x - 2.0 * y);
      out(1) = y * (2.0 - x - y);
      break;
    }
  }
  return out;
}

template <typename Scalar>
Jacobian<Scalar> SystemDynamics::jacobian(const State<Scalar>& s) const {
  check(s);
  Jacobian<Scalar> J(dimension_, dimension_);
  switch (kind_) {
    case SystemKind::Pitchfork:
      J(0, 0) = 1.0 - 3.0 * s(0) * s(0);
      break;
    case SystemKind::Duffing:
      J(0, 0) = Scalar(0.0);
      J(0, 1) = Scalar(1.0);
      J(1, 0) = 1.0 - 3.0 * s(0) * s(0);
      J(1, 1) = Scalar(-1.0);
      break;
    case SystemKind::VanDerPol:
      J(0, 0) = Scalar(0.0);
      J(0, 1) = Scalar(1.0);
      J(1, 0) = -2.0 * s(0) * s(1) - 1.0;
      J(1, 1) = 1.0 - s(0) * s(0);
      break;
    case SystemKind::LotkaVolterra: {
      const Scalar& x = s(0);
      const Scalar& y = s(1);
      J(0, 0) = 3.0 - 2.0 * x - 2.0 * y;
      J(0, 1) = -2.0 * x;
      J(1, 0) = -y;
      J(1, 1) = 2.0 - x - 2.0 * y;
      break;
    }
  }
  return J;
}

/// Real parts of the spectrum of a 1x1 or 2x2 matrix, in closed form so that
/// the result stays differentiable when Scalar is a tape variable.
/// For n = 2 with disc = tr^2 - 4 det: disc >= 0 gives (tr +- sqrt(disc)) / 2,
/// otherwise the complex pair shares the real part tr / 2.
template <typename Scalar>
State<Scalar> real_eigen_parts(const Jacobian<Scalar>& J) {
  using ad::checked_sqrt;
  using ad::value_of;
  if (J.rows() != J.cols()) throw DimensionError("real_eigen_parts: matrix must be square");
  if (J.rows() == 1) {
    State<Scalar> out(1);
    out(0) = J(0, 0);
    return out;
  }
  if (J.rows() != 2) throw DimensionError("real_eigen_parts: only 1x1 and 2x2 matrices are supported");
  const Scalar tr = J(0, 0) + J(1, 1);
  const Scalar det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
  const Scalar disc = tr * tr - 4.0 * det;
  State<Scalar> out(2);
  if (value_of(disc) >= 0.0) {
    const Scalar root = checked_sqrt(disc);
    out(0) = 0.5 * (tr + root);
    out(1) = 0.5 * (tr - root);
  } else {
    out(0) = 0.5 * tr;
    out(1) = out(0);
  }
  return out;
}

/// Whether the 2x2 (or 1x1) spectrum is real.
bool has_real_spectrum(const Jacobian<double>& J);

/// Classifies `point`; throws std::invalid_argument unless |f(point)| <= 1e-9.
/// Throws std::domain_error for non-hyperbolic points (no positive and not
/// all negative real parts).
Stability classify_fixed_point(const SystemDynamics& system, const StateVec& point);

/// Nearest cataloged fixed point to `x` and its Euclidean distance.
std::pair<const FixedPoint*, double> nearest_fixed_point(const SystemDynamics& system, const StateVec& x);

}  // namespace pinnstab
