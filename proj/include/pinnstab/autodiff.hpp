#pragma once

// Scalar reverse-mode tape with a differentiable tangent channel.
//
// A `Var` is a handle to one node of a `Tape` (or a detached constant).
// A `DualScalar` pairs two `Var`s: the value of a quantity and its derivative
// with respect to the single network input t. Both channels are recorded on
// the tape, so a loss built from tangents (the ODE residual uses x'(t)) can
// itself be differentiated with respect to the network parameters.

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pinnstab::ad {

class Tape;

class Var {
 public:
  Var() = default;
  Var(double constant) : value_(constant) {}  // NOLINT(google-explicit-constructor)

  double value() const { return value_; }
  bool is_constant() const { return tape_ == nullptr; }
  Tape* tape() const { return tape_; }
  std::int32_t index() const { return index_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::int32_t index, double value) : tape_(tape), index_(index), value_(value) {}

  Tape* tape_ = nullptr;
  std::int32_t index_ = -1;
  double value_ = 0.0;
};

enum class OpKind : std::uint8_t {
  Leaf, Add, Sub, Mul, Div, Neg, Exp, Tanh, Sqrt, Sigmoid, Relu, Square
};

/// One recorded operation. Each node has at most two operands; the local
/// partial derivatives are evaluated when the node is recorded.
struct GraphNode {
  OpKind op;
  std::int32_t lhs;
  std::int32_t rhs;
  double d_lhs;
  double d_rhs;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var variable(double value);
  std::vector<Var> variables(std::span<const double> values);

  Var record(OpKind op, double value, const Var& a, double d_a);
  Var record(OpKind op, double value, const Var& a, double d_a, const Var& b, double d_b);

  /// Reverse sweep from `output`. Returns the adjoint of every node; each
  /// node is visited once, in reverse recording order.
  std::vector<double> adjoints(const Var& output) const;
  /// As above, reusing `adj` as storage.
  void adjoints(const Var& output, std::vector<double>& adj) const;

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }

 private:
  std::vector<GraphNode> nodes_;
};

using GradientVector = Eigen::VectorXd;

/// Gradient of `loss` with respect to `leaves`, in the order given.
/// A constant loss yields the zero vector. Throws std::invalid_argument if
/// `loss` was recorded on a different tape than the leaves.
GradientVector backward(const Var& loss, std::span<const Var> leaves);

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
Var& operator+=(Var& a, const Var& b);
Var& operator-=(Var& a, const Var& b);
Var& operator*=(Var& a, const Var& b);

Var exp(const Var& a);
Var tanh(const Var& a);
/// Throws std::domain_error for negative arguments. The derivative at 0 is
/// taken as 0 so that gradients stay finite.
Var sqrt(const Var& a);
Var sigmoid(const Var& a);
/// max(a, 0); subgradient 0 at a == 0.
Var relu(const Var& a);
Var square(const Var& a);

// Scalar-generic helpers so that templated code can run on double or Var.
inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.value(); }
double sigmoid(double x);
inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double square(double x) { return x * x; }
/// sqrt with the same domain rule as the Var overload.
double checked_sqrt(double x);
inline Var checked_sqrt(const Var& x) { return sqrt(x); }

struct DualScalar {
  Var value;
  Var tangent;

  double v() const { return value.value(); }
  double dt() const { return tangent.value(); }
};

/// The network input t: value t, tangent exactly 1.
DualScalar lift_input(double t);
/// A quantity independent of t: tangent exactly 0.
DualScalar constant(const Var& value);

DualScalar operator+(const DualScalar& a, const DualScalar& b);
DualScalar operator-(const DualScalar& a, const DualScalar& b);
DualScalar operator*(const DualScalar& a, const DualScalar& b);
DualScalar exp(const DualScalar& a);
DualScalar tanh(const DualScalar& a);
DualScalar sqrt(const DualScalar& a);
DualScalar sigmoid(const DualScalar& a);
DualScalar relu(const DualScalar& a);
/// z * sigmoid(z)
DualScalar swish(const DualScalar& a);

/// Loss as a function of parameters recorded on a fresh tape.
using TapeLoss = std::function<Var(Tape&, std::span<const Var>)>;

/// Largest discrepancy between `backward` and central differences of `loss`
/// at `params`. Per entry the discrepancy is |g_ad - g_fd| / s with
/// s = max(|g_ad|, |g_fd|, 1e-3 * max_j |g_fd_j|); entries that are tiny
/// compared with the largest gradient entry are thereby measured on the
/// scale of the gradient. Returns 0 when both gradients vanish.
double finite_difference_check(const TapeLoss& loss, const Eigen::VectorXd& params, double h);

/// Reverse-mode gradient of `loss` at `params` (value returned through `value`).
GradientVector tape_gradient(const TapeLoss& loss, const Eigen::VectorXd& params,
                             double* value = nullptr);

}  // namespace pinnstab::ad

namespace Eigen {

template <>
struct NumTraits<pinnstab::ad::Var> : NumTraits<double> {
  using Real = pinnstab::ad::Var;
  using NonInteger = pinnstab::ad::Var;
  using Nested = pinnstab::ad::Var;
  using Literal = pinnstab::ad::Var;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 3,
    MulCost = 3
  };
};

}  // namespace Eigen
