#include "pinnstab/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pinnstab::ad {

Var Tape::variable(double value) {
  nodes_.push_back({OpKind::Leaf, -1, -1, 0.0, 0.0});
  return Var(this, static_cast<std::int32_t>(nodes_.size() - 1), value);
}

std::vector<Var> Tape::variables(std::span<const double> values) {
  std::vector<Var> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(variable(v));
  return out;
}

Var Tape::record(OpKind op, double value, const Var& a, double d_a) {
  if (a.is_constant()) return Var(value);
  nodes_.push_back({op, a.index(), -1, d_a, 0.0});
  return Var(this, static_cast<std::int32_t>(nodes_.size() - 1), value);
}

Var Tape::record(OpKind op, double value, const Var& a, double d_a, const Var& b, double d_b) {
  if (a.is_constant()) return record(op, value, b, d_b);
  if (b.is_constant()) return record(op, value, a, d_a);
  nodes_.push_back({op, a.index(), b.index(), d_a, d_b});
  return Var(this, static_cast<std::int32_t>(nodes_.size() - 1), value);
}

std::vector<double> Tape::adjoints(const Var& output) const {
  std::vector<double> adj;
  adjoints(output, adj);
  return adj;
}

void Tape::adjoints(const Var& output, std::vector<double>& adj) const {
  adj.assign(nodes_.size(), 0.0);
  if (output.is_constant()) return;
  if (output.tape() != this) throw std::invalid_argument("output was recorded on another tape");
  adj[static_cast<std::size_t>(output.index())] = 1.0;
  for (std::int32_t i = output.index(); i >= 0; --i) {
    const GraphNode& n = nodes_[static_cast<std::size_t>(i)];
    const double a = adj[static_cast<std::size_t>(i)];
    if (a == 0.0) continue;
    if (n.lhs >= 0) adj[static_cast<std::size_t>(n.lhs)] += n.d_lhs * a;
    if (n.rhs >= 0) adj[static_cast<std::size_t>(n.rhs)] += n.d_rhs * a;
  }
}

GradientVector backward(const Var& loss, std::span<const Var> leaves) {
  GradientVector grad = GradientVector::Zero(static_cast<Eigen::Index>(leaves.size()));
  if (loss.is_constant()) return grad;
  const Tape* tape = loss.tape();
  const std::vector<double> adj = tape->adjoints(loss);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const Var& leaf = leaves[i];
    if (leaf.is_constant()) continue;
    if (leaf.tape() != tape) throw std::invalid_argument("leaf was recorded on another tape");
    grad[static_cast<Eigen::Index>(i)] = adj[static_cast<std::size_t>(leaf.index())];
  }
  return grad;
}

namespace {

Tape* tape_of(const Var& a, const Var& b) { return a.tape() != nullptr ? a.tape() : b.tape(); }

}  // namespace

Var operator+(const Var& a, const Var& b) {
  const double v = a.value() + b.value();
  Tape* t = tape_of(a, b);
  return t ? t->record(OpKind::Add, v, a, 1.0, b, 1.0) : Var(v);
}

Var operator-(const Var& a, const Var& b) {
  const double v = a.value() - b.value();
  Tape* t = tape_of(a, b);
  return t ? t->record(OpKind::Sub, v, a, 1.0, b, -1.0) : Var(v);
}

Var operator*(const Var& a, const Var& b) {
  const double v = a.value() * b.value();
  Tape* t = tape_of(a, b);
  return t ? t->record(OpKind::Mul, v, a, b.value(), b, a.value()) : Var(v);
}

Var operator/(const Var& a, const Var& b) {
  const double v = a.value() / b.value();
  Tape* t = tape_of(a, b);
  return t ? t->record(OpKind::Div, v, a, 1.0 / b.value(), b, -v / b.value()) : Var(v);
}

Var operator-(const Var& a) {
  return a.tape() ? a.tape()->record(OpKind::Neg, -a.value(), a, -1.0) : Var(-a.value());
}

Var& operator+=(Var& a, const Var& b) { return a = a + b; }
Var& operator-=(Var& a, const Var& b) { return a = a - b; }
Var& operator*=(Var& a, const Var& b) { return a = a * b; }

Var exp(const Var& a) {
  const double v = std::exp(a.value());
  return a.tape() ? a.tape()->record(OpKind::Exp, v, a, v) : Var(v);
}

Var tanh(const Var& a) {
  const double v = std::tanh(a.value());
  return a.tape() ? a.tape()->record(OpKind::Tanh, v, a, 1.0 - v * v) : Var(v);
}

double checked_sqrt(double x) {
  if (x < 0.0) throw std::domain_error("sqrt of negative value");
  return std::sqrt(x);
}

Var sqrt(const Var& a) {
  const double v = checked_sqrt(a.value());
  const double d = v > 0.0 ? 0.5 / v : 0.0;
  return a.tape() ? a.tape()->record(OpKind::Sqrt, v, a, d) : Var(v);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Var sigmoid(const Var& a) {
  const double s = sigmoid(a.value());
  return a.tape() ? a.tape()->record(OpKind::Sigmoid, s, a, s * (1.0 - s)) : Var(s);
}

Var relu(const Var& a) {
  const double v = a.value() > 0.0 ? a.value() : 0.0;
  const double d = a.value() > 0.0 ? 1.0 : 0.0;
  return a.tape() ? a.tape()->record(OpKind::Relu, v, a, d) : Var(v);
}

Var square(const Var& a) {
  const double v = a.value() * a.value();
  return a.tape() ? a.tape()->record(OpKind::Square, v, a, 2.0 * a.value()) : Var(v);
}

DualScalar lift_input(double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("lift_input: t must be finite");
  return {Var(t), Var(1.0)};
}

DualScalar constant(const Var& value) { return {value, Var(0.0)}; }

DualScalar operator+(const DualScalar& a, const DualScalar& b) {
  return {a.value + b.value, a.tangent + b.tangent};
}

DualScalar operator-(const DualScalar& a, const DualScalar& b) {
  return {a.value - b.value, a.tangent - b.tangent};
}

DualScalar operator*(const DualScalar& a, const DualScalar& b) {
  return {a.value * b.value, a.tangent * b.value + a.value * b.tangent};
}

DualScalar exp(const DualScalar& a) {
  Var y = exp(a.value);
  return {y, y * a.tangent};
}

DualScalar tanh(const DualScalar& a) {
  Var y = tanh(a.value);
  return {y, (1.0 - square(y)) * a.tangent};
}

DualScalar sqrt(const DualScalar& a) {
  Var y = sqrt(a.value);
  if (y.value() == 0.0) return {y, Var(0.0)};
  return {y, a.tangent / (2.0 * y)};
}

DualScalar sigmoid(const DualScalar& a) {
  Var s = sigmoid(a.value);
  return {s, s * (1.0 - s) * a.tangent};
}

DualScalar relu(const DualScalar& a) {
  const double slope = a.value.value() > 0.0 ? 1.0 : 0.0;
  return {relu(a.value), slope * a.tangent};
}

DualScalar swish(const DualScalar& a) { return a * sigmoid(a); }

GradientVector tape_gradient(const TapeLoss& loss, const Eigen::VectorXd& params, double* value) {
  Tape tape;
  std::vector<Var> leaves =
      tape.variables(std::span<const double>(params.data(), static_cast<std::size_t>(params.size())));
  Var out = loss(tape, leaves);
  if (value) *value = out.value();
  return backward(out, leaves);
}

double finite_difference_check(const TapeLoss& loss, const Eigen::VectorXd& params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference_check: h must be positive");
  const GradientVector g_ad = tape_gradient(loss, params);

  auto eval = [&](const Eigen::VectorXd& p) {
    Tape tape;
    std::vector<Var> leaves =
        tape.variables(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
    return loss(tape, leaves).value();
  };

  GradientVector g_fd(params.size());
  Eigen::VectorXd probe = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + h;
    const double up = eval(probe);
    probe[i] = params[i] - h;
    const double down = eval(probe);
    probe[i] = params[i];
    g_fd[i] = (up - down) / (2.0 * h);
  }

  const double floor = 1e-3 * (g_fd.size() > 0 ? g_fd.cwiseAbs().maxCoeff() : 0.0);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double diff = std::abs(g_ad[i] - g_fd[i]);
    const double scale = std::max({std::abs(g_ad[i]), std::abs(g_fd[i]), floor});
    if (scale == 0.0) continue;
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

}  // namespace pinnstab::ad
