#pragma once

// Fully connected candidate-solution network x_theta(t): R -> R^n.
//
// Two evaluation routes share one parameter layout:
//  * the tape route (`mlp_forward`, `candidate_solution`) runs on DualScalar
//    and is fully generic, used for validation and small networks;
//  * the batched route (`BatchedNetwork`) evaluates a whole collocation batch
//    with dense Eigen kernels and back-propagates through both the value and
//    the tangent channel by hand. Training uses this route.
//
// Parameter layout: for each layer l = 0..L (L hidden layers, then the
// output layer), the weight matrix W_l (out_l x in_l, column-major) followed
// by the bias b_l (out_l).

#include "pinnstab/autodiff.hpp"
#include "pinnstab/random.hpp"
#include "pinnstab/systems.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace pinnstab {

enum class Activation { Swish, Identity };

struct NetworkArchitecture {
  std::vector<int> hidden{50, 50, 50, 50};
  int output_dim = 1;
  Activation activation = Activation::Swish;

  /// Throws std::invalid_argument on widths < 1 or output_dim outside {1, 2}.
  void validate() const;
  int layer_count() const { return static_cast<int>(hidden.size()) + 1; }
  int fan_in(int layer) const { return layer == 0 ? 1 : hidden[static_cast<std::size_t>(layer - 1)]; }
  int fan_out(int layer) const {
    return layer == layer_count() - 1 ? output_dim : hidden[static_cast<std::size_t>(layer)];
  }
  /// Offset of W_layer in the flat parameter vector; b_layer follows W_layer.
  Eigen::Index weight_offset(int layer) const;
  Eigen::Index bias_offset(int layer) const { return weight_offset(layer) + fan_out(layer) * fan_in(layer); }
  Eigen::Index parameter_count() const { return weight_offset(layer_count()); }

  bool operator==(const NetworkArchitecture&) const = default;
};

struct NetworkParams {
  NetworkArchitecture arch;
  Eigen::VectorXd values;

  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const {
    return {values.data() + arch.weight_offset(layer), arch.fan_out(layer), arch.fan_in(layer)};
  }
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const {
    return {values.data() + arch.bias_offset(layer), arch.fan_out(layer)};
  }
  Eigen::Map<Eigen::MatrixXd> weight(int layer) {
    return {values.data() + arch.weight_offset(layer), arch.fan_out(layer), arch.fan_in(layer)};
  }
  Eigen::Map<Eigen::VectorXd> bias(int layer) {
    return {values.data() + arch.bias_offset(layer), arch.fan_out(layer)};
  }
};

/// Xavier-uniform weights, zero biases.
NetworkParams init_params(const NetworkArchitecture& arch, Rng& rng);
NetworkParams init_params(const NetworkArchitecture& arch, std::uint64_t seed);

double swish(double z);

struct ConstraintMode {
  enum class Kind { Hard, Soft };
  Kind kind = Kind::Soft;
  StateVec x0;

  static ConstraintMode hard(StateVec x0) { return {Kind::Hard, std::move(x0)}; }
  static ConstraintMode soft(StateVec x0) { return {Kind::Soft, std::move(x0)}; }
  /// Hard for first-order systems, soft for the oscillators.
  static ConstraintMode for_system(const SystemDynamics& system, StateVec x0);
  bool is_hard() const { return kind == Kind::Hard; }
};

// ---- tape route -----------------------------------------------------------

/// Raw network output on the tape. `theta` must follow the layout above.
std::vector<ad::DualScalar> mlp_forward(const NetworkArchitecture& arch, std::span<const ad::Var> theta,
                                        const ad::DualScalar& t);
/// Same, with parameters as constants.
std::vector<ad::DualScalar> mlp_forward(const NetworkParams& params, const ad::DualScalar& t);

/// Applies the constraint mode to a raw output at time t:
/// hard: x0 + tanh(t) * raw, soft: raw unchanged.
std::vector<ad::DualScalar> apply_constraint(const ConstraintMode& mode, double t,
                                             const std::vector<ad::DualScalar>& raw);

std::vector<ad::DualScalar> candidate_solution(const NetworkArchitecture& arch, std::span<const ad::Var> theta,
                                               const ConstraintMode& mode, double t);
std::vector<ad::DualScalar> candidate_solution(const NetworkParams& params, const ConstraintMode& mode, double t);

// ---- batched route --------------------------------------------------------

/// Batched forward/backward over a row of input times. Holds the activation
/// cache of the last forward pass; one instance per training run.
class BatchedNetwork {
 public:
  /// Evaluates the raw network at `times` (1 x B). Results: n x B.
  void forward(const NetworkParams& params, const Eigen::RowVectorXd& times);

  const Eigen::MatrixXd& value() const { return value_; }
  const Eigen::MatrixXd& tangent() const { return tangent_; }

  /// Accumulates d(loss)/d(theta) into `grad` (resized and zeroed) given the
  /// loss sensitivities to the raw outputs' value and tangent channels.
  void backward(const NetworkParams& params, const Eigen::MatrixXd& g_value, const Eigen::MatrixXd& g_tangent,
                Eigen::VectorXd& grad);

 private:
  // Value and tangent channels side by side: columns [0, B) and [B, 2B).
  // Per layer: input activations a_, pre-activations z_; per hidden layer
  // sigmoid(z) and swish'(z) on the value channel.
  std::vector<Eigen::MatrixXd> a_, z_;
  std::vector<Eigen::ArrayXXd> sig_, d1_;
  Eigen::MatrixXd y_, value_, tangent_;
  Eigen::MatrixXd g_, g_a_;
  Eigen::Index batch_ = 0;
  Activation activation_ = Activation::Swish;
};

/// Hard constraint over a batch: value/tangent of x0 + tanh(t) * raw.
/// Soft mode copies. Inputs and outputs are n x B.
void apply_constraint(const ConstraintMode& mode, const Eigen::RowVectorXd& times, const Eigen::MatrixXd& raw_value,
                      const Eigen::MatrixXd& raw_tangent, Eigen::MatrixXd& value, Eigen::MatrixXd& tangent);

/// Pulls sensitivities w.r.t. the constrained outputs back to the raw outputs.
/// Hard mode needs no raw values: the map is linear in (raw, raw').
void constraint_backward(const ConstraintMode& mode, const Eigen::RowVectorXd& times, Eigen::MatrixXd& g_value,
                         Eigen::MatrixXd& g_tangent);

/// Evaluates the constrained candidate at `times`, returning n x B values.
Eigen::MatrixXd predict(const NetworkParams& params, const ConstraintMode& mode, const Eigen::RowVectorXd& times);

// ---- snapshots ------------------------------------------------------------

/// Text snapshot: header lines then one shortest-round-trip decimal per
/// parameter in layout order.
///
///   pinnstab-params 1
///   activation swish
///   hidden 50 50 50 50
///   output 2
///   count 7852
///   <values>
void write_params(std::ostream& out, const NetworkParams& params);
NetworkParams read_params(std::istream& in);
void save_params(const std::filesystem::path& path, const NetworkParams& params);
NetworkParams load_params(const std::filesystem::path& path);

}  // namespace pinnstab
