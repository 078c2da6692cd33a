#include "pinnstab/network.hpp"

#include "pinnstab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pinnstab {

void NetworkArchitecture::validate() const {
  for (int w : hidden)
    if (w < 1) throw std::invalid_argument("hidden layer widths must be >= 1");
  if (output_dim != 1 && output_dim != 2) throw std::invalid_argument("output_dim must be 1 or 2");
}

Eigen::Index NetworkArchitecture::weight_offset(int layer) const {
  Eigen::Index off = 0;
  for (int l = 0; l < layer; ++l) off += static_cast<Eigen::Index>(fan_out(l)) * (fan_in(l) + 1);
  return off;
}

NetworkParams init_params(const NetworkArchitecture& arch, Rng& rng) {
  arch.validate();
  NetworkParams p{arch, Eigen::VectorXd::Zero(arch.parameter_count())};
  for (int l = 0; l < arch.layer_count(); ++l) {
    const double bound = std::sqrt(6.0 / (arch.fan_in(l) + arch.fan_out(l)));
    auto W = p.weight(l);
    for (Eigen::Index c = 0; c < W.cols(); ++c)
      for (Eigen::Index r = 0; r < W.rows(); ++r) W(r, c) = rng.uniform(-bound, bound);
  }
  return p;
}

NetworkParams init_params(const NetworkArchitecture& arch, std::uint64_t seed) {
  Rng rng(seed);
  return init_params(arch, rng);
}

double swish(double z) { return z * ad::sigmoid(z); }

ConstraintMode ConstraintMode::for_system(const SystemDynamics& system, StateVec x0) {
  if (x0.size() != system.dimension()) throw DimensionError("initial condition has wrong dimension");
  return system.first_order() ? hard(std::move(x0)) : soft(std::move(x0));
}

// ---- tape route -----------------------------------------------------------

std::vector<ad::DualScalar> mlp_forward(const NetworkArchitecture& arch, std::span<const ad::Var> theta,
                                        const ad::DualScalar& t) {
  if (static_cast<Eigen::Index>(theta.size()) != arch.parameter_count())
    throw std::invalid_argument("mlp_forward: parameter count does not match architecture");
  std::vector<ad::DualScalar> act{t};
  for (int l = 0; l < arch.layer_count(); ++l) {
    const int in = arch.fan_in(l);
    const int out = arch.fan_out(l);
    const auto w0 = static_cast<std::size_t>(arch.weight_offset(l));
    const auto b0 = static_cast<std::size_t>(arch.bias_offset(l));
    std::vector<ad::DualScalar> next(static_cast<std::size_t>(out));
    for (int r = 0; r < out; ++r) {
      ad::Var v = theta[b0 + static_cast<std::size_t>(r)];
      ad::Var dt(0.0);
      for (int c = 0; c < in; ++c) {
        const ad::Var& w = theta[w0 + static_cast<std::size_t>(r + c * out)];
        v += w * act[static_cast<std::size_t>(c)].value;
        dt += w * act[static_cast<std::size_t>(c)].tangent;
      }
      next[static_cast<std::size_t>(r)] = {v, dt};
    }
    const bool hidden_layer = l + 1 < arch.layer_count();
    if (hidden_layer && arch.activation == Activation::Swish)
      for (auto& z : next) z = ad::swish(z);
    act = std::move(next);
  }
  return act;
}

std::vector<ad::DualScalar> mlp_forward(const NetworkParams& params, const ad::DualScalar& t) {
  std::vector<ad::Var> theta(params.values.data(), params.values.data() + params.values.size());
  return mlp_forward(params.arch, theta, t);
}

std::vector<ad::DualScalar> apply_constraint(const ConstraintMode& mode, double t,
                                             const std::vector<ad::DualScalar>& raw) {
  if (!mode.is_hard()) return raw;
  if (static_cast<Eigen::Index>(raw.size()) != mode.x0.size())
    throw DimensionError("apply_constraint: initial condition has wrong dimension");
  const ad::DualScalar gate = ad::tanh(ad::lift_input(t));
  std::vector<ad::DualScalar> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    out.push_back(ad::constant(mode.x0(static_cast<Eigen::Index>(i))) + gate * raw[i]);
  return out;
}

std::vector<ad::DualScalar> candidate_solution(const NetworkArchitecture& arch, std::span<const ad::Var> theta,
                                               const ConstraintMode& mode, double t) {
  if (t < 0.0) throw std::invalid_argument("candidate_solution: t must be >= 0");
  return apply_constraint(mode, t, mlp_forward(arch, theta, ad::lift_input(t)));
}

std::vector<ad::DualScalar> candidate_solution(const NetworkParams& params, const ConstraintMode& mode, double t) {
  if (t < 0.0) throw std::invalid_argument("candidate_solution: t must be >= 0");
  return apply_constraint(mode, t, mlp_forward(params, ad::lift_input(t)));
}

// ---- batched route --------------------------------------------------------

void BatchedNetwork::forward(const NetworkParams& params, const Eigen::RowVectorXd& times) {
  const NetworkArchitecture& arch = params.arch;
  const int hidden = arch.layer_count() - 1;
  const Eigen::Index B = times.size();
  activation_ = arch.activation;
  batch_ = B;
  a_.resize(static_cast<std::size_t>(hidden + 1));
  z_.resize(static_cast<std::size_t>(hidden));
  sig_.resize(z_.size());
  d1_.resize(z_.size());

  a_[0].resize(1, 2 * B);
  a_[0].leftCols(B) = times;
  a_[0].rightCols(B).setOnes();
  for (int l = 0; l < hidden; ++l) {
    const auto L = static_cast<std::size_t>(l);
    Eigen::MatrixXd& Z = z_[L];
    Z.noalias() = params.weight(l) * a_[L];
    Z.leftCols(B).colwise() += params.bias(l);
    Eigen::MatrixXd& A = a_[L + 1];
    if (activation_ == Activation::Swish) {
      const auto z = Z.leftCols(B).array();
      sig_[L] = (1.0 + (-z).exp()).inverse();
      // swish'(z) = s (1 + z (1 - s))
      d1_[L] = sig_[L] * (1.0 + z * (1.0 - sig_[L]));
      A.resize(Z.rows(), 2 * B);
      A.leftCols(B) = (z * sig_[L]).matrix();
      A.rightCols(B) = (d1_[L] * Z.rightCols(B).array()).matrix();
    } else {
      A = Z;
    }
  }
  y_.noalias() = params.weight(hidden) * a_.back();
  y_.leftCols(B).colwise() += params.bias(hidden);
  value_ = y_.leftCols(B);
  tangent_ = y_.rightCols(B);
}

void BatchedNetwork::backward(const NetworkParams& params, const Eigen::MatrixXd& g_value,
                              const Eigen::MatrixXd& g_tangent, Eigen::VectorXd& grad) {
  const NetworkArchitecture& arch = params.arch;
  const int last = arch.layer_count() - 1;
  const Eigen::Index B = batch_;
  if (g_value.cols() != B || g_tangent.cols() != B)
    throw std::invalid_argument("BatchedNetwork::backward: batch size differs from forward");
  grad.setZero(arch.parameter_count());
  g_.resize(g_value.rows(), 2 * B);
  g_.leftCols(B) = g_value;
  g_.rightCols(B) = g_tangent;
  for (int l = last; l >= 0; --l) {
    const auto L = static_cast<std::size_t>(l);
    Eigen::Map<Eigen::MatrixXd> gW(grad.data() + arch.weight_offset(l), arch.fan_out(l), arch.fan_in(l));
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + arch.bias_offset(l), arch.fan_out(l));
    gW.noalias() = g_ * a_[L].transpose();
    gb = g_.leftCols(B).rowwise().sum();
    if (l == 0) break;

    g_a_.noalias() = params.weight(l).transpose() * g_;
    const std::size_t P = L - 1;  // hidden layer producing this layer's input
    if (activation_ == Activation::Swish) {
      const auto& s = sig_[P];
      const auto z = z_[P].leftCols(B).array();
      const auto zt = z_[P].rightCols(B).array();
      const auto ga = g_a_.leftCols(B).array();
      const auto gat = g_a_.rightCols(B).array();
      g_.resize(g_a_.rows(), 2 * B);
      g_.leftCols(B) = (ga * d1_[P] + gat * zt * s * (1.0 - s) * (2.0 + z * (1.0 - 2.0 * s))).matrix();
      g_.rightCols(B) = (gat * d1_[P]).matrix();
    } else {
      g_ = g_a_;
    }
  }
}

void apply_constraint(const ConstraintMode& mode, const Eigen::RowVectorXd& times, const Eigen::MatrixXd& raw_value,
                      const Eigen::MatrixXd& raw_tangent, Eigen::MatrixXd& value, Eigen::MatrixXd& tangent) {
  if (!mode.is_hard()) {
    value = raw_value;
    tangent = raw_tangent;
    return;
  }
  if (raw_value.rows() != mode.x0.size()) throw DimensionError("apply_constraint: initial condition has wrong dimension");
  const Eigen::ArrayXXd gate = times.array().tanh().replicate(raw_value.rows(), 1);
  const Eigen::ArrayXXd dgate = 1.0 - gate.square();
  value = (gate * raw_value.array()).matrix();
  value.colwise() += Eigen::VectorXd(mode.x0);
  tangent = (dgate * raw_value.array() + gate * raw_tangent.array()).matrix();
}

void constraint_backward(const ConstraintMode& mode, const Eigen::RowVectorXd& times, Eigen::MatrixXd& g_value,
                         Eigen::MatrixXd& g_tangent) {
  if (!mode.is_hard()) return;
  const Eigen::ArrayXXd gate = times.array().tanh().replicate(g_value.rows(), 1);
  const Eigen::ArrayXXd dgate = 1.0 - gate.square();
  // x = x0 + g raw, x' = g' raw + g raw'
  Eigen::MatrixXd g_raw = (gate * g_value.array() + dgate * g_tangent.array()).matrix();
  g_tangent = (gate * g_tangent.array()).matrix();
  g_value = std::move(g_raw);
}

Eigen::MatrixXd predict(const NetworkParams& params, const ConstraintMode& mode, const Eigen::RowVectorXd& times) {
  BatchedNetwork net;
  net.forward(params, times);
  Eigen::MatrixXd value, tangent;
  apply_constraint(mode, times, net.value(), net.tangent(), value, tangent);
  return value;
}

// ---- snapshots ------------------------------------------------------------

void write_params(std::ostream& out, const NetworkParams& params) {
  out << "pinnstab-params 1\n";
  out << "activation " << (params.arch.activation == Activation::Swish ? "swish" : "identity") << '\n';
  out << "hidden";
  for (int w : params.arch.hidden) out << ' ' << w;
  out << '\n';
  out << "output " << params.arch.output_dim << '\n';
  out << "count " << params.values.size() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < params.values.size(); ++i) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, params.values[i]);
    out.write(buf, end - buf);
    out.put('\n');
  }
}

namespace {

std::string expect_line(std::istream& in, std::string_view key) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("params snapshot: missing '" + std::string(key) + "' line");
  if (line.rfind(key, 0) != 0) throw std::runtime_error("params snapshot: expected '" + std::string(key) + "'");
  return line.substr(key.size());
}

}  // namespace

NetworkParams read_params(std::istream& in) {
  if (expect_line(in, "pinnstab-params") != " 1") throw std::runtime_error("params snapshot: unsupported version");
  NetworkArchitecture arch;
  const std::string act = expect_line(in, "activation ");
  if (act == "swish") arch.activation = Activation::Swish;
  else if (act == "identity") arch.activation = Activation::Identity;
  else throw std::runtime_error("params snapshot: unknown activation '" + act + "'");
  std::istringstream hidden(expect_line(in, "hidden"));
  arch.hidden.clear();
  for (int w; hidden >> w;) arch.hidden.push_back(w);
  arch.output_dim = std::stoi(expect_line(in, "output "));
  arch.validate();
  const long long count = std::stoll(expect_line(in, "count "));
  if (count != arch.parameter_count()) throw std::runtime_error("params snapshot: count does not match architecture");
  NetworkParams p{arch, Eigen::VectorXd(count)};
  std::string line;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("params snapshot: truncated");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc()) throw std::runtime_error("params snapshot: bad value '" + line + "'");
    p.values[i] = v;
  }
  return p;
}

void save_params(const std::filesystem::path& path, const NetworkParams& params) {
  std::ostringstream out;
  write_params(out, params);
  write_file_atomic(path, out.str());
}

NetworkParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_params(in);
}

}  // namespace pinnstab
