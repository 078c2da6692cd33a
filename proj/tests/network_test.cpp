#include "pinnstab/network.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace pinnstab;

namespace {

NetworkArchitecture small(int out) {
  NetworkArchitecture a;
  a.hidden = {8, 6};
  a.output_dim = out;
  return a;
}

NetworkParams perturbed(const NetworkArchitecture& arch, std::uint64_t seed) {
  NetworkParams p = init_params(arch, seed);
  Rng rng(seed + 1000);
  for (Eigen::Index i = 0; i < p.values.size(); ++i) p.values[i] += 0.2 * rng.normal();
  return p;
}

}  // namespace

TEST(Architecture, Layout) {
  NetworkArchitecture a;
  EXPECT_EQ(a.parameter_count(), 7801);
  a.output_dim = 2;
  EXPECT_EQ(a.parameter_count(), 7852);
  const NetworkArchitecture s = small(2);
  EXPECT_EQ(s.weight_offset(0), 0);
  EXPECT_EQ(s.bias_offset(0), 8);
  EXPECT_EQ(s.weight_offset(1), 16);
  EXPECT_EQ(s.bias_offset(1), 16 + 48);
  EXPECT_EQ(s.weight_offset(2), 70);
  EXPECT_EQ(s.parameter_count(), 70 + 12 + 2);
}

TEST(Architecture, Validation) {
  NetworkArchitecture a;
  EXPECT_NO_THROW(a.validate());
  a.hidden = {50, 0};
  EXPECT_THROW(a.validate(), std::invalid_argument);
  a = {};
  a.output_dim = 3;
  EXPECT_THROW(a.validate(), std::invalid_argument);
}

TEST(Init, XavierBoundsAndZeroBias) {
  const NetworkArchitecture arch{{50, 50, 50, 50}, 2, Activation::Swish};
  const NetworkParams p = init_params(arch, 42);
  for (int l = 0; l < arch.layer_count(); ++l) {
    const double bound = std::sqrt(6.0 / (arch.fan_in(l) + arch.fan_out(l)));
    EXPECT_LE(p.weight(l).cwiseAbs().maxCoeff(), bound);
    EXPECT_EQ(p.bias(l).cwiseAbs().maxCoeff(), 0.0);
  }
  // Uniform(-b, b) has variance b^2 / 3.
  const auto W = p.weight(2);
  const double var = W.array().square().mean();
  EXPECT_NEAR(var, (6.0 / 100.0) / 3.0, 0.002);
}

TEST(Init, DeterministicPerSeed) {
  const NetworkArchitecture arch = small(1);
  EXPECT_EQ(init_params(arch, 3).values, init_params(arch, 3).values);
  EXPECT_NE(init_params(arch, 3).values, init_params(arch, 4).values);
}

TEST(Swish, Values) {
  EXPECT_EQ(swish(0.0), 0.0);
  EXPECT_DOUBLE_EQ(swish(1.0), 1.0 / (1.0 + std::exp(-1.0)));
  EXPECT_NEAR(swish(40.0), 40.0, 1e-12);
  EXPECT_NEAR(swish(-40.0), 0.0, 1e-15);
}

TEST(Candidate, HardConstraintHoldsExactlyAtZero) {
  for (int out : {1, 2}) {
    const NetworkParams p = perturbed(small(out), 9);
    StateVec x0(out);
    x0.setConstant(0.37);
    const ConstraintMode mode = ConstraintMode::hard(x0);
    const auto c = candidate_solution(p, mode, 0.0);
    for (int k = 0; k < out; ++k) EXPECT_EQ(c[static_cast<std::size_t>(k)].v(), 0.37);
    const Eigen::MatrixXd batched = predict(p, mode, Eigen::RowVectorXd::Zero(3));
    EXPECT_EQ(batched, Eigen::MatrixXd::Constant(out, 3, 0.37));
  }
  EXPECT_THROW(candidate_solution(perturbed(small(1), 1), ConstraintMode::hard(StateVec::Zero(1)), -0.1),
               std::invalid_argument);
}

TEST(Candidate, TangentMatchesFiniteDifferenceInTime) {
  const NetworkParams p = perturbed(small(2), 5);
  StateVec x0(2);
  x0 << 0.1, -0.2;
  for (const auto& mode : {ConstraintMode::hard(x0), ConstraintMode::soft(x0)}) {
    for (double t : {0.05, 0.7, 3.0}) {
      const double h = 1e-6;
      const auto c = candidate_solution(p, mode, t);
      const auto cp = candidate_solution(p, mode, t + h);
      const auto cm = candidate_solution(p, mode, t - h);
      for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(c[k].dt(), (cp[k].v() - cm[k].v()) / (2 * h), 1e-8);
    }
  }
}

TEST(Batched, MatchesTapeRoute) {
  const NetworkParams p = perturbed(small(2), 11);
  StateVec x0(2);
  x0 << 0.3, 0.0;
  Eigen::RowVectorXd times(5);
  times << 0.0, 0.1, 1.0, 2.5, 9.0;
  for (const auto& mode : {ConstraintMode::hard(x0), ConstraintMode::soft(x0)}) {
    BatchedNetwork net;
    net.forward(p, times);
    Eigen::MatrixXd v, dv;
    apply_constraint(mode, times, net.value(), net.tangent(), v, dv);
    for (Eigen::Index i = 0; i < times.size(); ++i) {
      const auto c = candidate_solution(p, mode, times[i]);
      for (int k = 0; k < 2; ++k) {
        EXPECT_NEAR(v(k, i), c[static_cast<std::size_t>(k)].v(), 1e-14);
        EXPECT_NEAR(dv(k, i), c[static_cast<std::size_t>(k)].dt(), 1e-14);
      }
    }
  }
}

TEST(Batched, IdentityActivationIsAffine) {
  NetworkArchitecture arch = small(1);
  arch.activation = Activation::Identity;
  const NetworkParams p = perturbed(arch, 2);
  Eigen::RowVectorXd times(3);
  times << 0.0, 1.0, 2.0;
  BatchedNetwork net;
  net.forward(p, times);
  EXPECT_NEAR(net.value()(0, 2) - net.value()(0, 1), net.value()(0, 1) - net.value()(0, 0), 1e-12);
  EXPECT_NEAR(net.tangent()(0, 0), net.tangent()(0, 2), 1e-12);
}

TEST(Snapshot, RoundTripIsExact) {
  const NetworkParams p = perturbed(small(2), 21);
  std::stringstream buf;
  write_params(buf, p);
  const NetworkParams q = read_params(buf);
  EXPECT_EQ(q.arch, p.arch);
  EXPECT_EQ(q.values, p.values);
  std::stringstream again;
  write_params(again, q);
  std::stringstream first;
  write_params(first, p);
  EXPECT_EQ(again.str(), first.str());
}

TEST(Snapshot, RejectsMalformedInput) {
  std::stringstream bad("not-a-snapshot\n");
  EXPECT_THROW(read_params(bad), std::runtime_error);
  const NetworkParams p = perturbed(small(1), 1);
  std::stringstream buf;
  write_params(buf, p);
  std::string text = buf.str();
  text.resize(text.size() / 2);
  std::stringstream truncated(text);
  EXPECT_THROW(read_params(truncated), std::runtime_error);
}
