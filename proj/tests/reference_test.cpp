#include "pinnstab/reference.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pinnstab;

namespace {

StateVec vec(double a) { return StateVec::Constant(1, a); }
StateVec vec(double a, double b) {
  StateVec v(2);
  v << a, b;
  return v;
}

double pitchfork_max_error(double x0, double T, double h) {
  const Trajectory traj = rk4_integrate(SystemDynamics(SystemKind::Pitchfork), vec(x0), T, h);
  double err = 0.0;
  for (Eigen::Index i = 0; i < traj.size(); ++i)
    err = std::max(err, std::abs(traj.states(0, i) - pitchfork_analytic(x0, traj.times[static_cast<std::size_t>(i)])));
  return err;
}

}  // namespace

TEST(Analytic, Pitchfork) {
  EXPECT_EQ(pitchfork_analytic(0.3, 0.0), 0.3);
  EXPECT_EQ(pitchfork_analytic(0.0, 5.0), 0.0);
  EXPECT_EQ(pitchfork_analytic(1.0, 5.0), 1.0);
  EXPECT_NEAR(pitchfork_analytic(0.3, 50.0), 1.0, 1e-15);
  EXPECT_NEAR(pitchfork_analytic(-0.3, 50.0), -1.0, 1e-15);
  const double t = 1.3, x0 = 0.2;
  const double e = std::exp(t);
  EXPECT_NEAR(pitchfork_analytic(x0, t), x0 * e / std::sqrt(1 + x0 * x0 * (e * e - 1)), 1e-15);
}

TEST(Rk4, MatchesPitchforkAnalytic) {
  for (int k = 1; k <= 10; ++k) EXPECT_LT(pitchfork_max_error(0.05 * k, 15.0, 1e-3), 1e-6) << 0.05 * k;
}

TEST(Rk4, FourthOrderConvergence) {
  for (double x0 : {0.1, 0.3}) {
    const double ratio = pitchfork_max_error(x0, 15.0, 0.04) / pitchfork_max_error(x0, 15.0, 0.02);
    EXPECT_GE(ratio, 12.0);
    EXPECT_LE(ratio, 20.0);
  }
}

TEST(Rk4, LastStepLandsOnT) {
  const Trajectory traj = rk4_integrate(SystemDynamics(SystemKind::Pitchfork), vec(0.3), 0.0105, 1e-3);
  EXPECT_EQ(traj.size(), 12);
  EXPECT_EQ(traj.times.back(), 0.0105);
  EXPECT_NEAR(traj.states(0, 11), pitchfork_analytic(0.3, 0.0105), 1e-14);
}

TEST(Rk4, FixedPointsStayPut) {
  const Trajectory traj = rk4_integrate(SystemDynamics(SystemKind::LotkaVolterra), vec(1.0, 1.0), 5.0);
  EXPECT_EQ(traj.states.col(traj.size() - 1), vec(1.0, 1.0));
}

TEST(Rk4, LotkaVolterraSettlesOnStableNode) {
  const Trajectory traj = rk4_integrate(SystemDynamics(SystemKind::LotkaVolterra), vec(1.1, 1.1), 30.0);
  const StateVec end = traj.state(traj.size() - 1);
  const double d = std::min((end - vec(0.0, 2.0)).norm(), (end - vec(3.0, 0.0)).norm());
  EXPECT_LT(d, 0.05);
}

TEST(Rk4, BlowupIsReported) {
  EXPECT_THROW(rk4_integrate(SystemDynamics(SystemKind::LotkaVolterra), vec(-1.0, -1.0), 10.0), IntegrationBlowup);
  EXPECT_THROW(rk4_integrate(SystemDynamics(SystemKind::Pitchfork), vec(0.1), -1.0), std::invalid_argument);
}

TEST(Grid, Counts) {
  EXPECT_EQ(equidistant_grid(13.0).size(), 1301u);
  EXPECT_EQ(equidistant_grid(15.0).size(), 1501u);
  EXPECT_EQ(equidistant_grid(12.5).size(), 1251u);
  EXPECT_EQ(equidistant_grid(0.015).size(), 2u);
  const auto g = equidistant_grid(1.0, 0.25);
  EXPECT_EQ(g, (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
}

TEST(Grid, Rk4OnGridAgreesWithFineIntegration) {
  const SystemDynamics sys(SystemKind::VanDerPol);
  const Trajectory coarse = rk4_on_grid(sys, vec(0.1, 0.0), 2.0, 0.01, 1e-3);
  const Trajectory fine = rk4_integrate(sys, vec(0.1, 0.0), 2.0, 1e-3);
  ASSERT_EQ(coarse.size(), 201);
  for (Eigen::Index i = 0; i < coarse.size(); ++i) EXPECT_NEAR((coarse.state(i) - fine.state(10 * i)).norm(), 0.0, 1e-12);
  EXPECT_THROW(rk4_on_grid(sys, vec(0.1, 0.0), 1.0, 0.01, 3e-3), std::invalid_argument);
}

TEST(Reference, PitchforkUsesClosedForm) {
  const Trajectory ref = reference_solution(SystemDynamics(SystemKind::Pitchfork), vec(0.3), 13.0);
  ASSERT_EQ(ref.size(), 1301);
  for (Eigen::Index i = 0; i < ref.size(); i += 100)
    EXPECT_EQ(ref.states(0, i), pitchfork_analytic(0.3, ref.times[static_cast<std::size_t>(i)]));
}

TEST(Reference, CsvFormat) {
  Trajectory t;
  t.times = {0.0, 0.01};
  t.states.resize(2, 2);
  t.states << 0.1, 1.0 / 3.0, 0.0, -2.5;
  EXPECT_EQ(trajectory_csv(t), "t,x1,x2\n0,0.10000000000000001,0\n0.01,0.33333333333333331,-2.5\n");
  Trajectory s;
  s.times = {0.0};
  s.states = Eigen::MatrixXd::Constant(1, 1, 0.3);
  EXPECT_EQ(trajectory_csv(s), "t,x1\n0,0.29999999999999999\n");
}
