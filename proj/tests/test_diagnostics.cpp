#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "dampwave/diagnostics.hpp"
#include "dampwave/solver.hpp"

using namespace dampwave;

namespace {

Model model(const DampingSpec& b, NonlinearityKind k, double p = 3.0) { return {b, NonlinearitySpec::make(k, p)}; }

SolutionTrace run(const Model& m, const InitialDataSpec& data, double t_max, double dr = 0.05, double sample_dt = 0.0,
                  double safety = 0.5) {
  SolverConfig c;
  c.t_max = t_max;
  c.sample_dt = sample_dt;
  c.safety = safety;
  const auto g = RadialGrid::covering(data.d, dr, causal_radius(data, t_max));
  return solve(m, data, g, c);
}

}  // namespace

TEST(Energy, ZeroState) {
  const RadialGrid g(3, 0.1, 20);
  State s;
  s.u.assign(g.size(), 0.0);
  s.w.assign(g.size(), 0.0);
  EXPECT_EQ(energy(s, model(DampingSpec::constant(1.0), NonlinearityKind::power_abs_plus), g), 0.0);
}

TEST(Energy, KineticOnly) {
  const RadialGrid g(3, 0.1, 20);
  State s;
  s.u.assign(g.size(), 0.0);
  double vol = 0.0;
  for (double v : g.volumes()) vol += v;
  s.w.assign(g.size(), std::sqrt(2.0 / vol));
  EXPECT_NEAR(energy(s, {DampingSpec::constant(1.0), NonlinearitySpec::zero()}, g), 1.0, 1e-14);
}

TEST(Energy, GaussianOracle) {
  // u = a e^{-r^2}: E = (3/2) a^2 (pi/2)^{3/2} - a^4/4 (pi/4)^{3/2} for N = |u|^3.
  const double a = 0.8;
  const RadialGrid g(3, 0.01, 700);
  const State s = sample_initial_data(InitialDataSpec::gaussian(3, a, 1.0), g);
  const double exact = 1.5 * a * a * std::pow(std::numbers::pi / 2, 1.5) - std::pow(a, 4) / 4 * std::pow(std::numbers::pi / 4, 1.5);
  EXPECT_NEAR(energy(s, model(DampingSpec::constant(1.0), NonlinearityKind::power_abs_plus), g), exact, 1e-3 * exact);
}

TEST(Energy, ResidualZeroForZeroSolution) {
  const auto tr = run(model(DampingSpec::constant(1.0), NonlinearityKind::power_abs_plus), InitialDataSpec::gaussian(3, 0.0), 1.0);
  const auto et = energy_trace(tr, model(DampingSpec::constant(1.0), NonlinearityKind::power_abs_plus));
  EXPECT_EQ(energy_identity_residual(et), 0.0);
  for (double q : q_norm(et)) EXPECT_EQ(q, 0.0);
}

TEST(Energy, ResidualLinearFixture) {
  const Model m{DampingSpec::constant(1.0), NonlinearitySpec::zero()};
  auto residual = [&](double dt) {
    const auto data = InitialDataSpec::gaussian(3, 0.5, 1.0, 0.5);
    SolverConfig c;
    c.t_max = 2.0;
    c.cfl = dt / 0.05;
    c.safety = 1.0;
    c.sample_dt = 0.1;
    const auto g = RadialGrid::covering(3, 0.05, causal_radius(data, 2.0));
    return energy_identity_residual(energy_trace(solve(m, data, g, c), m));
  };
  const double r1 = residual(2e-3), r2 = residual(1e-3);
  EXPECT_LE(r2, 1e-6);
  EXPECT_NEAR(r1 / r2, 4.0, 1.0);
}

TEST(Energy, ResidualOverdampedCubic) {
  const Model m = model(DampingSpec::power(1.0, -2.0), NonlinearityKind::power_abs_plus);
  const auto data = InitialDataSpec::gaussian(3, 1e-2, 1.0);
  const auto a = energy_trace(run(m, data, 20.0, 0.05, 0.5, 0.5), m);
  const auto b = energy_trace(run(m, data, 20.0, 0.025, 0.5, 0.25), m);
  const double ra = energy_identity_residual(a), rb = energy_identity_residual(b);
  EXPECT_LE(ra, 1e-4 * std::max(1.0, a.samples.front().energy));
  EXPECT_NEAR(ra / rb, 4.0, 1.0);
}

TEST(Chain, Constants) {
  const auto c = chain_constants(model(DampingSpec::power(1.0, -2.0), NonlinearityKind::power_abs_plus));
  EXPECT_EQ(c.c1, 3.0);
  EXPECT_EQ(c.c2, 6.0);
  const auto e = chain_constants({DampingSpec::exponential(1.0, 2.0), NonlinearitySpec::make(NonlinearityKind::power_abs_plus, 2.0, 0.25)});
  EXPECT_EQ(e.c1, 0.5);
  EXPECT_EQ(e.c2, 2.0);
  EXPECT_THROW(chain_constants(model(DampingSpec::constant(1.0), NonlinearityKind::power_abs_plus)), std::invalid_argument);
}

TEST(Chain, ZeroSolutionPassesWithZeroMargin) {
  const Model m = model(DampingSpec::power(1.0, -2.0), NonlinearityKind::power_abs_plus);
  const auto c = l2_chain_check(run(m, InitialDataSpec::gaussian(3, 0.0), 1.0), m);
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.min_margin, 0.0);
}

TEST(Chain, SmallDataPassesAndCorruptionFails) {
  const Model m = model(DampingSpec::power(1.0, -2.0), NonlinearityKind::power_abs_plus);
  auto tr = run(m, InitialDataSpec::gaussian(3, 1e-2, 1.0), 10.0, 0.05, 0.5);
  EXPECT_TRUE(l2_chain_check(tr, m).pass);
  // Scaling u up cannot break the bound (the L^{p+1} term on the right grows
  // faster), so the violation is a flat low-amplitude offset.
  auto scaled = tr;
  for (double& x : scaled.samples[5].u) x *= 1e6;
  EXPECT_TRUE(l2_chain_check(scaled, m).pass);
  for (double& x : tr.samples[5].u) x += 1e-3;
  const auto bad = l2_chain_check(tr, m);
  EXPECT_FALSE(bad.pass);
  EXPECT_FALSE(bad.points[5].pass);
  EXPECT_TRUE(bad.points[4].pass);
}

TEST(QNorm, LinearScalingInSmallData) {
  const Model m = model(DampingSpec::power(1.0, -2.0), NonlinearityKind::power_abs_plus);
  const double qa = q_norm(run(m, InitialDataSpec::gaussian(3, 1e-3, 1.0), 10.0)).back();
  const double qb = q_norm(run(m, InitialDataSpec::gaussian(3, 1e-2, 1.0), 10.0)).back();
  EXPECT_GE(qb / qa, 9.0);
  EXPECT_LE(qb / qa, 11.0);
}

TEST(QNorm, Nondecreasing) {
  const Model m = model(DampingSpec::constant(1.0), NonlinearityKind::power_signed_minus);
  const auto q = q_norm(run(m, InitialDataSpec::gaussian(3, 0.0, 1.0, 1.0), 3.0));
  for (std::size_t i = 1; i < q.size(); ++i) EXPECT_GE(q[i], q[i - 1]);
}

TEST(Sobolev, RatioAndDomain) {
  const RadialGrid g(3, 0.01, 700);
  State zero;
  zero.u.assign(g.size(), 0.0);
  zero.w.assign(g.size(), 0.0);
  EXPECT_EQ(sobolev_ratio(zero, 3.0, g), 0.0);
  EXPECT_THROW(sobolev_ratio(zero, 6.0, g), std::invalid_argument);
  const State s = sample_initial_data(InitialDataSpec::gaussian(3, 1.0, 1.0), g);
  // ||e^{-r^2}||_{L^4} / ||e^{-r^2}||_{H^1} with ||.||_{H^1}^2 = 4 (pi/2)^{3/2}.
  const double exact = std::pow(std::numbers::pi / 4, 0.375) / std::sqrt(4 * std::pow(std::numbers::pi / 2, 1.5));
  EXPECT_NEAR(sobolev_ratio(s, 3.0, g), exact, 1e-3 * exact);
}

TEST(Defocusing, EnergyNonincreasing) {
  const Model m = model(DampingSpec::constant(1.0), NonlinearityKind::power_signed_minus);
  const auto et = energy_trace(run(m, InitialDataSpec::gaussian(3, 3.0, 1.0), 5.0), m);
  EXPECT_LE(energy_increase(et), 1e-3 * et.samples.front().energy);
}
