#pragma once

// Energy functionals on solution traces: E, the dissipation integral, the
// running H^1 x L^2 sup Q, the L^2-chain bound of the global-existence
// argument, and Sobolev ratios.
//
// grad u is taken at cell faces (the same differences the Laplacian uses), so
// the discrete energy is the one the semi-discrete scheme actually dissipates.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dampwave/exponents.hpp"
#include "dampwave/solver.hpp"

namespace dampwave {

struct EnergySample {
  double t = 0.0;
  double sup_u = 0.0;
  double l2_u = 0.0;
  double l2_w = 0.0;
  double l2_grad_u = 0.0;
  double energy = 0.0;
  double kinetic = 0.0;  // ||u_t||^2
  double potential = 0.0;  // int N~(u)
  double dissipation = 0.0;
  double q = 0.0;
  double lp1 = 0.0;  // ||u||_{L^{p+1}}
  double b = 0.0;
};

struct EnergyTrace {
  std::vector<EnergySample> samples;
};

inline double potential_integral(const State& s, const NonlinearitySpec& n, const RadialGrid& g) {
  if (n.kind == NonlinearityKind::zero) return 0.0;
  std::vector<double> prim(s.u.size());
  for (std::size_t j = 0; j < s.u.size(); ++j) prim[j] = nonlinearity_primitive(n, s.u[j]);
  return integrate<double>(g, prim);
}

/// E = 1/2 ||u_t||^2 + 1/2 ||grad u||^2 - int N~(u).
inline double energy(const State& s, const Model& m, const RadialGrid& g, double boundary = 0.0) {
  return 0.5 * l2_norm_sq<double>(g, s.w) + 0.5 * grad_norm_sq<double>(g, s.u, boundary) -
         potential_integral(s, m.nonlinearity, g);
}

/// ||(u, u_t)||^2 in H^1 x L^2.
inline double h1l2_norm_sq(const State& s, const RadialGrid& g, double boundary = 0.0) {
  return l2_norm_sq<double>(g, s.u) + grad_norm_sq<double>(g, s.u, boundary) + l2_norm_sq<double>(g, s.w);
}

inline EnergyTrace energy_trace(const SolutionTrace& tr, const Model& m) {
  EnergyTrace et;
  const double p = m.nonlinearity.kind == NonlinearityKind::zero ? 1.0 : m.nonlinearity.p;
  double q = 0.0;
  et.samples.reserve(tr.samples.size());
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    const State& s = tr.samples[i];
    EnergySample e;
    e.t = s.t;
    e.sup_u = sup_norm<double>(s.u);
    const double u2 = l2_norm_sq<double>(tr.grid, s.u);
    const double g2 = grad_norm_sq<double>(tr.grid, s.u, tr.boundary_value);
    e.kinetic = l2_norm_sq<double>(tr.grid, s.w);
    e.l2_u = std::sqrt(u2);
    e.l2_w = std::sqrt(e.kinetic);
    e.l2_grad_u = std::sqrt(g2);
    e.potential = potential_integral(s, m.nonlinearity, tr.grid);
    e.energy = 0.5 * e.kinetic + 0.5 * g2 - e.potential;
    e.dissipation = tr.dissipation[i];
    q = std::max(q, std::sqrt(u2 + g2 + e.kinetic));
    e.q = q;
    e.lp1 = lq_norm<double>(tr.grid, s.u, p + 1.0);
    e.b = damping_value(m.damping, s.t);
    et.samples.push_back(e);
  }
  return et;
}

/// max_t |E(t) - E(0) + D(t)|.
inline double energy_identity_residual(const EnergyTrace& et) {
  if (et.samples.empty()) return 0.0;
  const double e0 = et.samples.front().energy;
  double worst = 0.0;
  for (const auto& s : et.samples) worst = std::max(worst, std::abs(s.energy - e0 + s.dissipation));
  return worst;
}

/// Largest rise max_{s<t} (E(t) - E(s)); 0 for a nonincreasing energy.
inline double energy_increase(const EnergyTrace& et) {
  double lowest = infinity, worst = 0.0;
  for (const auto& s : et.samples) {
    worst = std::max(worst, s.energy - lowest);
    lowest = std::min(lowest, s.energy);
  }
  return worst;
}

inline std::vector<double> q_norm(const EnergyTrace& et) {
  std::vector<double> q;
  q.reserve(et.samples.size());
  for (const auto& s : et.samples) q.push_back(s.q);
  return q;
}

inline std::vector<double> q_norm(const SolutionTrace& tr) {
  std::vector<double> q;
  double run = 0.0;
  for (const auto& s : tr.samples) {
    run = std::max(run, std::sqrt(h1l2_norm_sq(s, tr.grid, tr.boundary_value)));
    q.push_back(run);
  }
  return q;
}

struct ChainPoint {
  double time = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool pass = true;
};

struct ChainCheck {
  double c1 = 0.0;
  double c2 = 0.0;
  double slack = 1e-3;
  std::vector<ChainPoint> points;
  bool pass = true;
  double min_margin = infinity;
};

/// C1 = max(1/2, C_N), C2 = max(2, 2 ||1/b||_{L^1} C1).
inline ChainCheck chain_constants(const Model& m) {
  const auto inv = damping_inverse_integral(m.damping, infinity);
  if (classify_damping(m.damping) != DampingRegime::overdamping || !inv)
    throw std::invalid_argument("l2_chain_check: damping is not overdamping");
  ChainCheck c;
  c.c1 = std::max(0.5, m.nonlinearity.c_n);
  c.c2 = std::max(2.0, 2.0 * *inv * c.c1);
  return c;
}

/// ||u(t)||^2 <= C2 { ||(u0,u1)||^2 + ||u0||_{p+1}^{p+1} + ||u(t)||_{p+1}^{p+1} }
/// at every sample, with relative slack on the right-hand side.
inline ChainCheck l2_chain_check(const SolutionTrace& tr, const Model& m, double slack = 1e-3) {
  ChainCheck c = chain_constants(m);
  c.slack = slack;
  if (tr.samples.empty()) return c;
  const double p = m.nonlinearity.kind == NonlinearityKind::zero ? 1.0 : m.nonlinearity.p;
  const State& s0 = tr.samples.front();
  const double data = h1l2_norm_sq(s0, tr.grid, tr.boundary_value) + std::pow(lq_norm<double>(tr.grid, s0.u, p + 1.0), p + 1.0);
  for (const State& s : tr.samples) {
    ChainPoint pt;
    pt.time = s.t;
    pt.lhs = l2_norm_sq<double>(tr.grid, s.u);
    pt.rhs = c.c2 * (data + std::pow(lq_norm<double>(tr.grid, s.u, p + 1.0), p + 1.0));
    pt.margin = pt.rhs - pt.lhs;
    pt.pass = pt.lhs <= pt.rhs * (1.0 + slack);
    c.pass = c.pass && pt.pass;
    c.min_margin = std::min(c.min_margin, pt.margin);
    c.points.push_back(pt);
  }
  return c;
}

/// ||u||_{L^{p+1}} / ||u||_{H^1}; 0 for the zero state.
inline double sobolev_ratio(const State& s, double p, const RadialGrid& g, double boundary = 0.0) {
  if (!(p >= 1.0) || !(p < energy_critical(g.dimension())))
    throw std::invalid_argument("sobolev_ratio: need 1 <= p < p1(d)");
  const double h1 = std::sqrt(l2_norm_sq<double>(g, s.u) + grad_norm_sq<double>(g, s.u, boundary));
  if (h1 == 0.0) return 0.0;
  return lq_norm<double>(g, s.u, p + 1.0) / h1;
}

}  // namespace dampwave
