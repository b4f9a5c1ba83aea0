#pragma once

// The substitution v = e^{B(t)/2} u, B(t) = int_0^t b, turns the damped
// equation into the undamped v_tt - Lap v = F1 + F2 with
//   F1 = (b'/2 + b^2/4) v,   F2 = e^{B/2} N(e^{-B/2} v),
//   v(0) = u0,  v_t(0) = b(0) u0 / 2 + u1.
// v grows like e^{B/2}, which leaves double range for overdamped b within a
// few time units, so the v side runs in long double.

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "dampwave/solver.hpp"

namespace dampwave {

using WideState = BasicState<long double>;
using WideTrace = BasicSolutionTrace<long double>;

struct TransformedProblem {
  Model model;

  [[nodiscard]] double cumulative(double t) const { return damping_cumulative(model.damping, t); }

  /// Coefficient of the linear source F1.
  [[nodiscard]] double c1(double t) const {
    const double b = damping_value(model.damping, t);
    return 0.5 * damping_derivative(model.damping, t) + 0.25 * b * b;
  }

  [[nodiscard]] long double growth(double t) const { return std::exp(0.5L * static_cast<long double>(cumulative(t))); }

  /// F2(t, v) = e^{B/2} N(e^{-B/2} v).
  [[nodiscard]] long double f2(double t, long double v) const {
    if (model.nonlinearity.kind == NonlinearityKind::zero) return 0.0L;
    const long double g = growth(t);
    return g * nonlinearity_eval(model.nonlinearity, v / g);
  }

  /// (v0, v1) from (u0, u1).
  [[nodiscard]] WideState transform_data(const State& s) const {
    if (s.t != 0.0) throw std::invalid_argument("transform_data: expects the t = 0 state");
    const long double half_b0 = 0.5L * damping_value(model.damping, 0.0);
    WideState v;
    v.t = 0.0;
    v.u.resize(s.u.size());
    v.w.resize(s.u.size());
    for (std::size_t j = 0; j < s.u.size(); ++j) {
      v.u[j] = s.u[j];
      v.w[j] = half_b0 * s.u[j] + static_cast<long double>(s.w[j]);
    }
    return v;
  }
};

inline TransformedProblem transform_to_v(const Model& m) { return TransformedProblem{m}; }

namespace detail {

class TransformedStepper {
 public:
  TransformedStepper(const TransformedProblem& prob, const RadialGrid& g, const SolverConfig& cfg, const WideState& init)
      : prob_(prob), grid_(g), cfg_(cfg) {
    force_.resize(g.size());
    evaluate(init.t, init.u, force_);
  }

  double propose_dt(const WideState& s) const {
    double stiff = std::abs(prob_.c1(s.t));
    if (prob_.model.nonlinearity.kind != NonlinearityKind::zero)
      stiff += nonlinearity_slope(prob_.model.nonlinearity, monitor(s));
    return std::min(cfg_.cfl * grid_.spacing(), cfg_.transform_safety / std::sqrt(1.0 + stiff));
  }

  // Velocity Verlet with the explicitly time-dependent source.
  void advance(WideState& s, double h) {
    const std::size_t J = s.u.size();
    const long double hl = h;
    for (std::size_t j = 0; j < J; ++j) s.u[j] += hl * s.w[j] + 0.5L * hl * hl * force_[j];
    scratch_.resize(J);
    evaluate(s.t + h, s.u, scratch_);
    for (std::size_t j = 0; j < J; ++j) s.w[j] += 0.5L * hl * (force_[j] + scratch_[j]);
    force_.swap(scratch_);
    s.t += h;
  }

  double monitor(const WideState& s) const {
    const long double g = prob_.growth(s.t);
    long double m = 0.0L;
    for (const long double v : s.u) {
      const long double a = std::abs(v) / g;
      if (std::isnan(a)) return static_cast<double>(a);
      if (a > m) m = a;
    }
    return static_cast<double>(m);
  }

  double dissipation_rate(const WideState&) const { return 0.0; }

 private:
  void evaluate(double t, std::span<const long double> v, std::span<long double> out) const {
    radial_laplacian<long double>(grid_, v, out, static_cast<long double>(cfg_.boundary_value) * prob_.growth(t));
    const long double c = prob_.c1(t);
    for (std::size_t j = 0; j < v.size(); ++j) out[j] += c * v[j] + prob_.f2(t, v[j]);
  }

  TransformedProblem prob_;
  RadialGrid grid_;
  SolverConfig cfg_;
  std::vector<long double> force_, scratch_;
};

}  // namespace detail

/// Integrates the transformed problem from transformed data.
inline WideTrace solve_transformed(const TransformedProblem& prob, WideState v0, const RadialGrid& grid,
                                   const SolverConfig& cfg) {
  if (v0.u.size() != grid.size() || v0.w.size() != grid.size())
    throw std::invalid_argument("solve_transformed: state/grid mismatch");
  detail::TransformedStepper stepper(prob, grid, cfg, v0);
  return detail::drive<long double>(std::move(v0), grid, cfg, stepper);
}

inline WideTrace solve_transformed(const TransformedProblem& prob, const InitialDataSpec& data, const RadialGrid& grid,
                                   const SolverConfig& cfg) {
  if (grid.radius() + 1e-12 < causal_radius(data, cfg.t_max))
    throw std::invalid_argument("solve_transformed: grid radius is below data support + t_max");
  const State u0 = sample_initial_data(data, grid, damping_value(prob.model.damping, 0.0));
  return solve_transformed(prob, prob.transform_data(u0), grid, cfg);
}

/// e^{-B(t)/2} v(t) as a double-precision state.
inline State pull_back(const TransformedProblem& prob, const WideState& v) {
  const long double g = prob.growth(v.t);
  State u;
  u.t = v.t;
  u.u.resize(v.u.size());
  u.w.resize(v.u.size());
  const long double half_b = 0.5L * damping_value(prob.model.damping, v.t);
  for (std::size_t j = 0; j < v.u.size(); ++j) {
    u.u[j] = static_cast<double>(v.u[j] / g);
    u.w[j] = static_cast<double>(v.w[j] / g - half_b * (v.u[j] / g));
  }
  return u;
}

/// max_t ||u(t) - e^{-B(t)/2} v(t)||_{L^2} / max_t ||u(t)||_{L^2}.
inline double transform_compare(const SolutionTrace& tu, const WideTrace& tv, const DampingSpec& damping) {
  if (!(tu.grid == tv.grid)) throw std::invalid_argument("transform_compare: grids differ");
  if (tu.samples.size() != tv.samples.size()) throw std::invalid_argument("transform_compare: sample counts differ");
  double worst = 0.0, scale = 0.0;
  std::vector<double> diff(tu.grid.size());
  for (std::size_t i = 0; i < tu.samples.size(); ++i) {
    const State& a = tu.samples[i];
    const WideState& b = tv.samples[i];
    if (std::abs(a.t - b.t) > 1e-9 * std::max(1.0, a.t))
      throw std::invalid_argument("transform_compare: sample times differ");
    const long double g = std::exp(0.5L * static_cast<long double>(damping_cumulative(damping, b.t)));
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = static_cast<double>(a.u[j] - b.u[j] / g);
    worst = std::max(worst, std::sqrt(l2_norm_sq<double>(tu.grid, diff)));
    scale = std::max(scale, std::sqrt(l2_norm_sq<double>(tu.grid, a.u)));
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace dampwave
