#pragma once

// Method-of-lines solver for u_tt - Lap u + b(t) u_t = N(u) on a radial grid.
//
// The default scheme is an exponential velocity-Verlet step. Over [t, t+h]
// with the force F = Lap u + N(u) frozen (for the drift) or linearly
// interpolated (for the velocity), the damped system u' = w, w' = F - b w is
// integrated in closed form:
//
//   u+ = u + phi1 w + psi F(u)
//   w+ = e^{-(B(t+h)-B(t))} w + chi0 F(u) + chi1 F(u+)
//
// The homogeneous velocity factor is exact for every b. The weights reduce to
// plain velocity Verlet as b h -> 0 and to the overdamped drift
// u+ = u + (int_t^{t+h} 1/b) F as b h -> inf, so stiff damping costs nothing.
//
// The kick-drift-damp-drift-kick Strang splitting is kept as an alternative
// scheme. It is stable for stiff b but drifts at rate h F / 2 instead of F / b
// once b h >> 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dampwave/grid.hpp"
#include "dampwave/model.hpp"

namespace dampwave {

enum class Scheme { exponential_verlet, strang };

struct SolverConfig {
  double cfl = 0.5;
  double safety = 0.5;             // nonlinear step control: dt <= safety / sqrt(1 + sup|N'|)
  double transform_safety = 0.01;  // same control for the transformed (undamped) solver
  double blow_threshold = 1e6;
  double dt_floor = 1e-12;
  double t_max = 1.0;
  std::size_t sample_stride = 1;  // record every n-th step (when sample_dt == 0)
  double sample_dt = 0.0;         // > 0: land on and record multiples of sample_dt
  double boundary_value = 0.0;    // Dirichlet ghost value at r = R
  Scheme scheme = Scheme::exponential_verlet;

  void validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("solver: cfl must lie in (0, 1]");
    if (!(safety > 0.0) || !(transform_safety > 0.0)) throw std::invalid_argument("solver: safety must be positive");
    if (!(blow_threshold > 0.0)) throw std::invalid_argument("solver: blow_threshold must be positive");
    if (!(dt_floor > 0.0)) throw std::invalid_argument("solver: dt_floor must be positive");
    if (!(t_max > 0.0)) throw std::invalid_argument("solver: t_max must be positive");
    if (sample_stride < 1) throw std::invalid_argument("solver: sample_stride must be >= 1");
    if (!(sample_dt >= 0.0)) throw std::invalid_argument("solver: sample_dt must be nonnegative");
  }
};

enum class Outcome { reached_horizon, blow_up };
enum class BlowUpTrigger { none, norm, dt_floor };

struct Termination {
  Outcome outcome = Outcome::reached_horizon;
  BlowUpTrigger trigger = BlowUpTrigger::none;
  double t_star = 0.0;   // last stable time
  double t_upper = 0.0;  // t_star + last attempted step
  [[nodiscard]] bool blew_up() const { return outcome == Outcome::blow_up; }
  [[nodiscard]] double midpoint() const { return 0.5 * (t_star + t_upper); }
};

inline std::string to_string(Outcome o) { return o == Outcome::blow_up ? "blow_up" : "reached_horizon"; }
inline std::string to_string(BlowUpTrigger t) {
  switch (t) {
    case BlowUpTrigger::none: return "none";
    case BlowUpTrigger::norm: return "norm";
    case BlowUpTrigger::dt_floor: return "dt_floor";
  }
  return "?";
}

template <class Real = double>
struct BasicSolutionTrace {
  RadialGrid grid;
  std::vector<BasicState<Real>> samples;
  std::vector<double> dissipation;  // int_0^t b ||u_t||^2, per-step trapezoid, at each sample
  Termination termination;
  std::size_t steps = 0;
  double boundary_value = 0.0;

  [[nodiscard]] double final_time() const { return samples.empty() ? 0.0 : samples.back().t; }
};

using SolutionTrace = BasicSolutionTrace<double>;

namespace detail {

// phi-type functions of x = b h, with series below 0.1 where the closed forms cancel.
inline double g1(double x) {  // (1 - e^{-x}) / x
  if (x < 1e-8) return 1.0 - 0.5 * x;
  return -std::expm1(-x) / x;
}
inline double g2(double x) {  // (x - 1 + e^{-x}) / x^2
  if (x < 0.1) {
    double term = 0.5, sum = 0.0;
    for (int n = 0; n < 12; ++n) {
      sum += term;
      term *= -x / (n + 3);
    }
    return sum;
  }
  return (x + std::expm1(-x)) / (x * x);
}
inline double g3(double x) {  // (1 - e^{-x}(1 + x)) / x^2
  if (x < 0.1) {
    double fact = 2.0, sum = 0.0, xn = 1.0;  // (n+2)!
    for (int n = 0; n < 12; ++n) {
      sum += (n % 2 == 0 ? 1.0 : -1.0) * (n + 1) * xn / fact;
      xn *= x;
      fact *= (n + 3);
    }
    return sum;
  }
  return (-std::expm1(-x) - x * std::exp(-x)) / (x * x);
}

}  // namespace detail

/// Step weights of the exponential velocity-Verlet scheme over [t, t+h].
struct ExpVerletWeights {
  double decay = 1.0;  // e^{-(B(t+h) - B(t))}
  double phi1 = 0.0;
  double psi = 0.0;
  double chi0 = 0.0;
  double chi1 = 0.0;
};

inline ExpVerletWeights exp_verlet_weights(const DampingSpec& b, double t, double h) {
  ExpVerletWeights c;
  const double bl = damping_value(b, t);
  const double br = damping_value(b, t + h);
  c.decay = std::exp(-(damping_cumulative(b, t + h) - damping_cumulative(b, t)));
  const double xl = bl * h;
  const double xr = br * h;
  c.phi1 = h * detail::g1(xl);
  // F-drift: u-layer at the left end, harmonic-mean damping for the stiff limit.
  const double ratio = bl > 0.0 ? bl * damping_inverse_integral_between(b, t, t + h) / h : 1.0;
  c.psi = h * h * detail::g2(xl) * ratio;
  const double G1 = detail::g1(xr);
  const double G3 = detail::g3(xr);
  c.chi0 = h * G3;
  c.chi1 = h * (G1 - G3);
  return c;
}

/// F = Lap u + N(u).
inline void damped_force(const RadialGrid& g, const Model& m, std::span<const double> u, double boundary,
                         std::span<double> out) {
  radial_laplacian<double>(g, u, out, boundary);
  if (m.nonlinearity.kind == NonlinearityKind::zero) return;
  for (std::size_t j = 0; j < u.size(); ++j) out[j] += nonlinearity_eval(m.nonlinearity, u[j]);
}

/// One exponential velocity-Verlet step with a caller-supplied force
/// (force(u, out) writes F(u)). f_old must hold F(s.u); on return it holds F
/// at the new state.
template <class Force>
void exp_verlet_advance(State& s, std::vector<double>& f_old, std::vector<double>& scratch, double h,
                        const DampingSpec& b, Force&& force) {
  const ExpVerletWeights c = exp_verlet_weights(b, s.t, h);
  const std::size_t J = s.u.size();
  for (std::size_t j = 0; j < J; ++j) s.u[j] += c.phi1 * s.w[j] + c.psi * f_old[j];
  scratch.resize(J);
  force(std::span<const double>(s.u), std::span<double>(scratch));
  for (std::size_t j = 0; j < J; ++j) s.w[j] = c.decay * s.w[j] + c.chi0 * f_old[j] + c.chi1 * scratch[j];
  f_old.swap(scratch);
  s.t += h;
}

/// Kick-drift-damp-drift-kick step with exact damping factor.
template <class Force>
void strang_advance(State& s, std::vector<double>& f_old, std::vector<double>& scratch, double h,
                    const DampingSpec& b, Force&& force) {
  const double decay = std::exp(-(damping_cumulative(b, s.t + h) - damping_cumulative(b, s.t)));
  const std::size_t J = s.u.size();
  for (std::size_t j = 0; j < J; ++j) {
    double w = s.w[j] + 0.5 * h * f_old[j];
    s.u[j] += 0.5 * h * w;
    w *= decay;
    s.u[j] += 0.5 * h * w;
    s.w[j] = w;
  }
  scratch.resize(J);
  force(std::span<const double>(s.u), std::span<double>(scratch));
  for (std::size_t j = 0; j < J; ++j) s.w[j] += 0.5 * h * scratch[j];
  f_old.swap(scratch);
  s.t += h;
}

/// Advances s by h with an arbitrary force (used for degenerate fixtures).
template <class Force>
State step_with(const State& s, double h, const DampingSpec& b, Force&& force, Scheme scheme = Scheme::exponential_verlet) {
  State out = s;
  std::vector<double> f(s.u.size()), scratch;
  force(std::span<const double>(s.u), std::span<double>(f));
  if (scheme == Scheme::strang)
    strang_advance(out, f, scratch, h, b, force);
  else
    exp_verlet_advance(out, f, scratch, h, b, force);
  return out;
}

/// Step size from the CFL limit and the nonlinear stiffness proxy.
inline double controlled_step(const RadialGrid& g, const SolverConfig& cfg, double stiffness) {
  return std::min(cfg.cfl * g.spacing(), cfg.safety / std::sqrt(1.0 + stiffness));
}

inline double nonlinear_stiffness(const NonlinearitySpec& n, std::span<const double> u) {
  if (n.kind == NonlinearityKind::zero) return 0.0;
  return nonlinearity_slope(n, sup_norm<double>(u));
}

/// One controlled step of the model equation.
inline State step(const State& s, const Model& m, const RadialGrid& g, const SolverConfig& cfg) {
  if (s.u.size() != g.size() || s.w.size() != g.size()) throw std::invalid_argument("step: state/grid mismatch");
  const double h = controlled_step(g, cfg, nonlinear_stiffness(m.nonlinearity, s.u));
  auto force = [&](std::span<const double> u, std::span<double> out) {
    damped_force(g, m, u, cfg.boundary_value, out);
  };
  return step_with(s, h, m.damping, force, cfg.scheme);
}

namespace detail {

/// Shared time loop: step-size control, landing on sample times, blow-up
/// verdicts. Stepper provides propose_dt, advance(state, h), monitor(state)
/// and dissipation_rate(state).
template <class Real, class Stepper>
BasicSolutionTrace<Real> drive(BasicState<Real> state, const RadialGrid& grid, const SolverConfig& cfg,
                               Stepper& stepper) {
  cfg.validate();
  BasicSolutionTrace<Real> tr;
  tr.grid = grid;
  tr.boundary_value = cfg.boundary_value;
  tr.samples.push_back(state);
  tr.dissipation.push_back(0.0);

  double D = 0.0;
  double rate = stepper.dissipation_rate(state);
  std::size_t sample_index = 1;
  bool last_recorded = true;
  const double t_max = cfg.t_max;

  while (state.t < t_max) {
    const double proposed = stepper.propose_dt(state);
    if (!(proposed >= cfg.dt_floor)) {
      tr.termination = {Outcome::blow_up, BlowUpTrigger::dt_floor, state.t, state.t};
      break;
    }
    double target = t_max;
    if (cfg.sample_dt > 0.0) target = std::min(target, cfg.sample_dt * static_cast<double>(sample_index));
    double h = proposed;
    bool landing = false;
    if (state.t + h >= target - 1e-12 * std::max(1.0, target)) {
      h = target - state.t;
      landing = true;
    }
    BasicState<Real> next = state;
    stepper.advance(next, h);
    if (landing) next.t = target;
    const double mon = stepper.monitor(next);
    if (!(mon <= cfg.blow_threshold)) {
      tr.termination = {Outcome::blow_up, BlowUpTrigger::norm, state.t, state.t + h};
      break;
    }
    const double next_rate = stepper.dissipation_rate(next);
    D += 0.5 * h * (rate + next_rate);
    rate = next_rate;
    state = std::move(next);
    ++tr.steps;
    last_recorded = false;

    bool record = false;
    if (cfg.sample_dt > 0.0) {
      if (landing && state.t < t_max + 1e-12 && std::abs(state.t - cfg.sample_dt * sample_index) <= 1e-9 * std::max(1.0, state.t)) {
        ++sample_index;
        record = true;
      }
    } else {
      record = tr.steps % cfg.sample_stride == 0;
    }
    if (state.t >= t_max) record = true;
    if (record) {
      tr.samples.push_back(state);
      tr.dissipation.push_back(D);
      last_recorded = true;
    }
  }
  if (!last_recorded) {
    tr.samples.push_back(state);
    tr.dissipation.push_back(D);
  }
  if (!tr.termination.blew_up()) tr.termination = {Outcome::reached_horizon, BlowUpTrigger::none, state.t, state.t};
  return tr;
}

class DampedStepper {
 public:
  DampedStepper(const Model& m, const RadialGrid& g, const SolverConfig& cfg, const State& initial)
      : model_(m), grid_(g), cfg_(cfg) {
    force_.resize(g.size());
    evaluate(initial.u, force_);
  }

  double propose_dt(const State& s) const {
    return controlled_step(grid_, cfg_, nonlinear_stiffness(model_.nonlinearity, s.u));
  }

  void advance(State& s, double h) {
    // On a rejected step the driver stops, so the cached force never needs rollback.
    auto f = [this](std::span<const double> u, std::span<double> out) { evaluate(u, out); };
    if (cfg_.scheme == Scheme::strang)
      strang_advance(s, force_, scratch_, h, model_.damping, f);
    else
      exp_verlet_advance(s, force_, scratch_, h, model_.damping, f);
  }

  double monitor(const State& s) const { return sup_norm<double>(s.u); }

  double dissipation_rate(const State& s) const {
    return damping_value(model_.damping, s.t) * l2_norm_sq<double>(grid_, s.w);
  }

 private:
  void evaluate(std::span<const double> u, std::span<double> out) const {
    damped_force(grid_, model_, u, cfg_.boundary_value, out);
  }

  Model model_;
  RadialGrid grid_;
  SolverConfig cfg_;
  std::vector<double> force_, scratch_;
};

}  // namespace detail

/// Smallest radius that keeps the outer boundary causally inert up to T.
inline double causal_radius(const InitialDataSpec& data, double t_max) { return data.support_radius() + t_max; }

/// Integrates from the given initial state until t_max or blow-up.
inline SolutionTrace solve_from(const Model& m, State initial, const RadialGrid& grid, const SolverConfig& cfg) {
  if (initial.u.size() != grid.size() || initial.w.size() != grid.size())
    throw std::invalid_argument("solve: state/grid mismatch");
  detail::DampedStepper stepper(m, grid, cfg, initial);
  return detail::drive<double>(std::move(initial), grid, cfg, stepper);
}

/// Samples the data on the grid and integrates.
inline SolutionTrace solve(const Model& m, const InitialDataSpec& data, const RadialGrid& grid, const SolverConfig& cfg) {
  if (grid.radius() + 1e-12 < causal_radius(data, cfg.t_max))
    throw std::invalid_argument("solve: grid radius is below data support + t_max");
  State init = sample_initial_data(data, grid, damping_value(m.damping, 0.0));
  return solve_from(m, std::move(init), grid, cfg);
}

}  // namespace dampwave
