#pragma once

// Test-function machinery on numerical solutions.
//
// psi_tau(t, x) = eta(t/tau) phi(|x|/tau), both bumps the unit_bump profile
// (1 on [0,1/2], 0 on [1,inf)). Pairing the equation with psi^l and
// integrating by parts over [0,tau) x B(tau) gives
//
//   int int N(u) psi^l + J = K1 + K2 + K3 + K4,
//   J  = int (b(0) u0 + u1) phi_tau^l,
//   K1 = int int u d_t^2(psi^l),   K2 = -int int u Lap(psi^l),
//   K3 = -int int u b' psi^l,      K4 = -int int u b d_t(psi^l).
//
// All derivatives of psi^l are analytic. The bumps are steep compared with a
// coarse grid, so space integrals use four Gauss points per cell with u
// interpolated quadratically from the cell centers (even reflection at the
// origin). Time integrals are trapezoids over the trace samples.

#include <algorithm>
#include <array>
#include <span>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dampwave/exponents.hpp"
#include "dampwave/smooth_step.hpp"
#include "dampwave/solver.hpp"

namespace dampwave {

struct TestFunctionSpec {
  double tau = 1.0;
  double p = 3.0;
  double q = 1.5;
  int l = 4;

  /// q = p/(p-1), l = ceil(2q + 1).
  static TestFunctionSpec make(double tau, double p) {
    if (!(tau > 0.0)) throw std::invalid_argument("test function: tau must be positive");
    if (!(p > 1.0)) throw std::invalid_argument("test function: p must exceed 1");
    TestFunctionSpec s;
    s.tau = tau;
    s.p = p;
    s.q = p / (p - 1.0);
    s.l = static_cast<int>(std::ceil(2.0 * s.q + 1.0 - 1e-12));
    return s;
  }
};

/// eta or phi at s >= 0 with two derivatives.
inline Jet bump_eval(double s) {
  if (s < 0.0) throw std::invalid_argument("bump_eval: argument must be nonnegative");
  return unit_bump(s);
}

/// (b^l, (b^l)', (b^l)'') from a jet of b.
inline Jet power_jet(const Jet& b, int l) {
  if (b.value == 0.0) return {0.0, 0.0, 0.0};
  const double v2 = l >= 2 ? std::pow(b.value, l - 2) : 0.0;
  const double v1 = std::pow(b.value, l - 1);
  return {v1 * b.value, l * v1 * b.d1, l * (l - 1) * v2 * b.d1 * b.d1 + l * v1 * b.d2};
}

/// Radial Laplacian of phi^l at s = |x| (unit scale).
inline double bump_power_laplacian(double s, int l, int d) {
  const Jet pl = power_jet(bump_eval(s), l);
  if (s <= 0.5) return 0.0;
  return pl.d2 + (d - 1) * pl.d1 / s;
}

struct KTerms {
  double k1 = 0.0, k2 = 0.0, k3 = 0.0, k4 = 0.0;
  [[nodiscard]] double sum() const { return k1 + k2 + k3 + k4; }
};

struct TestFnIntegrals {
  double I = 0.0;      // int int |u|^p psi^l
  double NI = 0.0;     // int int N(u) psi^l
  double J = 0.0;
  KTerms K;
};

namespace detail {

inline void require_window(const SolutionTrace& tr, const TestFunctionSpec& spec) {
  if (tr.samples.empty() || tr.final_time() + 1e-12 < spec.tau)
    throw std::invalid_argument("testfn: trace does not reach tau");
  if (tr.grid.radius() < spec.tau) throw std::invalid_argument("testfn: grid does not cover B(tau)");
}

// Trapezoid weights over sample times, truncated once eta vanishes.
inline std::vector<double> time_weights(const SolutionTrace& tr, double tau) {
  std::vector<double> wts(tr.samples.size(), 0.0);
  for (std::size_t i = 0; i + 1 < tr.samples.size(); ++i) {
    const double t0 = tr.samples[i].t;
    if (t0 >= tau) break;
    const double h = tr.samples[i + 1].t - t0;
    wts[i] += 0.5 * h;
    wts[i + 1] += 0.5 * h;
  }
  return wts;
}

}  // namespace detail

/// Largest gap between consecutive samples inside [0, tau].
inline double max_sample_gap(const SolutionTrace& tr, double tau) {
  double gap = 0.0;
  for (std::size_t i = 0; i + 1 < tr.samples.size() && tr.samples[i].t < tau; ++i)
    gap = std::max(gap, tr.samples[i + 1].t - tr.samples[i].t);
  return gap;
}

namespace detail {

// Quadrature nodes on B(tau): weight, three interpolation stencil entries and
// the spatial test factors phi^l, Lap(phi^l) at each node.
struct BallQuadrature {
  std::vector<double> weight, phil, lap;
  std::vector<std::array<std::size_t, 3>> idx;
  std::vector<std::array<double, 3>> coef;
  std::vector<int> ghost;  // stencil slot reading the boundary ghost, or -1
};

inline BallQuadrature ball_quadrature(const RadialGrid& g, double tau, int l) {
  static constexpr std::array<double, 4> xi = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                               0.8611363115940526};
  static constexpr std::array<double, 4> wi = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                               0.3478548451374538};
  const double dr = g.spacing();
  const double S = sphere_area(g.dimension());
  const int d = g.dimension();
  const std::size_t J = g.size();
  BallQuadrature q;
  for (std::size_t j = 0; j < J && g.face(j) < tau; ++j) {
    for (int k = 0; k < 4; ++k) {
      const double r = g.center(j) + 0.5 * dr * xi[k];
      const double s = r / tau;
      if (s >= 1.0) continue;
      // Quadratic through cells j-1, j, j+1 (ghost past the edge); cell 0
      // uses the even reflection u(-r_0) = u_0.
      const double x = (r - g.center(j)) / dr;
      const std::array<double, 3> w = {0.5 * x * (x - 1.0), 1.0 - x * x, 0.5 * x * (x + 1.0)};
      const std::array<std::size_t, 3> ix = {j == 0 ? 0 : j - 1, j, j + 1 < J ? j + 1 : j};
      const int gh = j + 1 < J ? -1 : 2;
      q.weight.push_back(wi[k] * 0.5 * dr * S * std::pow(r, d - 1));
      q.phil.push_back(power_jet(bump_eval(s), l).value);
      q.lap.push_back(bump_power_laplacian(s, l, d) / (tau * tau));
      q.idx.push_back(ix);
      q.coef.push_back(w);
      q.ghost.push_back(gh);
    }
  }
  return q;
}

inline double interpolate(const BallQuadrature& q, std::size_t n, std::span<const double> u, double ghost) {
  double v = 0.0;
  for (int k = 0; k < 3; ++k) v += q.coef[n][k] * (k == q.ghost[n] ? ghost : u[q.idx[n][k]]);
  return v;
}

}  // namespace detail

/// J(tau) = int (b(0) u0 + u1) phi_tau^l from the t = 0 state.
inline double compute_J(const State& s0, const RadialGrid& g, const TestFunctionSpec& spec, double b0,
                        double boundary = 0.0) {
  if (g.radius() < spec.tau) throw std::invalid_argument("testfn: grid does not cover B(tau)");
  const detail::BallQuadrature q = detail::ball_quadrature(g, spec.tau, spec.l);
  long double acc = 0.0L;
  for (std::size_t n = 0; n < q.weight.size(); ++n) {
    const double a = b0 * detail::interpolate(q, n, s0.u, boundary) + detail::interpolate(q, n, s0.w, 0.0);
    acc += static_cast<long double>(q.weight[n]) * a * q.phil[n];
  }
  return static_cast<double>(acc);
}

/// I, int N(u) psi^l, J and the K terms in one sweep over the trace.
inline TestFnIntegrals compute_integrals(const SolutionTrace& tr, const TestFunctionSpec& spec, const Model& m) {
  detail::require_window(tr, spec);
  const RadialGrid& g = tr.grid;
  const int l = spec.l;
  const double tau = spec.tau;
  const double p = m.nonlinearity.kind == NonlinearityKind::zero ? spec.p : m.nonlinearity.p;
  const detail::BallQuadrature q = detail::ball_quadrature(g, tau, l);

  const std::vector<double> wt = detail::time_weights(tr, tau);
  long double I = 0, NI = 0, k1 = 0, k2 = 0, k3 = 0, k4 = 0;
  for (std::size_t i = 0; i < tr.samples.size(); ++i) {
    if (wt[i] == 0.0) continue;
    const State& st = tr.samples[i];
    const Jet el = power_jet(bump_eval(st.t / tau), l);
    const double eta_l = el.value;
    const double eta_t = el.d1 / tau;
    const double eta_tt = el.d2 / (tau * tau);
    const double b = damping_value(m.damping, st.t);
    const double db = damping_derivative(m.damping, st.t);
    long double su = 0, sabs = 0, sN = 0, slap = 0;
    for (std::size_t n = 0; n < q.weight.size(); ++n) {
      const double u = detail::interpolate(q, n, st.u, tr.boundary_value);
      const long double v = static_cast<long double>(q.weight[n]) * q.phil[n];
      su += v * u;
      sabs += v * std::pow(std::abs(u), p);
      sN += v * nonlinearity_eval(m.nonlinearity, u);
      slap += static_cast<long double>(q.weight[n]) * q.lap[n] * u;
    }
    const long double w = wt[i];
    I += w * eta_l * sabs;
    NI += w * eta_l * sN;
    k1 += w * eta_tt * su;
    k2 -= w * eta_l * slap;
    k3 -= w * db * eta_l * su;
    k4 -= w * b * eta_t * su;
  }
  TestFnIntegrals r;
  r.I = static_cast<double>(I);
  r.NI = static_cast<double>(NI);
  r.K = {static_cast<double>(k1), static_cast<double>(k2), static_cast<double>(k3), static_cast<double>(k4)};
  r.J = compute_J(tr.samples.front(), g, spec, damping_value(m.damping, 0.0), tr.boundary_value);
  return r;
}

inline double compute_I(const SolutionTrace& tr, const TestFunctionSpec& spec, const Model& m) {
  return compute_integrals(tr, spec, m).I;
}

inline KTerms compute_K_terms(const SolutionTrace& tr, const TestFunctionSpec& spec, const Model& m) {
  return compute_integrals(tr, spec, m).K;
}

/// |int N psi^l + J - sum K| / max(1, I + |J|).
inline double weak_identity_residual(const TestFnIntegrals& r) {
  return std::abs(r.NI + r.J - r.K.sum()) / std::max(1.0, r.I + std::abs(r.J));
}

inline double weak_identity_residual(const SolutionTrace& tr, const TestFunctionSpec& spec, const Model& m) {
  return weak_identity_residual(compute_integrals(tr, spec, m));
}

// --- constants ---------------------------------------------------------------

struct BumpNorms {
  double d1 = 0.0;   // sup |eta'| = sup |phi'|
  double d2 = 0.0;   // sup |eta''|
  double lap = 0.0;  // sup |Lap phi| in dimension d
};

/// Sup-norms of the bump derivatives by dense sampling of the transition.
inline BumpNorms bump_norms(int d, int samples = 200000) {
  BumpNorms n;
  for (int i = 0; i <= samples; ++i) {
    const double s = 0.5 + 0.5 * i / samples;
    const Jet b = bump_eval(s);
    n.d1 = std::max(n.d1, std::abs(b.d1));
    n.d2 = std::max(n.d2, std::abs(b.d2));
    n.lap = std::max(n.lap, std::abs(b.d2 + (d - 1) * b.d1 / s));
  }
  return n;
}

/// Admissible C3* for the implemented bumps:
///   C3* = (V 3^{q-1} / q) max((A1 + A2)^q, 1, A4^q),
/// V = |S_{d-1}|/d the volume of the unit cylinder [0,1) x B(1),
/// A1 = l(l-1)|eta'|^2 + l|eta''|, A2 = l(l-1)|phi'|^2 + l|Lap phi|, A4 = l|eta'|.
inline double reconstruct_C3star(int d, double p, int l) {
  if (!(p > 1.0)) throw std::invalid_argument("reconstruct_C3star: p must exceed 1");
  const double q = p / (p - 1.0);
  if (l < 2.0 * q + 1.0 - 1e-12) throw std::invalid_argument("reconstruct_C3star: l must be >= 2q + 1");
  const BumpNorms n = bump_norms(d);
  const double a1 = l * (l - 1.0) * n.d1 * n.d1 + l * n.d2;
  const double a2 = l * (l - 1.0) * n.d1 * n.d1 + l * n.lap;
  const double a4 = l * n.d1;
  const double vol = sphere_area(d) / d;
  const double big = std::max({std::pow(a1 + a2, q), 1.0, std::pow(a4, q)});
  return vol * std::pow(3.0, q - 1.0) / q * big;
}

/// Right-hand side C3* tau^{d+1} {tau^{-2q} + |b'|^q + |b|^q tau^{-q}} with
/// sup-norms of b, b' over [0, tau].
inline double upper_bound_rhs(double c3, int d, double q, double tau, const DampingSpec& damping) {
  const DampingBounds nb = damping_bounds(damping, tau);
  return c3 * std::pow(tau, d + 1) *
         (std::pow(tau, -2.0 * q) + std::pow(nb.db_sup, q) + std::pow(nb.b_sup, q) * std::pow(tau, -q));
}

/// int_{|x| <= R} max(|x|, c)^{-k} phi^l dx.
inline double capped_bump_integral(int d, double k, double c, double R, int l) {
  if (!(k < d)) throw std::invalid_argument("data_lower_bound: need k < d");
  const double S = sphere_area(d);
  // phi = 1 part, closed form.
  auto flat = [&](double a) {
    if (a <= 0.0) return 0.0;
    if (c > 0.0 && a <= c) return std::pow(c, -k) * std::pow(a, d) / d;
    const double lo = c > 0.0 ? std::pow(c, -k) * std::pow(c, d) / d - std::pow(c, d - k) / (d - k) : 0.0;
    return lo + std::pow(a, d - k) / (d - k);
  };
  double total = flat(std::min(R, 0.5));
  // Transition part, composite Simpson split at the cap radius.
  const double hi = std::min(R, 1.0);
  auto f = [&](double r) { return std::pow(std::max(r, c), -k) * power_jet(bump_eval(r), l).value * std::pow(r, d - 1); };
  auto simpson = [&](double a, double b) {
    if (!(b > a)) return 0.0;
    const int n = 4000;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
  };
  if (hi > 0.5) {
    if (c > 0.5 && c < hi)
      total += simpson(0.5, c) + simpson(c, hi);
    else
      total += simpson(0.5, hi);
  }
  return S * total;
}

/// tau^{d-k} int_{|x| <= 1/tau} max(|x|, delta/tau)^{-k} phi^l dx: the lower
/// bound on J(tau) for unit-amplitude singular data capped at radius delta
/// (delta = 0 gives the uncapped profile).
inline double data_lower_bound(int d, double k, double tau, int l, double delta = 0.0) {
  if (!(tau > 0.0)) throw std::invalid_argument("data_lower_bound: tau must be positive");
  return std::pow(tau, d - k) * capped_bump_integral(d, k, delta / tau, 1.0 / tau, l);
}

struct LowerBoundCheck {
  double J = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// J(tau) >= lambda * lower bound - 1e-3 |J| for singular data.
inline LowerBoundCheck lower_bound_check(const State& s0, const RadialGrid& g, const InitialDataSpec& data,
                                     const TestFunctionSpec& spec, double b0, double slack = 1e-3) {
  if (data.family != DataFamily::singular) throw std::invalid_argument("lower_bound_check: needs singular data");
  LowerBoundCheck c;
  c.J = data.sign * compute_J(s0, g, spec, b0);
  c.bound = data.lambda * data_lower_bound(data.d, data.k, spec.tau, spec.l, data.delta);
  c.pass = c.J >= c.bound - slack * std::abs(c.J);
  return c;
}

/// lambda_0 = C3* 2^{k+1} {2^{-2q} + |b'|^q + |b|^q 2^{-q}} (d-k)/|S_{d-1}| (1/2)^{k-d},
/// sup-norms over [0, 2].
inline double lambda_threshold(int d, double p, double k, const DampingSpec& damping) {
  if (!(p > 1.0)) throw std::invalid_argument("lambda_threshold: p must exceed 1");
  if (!(k < std::min<double>(d, (p + 1.0) / (p - 1.0))))
    throw std::invalid_argument("lambda_threshold: need k < min(d, (p+1)/(p-1))");
  const TestFunctionSpec spec = TestFunctionSpec::make(2.0, p);
  const double c3 = reconstruct_C3star(d, p, spec.l);
  const DampingBounds nb = damping_bounds(damping, 2.0);
  const double q = spec.q;
  return c3 * std::pow(2.0, k + 1.0) *
         (std::pow(2.0, -2.0 * q) + std::pow(nb.db_sup, q) + std::pow(nb.b_sup, q) * std::pow(2.0, -q)) *
         (d - k) / sphere_area(d) * std::pow(0.5, k - d);
}

struct TestFnReport {
  double tau = 0.0;
  int l = 0;
  double I = 0.0, J = 0.0;
  KTerms K;
  double residual = 0.0;
  double c3star = 0.0;
  double upper_bound_rhs = 0.0;
  bool upper_bound_pass = false;
  std::optional<double> lower_bound;  // singular data only
  std::optional<bool> lower_bound_pass;
  std::optional<double> lambda0;      // when k is in range
  double max_gap = 0.0;
  bool stride_ok = false;
};

/// Full audit of one trace at one tau. The upper-bound check uses the
/// sign of the nonlinearity and 5% slack.
inline TestFnReport audit_trace(const SolutionTrace& tr, const Model& m, const InitialDataSpec& data, double tau) {
  if (!m.nonlinearity.is_abs_power()) throw std::invalid_argument("audit: needs N = +-|u|^p");
  const TestFunctionSpec spec = TestFunctionSpec::make(tau, m.nonlinearity.p);
  const TestFnIntegrals r = compute_integrals(tr, spec, m);
  TestFnReport rep;
  rep.tau = tau;
  rep.l = spec.l;
  rep.I = r.I;
  rep.J = r.J;
  rep.K = r.K;
  rep.residual = weak_identity_residual(r);
  const int d = tr.grid.dimension();
  rep.c3star = reconstruct_C3star(d, spec.p, spec.l);
  rep.upper_bound_rhs = upper_bound_rhs(rep.c3star, d, spec.q, tau, m.damping);
  rep.upper_bound_pass = m.nonlinearity.sign() * r.J <= 1.05 * rep.upper_bound_rhs;
  rep.max_gap = max_sample_gap(tr, tau);
  rep.stride_ok = rep.max_gap <= tau / 200.0 * (1.0 + 1e-9);
  if (data.family == DataFamily::singular) {
    const auto c = lower_bound_check(tr.samples.front(), tr.grid, data, spec, damping_value(m.damping, 0.0));
    rep.lower_bound = c.bound;
    rep.lower_bound_pass = c.pass;
    if (data.k < std::min<double>(d, (spec.p + 1.0) / (spec.p - 1.0)))
      rep.lambda0 = lambda_threshold(d, spec.p, data.k, m.damping);
  }
  return rep;
}

}  // namespace dampwave
