#pragma once

// Problem data for u_tt - Lap u + b(t) u_t = N(u): damping families,
// power nonlinearities with their primitives, and initial-data families.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dampwave/grid.hpp"
#include "dampwave/smooth_step.hpp"

namespace dampwave {

// ---------------------------------------------------------------------------
// Damping coefficient b(t)
// ---------------------------------------------------------------------------

enum class DampingFamily { constant, power, exponential, zero };

/// b(t) for one of the closed-form families:
///   constant     b = mu
///   power        b = mu (1+t)^(-beta)
///   exponential  b = mu e^(a t), a > 0
///   zero         b = 0
struct DampingSpec {
  DampingFamily family = DampingFamily::constant;
  double mu = 1.0;
  double beta = 0.0;  // power family
  double a = 1.0;     // exponential family

  static DampingSpec constant(double mu) { return checked({DampingFamily::constant, mu, 0.0, 1.0}); }
  static DampingSpec power(double mu, double beta) { return checked({DampingFamily::power, mu, beta, 1.0}); }
  static DampingSpec exponential(double mu, double a) {
    return checked({DampingFamily::exponential, mu, 0.0, a});
  }
  static DampingSpec zero() { return {DampingFamily::zero, 0.0, 0.0, 1.0}; }

  static DampingSpec checked(DampingSpec s) {
    if (s.family != DampingFamily::zero && !(s.mu > 0.0 && std::isfinite(s.mu)))
      throw std::invalid_argument("damping: mu must be positive");
    if (s.family == DampingFamily::exponential && !(s.a > 0.0))
      throw std::invalid_argument("damping: exponential rate a must be positive");
    if (!std::isfinite(s.beta)) throw std::invalid_argument("damping: beta must be finite");
    return s;
  }
};

inline void require_nonnegative_time(double t) {
  if (!(t >= 0.0)) throw std::domain_error("damping: time must be nonnegative");
}

/// b(t).
inline double damping_value(const DampingSpec& s, double t) {
  require_nonnegative_time(t);
  switch (s.family) {
    case DampingFamily::constant: return s.mu;
    case DampingFamily::power: return s.mu * std::pow(1.0 + t, -s.beta);
    case DampingFamily::exponential: return s.mu * std::exp(s.a * t);
    case DampingFamily::zero: return 0.0;
  }
  return 0.0;
}

/// b'(t).
inline double damping_derivative(const DampingSpec& s, double t) {
  require_nonnegative_time(t);
  switch (s.family) {
    case DampingFamily::constant: return 0.0;
    case DampingFamily::power: return -s.beta * s.mu * std::pow(1.0 + t, -s.beta - 1.0);
    case DampingFamily::exponential: return s.a * s.mu * std::exp(s.a * t);
    case DampingFamily::zero: return 0.0;
  }
  return 0.0;
}

/// B(t) = int_0^t b(s) ds.
inline double damping_cumulative(const DampingSpec& s, double t) {
  require_nonnegative_time(t);
  switch (s.family) {
    case DampingFamily::constant: return s.mu * t;
    case DampingFamily::power: {
      const double e = 1.0 - s.beta;
      const double L = std::log1p(t);
      if (e == 0.0) return s.mu * L;
      return s.mu * std::expm1(e * L) / e;
    }
    case DampingFamily::exponential: return s.mu * std::expm1(s.a * t) / s.a;
    case DampingFamily::zero: return 0.0;
  }
  return 0.0;
}

/// int_0^T b(s)^{-1} ds. Pass T = +infinity for the whole half-line.
/// Returns std::nullopt when the integral diverges.
inline std::optional<double> damping_inverse_integral(const DampingSpec& s, double T) {
  if (!(T > 0.0)) throw std::domain_error("damping_inverse_integral: T must be positive");
  const bool infinite = std::isinf(T);
  switch (s.family) {
    case DampingFamily::constant:
      if (infinite) return std::nullopt;
      return T / s.mu;
    case DampingFamily::power: {
      const double e = s.beta + 1.0;
      if (infinite) {
        if (e < 0.0) return -1.0 / (s.mu * e);
        return std::nullopt;
      }
      const double L = std::log1p(T);
      if (e == 0.0) return L / s.mu;
      return std::expm1(e * L) / (s.mu * e);
    }
    case DampingFamily::exponential:
      if (infinite) return 1.0 / (s.mu * s.a);
      return -std::expm1(-s.a * T) / (s.mu * s.a);
    case DampingFamily::zero: return std::nullopt;
  }
  return std::nullopt;
}

/// int_{t0}^{t1} b(s)^{-1} ds for finite 0 <= t0 <= t1 (zero family: +inf).
inline double damping_inverse_integral_between(const DampingSpec& s, double t0, double t1) {
  if (s.family == DampingFamily::zero) return std::numeric_limits<double>::infinity();
  if (t1 <= t0) return 0.0;
  switch (s.family) {
    case DampingFamily::constant: return (t1 - t0) / s.mu;
    case DampingFamily::exponential:
      // e^{-a t0} (1 - e^{-a (t1 - t0)}) / (mu a)
      return std::exp(-s.a * t0) * -std::expm1(-s.a * (t1 - t0)) / (s.mu * s.a);
    case DampingFamily::power: {
      const double e = s.beta + 1.0;
      const double L0 = std::log1p(t0);
      const double dL = std::log1p((t1 - t0) / (1.0 + t0));
      if (e == 0.0) return dL / s.mu;
      return std::exp(e * L0) * std::expm1(e * dL) / (s.mu * e);
    }
    case DampingFamily::zero: break;
  }
  return 0.0;
}

/// sup_{[0,T]} |b| and sup_{[0,T]} |b'|. Every family is monotone in t, so the
/// suprema sit at the endpoints.
struct DampingBounds {
  double b_sup = 0.0;
  double db_sup = 0.0;
};

inline DampingBounds damping_bounds(const DampingSpec& s, double T) {
  require_nonnegative_time(T);
  return {std::max(std::abs(damping_value(s, 0.0)), std::abs(damping_value(s, T))),
          std::max(std::abs(damping_derivative(s, 0.0)), std::abs(damping_derivative(s, T)))};
}

inline std::string to_string(DampingFamily f) {
  switch (f) {
    case DampingFamily::constant: return "constant";
    case DampingFamily::power: return "power";
    case DampingFamily::exponential: return "exponential";
    case DampingFamily::zero: return "zero";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Nonlinearity N(z)
// ---------------------------------------------------------------------------

enum class NonlinearityKind { power_abs_plus, power_abs_minus, power_signed_plus, power_signed_minus, zero };

struct NonlinearitySpec {
  NonlinearityKind kind = NonlinearityKind::zero;
  double p = 1.0;
  double c_n = 1.0;  // Lipschitz-scale constant; defaults to p for power families

  static NonlinearitySpec make(NonlinearityKind kind, double p, std::optional<double> c_n = std::nullopt) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("nonlinearity: p must be >= 1");
    NonlinearitySpec s{kind, p, c_n.value_or(kind == NonlinearityKind::zero ? 0.0 : p)};
    if (!(s.c_n >= 0.0)) throw std::invalid_argument("nonlinearity: C_N must be nonnegative");
    return s;
  }
  static NonlinearitySpec zero() { return {NonlinearityKind::zero, 1.0, 0.0}; }

  /// Overall sign of the power term (+1 focusing-type, -1, or 0 for zero).
  [[nodiscard]] double sign() const {
    switch (kind) {
      case NonlinearityKind::power_abs_plus:
      case NonlinearityKind::power_signed_plus: return 1.0;
      case NonlinearityKind::power_abs_minus:
      case NonlinearityKind::power_signed_minus: return -1.0;
      case NonlinearityKind::zero: return 0.0;
    }
    return 0.0;
  }
  [[nodiscard]] bool is_abs_power() const {
    return kind == NonlinearityKind::power_abs_plus || kind == NonlinearityKind::power_abs_minus;
  }
  /// Primitive is nonpositive everywhere. Decided per family: +-|z|^p have odd
  /// primitives z|z|^p/(p+1) which change sign, so only -|z|^{p-1}z qualifies.
  [[nodiscard]] bool defocusing() const {
    return kind == NonlinearityKind::power_signed_minus || kind == NonlinearityKind::zero;
  }
};

/// N(z).
inline double nonlinearity_eval(const NonlinearitySpec& s, double z) {
  if (s.kind == NonlinearityKind::zero) return 0.0;
  const double az = std::abs(z);
  const double mag = std::pow(az, s.p);
  if (s.is_abs_power()) return s.sign() * mag;
  return s.sign() * (z < 0.0 ? -mag : mag);
}

/// N~(z) = int_0^z N(s) ds.
inline double nonlinearity_primitive(const NonlinearitySpec& s, double z) {
  if (s.kind == NonlinearityKind::zero) return 0.0;
  const double m = std::pow(std::abs(z), s.p + 1.0) / (s.p + 1.0);
  if (s.is_abs_power()) return s.sign() * (z < 0.0 ? -m : m);
  return s.sign() * m;
}

/// |N'(z)| = p |z|^{p-1} for every power family.
inline double nonlinearity_slope(const NonlinearitySpec& s, double z) {
  if (s.kind == NonlinearityKind::zero) return 0.0;
  if (s.p == 1.0) return 1.0;
  return s.p * std::pow(std::abs(z), s.p - 1.0);
}

/// Long-double overloads used by the transformed solver.
inline long double nonlinearity_eval(const NonlinearitySpec& s, long double z) {
  if (s.kind == NonlinearityKind::zero) return 0.0L;
  const long double mag = std::pow(std::abs(z), static_cast<long double>(s.p));
  if (s.is_abs_power()) return s.sign() * mag;
  return s.sign() * (z < 0.0L ? -mag : mag);
}

struct LipschitzResult {
  bool pass = true;
  double worst_ratio = 0.0;
};

/// Samples an n x n uniform grid of [-Z, Z]^2 and checks
///   |N(z) - N(w)| <= C_N (1 + |z| + |w|)^{p-1} |z - w|.
inline LipschitzResult lipschitz_check(const NonlinearitySpec& s, double Z, int n) {
  if (!(Z > 0.0) || n < 2) throw std::invalid_argument("lipschitz_check: need Z > 0 and n >= 2");
  LipschitzResult r;
  const double h = 2.0 * Z / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double z = -Z + i * h;
    const double nz = nonlinearity_eval(s, z);
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = -Z + j * h;
      const double denom = std::pow(1.0 + std::abs(z) + std::abs(w), s.p - 1.0) * std::abs(z - w);
      const double ratio = std::abs(nz - nonlinearity_eval(s, w)) / denom;
      r.worst_ratio = std::max(r.worst_ratio, ratio);
    }
  }
  r.pass = r.worst_ratio <= s.c_n;
  return r;
}

inline std::string to_string(NonlinearityKind k) {
  switch (k) {
    case NonlinearityKind::power_abs_plus: return "power_abs_plus";
    case NonlinearityKind::power_abs_minus: return "power_abs_minus";
    case NonlinearityKind::power_signed_plus: return "power_signed_plus";
    case NonlinearityKind::power_signed_minus: return "power_signed_minus";
    case NonlinearityKind::zero: return "zero";
  }
  return "?";
}

/// The equation's coefficients: damping and nonlinearity.
struct Model {
  DampingSpec damping;
  NonlinearitySpec nonlinearity;
};

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

enum class DataFamily { gaussian, singular };
enum class SingularMode { in_u1, split };

/// Radial initial data (u0, u1).
///
/// gaussian:  u0 = eps e^{-r^2/w^2},  u1 = eps1 e^{-r^2/w^2}.
/// singular:  sign * (b(0) u0 + u1) = lambda min(r^{-k}, delta^{-k}) chi(r),
///            chi = 1 on [0, 1], 0 on [2, inf). Mode in_u1 puts everything in
///            u1; split puts half in each of b(0) u0 and u1.
struct InitialDataSpec {
  DataFamily family = DataFamily::gaussian;
  int d = 3;
  // gaussian
  double eps = 0.0;
  double eps1 = 0.0;
  double width = 1.0;
  // singular
  double lambda = 1.0;
  double k = 1.0;
  double delta = 0.1;
  SingularMode mode = SingularMode::in_u1;
  double sign = 1.0;

  static InitialDataSpec gaussian(int d, double eps, double width = 1.0, double eps1 = 0.0) {
    InitialDataSpec s;
    s.family = DataFamily::gaussian;
    s.d = d;
    s.eps = eps;
    s.eps1 = eps1;
    s.width = width;
    if (!(width > 0.0)) throw std::invalid_argument("gaussian data: width must be positive");
    return s;
  }
  static InitialDataSpec singular(int d, double lambda, double k, double delta,
                                  SingularMode mode = SingularMode::in_u1, double sign = 1.0) {
    InitialDataSpec s;
    s.family = DataFamily::singular;
    s.d = d;
    s.lambda = lambda;
    s.k = k;
    s.delta = delta;
    s.mode = mode;
    s.sign = sign;
    if (!(delta > 0.0)) throw std::invalid_argument("singular data: delta must be positive");
    if (sign != 1.0 && sign != -1.0) throw std::invalid_argument("singular data: sign must be +1 or -1");
    return s;
  }

  /// Radius outside which the data vanishes (gaussian: below 1e-15 relative).
  [[nodiscard]] double support_radius() const { return family == DataFamily::gaussian ? 6.0 * width : 2.0; }
};

/// Cutoff applied to the singular profile: 1 on [0,1], 0 on [2,inf).
inline double singular_cutoff(double r) { return plateau_cutoff(r, 1.0, 2.0).value; }

/// min(r^{-k}, delta^{-k}) chi(r), the unit-amplitude singular profile.
inline double singular_profile(double r, double k, double delta) {
  const double core = std::pow(std::max(r, delta), -k);
  return core * singular_cutoff(r);
}

/// Pointwise (u0(r), u1(r)); b0 = b(0) is needed only by the split mode.
struct DataPoint {
  double u0 = 0.0;
  double u1 = 0.0;
};

inline DataPoint initial_data_at(const InitialDataSpec& s, double r, double b0) {
  if (s.family == DataFamily::gaussian) {
    const double g = std::exp(-(r * r) / (s.width * s.width));
    return {s.eps * g, s.eps1 * g};
  }
  const double P = s.sign * s.lambda * singular_profile(r, s.k, s.delta);
  if (s.mode == SingularMode::in_u1) return {0.0, P};
  if (!(b0 > 0.0)) throw std::invalid_argument("singular data: split mode needs b(0) > 0");
  return {0.5 * P / b0, 0.5 * P};
}

/// Cell-centered samples of (u0, u1) at t = 0. b0 = b(0) is used by the split
/// singular mode only.
inline State sample_initial_data(const InitialDataSpec& s, const RadialGrid& g, double b0 = 1.0) {
  if (g.dimension() != s.d) throw std::invalid_argument("sample_initial_data: grid dimension does not match data");
  if (s.family == DataFamily::singular && s.delta < g.spacing())
    throw std::invalid_argument("sample_initial_data: cap radius delta is below the grid spacing");
  State st;
  st.t = 0.0;
  st.u.resize(g.size());
  st.w.resize(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const DataPoint p = initial_data_at(s, g.center(j), b0);
    st.u[j] = p.u0;
    st.w[j] = p.u1;
  }
  return st;
}

}  // namespace dampwave
