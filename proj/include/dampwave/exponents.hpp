#pragma once

// Critical exponents (energy-critical, Fujita, Strauss), damping regime
// classification and the outcome the theory predicts for a configuration.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "dampwave/model.hpp"

namespace dampwave {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// p1 = 1 + 4/(d-2) for d >= 3, +inf for d = 1, 2.
inline double energy_critical(int d) {
  if (d < 1) throw std::invalid_argument("energy_critical: d must be >= 1");
  return d <= 2 ? infinity : 1.0 + 4.0 / (d - 2);
}

/// pF = 1 + 2/d.
inline double fujita(int d) {
  if (d < 1) throw std::invalid_argument("fujita: d must be >= 1");
  return 1.0 + 2.0 / d;
}

struct StraussExponent {
  double value = 0.0;
  double residual = 0.0;  // (d-1)p^2 - (d+1)p - 2 at p = value
};

/// Positive root of (d-1)p^2 - (d+1)p - 2 = 0.
inline StraussExponent strauss(int d) {
  if (d < 2) throw std::invalid_argument("strauss: defined for d >= 2 only");
  const double dd = d;
  const double p = (dd + 1.0 + std::sqrt(dd * dd + 10.0 * dd - 7.0)) / (2.0 * (dd - 1.0));
  return {p, (dd - 1.0) * p * p - (dd + 1.0) * p - 2.0};
}

enum class DampingRegime { undamped, effective, scale_invariant, weak_decay, overdamping };

inline std::string to_string(DampingRegime r) {
  switch (r) {
    case DampingRegime::undamped: return "undamped";
    case DampingRegime::effective: return "effective";
    case DampingRegime::scale_invariant: return "scale_invariant";
    case DampingRegime::weak_decay: return "weak_decay";
    case DampingRegime::overdamping: return "overdamping";
  }
  return "?";
}

inline DampingRegime classify_damping(const DampingSpec& s) {
  switch (s.family) {
    case DampingFamily::zero: return DampingRegime::undamped;
    case DampingFamily::exponential: return DampingRegime::overdamping;
    case DampingFamily::constant: return DampingRegime::effective;
    case DampingFamily::power:
      if (s.beta < -1.0) return DampingRegime::overdamping;
      if (s.beta < 1.0) return DampingRegime::effective;
      if (s.beta == 1.0) return DampingRegime::scale_invariant;
      return DampingRegime::weak_decay;
  }
  return DampingRegime::effective;
}

/// Exponent of lambda in the lifespan upper bound T+ <= C lambda^{e}:
/// e = -1 / ((p+1)/(p-1) - k).
inline double lifespan_upper_exponent(double p, double k) {
  if (!(p > 1.0)) throw std::invalid_argument("lifespan_upper_exponent: p must exceed 1");
  const double gap = (p + 1.0) / (p - 1.0) - k;
  if (!(gap > 0.0)) throw std::domain_error("lifespan_upper_exponent: bound is void for k >= (p+1)/(p-1)");
  return -1.0 / gap;
}

enum class Prediction { small_data_global, blow_up_expected, non_existence, outside_theory };

inline std::string to_string(Prediction p) {
  switch (p) {
    case Prediction::small_data_global: return "small_data_global";
    case Prediction::blow_up_expected: return "blow_up_expected";
    case Prediction::non_existence: return "non_existence";
    case Prediction::outside_theory: return "outside_theory";
  }
  return "?";
}

/// What the initial data looks like, as far as the theory cares.
struct DataClass {
  enum class Kind { small_smooth, large_smooth, singular } kind = Kind::small_smooth;
  double k = 0.0;          // singularity exponent (singular only)
  bool focusing = true;    // N = +-|z|^p with matching data sign
};

inline Prediction predict_outcome(int d, double p, const DampingSpec& damping, const DataClass& data) {
  const double p1 = energy_critical(d);
  if (data.kind == DataClass::Kind::small_smooth) {
    if (classify_damping(damping) == DampingRegime::overdamping && p >= 1.0 && p < p1)
      return Prediction::small_data_global;
    return Prediction::outside_theory;
  }
  if (data.kind == DataClass::Kind::singular && data.focusing) {
    const double half_d = 0.5 * d;
    if (data.k < half_d && p > 1.0 && p <= p1) return Prediction::blow_up_expected;
    if (d >= 3 && p > p1) {
      const double lo = (p + 1.0) / (p - 1.0);
      if (data.k > lo && data.k < half_d) return Prediction::non_existence;
    }
  }
  return Prediction::outside_theory;
}

/// Critical exponent as known for the regime, with how firmly it is known.
struct CriticalExponent {
  std::optional<double> value;
  std::string status;  // "literature", "conjecture", "mu_dependent", "none"
};

inline CriticalExponent critical_exponent(int d, DampingRegime regime) {
  switch (regime) {
    case DampingRegime::effective: return {fujita(d), "literature"};
    case DampingRegime::undamped:
      if (d >= 2) return {strauss(d).value, "literature"};
      return {std::nullopt, "none"};
    case DampingRegime::weak_decay:
      if (d >= 2) return {strauss(d).value, "conjecture"};
      return {std::nullopt, "none"};
    case DampingRegime::scale_invariant: return {std::nullopt, "mu_dependent"};
    case DampingRegime::overdamping: return {std::nullopt, "none"};
  }
  return {std::nullopt, "none"};
}

struct ExponentReport {
  int d = 3;
  double p1 = 0.0;
  double pF = 0.0;
  std::optional<double> pS;
  DampingRegime regime = DampingRegime::effective;
  CriticalExponent pc;
  Prediction prediction = Prediction::outside_theory;
};

inline ExponentReport exponent_report(int d, double p, const DampingSpec& damping, const DataClass& data) {
  ExponentReport r;
  r.d = d;
  r.p1 = energy_critical(d);
  r.pF = fujita(d);
  if (d >= 2) r.pS = strauss(d).value;
  r.regime = classify_damping(damping);
  r.pc = critical_exponent(d, r.regime);
  r.prediction = predict_outcome(d, p, damping, data);
  return r;
}

}  // namespace dampwave
