#pragma once

// Experiment configuration: an INI file with sections [problem], [numerics]
// and [experiment]. Comments start with ';'. Unknown sections or keys are
// errors, as are inconsistent combinations (checked before any run).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dampwave/exponents.hpp"
#include "dampwave/solver.hpp"

namespace dampwave::harness {

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { single, eps_sweep, lambda_sweep, delta_sweep, convergence, transform_check, testfn_audit };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::single: return "single";
    case ExperimentKind::eps_sweep: return "eps_sweep";
    case ExperimentKind::lambda_sweep: return "lambda_sweep";
    case ExperimentKind::delta_sweep: return "delta_sweep";
    case ExperimentKind::convergence: return "convergence";
    case ExperimentKind::transform_check: return "transform_check";
    case ExperimentKind::testfn_audit: return "testfn_audit";
  }
  return "?";
}

struct Numerics {
  double dr = 0.05;
  std::optional<double> radius;  // default: data support + t_max
  SolverConfig solver;
};

/// Pass/fail thresholds; defaults are the documented acceptance values.
struct Tolerances {
  double ratio = 0.15;          // eps_sweep: spread of Q/eps
  double slope = 0.2;           // lambda_sweep: slack on the lifespan exponent
  int max_extensions = 3;       // lambda_sweep: top-lambda doublings
  double chain_slack = 1e-3;    // L^2 chain check
  double energy_slack = 1e-3;   // defocusing monotonicity, relative to max(1, E(0))
  double residual = 1e-2;       // weak identity
  double discrepancy = 1e-2;    // transform check
  double ratio_low = 3.0;       // refinement ratio window (4 +- 25%)
  double ratio_high = 5.0;
  double order_low = 1.7;
  double order_high = 2.3;
  double limit_fraction = 0.5;  // delta_sweep control: extrapolated limit / last t_star
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::single;
  std::vector<double> values;  // swept eps, lambda or delta
  std::vector<double> taus = {1.0};
  std::optional<double> control_p;  // delta_sweep subcritical control
  int levels = 3;                   // convergence refinement levels
  bool write_traces = true;
  Tolerances tol;
};

struct ExperimentConfig {
  Model model;
  InitialDataSpec data;
  Numerics numerics;
  ExperimentSpec experiment;

  [[nodiscard]] int dimension() const { return data.d; }
};

namespace detail {

using Tree = boost::property_tree::ptree;

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"problem",
       {"d", "damping", "mu", "beta", "a", "nonlinearity", "p", "c_n", "data", "eps", "eps1", "width", "lambda", "k",
        "delta", "mode"}},
      {"numerics",
       {"dr", "radius", "cfl", "safety", "transform_safety", "t_max", "blow_threshold", "dt_floor", "sample_dt",
        "sample_stride", "boundary_value", "scheme"}},
      {"experiment",
       {"kind", "values", "tau", "control_p", "levels", "write_traces", "ratio_tolerance", "slope_tolerance",
        "max_extensions", "chain_slack", "energy_slack", "residual_tolerance", "discrepancy_tolerance",
        "ratio_low", "ratio_high", "order_low", "order_high", "limit_fraction"}},
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(const Tree& t) : tree_(t) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  double number(const std::string& section, const std::string& key, double fallback) const {
    const auto v = raw(section, key);
    return v ? parse_number(section, key, *v) : fallback;
  }

  std::optional<double> maybe_number(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    return parse_number(section, key, *v);
  }

  std::string word(const std::string& section, const std::string& key, const std::string& fallback) const {
    return raw(section, key).value_or(fallback);
  }

  std::vector<double> list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    const auto v = raw(section, key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(section, key, item));
    return out;
  }

  static double parse_number(const std::string& section, const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double x = 0.0;
    const auto first = text.find_first_not_of(" \t");
    const auto last = text.find_last_not_of(" \t");
    const std::string trimmed = first == std::string::npos ? "" : text.substr(first, last - first + 1);
    try {
      x = std::stod(trimmed, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != trimmed.size() || !std::isfinite(x))
      throw ConfigError(section + "." + key + ": '" + text + "' is not a finite number");
    return x;
  }

 private:
  const Tree& tree_;
};

inline void reject_unknown(const Tree& tree) {
  const auto& keys = known_keys();
  for (const auto& [section, body] : tree) {
    const auto it = keys.find(section);
    if (it == keys.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, _] : body)
      if (!it->second.contains(key)) throw ConfigError("unknown key " + section + "." + key);
  }
}

inline DampingSpec parse_damping(const Reader& r) {
  const std::string fam = r.word("problem", "damping", "constant");
  const double mu = r.number("problem", "mu", 1.0);
  try {
    if (fam == "constant") return DampingSpec::constant(mu);
    if (fam == "power") return DampingSpec::power(mu, r.number("problem", "beta", 0.0));
    if (fam == "exponential") return DampingSpec::exponential(mu, r.number("problem", "a", 1.0));
    if (fam == "zero") return DampingSpec::zero();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("problem.damping: ") + e.what());
  }
  throw ConfigError("problem.damping: unknown family '" + fam + "'");
}

inline NonlinearitySpec parse_nonlinearity(const Reader& r) {
  static const std::map<std::string, NonlinearityKind> kinds = {
      {"power_abs_plus", NonlinearityKind::power_abs_plus},
      {"power_abs_minus", NonlinearityKind::power_abs_minus},
      {"power_signed_plus", NonlinearityKind::power_signed_plus},
      {"power_signed_minus", NonlinearityKind::power_signed_minus},
      {"zero", NonlinearityKind::zero},
  };
  const std::string name = r.word("problem", "nonlinearity", "power_abs_plus");
  const auto it = kinds.find(name);
  if (it == kinds.end()) throw ConfigError("problem.nonlinearity: unknown kind '" + name + "'");
  try {
    return NonlinearitySpec::make(it->second, r.number("problem", "p", 3.0), r.maybe_number("problem", "c_n"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("problem.nonlinearity: ") + e.what());
  }
}

inline InitialDataSpec parse_data(const Reader& r, int d, const NonlinearitySpec& n) {
  const std::string fam = r.word("problem", "data", "gaussian");
  try {
    if (fam == "gaussian")
      return InitialDataSpec::gaussian(d, r.number("problem", "eps", 0.0), r.number("problem", "width", 1.0),
                                       r.number("problem", "eps1", 0.0));
    if (fam == "singular") {
      const std::string mode = r.word("problem", "mode", "in_u1");
      if (mode != "in_u1" && mode != "split") throw ConfigError("problem.mode: expected in_u1 or split");
      // One sign for data and nonlinearity: the sign of the power term.
      const double sign = n.sign() < 0.0 ? -1.0 : 1.0;
      return InitialDataSpec::singular(d, r.number("problem", "lambda", 1.0), r.number("problem", "k", 1.0),
                                       r.number("problem", "delta", 0.1),
                                       mode == "split" ? SingularMode::split : SingularMode::in_u1, sign);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("problem.data: ") + e.what());
  }
  throw ConfigError("problem.data: unknown family '" + fam + "'");
}

inline ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::single, ExperimentKind::eps_sweep, ExperimentKind::lambda_sweep,
                 ExperimentKind::delta_sweep, ExperimentKind::convergence, ExperimentKind::transform_check,
                 ExperimentKind::testfn_audit})
    if (to_string(k) == s) return k;
  throw ConfigError("experiment.kind: unknown kind '" + s + "'");
}

inline bool boundedness_kind(ExperimentKind k, const InitialDataSpec& data) {
  if (k == ExperimentKind::eps_sweep) return true;
  if (k == ExperimentKind::single) return data.family == DataFamily::gaussian;
  return false;
}

inline double default_t_max(const ExperimentSpec& e, const InitialDataSpec& data) {
  switch (e.kind) {
    case ExperimentKind::lambda_sweep:
    case ExperimentKind::delta_sweep: return 4.0;
    case ExperimentKind::convergence:
    case ExperimentKind::transform_check: return 5.0;
    case ExperimentKind::testfn_audit: return *std::max_element(e.taus.begin(), e.taus.end());
    default: return boundedness_kind(e.kind, data) ? 100.0 : 4.0;
  }
}

// Boundedness runs keep ~1000 samples; refinement studies sample coarsely so
// the fixed sample times never undercut the CFL step; the audit needs tau/200.
inline double default_sample_dt(const ExperimentSpec& e, double t_max, bool stride_given) {
  if (stride_given) return 0.0;
  switch (e.kind) {
    case ExperimentKind::convergence:
    case ExperimentKind::transform_check: return t_max / 50.0;
    case ExperimentKind::testfn_audit: return *std::min_element(e.taus.begin(), e.taus.end()) / 200.0;
    default: return t_max / 1000.0;
  }
}

inline bool strictly_monotone(const std::vector<double>& v, bool increasing) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (increasing ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace detail

/// Cross-field checks; throws ConfigError naming the offending fields.
inline void validate(const ExperimentConfig& c) {
  const auto& e = c.experiment;
  const auto& n = c.model.nonlinearity;
  const int d = c.dimension();
  const double p1 = energy_critical(d);
  const std::string kind = "experiment.kind=" + to_string(e.kind);
  try {
    c.numerics.solver.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("numerics: ") + ex.what());
  }
  if (!(c.numerics.dr > 0.0)) throw ConfigError("numerics.dr must be positive");
  if (c.data.family == DataFamily::singular && c.data.delta < c.numerics.dr && e.kind != ExperimentKind::delta_sweep)
    throw ConfigError("problem.delta must be >= numerics.dr");
  if (c.data.family == DataFamily::singular && c.data.mode == SingularMode::split &&
      !(damping_value(c.model.damping, 0.0) > 0.0))
    throw ConfigError("problem.mode=split requires b(0) > 0 (problem.damping)");

  const bool sweep = e.kind == ExperimentKind::eps_sweep || e.kind == ExperimentKind::lambda_sweep ||
                     e.kind == ExperimentKind::delta_sweep;
  if (sweep) {
    if (e.values.empty()) throw ConfigError(kind + " requires experiment.values");
    for (double v : e.values)
      if (!(v > 0.0)) throw ConfigError("experiment.values must be positive");
  }
  switch (e.kind) {
    case ExperimentKind::eps_sweep:
      if (c.data.family != DataFamily::gaussian) throw ConfigError(kind + " requires problem.data=gaussian");
      if (classify_damping(c.model.damping) != DampingRegime::overdamping)
        throw ConfigError(kind + " requires overdamping problem.damping (1/b integrable)");
      if (n.kind != NonlinearityKind::zero && !(n.p >= 1.0 && n.p < p1))
        throw ConfigError(kind + " requires 1 <= problem.p < p1(d)");
      if (!detail::strictly_monotone(e.values, true)) throw ConfigError("experiment.values must be strictly increasing");
      break;
    case ExperimentKind::lambda_sweep:
      if (c.data.family != DataFamily::singular) throw ConfigError(kind + " requires problem.data=singular");
      if (!n.is_abs_power()) throw ConfigError(kind + " requires problem.nonlinearity=power_abs_plus|power_abs_minus");
      if (!(n.p > 1.0 && n.p <= p1)) throw ConfigError(kind + " requires 1 < problem.p <= p1(d)");
      if (!(c.data.k < 0.5 * d)) throw ConfigError(kind + " requires problem.k < d/2");
      if (!detail::strictly_monotone(e.values, true)) throw ConfigError("experiment.values must be strictly increasing");
      break;
    case ExperimentKind::delta_sweep: {
      if (c.data.family != DataFamily::singular) throw ConfigError(kind + " requires problem.data=singular");
      if (!n.is_abs_power()) throw ConfigError(kind + " requires problem.nonlinearity=power_abs_plus|power_abs_minus");
      if (d < 3) throw ConfigError(kind + " requires problem.d >= 3");
      if (!(n.p > p1)) throw ConfigError(kind + " requires problem.p > p1(d)");
      const double lo = (n.p + 1.0) / (n.p - 1.0);
      if (!(c.data.k > lo && c.data.k < 0.5 * d)) throw ConfigError(kind + " requires (p+1)/(p-1) < problem.k < d/2");
      if (!detail::strictly_monotone(e.values, false)) throw ConfigError("experiment.values must be strictly decreasing");
      if (c.numerics.dr > e.values.back() / 4.0 * (1.0 + 1e-12))
        throw ConfigError("numerics.dr must be <= smallest delta / 4");
      if (e.control_p && !(*e.control_p > 1.0 && *e.control_p <= p1))
        throw ConfigError("experiment.control_p must lie in (1, p1(d)]");
      break;
    }
    case ExperimentKind::convergence:
      if (c.data.family != DataFamily::gaussian) throw ConfigError(kind + " requires smooth problem.data=gaussian");
      if (e.levels < 3) throw ConfigError("experiment.levels must be >= 3");
      if (!(c.numerics.solver.sample_dt > 0.0)) throw ConfigError(kind + " requires numerics.sample_dt > 0");
      break;
    case ExperimentKind::transform_check:
      if (!(c.numerics.solver.sample_dt > 0.0)) throw ConfigError(kind + " requires numerics.sample_dt > 0");
      break;
    case ExperimentKind::testfn_audit:
      if (!n.is_abs_power()) throw ConfigError(kind + " requires problem.nonlinearity=power_abs_plus|power_abs_minus");
      for (double t : e.taus)
        if (!(t > 0.0)) throw ConfigError("experiment.tau must be positive");
      if (c.numerics.solver.t_max + 1e-12 < *std::max_element(e.taus.begin(), e.taus.end()))
        throw ConfigError("numerics.t_max must be >= the largest experiment.tau");
      if (!(c.numerics.solver.sample_dt > 0.0) ||
          c.numerics.solver.sample_dt > *std::min_element(e.taus.begin(), e.taus.end()) / 200.0 * (1.0 + 1e-12))
        throw ConfigError("numerics.sample_dt must be in (0, tau/200] for " + kind);
      break;
    case ExperimentKind::single: break;
  }
  if (c.numerics.radius && *c.numerics.radius + 1e-12 < causal_radius(c.data, c.numerics.solver.t_max))
    throw ConfigError("numerics.radius is below data support + t_max");
}

/// Values fixed by the caller (CLI subcommands) before defaults are derived.
struct Overrides {
  std::optional<ExperimentKind> kind;
  std::vector<double> taus;
};

inline ExperimentConfig parse_config(std::istream& in, const Overrides& over = {}) {
  detail::Tree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  detail::reject_unknown(tree);
  const detail::Reader r(tree);

  ExperimentConfig c;
  const double dd = r.number("problem", "d", 3.0);
  if (!(dd >= 1.0 && dd <= 64.0 && dd == std::floor(dd))) throw ConfigError("problem.d must be an integer in [1, 64]");
  const int d = static_cast<int>(dd);
  c.model.damping = detail::parse_damping(r);
  c.model.nonlinearity = detail::parse_nonlinearity(r);
  c.data = detail::parse_data(r, d, c.model.nonlinearity);

  auto& e = c.experiment;
  e.kind = over.kind ? *over.kind : detail::parse_kind(r.word("experiment", "kind", "single"));
  e.values = r.list("experiment", "values");
  if (const auto taus = r.list("experiment", "tau"); !taus.empty()) e.taus = taus;
  if (!over.taus.empty()) e.taus = over.taus;
  e.control_p = r.maybe_number("experiment", "control_p");
  e.levels = static_cast<int>(r.number("experiment", "levels", 3.0));
  const std::string wt = r.word("experiment", "write_traces", "true");
  if (wt != "true" && wt != "false") throw ConfigError("experiment.write_traces must be true or false");
  e.write_traces = wt == "true";
  auto& t = e.tol;
  t.ratio = r.number("experiment", "ratio_tolerance", t.ratio);
  t.slope = r.number("experiment", "slope_tolerance", t.slope);
  t.max_extensions = static_cast<int>(r.number("experiment", "max_extensions", t.max_extensions));
  t.chain_slack = r.number("experiment", "chain_slack", t.chain_slack);
  t.energy_slack = r.number("experiment", "energy_slack", t.energy_slack);
  t.residual = r.number("experiment", "residual_tolerance", t.residual);
  t.discrepancy = r.number("experiment", "discrepancy_tolerance", t.discrepancy);
  t.ratio_low = r.number("experiment", "ratio_low", t.ratio_low);
  t.ratio_high = r.number("experiment", "ratio_high", t.ratio_high);
  t.order_low = r.number("experiment", "order_low", t.order_low);
  t.order_high = r.number("experiment", "order_high", t.order_high);
  t.limit_fraction = r.number("experiment", "limit_fraction", t.limit_fraction);

  auto& nm = c.numerics;
  auto& s = nm.solver;
  nm.dr = r.number("numerics", "dr", nm.dr);
  nm.radius = r.maybe_number("numerics", "radius");
  s.cfl = r.number("numerics", "cfl", s.cfl);
  s.safety = r.number("numerics", "safety", s.safety);
  s.transform_safety = r.number("numerics", "transform_safety", s.transform_safety);
  s.t_max = r.number("numerics", "t_max", detail::default_t_max(e, c.data));
  s.blow_threshold = r.number("numerics", "blow_threshold", s.blow_threshold);
  s.dt_floor = r.number("numerics", "dt_floor", s.dt_floor);
  s.sample_dt = r.number("numerics", "sample_dt", detail::default_sample_dt(e, s.t_max, r.raw("numerics", "sample_stride").has_value()));
  const double stride = r.number("numerics", "sample_stride", 1.0);
  if (!(stride >= 1.0 && stride == std::floor(stride))) throw ConfigError("numerics.sample_stride must be a positive integer");
  s.sample_stride = static_cast<std::size_t>(stride);
  s.boundary_value = r.number("numerics", "boundary_value", s.boundary_value);
  const std::string scheme = r.word("numerics", "scheme", "exponential_verlet");
  if (scheme == "exponential_verlet")
    s.scheme = Scheme::exponential_verlet;
  else if (scheme == "strang")
    s.scheme = Scheme::strang;
  else
    throw ConfigError("numerics.scheme: expected exponential_verlet or strang");

  validate(c);
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text, const Overrides& over = {}) {
  std::istringstream in(text);
  return parse_config(in, over);
}

inline ExperimentConfig load_config(const std::string& path, const Overrides& over = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in, over);
}

/// Grid for a run: spacing dr, radius from config or the causal minimum.
inline RadialGrid make_grid(const ExperimentConfig& c, double dr, double t_max) {
  const double R = std::max(c.numerics.radius.value_or(0.0), causal_radius(c.data, t_max));
  return RadialGrid::covering(c.dimension(), dr, R);
}

}  // namespace dampwave::harness
