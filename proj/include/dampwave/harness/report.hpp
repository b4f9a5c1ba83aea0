#pragma once

// JSON encodings of configurations, verdicts and audit results. Every report
// carries the artifact version and the fully resolved configuration.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "dampwave/diagnostics.hpp"
#include "dampwave/exponents.hpp"
#include "dampwave/harness/config.hpp"
#include "dampwave/testfn.hpp"

namespace dampwave::harness {

inline constexpr const char* version = "0.1.0";

using Json = nlohmann::ordered_json;

/// Finite numbers as numbers, infinities as "inf"/"-inf", NaN as null.
inline Json number(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline Json to_json(const DampingSpec& s) {
  Json j;
  j["family"] = to_string(s.family);
  j["mu"] = s.mu;
  if (s.family == DampingFamily::power) j["beta"] = s.beta;
  if (s.family == DampingFamily::exponential) j["a"] = s.a;
  return j;
}

inline Json to_json(const NonlinearitySpec& s) {
  return Json{{"kind", to_string(s.kind)}, {"p", s.p}, {"c_n", s.c_n}};
}

inline Json to_json(const InitialDataSpec& s) {
  Json j;
  j["d"] = s.d;
  if (s.family == DataFamily::gaussian) {
    j["family"] = "gaussian";
    j["eps"] = s.eps;
    j["eps1"] = s.eps1;
    j["width"] = s.width;
  } else {
    j["family"] = "singular";
    j["lambda"] = s.lambda;
    j["k"] = s.k;
    j["delta"] = s.delta;
    j["mode"] = s.mode == SingularMode::split ? "split" : "in_u1";
    j["sign"] = s.sign;
  }
  return j;
}

inline Json to_json(const SolverConfig& s) {
  return Json{{"cfl", s.cfl},
              {"safety", s.safety},
              {"transform_safety", s.transform_safety},
              {"t_max", s.t_max},
              {"blow_threshold", s.blow_threshold},
              {"dt_floor", s.dt_floor},
              {"sample_dt", s.sample_dt},
              {"sample_stride", s.sample_stride},
              {"boundary_value", s.boundary_value},
              {"scheme", s.scheme == Scheme::strang ? "strang" : "exponential_verlet"}};
}

inline Json to_json(const Tolerances& t) {
  return Json{{"ratio_tolerance", t.ratio},       {"slope_tolerance", t.slope},
              {"max_extensions", t.max_extensions}, {"chain_slack", t.chain_slack},
              {"energy_slack", t.energy_slack},   {"residual_tolerance", t.residual},
              {"discrepancy_tolerance", t.discrepancy}, {"ratio_low", t.ratio_low},
              {"ratio_high", t.ratio_high},       {"order_low", t.order_low},
              {"order_high", t.order_high},       {"limit_fraction", t.limit_fraction}};
}

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["problem"] = Json{{"damping", to_json(c.model.damping)},
                      {"nonlinearity", to_json(c.model.nonlinearity)},
                      {"data", to_json(c.data)}};
  Json n;
  n["dr"] = c.numerics.dr;
  n["radius"] = c.numerics.radius ? Json(*c.numerics.radius) : Json(nullptr);
  n["solver"] = to_json(c.numerics.solver);
  j["numerics"] = n;
  const auto& e = c.experiment;
  j["experiment"] = Json{{"kind", to_string(e.kind)},
                         {"values", e.values},
                         {"tau", e.taus},
                         {"control_p", e.control_p ? Json(*e.control_p) : Json(nullptr)},
                         {"levels", e.levels},
                         {"write_traces", e.write_traces},
                         {"tolerances", to_json(e.tol)}};
  return j;
}

inline Json to_json(const Termination& t) {
  Json j;
  j["verdict"] = to_string(t.outcome);
  j["trigger"] = to_string(t.trigger);
  j["t_star"] = t.t_star;
  j["bracket"] = Json::array({t.t_star, t.t_upper});
  return j;
}

inline Json to_json(const ChainPoint& p) {
  return Json{{"time", p.time}, {"lhs", p.lhs}, {"rhs", p.rhs}, {"margin", p.margin}, {"pass", p.pass}};
}

inline Json to_json(const ChainCheck& c, bool with_points) {
  Json j{{"C1", c.c1}, {"C2", c.c2}, {"slack", c.slack}, {"pass", c.pass}, {"min_margin", number(c.min_margin)}};
  if (with_points) {
    Json pts = Json::array();
    for (const auto& p : c.points) pts.push_back(to_json(p));
    j["points"] = pts;
  }
  return j;
}

inline Json to_json(const TestFnReport& r) {
  Json j;
  j["tau"] = r.tau;
  j["l"] = r.l;
  j["I"] = r.I;
  j["J"] = r.J;
  j["K1"] = r.K.k1;
  j["K2"] = r.K.k2;
  j["K3"] = r.K.k3;
  j["K4"] = r.K.k4;
  j["residual"] = r.residual;
  j["C3star"] = r.c3star;
  j["upper_bound_rhs"] = r.upper_bound_rhs;
  j["lower_bound"] = r.lower_bound ? Json(*r.lower_bound) : Json(nullptr);
  j["lambda0"] = r.lambda0 ? Json(*r.lambda0) : Json(nullptr);
  j["max_sample_gap"] = r.max_gap;
  j["pass"] = Json{{"upper_bound", r.upper_bound_pass},
                   {"lower_bound", r.lower_bound_pass ? Json(*r.lower_bound_pass) : Json(nullptr)},
                   {"stride", r.stride_ok}};
  return j;
}

inline Json to_json(const ExponentReport& r) {
  Json j;
  j["d"] = r.d;
  j["p1"] = number(r.p1);
  j["pF"] = r.pF;
  j["pS"] = r.pS ? Json(*r.pS) : Json(nullptr);
  j["regime"] = to_string(r.regime);
  j["pc"] = r.pc.value ? Json(*r.pc.value) : Json(nullptr);
  j["pc_status"] = r.pc.status;
  j["prediction"] = to_string(r.prediction);
  return j;
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

}  // namespace dampwave::harness
