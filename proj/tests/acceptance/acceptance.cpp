// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
//
//   acceptance [--jobs N] [--expect-fail K ...]
//
// Exit status is 0 when every criterion's outcome matches the expectation
// (PASS unless listed in --expect-fail), 1 otherwise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dampwave/dampwave.hpp"
#include "dampwave/harness/experiments.hpp"

#ifndef DAMPWAVE_CONFIG_DIR
#define DAMPWAVE_CONFIG_DIR "configs"
#endif

namespace dw = dampwave;
namespace dh = dampwave::harness;

namespace {

// Pinned tolerances.
constexpr double quad_residual_tol = 1e-12;
constexpr double exponent_tol = 1e-14;
constexpr double energy_rel_tol = 1e-4;
constexpr double ratio_low = 3.0;  // 4 +- 25%
constexpr double ratio_high = 5.0;
constexpr double q_spread_tol = 0.15;
constexpr double energy_slack = 1e-3;
constexpr double slope_tol = 0.2;
constexpr double discrepancy_tol = 1e-2;
constexpr double residual_tol = 1e-2;
constexpr double upper_bound_slack = 1.05;
constexpr double lifespan_cap = 2.0;
constexpr double ode_tol = 1e-6;
constexpr double ode_dt = 1e-3;
constexpr double laplacian_tol = 1e-9;
constexpr double causality_tol = 1e-10;

struct Line {
  bool pass = false;
  std::string detail;
};

std::string config_path(const std::string& name) { return std::string(DAMPWAVE_CONFIG_DIR) + "/" + name; }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

bool in_ratio(double r) { return r >= ratio_low && r <= ratio_high; }

// --- 1 ---------------------------------------------------------------------------

Line exponent_table() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = dw::energy_critical(3) == 5.0 && dw::energy_critical(4) == 3.0 &&
            std::isinf(dw::energy_critical(1)) && std::isinf(dw::energy_critical(2));
  for (int d = 1; d <= 6; ++d) ok = ok && std::abs(dw::fujita(d) - (1.0 + 2.0 / d)) <= exponent_tol;
  const auto s3 = dw::strauss(3);
  const auto s2 = dw::strauss(2);
  ok = ok && std::abs(s3.value - (1.0 + std::sqrt(2.0))) <= exponent_tol &&
       std::abs(s2.value - (3.0 + std::sqrt(17.0)) / 2.0) <= exponent_tol;
  double worst = 0.0;
  for (int d = 2; d <= 20; ++d) {
    const auto s = dw::strauss(d);
    const double p = s.value;
    worst = std::max(worst, std::abs((d - 1.0) * p * p - (d + 1.0) * p - 2.0));
  }
  ok = ok && worst <= quad_residual_tol;
  bool ordered = true;
  for (int d = 3; d <= 20; ++d)
    ordered = ordered && dw::fujita(d) < dw::strauss(d).value && dw::strauss(d).value < dw::energy_critical(d);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && ordered && secs < 1.0;
  return {ok, "max quadratic residual " + fmt(worst) + ", ordering " + (ordered ? "ok" : "broken") + ", " +
                  fmt(secs) + " s"};
}

// --- 2 and 7 ---------------------------------------------------------------------

struct Refinement {
  dh::LevelResult base, fine;
  double e0 = 0.0;
};

Refinement refinement_pair(unsigned jobs) {
  const auto c = dh::load_config(config_path("energy_identity.ini"));
  auto lv = dh::parallel_map(2, jobs, [&](std::size_t i) { return dh::run_level(c, static_cast<int>(i)); });
  Refinement r{std::move(lv[0]), std::move(lv[1]), 0.0};
  r.e0 = dw::energy_trace(r.base.u, c.model).samples.front().energy;
  return r;
}

Line energy_identity(const Refinement& r) {
  const double bound = energy_rel_tol * std::max(1.0, r.e0);
  const double ratio = r.base.energy_residual / r.fine.energy_residual;
  const bool ok = r.base.energy_residual <= bound && in_ratio(ratio);
  return {ok, "residual " + fmt(r.base.energy_residual) + " (bound " + fmt(bound) + "), refined " +
                  fmt(r.fine.energy_residual) + ", ratio " + fmt(ratio)};
}

Line transform_equivalence(const Refinement& r) {
  const double ratio = r.base.discrepancy / r.fine.discrepancy;
  const bool ok = r.base.discrepancy <= discrepancy_tol && in_ratio(ratio);
  return {ok, "discrepancy " + fmt(r.base.discrepancy) + ", refined " + fmt(r.fine.discrepancy) + ", ratio " +
                  fmt(ratio)};
}

// --- 3 ---------------------------------------------------------------------------

Line small_data_boundedness(unsigned jobs) {
  auto c = dh::load_config(config_path("small_data_overdamping.ini"));
  c.experiment.tol.ratio = q_spread_tol;
  const auto res = dh::run(c, {jobs});
  bool horizon = true, chain = true;
  for (const auto& p : res.report["points"]) {
    horizon = horizon && p["status"] == "bounded";
    chain = chain && p.contains("l2_chain") && p["l2_chain"]["pass"].get<bool>();
  }
  const double spread = res.report["Q_over_eps_spread"].get<double>();
  const bool ok = horizon && chain && spread <= q_spread_tol;
  return {ok, std::string("all reached horizon: ") + (horizon ? "yes" : "no") + ", Q/eps spread " + fmt(spread) +
                  ", L2 chain " + (chain ? "holds at every sample" : "violated")};
}

// --- 4 ---------------------------------------------------------------------------

Line defocusing_boundedness() {
  auto c = dh::load_config(config_path("defocusing_large.ini"));
  c.experiment.tol.energy_slack = energy_slack;
  const dh::RunResult r = dh::run_one(c, c.model, c.data, c.numerics.dr, c.numerics.solver);
  const double e0 = r.energy.samples.front().energy;
  const double rise = dw::energy_increase(r.energy);
  const bool horizon = !r.trace.termination.blew_up();
  const bool ok = horizon && rise <= energy_slack * e0;
  return {ok, std::string("reached horizon: ") + (horizon ? "yes" : "no") + ", max energy rise " + fmt(rise) +
                  " (slack " + fmt(energy_slack * e0) + ")"};
}

// --- 5 ---------------------------------------------------------------------------

Line lifespan_scaling(unsigned jobs) {
  auto c = dh::load_config(config_path("lifespan_lambda.ini"));
  c.experiment.tol.slope = slope_tol;
  const auto res = dh::run(c, {jobs});
  const auto& fit = res.report["fit"];
  const auto& cmp = res.report["comparison"];
  const double slope = fit["slope"].get<double>();
  const double bound = cmp["lifespan_exponent_bound"].get<double>();
  return {res.pass, "slope " + fmt(slope) + " over " + fmt(fit["decades"].get<double>()) + " decades (need <= " +
                        fmt(bound + slope_tol) + "), t_star decreasing: " +
                        (cmp["t_star_decreasing"].get<bool>() ? "yes" : "no")};
}

// --- 6 ---------------------------------------------------------------------------

Line nonexistence_shadow(unsigned jobs) {
  const auto c = dh::load_config(config_path("nonexistence_delta.ini"));
  const auto res = dh::run(c, {jobs});
  std::ostringstream os;
  os << "t_star(delta):";
  for (const auto& p : res.report["points"]) os << ' ' << fmt(p["t_mid"].get<double>());
  os << "; control p=3 limit " << fmt(res.report["control"]["extrapolated_limit"].get<double>());
  return {res.pass, os.str()};
}

// --- 8 ---------------------------------------------------------------------------

Line weak_form_audit(unsigned jobs) {
  auto smooth = dh::load_config(config_path("weak_form_audit.ini"));
  smooth.experiment.tol.residual = residual_tol;
  const auto a = dh::run(smooth, {jobs});
  const auto& s1 = a.report["audits"][0];
  const double res = s1["residual"].get<double>();
  const double ratio = s1["refinement_ratio"].get<double>();
  const bool weak_ok = res <= residual_tol && in_ratio(ratio);

  const auto sing = dh::load_config(config_path("singular_audit.ini"));
  const auto b = dh::run(sing, {jobs});
  bool upper_ok = true, lower_ok = true;
  int audited = 0;
  for (const auto& t : b.report["audits"]) {
    if (t["status"] != "audited") {
      upper_ok = lower_ok = false;
      continue;
    }
    ++audited;
    upper_ok = upper_ok && t["J"].get<double>() <= upper_bound_slack * t["upper_bound_rhs"].get<double>();
    lower_ok = lower_ok && t["pass"]["lower_bound"].get<bool>();
  }
  upper_ok = upper_ok && audited == 3;

  // lambda = 10 lambda_0 must blow up by t = 2.
  auto big = dh::load_config(config_path("lifespan_lambda.ini"));
  const double lambda0 = dw::lambda_threshold(3, big.model.nonlinearity.p, big.data.k, big.model.damping);
  big.data.lambda = 10.0 * lambda0;
  dw::SolverConfig cfg = big.numerics.solver;
  cfg.t_max = lifespan_cap;
  cfg.sample_dt = 0.0;
  cfg.sample_stride = 1000;
  const auto tr = dw::solve(big.model, big.data, dh::make_grid(big, big.numerics.dr, cfg.t_max), cfg);
  const bool short_life = tr.termination.blew_up() && tr.termination.t_upper <= lifespan_cap;

  const bool ok = weak_ok && upper_ok && lower_ok && short_life;
  return {ok, "residual " + fmt(res) + ", ratio " + fmt(ratio) + "; J upper bound at tau 0.5,1,2: " +
                  (upper_ok ? "holds" : "violated") + "; J lower bound: " + (lower_ok ? "holds" : "violated") +
                  "; lambda=10 lambda0=" + fmt(10.0 * lambda0) + " t_star " + fmt(tr.termination.t_star)};
}

// --- 9 ---------------------------------------------------------------------------

Line solver_oracles() {
  const dw::Model linear{dw::DampingSpec::constant(1.0), dw::NonlinearitySpec::make(dw::NonlinearityKind::zero, 1.0)};
  const double dr = 0.05;
  const dw::RadialGrid g(3, dr, 100);
  dw::SolverConfig cfg;
  cfg.cfl = ode_dt / dr;
  cfg.safety = 1.0;
  cfg.t_max = 2.0;

  // u = c
  const double c = 0.7;
  dw::State s;
  s.u.assign(g.size(), c);
  s.w.assign(g.size(), 0.0);
  cfg.boundary_value = c;
  const auto a = dw::solve_from(linear, s, g, cfg);
  double err_const = 0.0;
  for (const auto& st : a.samples)
    for (double x : st.u) err_const = std::max(err_const, std::abs(x - c));

  // u = c (1 - e^{-t}), checked inside the light cone of the boundary.
  s.u.assign(g.size(), 0.0);
  s.w.assign(g.size(), c);
  cfg.boundary_value = 0.0;
  const auto b = dw::solve_from(linear, s, g, cfg);
  double err_relax = 0.0;
  for (const auto& st : b.samples) {
    const double exact = c * (1.0 - std::exp(-st.t));
    for (std::size_t j = 0; j < g.size(); ++j)
      if (g.center(j) < g.radius() - st.t - 1.0) err_relax = std::max(err_relax, std::abs(st.u[j] - exact));
  }

  // Laplacian of r^2 is 2d.
  double err_lap = 0.0;
  for (int d = 1; d <= 5; ++d) {
    const dw::RadialGrid q(d, 0.1, 40);
    std::vector<double> u(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) u[j] = q.center(j) * q.center(j);
    const double ghost = std::pow(q.radius() + 0.5 * q.spacing(), 2);
    const auto L = dw::radial_laplacian(q, u, ghost);
    for (double x : L) err_lap = std::max(err_lap, std::abs(x - 2.0 * d));
  }

  // Boundary perturbation leaves the causal region untouched.
  const dw::Model cubic{dw::DampingSpec::constant(1.0),
                        dw::NonlinearitySpec::make(dw::NonlinearityKind::power_abs_plus, 3.0)};
  const auto data = dw::InitialDataSpec::gaussian(3, 0.5, 0.5, 0.0);
  dw::SolverConfig cc;
  cc.t_max = 2.0;
  cc.sample_dt = 0.5;
  const auto cg = dw::RadialGrid::covering(3, 0.05, dw::causal_radius(data, cc.t_max) + 2.0);
  const auto u0 = dw::solve(cubic, data, cg, cc);
  cc.boundary_value = 1.0;
  const auto u1 = dw::solve(cubic, data, cg, cc);
  double err_causal = 0.0;
  for (std::size_t i = 0; i < u0.samples.size() && i < u1.samples.size(); ++i) {
    const double t = u0.samples[i].t;
    for (std::size_t j = 0; j < cg.size(); ++j)
      if (cg.center(j) < cg.radius() - t - 1.0)
        err_causal = std::max(err_causal, std::abs(u0.samples[i].u[j] - u1.samples[i].u[j]));
  }

  const bool ok = err_const <= ode_tol && err_relax <= ode_tol && err_lap <= laplacian_tol &&
                  err_causal <= causality_tol && u0.samples.size() == u1.samples.size();
  return {ok, "ode c: " + fmt(err_const) + ", ode c(1-e^-t): " + fmt(err_relax) + ", laplacian r^2: " +
                  fmt(err_lap) + ", causal region change: " + fmt(err_causal)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-9"};
  unsigned jobs = 4;
  std::vector<int> expect_fail;
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 256u));
  app.add_option("--expect-fail", expect_fail, "Criteria known not to pass");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> expected(expect_fail.begin(), expect_fail.end());

  std::vector<std::pair<std::string, std::function<Line()>>> criteria;
  std::optional<Refinement> refinement;
  auto pair = [&]() -> const Refinement& {
    if (!refinement) refinement = refinement_pair(jobs);
    return *refinement;
  };
  criteria.emplace_back("exponent golden table", exponent_table);
  criteria.emplace_back("energy identity", [&] { return energy_identity(pair()); });
  criteria.emplace_back("overdamping small-data boundedness", [&] { return small_data_boundedness(jobs); });
  criteria.emplace_back("defocusing large-data boundedness", defocusing_boundedness);
  criteria.emplace_back("blow-up lifespan scaling", [&] { return lifespan_scaling(jobs); });
  criteria.emplace_back("non-existence shadow", [&] { return nonexistence_shadow(jobs); });
  criteria.emplace_back("transform equivalence", [&] { return transform_equivalence(pair()); });
  criteria.emplace_back("weak-form audit", [&] { return weak_form_audit(jobs); });
  criteria.emplace_back("solver oracles", solver_oracles);

  int mismatches = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Line line;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      line = criteria[i].second();
    } catch (const std::exception& e) {
      line = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool want_pass = !expected.contains(id);
    if (line.pass != want_pass) ++mismatches;
    std::cout << "criterion " << id << ' ' << (line.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << line.detail << " [" << fmt(secs) << " s]" << (want_pass ? "" : " (expected failure)") << std::endl;
  }
  return mismatches == 0 ? 0 : 1;
}
