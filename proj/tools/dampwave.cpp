// dampwave: command-line front end of the harness.
//
// Exit codes: 0 pass, 1 a claim check failed, 2 configuration error,
// 3 runtime error.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dampwave/harness/experiments.hpp"

namespace dh = dampwave::harness;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

struct Global {
  std::string out = "out";
  unsigned jobs = 1;
  std::string format = "json";
};

/// "constant:MU", "power:MU,BETA", "exponential:MU,A" or "zero".
dampwave::DampingSpec parse_damping_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string fam = text.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) args.push_back(dh::detail::Reader::parse_number("damping", "spec", item));
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n) throw dh::ConfigError("--damping " + text + ": expected " + std::to_string(n) + " parameter(s)");
  };
  try {
    if (fam == "zero") {
      need(0);
      return dampwave::DampingSpec::zero();
    }
    if (fam == "constant") {
      need(1);
      return dampwave::DampingSpec::constant(args[0]);
    }
    if (fam == "power") {
      need(2);
      return dampwave::DampingSpec::power(args[0], args[1]);
    }
    if (fam == "exponential") {
      need(2);
      return dampwave::DampingSpec::exponential(args[0], args[1]);
    }
  } catch (const std::invalid_argument& e) {
    throw dh::ConfigError(std::string("--damping: ") + e.what());
  }
  throw dh::ConfigError("--damping: unknown family '" + fam + "'");
}

void flatten(const dh::Json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, os);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), os);
  } else {
    os << prefix << ',' << j.dump() << '\n';
  }
}

void emit(const dh::Json& report, const std::string& format) {
  if (format == "csv") {
    std::cout << "key,value\n";
    flatten(report, "", std::cout);
  } else {
    std::cout << report.dump(2) << '\n';
  }
}

int run_experiment(const std::string& path, const dh::Overrides& over, const Global& g,
                   const std::vector<dh::ExperimentKind>& allowed = {}) {
  const dh::ExperimentConfig cfg = dh::load_config(path, over);
  if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), cfg.experiment.kind) == allowed.end())
    throw dh::ConfigError("experiment.kind=" + dh::to_string(cfg.experiment.kind) + " is not a sweep");
  const dh::ExperimentResult r = dh::run(cfg, {g.jobs});
  dh::write_outputs(r, g.out);
  emit(r.report, g.format);
  return r.pass ? exit_pass : exit_fail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for u_tt - Lap u + b(t) u_t = N(u)", "dampwave"};
  app.set_version_flag("--version", std::string(dh::version));
  app.require_subcommand(1);

  Global g;
  app.add_option("--out", g.out, "Output directory for report.json and trace CSVs");
  app.add_option("--jobs", g.jobs, "Worker threads for sweep points")->check(CLI::Range(1u, 1024u));
  app.add_option("--format", g.format, "Report format printed to stdout")->check(CLI::IsMember({"csv", "json"}));

  std::string cfg_path;
  auto* solve = app.add_subcommand("solve", "Single run of the configured problem");
  solve->add_option("config", cfg_path, "Config file")->required();

  auto* sweep = app.add_subcommand("sweep", "eps, lambda or delta sweep as configured");
  sweep->add_option("config", cfg_path, "Config file")->required();

  int d = 3;
  double p = 3.0;
  double k = 1.0;
  std::string damping = "constant:1";
  std::string data = "small";
  auto* classify = app.add_subcommand("classify", "Critical exponents, damping regime and predicted outcome");
  classify->add_option("--d", d, "Spatial dimension")->required()->check(CLI::Range(1, 64));
  classify->add_option("--p", p, "Nonlinearity exponent")->required();
  classify->add_option("--damping", damping, "constant:MU | power:MU,BETA | exponential:MU,A | zero")->required();
  classify->add_option("--data", data, "Data class")->check(CLI::IsMember({"small", "large", "singular"}));
  classify->add_option("--k", k, "Singularity exponent (singular data)");

  std::vector<double> taus;
  auto* audit = app.add_subcommand("audit-testfn", "Weak-form and test-function audit of a run");
  audit->add_option("config", cfg_path, "Config file")->required();
  audit->add_option("--tau", taus, "Test-function scale(s)")->required();

  auto* tcheck = app.add_subcommand("transform-check", "u-solver against the transformed v-solver");
  tcheck->add_option("config", cfg_path, "Config file")->required();

  auto* converge = app.add_subcommand("converge", "Refinement study of the configured problem");
  converge->add_option("config", cfg_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    if (classify->parsed()) {
      const auto spec = parse_damping_spec(damping);
      dampwave::DataClass dc;
      dc.kind = data == "singular" ? dampwave::DataClass::Kind::singular
                : data == "large"  ? dampwave::DataClass::Kind::large_smooth
                                   : dampwave::DataClass::Kind::small_smooth;
      dc.k = k;
      const auto rep = dampwave::exponent_report(d, p, spec, dc);
      emit(dh::to_json(rep), g.format);
      return exit_pass;
    }
    dh::Overrides over;
    if (solve->parsed()) {
      over.kind = dh::ExperimentKind::single;
      return run_experiment(cfg_path, over, g);
    }
    if (sweep->parsed())
      return run_experiment(cfg_path, over, g,
                            {dh::ExperimentKind::eps_sweep, dh::ExperimentKind::lambda_sweep,
                             dh::ExperimentKind::delta_sweep});
    if (audit->parsed()) {
      over.kind = dh::ExperimentKind::testfn_audit;
      over.taus = taus;
      return run_experiment(cfg_path, over, g);
    }
    if (tcheck->parsed()) {
      over.kind = dh::ExperimentKind::transform_check;
      return run_experiment(cfg_path, over, g);
    }
    if (converge->parsed()) {
      over.kind = dh::ExperimentKind::convergence;
      return run_experiment(cfg_path, over, g);
    }
  } catch (const dh::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_runtime;
  }
  return exit_runtime;
}
