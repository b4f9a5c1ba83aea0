#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "dampwave/harness/config.hpp"
#include "dampwave/harness/experiments.hpp"

using namespace dampwave;
using namespace dampwave::harness;

namespace {

const char* const linear_single = R"(
[problem]
d = 3
damping = constant
mu = 1
nonlinearity = zero
data = gaussian
eps = 0.5
width = 1
[numerics]
dr = 0.1
t_max = 2
sample_dt = 0.1
)";

std::string with_kind(const std::string& base, const std::string& experiment) { return base + experiment; }

}  // namespace

TEST(Config, Defaults) {
  const auto c = parse_config_text("[problem]\n");
  EXPECT_EQ(c.experiment.kind, ExperimentKind::single);
  EXPECT_EQ(c.dimension(), 3);
  EXPECT_EQ(c.model.nonlinearity.kind, NonlinearityKind::power_abs_plus);
  EXPECT_EQ(c.model.nonlinearity.p, 3.0);
  EXPECT_EQ(c.data.family, DataFamily::gaussian);
  EXPECT_EQ(c.numerics.dr, 0.05);
  EXPECT_EQ(c.numerics.solver.t_max, 100.0);
  EXPECT_NEAR(c.numerics.solver.sample_dt, 0.1, 1e-15);
}

TEST(Config, RejectsUnknownKeysAndSections) {
  EXPECT_THROW(parse_config_text("[problem]\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[extras]\nd = 3\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[problem]\nd = 2.5\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[problem]\ndamping = cubic\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[numerics]\nscheme = leapfrog\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[numerics]\ndr = abc\n"), ConfigError);
}

TEST(Config, CrossFieldValidation) {
  // lambda sweep needs singular data.
  EXPECT_THROW(parse_config_text("[experiment]\nkind = lambda_sweep\nvalues = 1, 2\n"), ConfigError);
  // eps sweep needs overdamping.
  EXPECT_THROW(parse_config_text("[problem]\ndamping = constant\n[experiment]\nkind = eps_sweep\nvalues = 1e-3\n"),
               ConfigError);
  // delta sweep: dr above the smallest delta / 4.
  const std::string delta = R"(
[problem]
nonlinearity = power_abs_plus
p = 7
data = singular
k = 1.4
delta = 0.2
[numerics]
dr = 0.02
[experiment]
kind = delta_sweep
values = 0.2, 0.1, 0.05
)";
  EXPECT_THROW(parse_config_text(delta), ConfigError);
  // Cap below the grid spacing outside delta sweeps.
  EXPECT_THROW(parse_config_text("[problem]\ndata = singular\ndelta = 0.01\n[numerics]\ndr = 0.05\n"), ConfigError);
  // Audit sampling coarser than tau/200.
  EXPECT_THROW(parse_config_text("[numerics]\nsample_dt = 0.1\n[experiment]\nkind = testfn_audit\ntau = 1\n"),
               ConfigError);
}

TEST(Config, DeltaSweepAcceptsFineGrid) {
  const std::string delta = R"(
[problem]
nonlinearity = power_abs_plus
p = 7
data = singular
k = 1.4
delta = 0.2
[numerics]
dr = 0.0125
[experiment]
kind = delta_sweep
values = 0.2, 0.1, 0.05
)";
  const auto c = parse_config_text(delta);
  EXPECT_EQ(c.experiment.values.size(), 3u);
  EXPECT_EQ(c.numerics.solver.t_max, 4.0);
}

TEST(Config, ShippedConfigsParse) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(DAMPWAVE_CONFIG_DIR)) {
    if (e.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 6u);
  EXPECT_THROW(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST(Single, ZeroDataReachesHorizon) {
  const auto c = parse_config_text("[problem]\neps = 0\n[numerics]\nt_max = 1\n");
  const auto r = run(c);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.report["run"]["verdict"], "reached_horizon");
  EXPECT_EQ(r.report["run"]["Q_inf"], 0.0);
}

TEST(Single, DefocusingRunPasses) {
  const auto c = parse_config_text(
      "[problem]\ndamping = constant\nnonlinearity = power_signed_minus\neps = 1\n[numerics]\nt_max = 2\n");
  const auto r = run(c);
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.report["run"]["checks"]["energy_nonincreasing"].get<bool>());
}

TEST(Determinism, RepeatedAndParallelRunsAgree) {
  const std::string text = R"(
[problem]
damping = power
mu = 1
beta = -2
nonlinearity = power_abs_plus
eps = 1e-3
[numerics]
dr = 0.1
t_max = 5
[experiment]
kind = eps_sweep
values = 1e-3, 2e-3, 4e-3, 8e-3
)";
  const auto c = parse_config_text(text);
  const auto a = run(c), b = run(c), p = run(c, RunOptions{4});
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_EQ(a.report.dump(), p.report.dump());
  EXPECT_TRUE(a.pass);
}

TEST(EpsSweep, LargeFocusingDataIsFlagged) {
  const std::string text = R"(
[problem]
damping = power
mu = 1
beta = -2
nonlinearity = power_abs_plus
eps = 1e-3
width = 0.5
[numerics]
dr = 0.05
t_max = 3
[experiment]
kind = eps_sweep
values = 1e-3, 10
)";
  const auto r = run(parse_config_text(text), RunOptions{2});
  EXPECT_EQ(r.report["points"][0]["status"], "bounded");
  EXPECT_EQ(r.report["points"][1]["status"], "outside_small_data_regime");
}

TEST(LambdaSweep, SubThresholdPointsExcluded) {
  const std::string base = R"(
[problem]
damping = constant
nonlinearity = power_abs_plus
data = singular
k = 1
delta = 0.05
[numerics]
dr = 0.0125
t_max = 1
[experiment]
kind = lambda_sweep
)";
  const auto r = run(parse_config_text(base + "values = 1e-3, 100, 200, 400, 800\n"), RunOptions{4});
  EXPECT_EQ(r.report["sub_threshold_points"].size(), 1u);
  EXPECT_EQ(r.report["sub_threshold_points"][0]["lambda"], 1e-3);
  EXPECT_EQ(r.report["blow_up_points"].size(), 4u);
  EXPECT_FALSE(r.report["comparison"]["grid_adequate"].get<bool>());
  EXPECT_THROW(run(parse_config_text(base + "values = 1e-3, 2e-3\nmax_extensions = 1\n")), ExperimentError);
}

TEST(Convergence, LinearProblemIsSecondOrder) {
  const auto r = run(parse_config_text(with_kind(linear_single, "[experiment]\nkind = convergence\n")), RunOptions{3});
  EXPECT_TRUE(r.pass) << r.report.dump(2);
}

TEST(Convergence, DefocusingProblemIsSecondOrder) {
  const std::string text = R"(
[problem]
damping = constant
nonlinearity = power_signed_minus
eps = 1
width = 1
[numerics]
dr = 0.1
t_max = 2
sample_dt = 0.1
[experiment]
kind = convergence
)";
  const auto r = run(parse_config_text(text), RunOptions{3});
  EXPECT_TRUE(r.pass) << r.report["orders"].dump();
}

TEST(Convergence, BlowUpInvalidatesStudy) {
  const std::string text = R"(
[problem]
damping = constant
nonlinearity = power_abs_plus
eps = 20
width = 0.5
[numerics]
dr = 0.05
t_max = 2
sample_dt = 0.1
[experiment]
kind = convergence
)";
  EXPECT_THROW(run(parse_config_text(text)), ExperimentError);
}

TEST(Outputs, ReportAndTraceFiles) {
  const auto c = parse_config_text(linear_single);
  const auto r = run(c);
  const auto dir = std::filesystem::temp_directory_path() / "dampwave_test_outputs";
  std::filesystem::remove_all(dir);
  write_outputs(r, dir);
  std::ifstream rep(dir / "report.json");
  EXPECT_EQ(Json::parse(rep), r.report);
  std::ifstream csv(dir / "trace.csv");
  std::string head;
  std::getline(csv, head);
  EXPECT_EQ(head, trace_csv_header);
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_EQ(rows, r.traces.front().second.samples.size());
  std::filesystem::remove_all(dir);
}

TEST(Outputs, SnapshotRoundTrip) {
  State s;
  s.t = 1.25;
  s.u = {1.0, -2.5, 1e-300};
  s.w = {0.0, 3.0, -7.0};
  std::stringstream ss;
  write_snapshot(ss, s);
  const State back = read_snapshot(ss);
  EXPECT_EQ(back.t, s.t);
  EXPECT_EQ(back.u, s.u);
  EXPECT_EQ(back.w, s.w);
  std::stringstream truncated(ss.str().substr(0, 12));
  EXPECT_THROW(read_snapshot(truncated), std::runtime_error);
}

TEST(Outputs, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 6.02e23, -2.5e-300}) EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Pool, ResultsByIndexAndErrors) {
  const auto v = parallel_map(100, 8, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], i * i);
  EXPECT_THROW(parallel_map(10, 4,
                            [](std::size_t i) {
                              if (i == 3) throw std::runtime_error("x");
                              return i;
                            }),
               std::runtime_error);
}
