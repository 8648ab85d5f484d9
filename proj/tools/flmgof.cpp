#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flmgof/flmgof.hpp"

namespace {

using namespace flmgof;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::numeric:
    case ErrorKind::singular:
      return 3;
    default:
      return 2;
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::parse, "cannot write " + path);
  out << text;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::parse, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
}

void check_format(const std::string& f) {
  require(f == "json" || f == "csv", ErrorKind::config,
          "--format must be json or csv");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct CommonFlags {
  std::string hypothesis;
  std::string estimator;
  std::string p;
  std::optional<int> order;
  std::optional<int> B;
  std::optional<std::uint64_t> seed;
  std::vector<double> alpha;
  std::optional<bool> center;
  std::string out;
  std::string format = "json";
};

void add_model_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--hypothesis", f.hypothesis, "simple or composite");
  cmd->add_option("--estimator", f.estimator, "bspline, fourier, fpc or fpls");
  cmd->add_option("--p", f.p,
                  "auto-gcv, auto-gcv-linear, auto-pcv, auto-bic or an integer");
  cmd->add_option("--order", f.order, "B-spline order");
  cmd->add_option("--B", f.B, "bootstrap replicates");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_flag("--center,!--no-center", f.center,
                "center curves and responses before testing");
}

void apply(const CommonFlags& f, RunConfig& c) {
  if (!f.hypothesis.empty()) c.hypothesis = parse_hypothesis(f.hypothesis);
  if (!f.estimator.empty()) c.estimator = f.estimator;
  if (!f.p.empty()) c.p = f.p;
  if (f.order) c.order = *f.order;
  if (f.B) c.B = *f.B;
  if (f.seed) c.seed = *f.seed;
  if (!f.alpha.empty()) c.alpha = f.alpha;
  if (f.center) c.center = f.center;
}

// test -----------------------------------------------------------------------

struct TestFlags {
  CommonFlags common;
  std::string config;
  std::string curves;
  std::string response;
  std::string beta0;
  std::string method;
  std::optional<double> bandwidth;
  bool timings = false;
};

int run_test_command(const TestFlags& f) {
  check_format(f.common.format);
  RunConfig cfg;
  if (!f.config.empty()) {
    const Json j = read_json(f.config);
    cfg = run_config_from_json(j.contains("config") ? j.at("config") : j);
  }
  apply(f.common, cfg);
  if (!f.curves.empty()) cfg.curves = f.curves;
  if (!f.response.empty()) cfg.response = f.response;
  if (!f.beta0.empty()) cfg.beta0 = f.beta0;
  if (!f.method.empty()) cfg.method = f.method;
  if (f.bandwidth) cfg.bandwidth = f.bandwidth;

  const auto t0 = std::chrono::steady_clock::now();
  TestReport report = run_test(cfg);
  if (f.timings) report.timings = Json{{"total_seconds", seconds_since(t0)}};
  write_output(f.common.out, f.common.format == "json"
                                 ? to_json(report).dump(2) + "\n"
                                 : report_csv(report));
  return 0;
}

// simulate -------------------------------------------------------------------

struct SimulateFlags {
  CommonFlags common;
  std::vector<std::string> scenarios;
  std::vector<std::string> methods = {"pcvm"};
  std::vector<std::string> estimators;
  std::vector<int> sizes;
  std::optional<int> M;
  std::string ou_start = "stationary";
  std::optional<int> grid_points;
  bool paper_scale = false;
};

int run_simulate_command(const SimulateFlags& f) {
  check_format(f.common.format);
  require(!f.scenarios.empty(), ErrorKind::config, "--scenario is required");
  PowerStudyConfig cfg;
  for (const auto& s : f.scenarios) cfg.scenarios.push_back(parse_scenario(s));
  if (f.paper_scale) {
    cfg.M = 1000;
    cfg.B = 1000;
    cfg.sample_sizes = {100};
  }
  if (f.M) cfg.M = *f.M;
  if (f.common.B) cfg.B = *f.common.B;
  if (f.common.seed) cfg.seed = *f.common.seed;
  if (!f.sizes.empty()) cfg.sample_sizes = f.sizes;
  if (!f.common.alpha.empty()) cfg.alphas = f.common.alpha;
  cfg.center = f.common.center;
  cfg.ou.start = parse_ou_start(f.ou_start);
  if (f.grid_points) cfg.grid = Grid::uniform(0.0, 1.0, *f.grid_points);

  const std::vector<std::string> estimators =
      f.estimators.empty() ? std::vector<std::string>{"bspline", "fpc", "fpls"}
                           : f.estimators;
  for (const auto& m : f.methods) {
    if (m == "pcvm") {
      for (const auto& e : estimators) {
        StudyMethod sm;
        sm.test = StudyTest::pcvm;
        sm.basis = default_basis_config(parse_basis_kind(e));
        if (f.common.order) sm.basis.order = *f.common.order;
        if (!f.common.p.empty())
          sm.basis.dimension = parse_dimension_policy(f.common.p);
        cfg.methods.push_back(sm);
      }
    } else if (m == "ftest") {
      cfg.methods.push_back({StudyTest::f_test, {}, {}});
    } else if (m == "delsol") {
      cfg.methods.push_back({StudyTest::delsol, {}, {}});
    } else {
      fail(ErrorKind::config, "unknown method '" + m + "'");
    }
  }
  const PowerTable table = run_power_study(cfg);
  write_output(f.common.out, f.common.format == "json"
                                 ? to_json(table).dump(2) + "\n"
                                 : power_table_csv(table));
  return 0;
}

// diagnose -------------------------------------------------------------------

struct DiagnoseFlags {
  CommonFlags common;
  std::string curves;
  std::string response;
  int G = 200;
  int B = 100;
};

int run_diagnose_command(const DiagnoseFlags& f) {
  RunConfig cfg;
  apply(f.common, cfg);
  require(!f.curves.empty() && !f.response.empty(), ErrorKind::config,
          "--curves and --response are required");
  const auto [xs, ys] = load_dataset(f.curves, f.response);
  const int B = f.common.B.value_or(f.B);
  const bool to_stdout = f.common.out.empty() || f.common.out == "-";
  emit_diagnostic(cfg, xs, ys, f.G, B, to_stdout ? "/dev/stdout" : f.common.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goodness-of-fit tests for the functional linear model"};
  app.require_subcommand(1);

  TestFlags tf;
  CLI::App* test = app.add_subcommand("test", "run a test on curve/response files");
  add_model_flags(test, tf.common);
  test->add_option("--config", tf.config, "JSON run config or previous report");
  test->add_option("--curves", tf.curves, "curves CSV (header row is the grid)");
  test->add_option("--response", tf.response, "response CSV (one column)");
  test->add_option("--beta0", tf.beta0, "simple-null beta on the grid (one column)");
  test->add_option("--method", tf.method, "pcvm, ftest or delsol");
  test->add_option("--bandwidth", tf.bandwidth, "fixed Delsol bandwidth");
  test->add_option("--alpha", tf.common.alpha, "significance levels")->delimiter(',');
  test->add_option("--out", tf.common.out, "output path (default stdout)");
  test->add_option("--format", tf.common.format, "json or csv");
  test->add_flag("--timings", tf.timings, "include wall-clock timings");

  SimulateFlags sf;
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo size/power table");
  add_model_flags(sim, sf.common);
  sim->add_option("--scenario", sf.scenarios,
                  "e.g. simple:H0, simple:H3,3, composite:H1,0/exp")
      ->take_all();
  sim->add_option("--method", sf.methods, "pcvm, ftest, delsol")->delimiter(',');
  sim->add_option("--estimators", sf.estimators, "estimators for pcvm rows")
      ->delimiter(',');
  sim->add_option("--n", sf.sizes, "sample sizes")->delimiter(',');
  sim->add_option("--M", sf.M, "Monte Carlo datasets per cell");
  sim->add_option("--ou-start", sf.ou_start, "stationary or anchored");
  sim->add_option("--grid-points", sf.grid_points, "points on [0, 1]");
  sim->add_flag("--paper-scale", sf.paper_scale, "M = B = 1000, n = 100");
  sim->add_option("--alpha", sf.common.alpha, "significance levels")->delimiter(',');
  sim->add_option("--out", sf.common.out, "output path (default stdout)");
  sim->add_option("--format", sf.common.format, "json or csv");

  DiagnoseFlags df;
  CLI::App* diag = app.add_subcommand("diagnose", "residual-process trajectories");
  add_model_flags(diag, df.common);
  diag->add_option("--curves", df.curves, "curves CSV");
  diag->add_option("--response", df.response, "response CSV");
  diag->add_option("--G", df.G, "number of projections");
  diag->add_option("--out", df.common.out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*test) return run_test_command(tf);
    if (*sim) return run_simulate_command(sf);
    if (*diag) return run_diagnose_command(df);
  } catch (const Error& e) {
    std::cerr << "flmgof: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "flmgof: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
