#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../support/fixtures.hpp"

using namespace flmgof;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("flmgof_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(file(name)) << text;
    return file(name);
  }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::numeric;
}

template <class F>
std::string message_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  ADD_FAILURE() << "no error raised";
  return {};
}

}  // namespace

TEST(Csv, LoadsSmallSample) {
  TempDir d;
  const auto path = d.write("x.csv", "0,0.5,0.75,1\n1,2,3,4\n5,6,7,8\n\n9,10,11,12\n");
  const FunctionalSample xs = load_curves(path);
  EXPECT_EQ(xs.size(), 3);
  EXPECT_EQ(xs.grid().size(), 4u);
  EXPECT_EQ(xs.values()(2, 3), 12.0);
  EXPECT_EQ(xs.grid().points()[1], 0.5);
}

TEST(Csv, ColumnWithOptionalHeader) {
  TempDir d;
  EXPECT_EQ(load_column(d.write("a.csv", "y\n1\n2.5\n")).size(), 2);
  EXPECT_EQ(load_column(d.write("b.csv", "1\n2.5\n-3e-2\n"))[2], -0.03);
}

TEST(Csv, ResponseCountMismatchNamesBothCounts) {
  TempDir d;
  const auto x = d.write("x.csv", "0,0.5,1\n1,2,3\n4,5,6\n7,8,9\n");
  const auto y = d.write("y.csv", "1\n2\n");
  const std::string msg = message_of([&] { (void)load_dataset(x, y); });
  EXPECT_NE(msg.find('3'), std::string::npos) << msg;
  EXPECT_NE(msg.find('2'), std::string::npos) << msg;
  EXPECT_EQ(kind_of([&] { (void)load_dataset(x, y); }), ErrorKind::parse);
}

TEST(Csv, ParseErrorsNameTheLine) {
  TempDir d;
  const auto bad = d.write("bad.csv", "0,0.5,1\n1,2,3\n4,oops,6\n");
  const std::string msg = message_of([&] { (void)load_curves(bad); });
  EXPECT_NE(msg.find(":3:"), std::string::npos) << msg;
  const auto ragged = d.write("ragged.csv", "0,0.5,1\n1,2,3\n4,5\n");
  const std::string msg2 = message_of([&] { (void)load_curves(ragged); });
  EXPECT_NE(msg2.find(":3:"), std::string::npos) << msg2;
  EXPECT_EQ(kind_of([&] { (void)load_curves(d.file("missing.csv")); }), ErrorKind::parse);
}

TEST(Csv, RoundTripIsExact) {
  TempDir d;
  const FunctionalSample xs = fixture::ou_sample(7, 1, OuStart::stationary, Grid::uniform(0, 1, 11));
  save_curves(xs, d.file("x.csv"));
  const FunctionalSample back = load_curves(d.file("x.csv"));
  EXPECT_EQ(back.values(), xs.values());
  EXPECT_EQ(back.grid().points(), xs.grid().points());
  const VectorXd v = fixture::gaussian_vector(9, 2) * 1e-7;
  save_column(v, d.file("v.csv"));
  EXPECT_EQ(load_column(d.file("v.csv")), v);
}

TEST(Csv, ShortestRoundTripFormatting) {
  EXPECT_EQ(detail::format_double(0.1), "0.1");
  EXPECT_EQ(detail::format_double(1.0), "1");
  EXPECT_EQ(std::stod(detail::format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Config, DimensionPolicyParsing) {
  EXPECT_EQ(parse_dimension_policy("7").fixed.value_or(0), 7);
  EXPECT_FALSE(parse_dimension_policy("auto-gcv").fixed.has_value());
  EXPECT_EQ(kind_of([] { (void)parse_dimension_policy("0"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { (void)parse_dimension_policy("auto-nope"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { (void)parse_dimension_policy("3x"); }), ErrorKind::config);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.method = "delsol";
  c.hypothesis = Hypothesis::simple;
  c.B = 321;
  c.seed = 99;
  c.alpha = {0.2};
  c.center = true;
  c.bandwidth = 0.5;
  c.p = "auto-pcv";
  EXPECT_EQ(to_json(run_config_from_json(to_json(c))).dump(), to_json(c).dump());
  EXPECT_EQ(kind_of([] { (void)run_config_from_json(Json{{"B", "many"}}); }), ErrorKind::config);
}

namespace {

RunConfig small_config(const TempDir& d, std::uint64_t seed = 4) {
  const FunctionalSample xs = fixture::ou_sample(40, seed);
  save_curves(xs, d.file("x.csv"));
  save_column(fixture::response(xs, "composite:H2,0", seed).values(), d.file("y.csv"), "y");
  RunConfig c;
  c.curves = d.file("x.csv");
  c.response = d.file("y.csv");
  c.B = 60;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(Report, JsonRoundTripIsLossless) {
  TempDir d;
  TestReport r = run_test(small_config(d));
  r.timings = Json{{"total_seconds", 0.25}};
  const Json j = to_json(r);
  EXPECT_EQ(j.at("schema"), kSchema);
  const TestReport back = report_from_json(j);
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_EQ(back.replicates, r.replicates);
  EXPECT_EQ(back.p_value, r.p_value);
  EXPECT_EQ(back.selection.size(), r.selection.size());
  Json wrong = j;
  wrong["schema"] = "other/9";
  EXPECT_THROW((void)report_from_json(wrong), Error);
}

TEST(Report, ByteIdenticalForSameConfig) {
  TempDir d;
  const RunConfig c = small_config(d);
  EXPECT_EQ(to_json(run_test(c, 1)).dump(2), to_json(run_test(c, 4)).dump(2));
}

TEST(Report, EmbeddedConfigReproducesResult) {
  TempDir d;
  const TestReport first = run_test(small_config(d));
  const TestReport again = run_test(run_config_from_json(to_json(first).at("config")));
  EXPECT_EQ(to_json(again).dump(), to_json(first).dump());
}

TEST(Report, DecisionsUseStrictInequality) {
  TempDir d;
  RunConfig c = small_config(d);
  const TestReport r = run_test(c);
  c.alpha = {r.p_value > 0 ? r.p_value : 0.5};
  const TestReport at = run_test(c);
  ASSERT_EQ(at.decisions.size(), 1u);
  EXPECT_EQ(at.decisions[0].second, r.p_value < c.alpha[0]);
}

TEST(Report, CompetingMethodsNeedSimpleNull) {
  TempDir d;
  RunConfig c = small_config(d);
  c.method = "ftest";
  EXPECT_EQ(kind_of([&] { (void)run_test(c); }), ErrorKind::config);
  c.hypothesis = Hypothesis::simple;
  EXPECT_EQ(run_test(c).estimator, "-");
  c.method = "delsol";
  EXPECT_TRUE(run_test(c).bandwidth.has_value());
  c.method = "kolmogorov";
  EXPECT_EQ(kind_of([&] { (void)run_test(c); }), ErrorKind::config);
}

TEST(Report, Beta0LengthChecked) {
  TempDir d;
  RunConfig c = small_config(d);
  c.hypothesis = Hypothesis::simple;
  c.beta0 = d.write("b.csv", "0\n0\n");
  EXPECT_EQ(kind_of([&] { (void)run_test(c); }), ErrorKind::parse);
}

TEST(Report, CsvForm) {
  TempDir d;
  const std::string csv = report_csv(run_test(small_config(d)));
  EXPECT_EQ(csv.rfind("key,value\n", 0), 0u);
  EXPECT_NE(csv.find("\np_value,"), std::string::npos);
}

TEST(Diagnostic, ZeroResidualsGiveZeroTrajectory) {
  const FunctionalSample xs = fixture::ou_sample(30, 6);
  const auto d = compute_diagnostic(xs, VectorXd::Zero(30), nullptr, 20, 5, 1);
  for (double v : d.observed) EXPECT_EQ(v, 0.0);
  for (const auto& row : d.bootstrap)
    for (double v : row) EXPECT_EQ(v, 0.0);
}

TEST(Diagnostic, EndsAtScaledResidualSum) {
  const FunctionalSample xs = fixture::ou_sample(300, 7);
  const VectorXd e = fixture::gaussian_vector(300, 8);
  const auto d = compute_diagnostic(xs, e, nullptr, 25, 3, 2);
  EXPECT_LE(d.u.size(), 512u);
  EXPECT_TRUE(std::is_sorted(d.u.begin(), d.u.end()));
  EXPECT_NEAR(d.observed.back(), e.sum() / std::sqrt(300.0), 1e-10);
  EXPECT_EQ(d.bootstrap.size(), 3u);
}

TEST(Diagnostic, RequiresProjections) {
  const FunctionalSample xs = fixture::ou_sample(10, 9);
  EXPECT_EQ(kind_of([&] { (void)compute_diagnostic(xs, VectorXd::Ones(10), nullptr, 0, 1, 1); }),
            ErrorKind::config);
}

TEST(Diagnostic, WritesCsv) {
  TempDir d;
  const RunConfig c = small_config(d);
  const auto [xs, ys] = load_dataset(c.curves, c.response);
  const auto traj = emit_diagnostic(c, xs, ys, 15, 4, d.file("diag.csv"));
  std::ifstream in(d.file("diag.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# projector", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line, "u,observed,boot_1,boot_2,boot_3,boot_4");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, traj.u.size());
}

TEST(PowerTableIo, JsonAndCsv) {
  PowerStudyConfig cfg;
  cfg.scenarios = {parse_scenario("simple:H0")};
  cfg.methods = {StudyMethod{StudyTest::f_test, {}, {}}};
  cfg.sample_sizes = {20};
  cfg.M = 2;
  cfg.B = 10;
  const PowerTable t = run_power_study(cfg);
  const Json j = to_json(t);
  EXPECT_EQ(j.at("rows").size(), 3u);
  const std::string csv = power_table_csv(t);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

// ---------------------------------------------------------------------------
// Command-line tool

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FLMGOF_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
  TempDir d;
  const RunConfig c = small_config(d);
  const std::string files = " --curves " + c.curves + " --response " + c.response;
  EXPECT_EQ(run_cli("test" + files + " --B 20 --out " + d.file("r.json")), 0);
  EXPECT_EQ(run_cli("test --curves " + d.file("nope.csv") + " --response " + c.response), 2);
  EXPECT_EQ(run_cli("test" + files + " --p 0"), 2);
  EXPECT_EQ(run_cli("test" + files + " --format xml"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("diagnose" + files + " --G 0"), 2);
  const auto nan_curves = d.write("nan.csv", "0,0.5,1\n1,nan,3\n4,5,6\n");
  const auto two = d.write("two.csv", "1\n2\n");
  EXPECT_EQ(run_cli("test --curves " + nan_curves + " --response " + two), 3);
}

TEST(Cli, RerunFromReportIsByteIdentical) {
  TempDir d;
  const RunConfig c = small_config(d);
  const std::string files = " --curves " + c.curves + " --response " + c.response;
  ASSERT_EQ(run_cli("test" + files + " --B 30 --seed 8 --out " + d.file("a.json")), 0);
  ASSERT_EQ(run_cli("test --config " + d.file("a.json") + " --out " + d.file("b.json")), 0);
  EXPECT_EQ(slurp(d.file("a.json")), slurp(d.file("b.json")));
  ASSERT_EQ(run_cli("test" + files + " --B 30 --seed 8 --format csv --out " + d.file("a.csv")), 0);
  EXPECT_EQ(slurp(d.file("a.csv")).rfind("key,value", 0), 0u);
}
