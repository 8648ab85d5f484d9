#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "flmgof/competing.hpp"
#include "flmgof/errors.hpp"
#include "flmgof/functional.hpp"
#include "flmgof/pipeline.hpp"
#include "flmgof/rng.hpp"
#include "flmgof/simulation.hpp"

namespace flmgof {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "flm-gof/1";

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s.remove_prefix(1);
    s.remove_suffix(1);
  }
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= line.size(); ++k)
    if (k == line.size() || line[k] == ',') {
      cells.push_back(line.substr(start, k - start));
      start = k + 1;
    }
  return cells;
}

inline std::string where(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

struct CsvLine {
  std::size_t number;
  std::string text;
};

inline std::vector<CsvLine> read_lines(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::parse, "cannot open " + path);
  std::vector<CsvLine> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (trim(text).empty()) continue;
    lines.push_back({number, text});
  }
  return lines;
}

inline std::vector<double> parse_row(const CsvLine& line,
                                     const std::string& path) {
  std::vector<double> out;
  std::size_t col = 0;
  for (auto cell : split(line.text)) {
    ++col;
    const auto v = parse_number(cell);
    require(v.has_value(), ErrorKind::parse,
            where(path, line.number) + ": column " + std::to_string(col) +
                " is not a number ('" + std::string(trim(cell)) + "')");
    out.push_back(*v);
  }
  return out;
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Header row holds the grid abscissae; every other row is one curve.
inline FunctionalSample load_curves(const std::string& path) {
  const auto lines = detail::read_lines(path);
  require(lines.size() >= 2, ErrorKind::parse,
          path + ": needs a grid header and at least one curve");
  const auto grid = detail::parse_row(lines[0], path);
  MatrixXd values(static_cast<Eigen::Index>(lines.size() - 1),
                  static_cast<Eigen::Index>(grid.size()));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto row = detail::parse_row(lines[r], path);
    require(row.size() == grid.size(), ErrorKind::parse,
            detail::where(path, lines[r].number) + ": " +
                std::to_string(row.size()) + " values but the header has " +
                std::to_string(grid.size()));
    for (std::size_t k = 0; k < row.size(); ++k)
      values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(k)) =
          row[k];
  }
  try {
    return {Grid(grid), std::move(values)};
  } catch (const Error& e) {
    fail(e.kind(), path + ": " + e.what());
  }
}

/// One value per line; a non-numeric first line is taken as a header.
inline VectorXd load_column(const std::string& path) {
  const auto lines = detail::read_lines(path);
  std::vector<double> out;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto cells = detail::split(lines[r].text);
    require(cells.size() == 1, ErrorKind::parse,
            detail::where(path, lines[r].number) + ": expected one column, found " +
                std::to_string(cells.size()));
    const auto v = detail::parse_number(cells[0]);
    if (!v && r == 0 && out.empty()) continue;
    require(v.has_value(), ErrorKind::parse,
            detail::where(path, lines[r].number) + ": '" +
                std::string(detail::trim(cells[0])) + "' is not a number");
    out.push_back(*v);
  }
  require(!out.empty(), ErrorKind::parse, path + ": no values");
  return Eigen::Map<const VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

inline std::pair<FunctionalSample, ResponseVector> load_dataset(
    const std::string& curves_path, const std::string& response_path) {
  FunctionalSample xs = load_curves(curves_path);
  VectorXd y = load_column(response_path);
  require(y.size() == xs.size(), ErrorKind::parse,
          "row count mismatch: " + curves_path + " has " +
              std::to_string(xs.size()) + " curves but " + response_path +
              " has " + std::to_string(y.size()) + " responses");
  return {std::move(xs), ResponseVector(std::move(y))};
}

inline void save_curves(const FunctionalSample& xs, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::parse, "cannot write " + path);
  const auto& t = xs.grid().points();
  for (std::size_t k = 0; k < t.size(); ++k)
    out << (k ? "," : "") << detail::format_double(t[k]);
  out << "\n";
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    for (Eigen::Index k = 0; k < xs.values().cols(); ++k)
      out << (k ? "," : "") << detail::format_double(xs.values()(i, k));
    out << "\n";
  }
}

inline void save_column(const VectorXd& v, const std::string& path,
                        const std::string& header = "") {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::parse, "cannot write " + path);
  if (!header.empty()) out << header << "\n";
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out << detail::format_double(v[i]) << "\n";
}

// ---------------------------------------------------------------------------
// Run configuration and report

/// "auto-gcv", "auto-gcv-linear", "auto-pcv", "auto-bic" or an integer.
inline DimensionPolicy parse_dimension_policy(const std::string& s) {
  if (s.rfind("auto-", 0) == 0)
    return DimensionPolicy::automatic(parse_criterion(s.substr(5)));
  int p = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), p);
  require(ec == std::errc() && ptr == s.data() + s.size() && p >= 1,
          ErrorKind::config, "invalid --p value '" + s + "'");
  return DimensionPolicy::fixed_at(p);
}

struct RunConfig {
  std::string method = "pcvm";  // pcvm, ftest, delsol
  Hypothesis hypothesis = Hypothesis::composite;
  std::string estimator = "bspline";
  std::string p = "";  // empty: estimator default
  int order = 4;
  int B = 1000;
  std::uint64_t seed = 1;
  std::vector<double> alpha = {0.10, 0.05, 0.01};
  std::optional<bool> center;
  std::optional<double> bandwidth;  // delsol; absent means PCV
  std::string curves;
  std::string response;
  std::string beta0;  // simple null; empty means beta_0 = 0

  [[nodiscard]] BasisConfig basis() const {
    BasisConfig cfg = default_basis_config(parse_basis_kind(estimator));
    cfg.order = order;
    if (!p.empty()) cfg.dimension = parse_dimension_policy(p);
    return cfg;
  }
  [[nodiscard]] std::string policy() const {
    return basis().dimension.describe();
  }
};

inline Json to_json(const RunConfig& c) {
  Json j;
  j["method"] = c.method;
  j["hypothesis"] = to_string(c.hypothesis);
  j["estimator"] = c.estimator;
  j["p"] = c.policy();
  j["order"] = c.order;
  j["B"] = c.B;
  j["seed"] = c.seed;
  j["alpha"] = c.alpha;
  j["center"] = c.center ? Json(*c.center) : Json(nullptr);
  j["bandwidth"] = c.bandwidth ? Json(*c.bandwidth) : Json(nullptr);
  j["curves"] = c.curves;
  j["response"] = c.response;
  j["beta0"] = c.beta0;
  return j;
}

inline RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  try {
    c.method = j.value("method", c.method);
    c.hypothesis = parse_hypothesis(j.value("hypothesis", std::string("composite")));
    c.estimator = j.value("estimator", c.estimator);
    c.p = j.value("p", c.p);
    c.order = j.value("order", c.order);
    c.B = j.value("B", c.B);
    c.seed = j.value("seed", c.seed);
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<std::vector<double>>();
    if (j.contains("center") && !j.at("center").is_null())
      c.center = j.at("center").get<bool>();
    if (j.contains("bandwidth") && !j.at("bandwidth").is_null())
      c.bandwidth = j.at("bandwidth").get<double>();
    c.curves = j.value("curves", c.curves);
    c.response = j.value("response", c.response);
    c.beta0 = j.value("beta0", c.beta0);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::config, std::string("invalid configuration: ") + e.what());
  }
  return c;
}

struct TestReport {
  std::string method;
  std::string hypothesis;
  std::string estimator;
  std::string p_policy;
  int selected_p = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  int B = 0;
  std::uint64_t seed = 0;
  int n = 0;
  int grid_size = 0;
  std::optional<double> bandwidth;
  std::vector<std::pair<double, bool>> decisions;  // (alpha, reject)
  std::vector<double> replicates;
  std::vector<CandidateScore> selection;
  std::optional<Json> timings;  // seconds per stage; absent unless requested
  Json config;
};

inline Json to_json(const TestReport& r) {
  Json j;
  j["schema"] = kSchema;
  j["method"] = r.method;
  j["hypothesis"] = r.hypothesis;
  j["estimator"] = r.estimator;
  j["p_policy"] = r.p_policy;
  j["selected_p"] = r.selected_p;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["B"] = r.B;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["grid_size"] = r.grid_size;
  j["bandwidth"] = r.bandwidth ? Json(*r.bandwidth) : Json(nullptr);
  Json dec = Json::array();
  for (const auto& [a, rej] : r.decisions)
    dec.push_back({{"alpha", a}, {"reject", rej}});
  j["decisions"] = dec;
  Json sel = Json::array();
  for (const auto& s : r.selection)
    sel.push_back({{"p", s.p},
                   {"feasible", s.feasible},
                   {"rss", s.feasible ? Json(s.rss) : Json(nullptr)},
                   {"value", s.feasible ? Json(s.value) : Json(nullptr)}});
  j["selection"] = sel;
  j["replicates"] = r.replicates;
  if (r.timings) j["timings"] = *r.timings;
  j["config"] = r.config;
  return j;
}

inline TestReport report_from_json(const Json& j) {
  TestReport r;
  try {
    require(j.at("schema").get<std::string>() == kSchema, ErrorKind::parse,
            "unsupported report schema");
    r.method = j.at("method");
    r.hypothesis = j.at("hypothesis");
    r.estimator = j.at("estimator");
    r.p_policy = j.at("p_policy");
    r.selected_p = j.at("selected_p");
    r.statistic = j.at("statistic");
    r.p_value = j.at("p_value");
    r.B = j.at("B");
    r.seed = j.at("seed");
    r.n = j.at("n");
    r.grid_size = j.at("grid_size");
    if (!j.at("bandwidth").is_null()) r.bandwidth = j.at("bandwidth").get<double>();
    for (const auto& d : j.at("decisions"))
      r.decisions.emplace_back(d.at("alpha").get<double>(), d.at("reject").get<bool>());
    for (const auto& s : j.at("selection")) {
      CandidateScore c;
      c.p = s.at("p");
      c.feasible = s.at("feasible");
      if (c.feasible) {
        c.rss = s.at("rss");
        c.value = s.at("value");
      }
      r.selection.push_back(c);
    }
    r.replicates = j.at("replicates").get<std::vector<double>>();
    if (j.contains("timings")) r.timings = j.at("timings");
    r.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed report: ") + e.what());
  }
  return r;
}

/// Runs the configured test on an in-memory sample.
inline TestReport run_test(const RunConfig& cfg, const FunctionalSample& xs,
                           const ResponseVector& ys,
                           const std::optional<VectorXd>& beta0 = std::nullopt,
                           unsigned workers = 0) {
  require(cfg.B >= 1, ErrorKind::config, "B must be at least 1");
  for (double a : cfg.alpha)
    require(a > 0.0 && a < 1.0, ErrorKind::config, "alpha must be in (0, 1)");
  TestReport r;
  r.method = cfg.method;
  r.hypothesis = to_string(cfg.hypothesis);
  r.B = cfg.B;
  r.seed = cfg.seed;
  r.n = static_cast<int>(xs.size());
  r.grid_size = static_cast<int>(xs.grid().size());
  r.config = to_json(cfg);

  BootstrapOptions boot;
  boot.B = cfg.B;
  boot.seed = cfg.seed;
  boot.workers = workers;
  if (cfg.method == "pcvm") {
    PcvmTestConfig pc;
    pc.hypothesis = cfg.hypothesis;
    pc.basis = cfg.basis();
    pc.beta0 = beta0;
    pc.bootstrap = boot;
    pc.center = cfg.center;
    const PcvmTestResult res = run_pcvm_test(xs, ys, pc);
    r.estimator = cfg.estimator;
    r.p_policy = cfg.policy();
    r.selected_p = res.p;
    r.statistic = res.calibration.statistic;
    r.p_value = res.calibration.p_value;
    r.replicates = res.calibration.replicates;
    if (res.selection) r.selection = res.selection->scores;
  } else {
    CompetingMethod m;
    if (cfg.method == "ftest")
      m = CompetingMethod::f_test;
    else if (cfg.method == "delsol")
      m = CompetingMethod::delsol;
    else
      fail(ErrorKind::config, "unknown method '" + cfg.method + "'");
    require(cfg.hypothesis == Hypothesis::simple, ErrorKind::config,
            cfg.method + " tests the simple no-effect null only");
    KernelConfig kc;
    kc.bandwidth = cfg.bandwidth;
    boot.recenter = cfg.center.value_or(false);
    const CompetingResult res = calibrate_competing(m, xs, ys, boot, kc);
    r.estimator = "-";
    r.p_policy = "-";
    r.statistic = res.statistic;
    r.p_value = res.p_value;
    r.replicates = res.replicates;
    if (m == CompetingMethod::delsol) r.bandwidth = res.bandwidth;
  }
  for (double a : cfg.alpha) r.decisions.emplace_back(a, r.p_value < a);
  return r;
}

/// Loads the files named in the config and runs the test.
inline TestReport run_test(const RunConfig& cfg, unsigned workers = 0) {
  require(!cfg.curves.empty() && !cfg.response.empty(), ErrorKind::config,
          "curves and response files are required");
  auto [xs, ys] = load_dataset(cfg.curves, cfg.response);
  std::optional<VectorXd> beta0;
  if (!cfg.beta0.empty()) {
    beta0 = load_column(cfg.beta0);
    require(beta0->size() == static_cast<Eigen::Index>(xs.grid().size()),
            ErrorKind::parse,
            cfg.beta0 + " has " + std::to_string(beta0->size()) +
                " values but the grid has " + std::to_string(xs.grid().size()));
  }
  return run_test(cfg, xs, ys, beta0, workers);
}

/// CSV form: one key,value line per scalar field.
inline std::string report_csv(const TestReport& r) {
  std::ostringstream out;
  out << "key,value\n";
  out << "schema," << kSchema << "\n";
  out << "method," << r.method << "\n";
  out << "hypothesis," << r.hypothesis << "\n";
  out << "estimator," << r.estimator << "\n";
  out << "p_policy," << r.p_policy << "\n";
  out << "selected_p," << r.selected_p << "\n";
  out << "statistic," << detail::format_double(r.statistic) << "\n";
  out << "p_value," << detail::format_double(r.p_value) << "\n";
  out << "B," << r.B << "\n";
  out << "seed," << r.seed << "\n";
  out << "n," << r.n << "\n";
  if (r.bandwidth) out << "bandwidth," << detail::format_double(*r.bandwidth) << "\n";
  for (const auto& [a, rej] : r.decisions)
    out << "reject@" << detail::format_double(a) << "," << (rej ? 1 : 0) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Power tables

inline Json to_json(const PowerTable& t) {
  Json j;
  j["schema"] = kSchema;
  j["kind"] = "power-table";
  j["M"] = t.M;
  j["B"] = t.B;
  j["seed"] = t.seed;
  j["ou_start"] = t.ou_start;
  Json rows = Json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"scenario", r.scenario},
                    {"hypothesis", r.hypothesis},
                    {"test", r.test},
                    {"estimator", r.estimator},
                    {"policy", r.policy},
                    {"n", r.n},
                    {"alpha", r.alpha},
                    {"rejections", r.rejections},
                    {"valid", r.valid},
                    {"failures", r.failures},
                    {"rate", r.rate},
                    {"se", r.se},
                    {"mean_p", r.mean_p}});
  j["rows"] = rows;
  return j;
}

inline std::string power_table_csv(const PowerTable& t) {
  std::ostringstream out;
  out << "scenario,hypothesis,test,estimator,policy,n,alpha,rejections,valid,"
         "failures,rate,se,mean_p,M,B\n";
  for (const auto& r : t.rows)
    out << '"' << r.scenario << "\"," << r.hypothesis << ',' << r.test << ','
        << r.estimator << ',' << r.policy << ',' << r.n << ','
        << detail::format_double(r.alpha) << ',' << r.rejections << ','
        << r.valid << ',' << r.failures << ',' << detail::format_double(r.rate)
        << ',' << detail::format_double(r.se) << ','
        << detail::format_double(r.mean_p) << ',' << t.M << ',' << t.B << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Diagnostic trajectories

struct DiagnosticTrajectories {
  std::vector<double> u;
  std::vector<double> observed;
  std::vector<std::vector<double>> bootstrap;  // B rows over u
  int G = 0;
  std::string projector = "OU(theta=1/3, sigma=1, stationary), unit L2 norm";
};

namespace detail {

/// Pooled sorted values thinned to at most cap points by quantile index,
/// always keeping the minimum and the maximum.
inline std::vector<double> thin_sorted(std::vector<double> v, std::size_t cap) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (v.size() <= cap || cap < 2) return v;
  std::vector<double> out(cap);
  for (std::size_t k = 0; k < cap; ++k)
    out[k] = v[static_cast<std::size_t>(std::llround(
        static_cast<double>(k) * static_cast<double>(v.size() - 1) /
        static_cast<double>(cap - 1)))];
  return out;
}

/// Adds (1/G) R_n(u, gamma) on the u-grid for one projection.
inline void accumulate_rmpp(const VectorXd& proj, const VectorXd& marks,
                            const std::vector<double>& u, double weight,
                            std::vector<double>& acc) {
  const Eigen::Index n = proj.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return proj[a] < proj[b]; });
  const double scale = weight / std::sqrt(static_cast<double>(n));
  double cum = 0.0;
  std::size_t next = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    while (next < order.size() && proj[order[next]] <= u[k])
      cum += marks[order[next++]];
    acc[k] += scale * cum;
  }
}

}  // namespace detail

/// Averages R_n(u, gamma_g) over G unit-norm OU projections, for the observed
/// residuals and for B wild-bootstrap residual sets (through the annihilator
/// when one is given).
inline DiagnosticTrajectories compute_diagnostic(
    const FunctionalSample& xs, const VectorXd& residuals,
    const MatrixXd* annihilator, int G, int B, std::uint64_t seed,
    bool recenter = false, std::size_t max_points = 512) {
  require(G >= 1, ErrorKind::config, "diagnostic needs G >= 1 projections");
  require(B >= 0, ErrorKind::config, "diagnostic needs B >= 0");
  require(residuals.size() == xs.size(), ErrorKind::dimension,
          "residuals do not match the sample");
  const Eigen::Index n = xs.size();
  const OuSampler sampler(OuParams{}, xs.grid());
  Engine prng = make_stream(seed, {stream_tag::projections});
  MatrixXd gam = sampler.sample(G, prng).values();
  for (int g = 0; g < G; ++g) {
    const double norm = l2_norm(xs.grid(), gam.row(g).transpose());
    require(norm > 0.0, ErrorKind::numeric, "degenerate projection");
    gam.row(g) /= norm;
  }
  const MatrixXd proj = cross_inner(xs.grid(), gam, xs.values());  // G x n

  std::vector<double> pooled(proj.data(), proj.data() + proj.size());
  DiagnosticTrajectories out;
  out.G = G;
  out.u = detail::thin_sorted(std::move(pooled), max_points);

  std::vector<VectorXd> marks;
  marks.push_back(residuals);
  for (int b = 0; b < B; ++b) {
    Engine rng = make_stream(seed, {stream_tag::bootstrap,
                                    static_cast<std::uint64_t>(b)});
    VectorXd e = draw_multipliers(n, rng).cwiseProduct(residuals);
    if (annihilator) e = (*annihilator) * e;
    else if (recenter) e.array() -= e.mean();
    marks.push_back(std::move(e));
  }
  std::vector<std::vector<double>> acc(marks.size(),
                                       std::vector<double>(out.u.size(), 0.0));
  parallel_for(0, marks.size(), [&](std::size_t s) {
    for (int g = 0; g < G; ++g)
      detail::accumulate_rmpp(proj.row(g).transpose(), marks[s], out.u,
                              1.0 / G, acc[s]);
  });
  out.observed = std::move(acc[0]);
  out.bootstrap.assign(std::make_move_iterator(acc.begin() + 1),
                       std::make_move_iterator(acc.end()));
  return out;
}

/// Runs the configured PCvM fit and traces the diagnostic for it.
inline DiagnosticTrajectories emit_diagnostic(const RunConfig& cfg,
                                              const FunctionalSample& xs_in,
                                              const ResponseVector& ys_in,
                                              int G, int B,
                                              const std::string& out_path = "") {
  PcvmTestConfig pc;
  pc.hypothesis = cfg.hypothesis;
  pc.basis = cfg.basis();
  pc.center = cfg.center;
  pc.bootstrap.B = 1;
  pc.bootstrap.seed = cfg.seed;
  const bool center = pc.centers();
  const PcvmTestResult res = run_pcvm_test(xs_in, ys_in, pc);
  const FunctionalSample xs =
      center ? center_sample(xs_in, ys_in).first : xs_in;
  const MatrixXd* m = res.fit ? &res.fit->annihilator : nullptr;
  DiagnosticTrajectories d =
      compute_diagnostic(xs, res.residuals, m, G, B, cfg.seed, center);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    require(static_cast<bool>(out), ErrorKind::parse, "cannot write " + out_path);
    out << "# projector: " << d.projector << ", G=" << d.G << "\n";
    out << "u,observed";
    for (std::size_t b = 0; b < d.bootstrap.size(); ++b) out << ",boot_" << b + 1;
    out << "\n";
    for (std::size_t k = 0; k < d.u.size(); ++k) {
      out << detail::format_double(d.u[k]) << ','
          << detail::format_double(d.observed[k]);
      for (const auto& row : d.bootstrap) out << ',' << detail::format_double(row[k]);
      out << "\n";
    }
  }
  return d;
}

}  // namespace flmgof
