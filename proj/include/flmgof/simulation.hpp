#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "flmgof/competing.hpp"
#include "flmgof/errors.hpp"
#include "flmgof/functional.hpp"
#include "flmgof/parallel.hpp"
#include "flmgof/pipeline.hpp"
#include "flmgof/rng.hpp"

namespace flmgof {

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck curves

/// anchored: X(0) = 0 with Cov = s^2/(2 th) e^{-th(s+t)} (e^{2 th min(s,t)} - 1).
/// stationary: Cov = s^2/(2 th) e^{-th |s-t|}.
enum class OuStart { anchored, stationary };

inline std::string to_string(OuStart s) {
  return s == OuStart::anchored ? "anchored" : "stationary";
}

inline OuStart parse_ou_start(const std::string& s) {
  if (s == "anchored") return OuStart::anchored;
  if (s == "stationary") return OuStart::stationary;
  fail(ErrorKind::config, "unknown OU start '" + s + "'");
}

struct OuParams {
  double theta = 1.0 / 3.0;
  double sigma = 1.0;
  OuStart start = OuStart::stationary;
  VectorXd mean;  // empty means zero

  [[nodiscard]] double covariance(double s, double t) const {
    const double scale = sigma * sigma / (2.0 * theta);
    if (start == OuStart::stationary)
      return scale * std::exp(-theta * std::abs(s - t));
    return scale * std::exp(-theta * (s + t)) *
           std::expm1(2.0 * theta * std::min(s, t));
  }
};

/// Exact Gaussian sampling at the grid points through a Cholesky factor of
/// the covariance. Points with zero variance stay at the mean.
class OuSampler {
 public:
  OuSampler(OuParams params, Grid grid)
      : params_(std::move(params)), grid_(std::move(grid)) {
    require(params_.theta > 0.0 && params_.sigma > 0.0, ErrorKind::config,
            "OU parameters theta and sigma must be positive");
    const auto m = static_cast<Eigen::Index>(grid_.size());
    require(params_.mean.size() == 0 || params_.mean.size() == m,
            ErrorKind::dimension, "OU mean does not match the grid");
    const auto& t = grid_.points();
    for (Eigen::Index k = 0; k < m; ++k)
      if (params_.covariance(t[static_cast<std::size_t>(k)],
                             t[static_cast<std::size_t>(k)]) > 0.0)
        active_.push_back(k);
    const auto a = static_cast<Eigen::Index>(active_.size());
    MatrixXd cov(a, a);
    for (Eigen::Index i = 0; i < a; ++i)
      for (Eigen::Index j = 0; j < a; ++j)
        cov(i, j) = params_.covariance(
            t[static_cast<std::size_t>(active_[static_cast<std::size_t>(i)])],
            t[static_cast<std::size_t>(active_[static_cast<std::size_t>(j)])]);
    const double scale = a > 0 ? cov.diagonal().maxCoeff() : 1.0;
    for (double jitter : {0.0, 1e-14, 1e-12, 1e-10}) {
      MatrixXd c = cov;
      c.diagonal().array() += jitter * scale;
      Eigen::LLT<MatrixXd> llt(c);
      if (llt.info() == Eigen::Success) {
        factor_ = llt.matrixL();
        return;
      }
    }
    fail(ErrorKind::numeric, "OU covariance is not positive definite");
  }

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] const OuParams& params() const noexcept { return params_; }

  [[nodiscard]] FunctionalSample sample(Eigen::Index n, Engine& rng) const {
    require(n >= 1, ErrorKind::config, "OU sample needs n >= 1");
    const auto m = static_cast<Eigen::Index>(grid_.size());
    const auto a = static_cast<Eigen::Index>(active_.size());
    std::normal_distribution<double> normal;
    MatrixXd z(a, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < a; ++k) z(k, i) = normal(rng);
    const MatrixXd paths = factor_.triangularView<Eigen::Lower>() * z;
    MatrixXd values = MatrixXd::Zero(n, m);
    for (Eigen::Index k = 0; k < a; ++k)
      values.col(active_[static_cast<std::size_t>(k)]) = paths.row(k).transpose();
    if (params_.mean.size() == m) values.rowwise() += params_.mean.transpose();
    return {grid_, std::move(values)};
  }

 private:
  OuParams params_;
  Grid grid_;
  std::vector<Eigen::Index> active_;
  MatrixXd factor_;
};

// ---------------------------------------------------------------------------
// Scenarios

enum class BetaShape { zero, linear, sine_cubed, beta1, beta2, beta3 };
enum class NoiseKind { gaussian, exponential };

inline constexpr double kGamma[] = {0.25, 0.65, 1.00};
inline constexpr double kEta[] = {0.10, 0.20, 0.50};
inline constexpr double kDeltaSimple[] = {0.005, 0.010, 0.015};
inline constexpr double kDeltaComposite[] = {0.01, 0.05, 0.10};

/// Y = <X, beta> + delta <X, X> + eps.
struct ScenarioSpec {
  std::string name;
  Hypothesis hypothesis = Hypothesis::simple;
  BetaShape shape = BetaShape::zero;
  double scale = 1.0;  // gamma or eta for the scaled shapes
  double delta = 0.0;
  NoiseKind noise = NoiseKind::gaussian;
  double noise_sd = 0.1;

  [[nodiscard]] double beta(double t) const {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    switch (shape) {
      case BetaShape::zero: return 0.0;
      case BetaShape::linear: return scale * (t - 0.5);
      case BetaShape::sine_cubed: {
        const double s = std::sin(two_pi * t * t * t);
        return scale * s * s * s;
      }
      case BetaShape::beta1: return std::sin(two_pi * t) - std::cos(two_pi * t);
      case BetaShape::beta2: return t - (t - 0.75) * (t - 0.75);
      case BetaShape::beta3: return t + std::cos(two_pi * t);
    }
    return 0.0;
  }

  /// True when the data satisfy the null the scenario is tested against.
  [[nodiscard]] bool is_null() const {
    if (delta != 0.0) return false;
    return hypothesis == Hypothesis::composite || shape == BetaShape::zero;
  }
};

/// Names: "simple:H0", "simple:H{1,2,3},{1,2,3}", "composite:H{1,2,3},{0..3}",
/// optionally suffixed with "/exp" for recentred exponential noise.
inline ScenarioSpec parse_scenario(const std::string& full) {
  ScenarioSpec s;
  s.name = full;
  std::string_view v = full;
  if (const auto slash = v.find('/'); slash != std::string_view::npos) {
    const std::string_view noise = v.substr(slash + 1);
    if (noise == "exp")
      s.noise = NoiseKind::exponential;
    else if (noise != "gauss")
      fail(ErrorKind::config, "unknown noise '" + std::string(noise) + "'");
    v = v.substr(0, slash);
  }
  const auto colon = v.find(':');
  require(colon != std::string_view::npos, ErrorKind::config,
          "scenario '" + full + "' must look like simple:H1,2");
  s.hypothesis = parse_hypothesis(std::string(v.substr(0, colon)));
  const std::string_view code = v.substr(colon + 1);
  const auto bad = [&] {
    fail(ErrorKind::config, "unknown scenario '" + full + "'");
  };
  if (code.size() < 2 || code[0] != 'H') bad();
  if (s.hypothesis == Hypothesis::simple && code == "H0") return s;
  if (code.size() != 4 || code[2] != ',') bad();
  const int j = code[1] - '0';
  const int k = code[3] - '0';
  if (s.hypothesis == Hypothesis::simple) {
    if (j < 1 || j > 3 || k < 1 || k > 3) bad();
    if (j == 1) {
      s.shape = BetaShape::linear;
      s.scale = kGamma[k - 1];
    } else if (j == 2) {
      s.shape = BetaShape::sine_cubed;
      s.scale = kEta[k - 1];
    } else {
      s.delta = kDeltaSimple[k - 1];
    }
  } else {
    if (j < 1 || j > 3 || k < 0 || k > 3) bad();
    s.shape = j == 1 ? BetaShape::beta1
                     : (j == 2 ? BetaShape::beta2 : BetaShape::beta3);
    if (k > 0) s.delta = kDeltaComposite[k - 1];
  }
  return s;
}

/// m(X_i) = <X_i, beta> + delta <X_i, X_i> by quadrature.
inline VectorXd regression_function(const FunctionalSample& xs,
                                    const ScenarioSpec& spec) {
  const Grid& g = xs.grid();
  const VectorXd beta = evaluate_on(g, [&](double t) { return spec.beta(t); });
  VectorXd m(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    const VectorXd x = xs.curve(i).transpose();
    m[i] = inner_product(g, x, beta);
    if (spec.delta != 0.0) m[i] += spec.delta * inner_product(g, x, x);
  }
  return m;
}

inline VectorXd draw_noise(Eigen::Index n, const ScenarioSpec& spec,
                           Engine& rng) {
  VectorXd e(n);
  if (spec.noise == NoiseKind::gaussian) {
    std::normal_distribution<double> normal(0.0, spec.noise_sd);
    for (Eigen::Index i = 0; i < n; ++i) e[i] = normal(rng);
  } else {
    std::exponential_distribution<double> expo(1.0 / spec.noise_sd);
    for (Eigen::Index i = 0; i < n; ++i) e[i] = expo(rng) - spec.noise_sd;
  }
  return e;
}

inline ResponseVector scenario_response(const FunctionalSample& xs,
                                        const ScenarioSpec& spec,
                                        Engine& rng) {
  return ResponseVector(regression_function(xs, spec) +
                        draw_noise(xs.size(), spec, rng));
}

/// sigma^2 / (sigma^2 + E[m(X)^2]) with the expectation over mc_curves
/// simulated curves.
inline double snr(const ScenarioSpec& spec, const OuSampler& sampler,
                  Eigen::Index mc_curves, std::uint64_t seed) {
  require(mc_curves >= 1000, ErrorKind::config,
          "snr needs at least 1000 Monte Carlo curves");
  Engine rng = make_stream(seed, {stream_tag::curves});
  const FunctionalSample xs = sampler.sample(mc_curves, rng);
  const double em2 = regression_function(xs, spec).squaredNorm() /
                     static_cast<double>(mc_curves);
  const double s2 = spec.noise_sd * spec.noise_sd;
  return s2 / (s2 + em2);
}

// ---------------------------------------------------------------------------
// Power studies

enum class StudyTest { pcvm, f_test, delsol };

inline std::string to_string(StudyTest t) {
  switch (t) {
    case StudyTest::pcvm: return "pcvm";
    case StudyTest::f_test: return "ftest";
    case StudyTest::delsol: return "delsol";
  }
  return "?";
}

struct StudyMethod {
  StudyTest test = StudyTest::pcvm;
  BasisConfig basis = default_basis_config(BasisKind::bspline);  // pcvm only
  KernelConfig kernel;                                            // delsol only

  [[nodiscard]] std::string estimator() const {
    return test == StudyTest::pcvm ? to_string(basis.kind) : "-";
  }
  [[nodiscard]] std::string policy() const {
    if (test == StudyTest::pcvm) return basis.dimension.describe();
    if (test == StudyTest::delsol)
      return kernel.bandwidth ? "h=" + std::to_string(*kernel.bandwidth)
                              : "h=pcv";
    return "-";
  }
};

struct PowerStudyConfig {
  std::vector<ScenarioSpec> scenarios;
  std::vector<StudyMethod> methods;
  std::vector<int> sample_sizes = {100};
  std::vector<double> alphas = {0.10, 0.05, 0.01};
  int M = 100;
  int B = 200;
  std::uint64_t seed = 1;
  OuParams ou;
  Grid grid = Grid::uniform();
  std::optional<bool> center;  // per-hypothesis default when unset
  unsigned workers = 0;
};

struct PowerRow {
  std::string scenario;
  std::string hypothesis;
  std::string test;
  std::string estimator;
  std::string policy;
  int n = 0;
  double alpha = 0.0;
  int rejections = 0;
  int valid = 0;     // replicates that produced a p-value
  int failures = 0;  // replicates that raised an error
  double rate = 0.0;
  double se = 0.0;
  double mean_p = 0.0;  // mean selected dimension (pcvm rows)
};

struct PowerTable {
  int M = 0;
  int B = 0;
  std::uint64_t seed = 0;
  std::string ou_start;
  std::vector<PowerRow> rows;

  [[nodiscard]] const PowerRow* find(const std::string& scenario,
                                     const std::string& test,
                                     const std::string& estimator, int n,
                                     double alpha) const {
    for (const auto& r : rows)
      if (r.scenario == scenario && r.test == test &&
          r.estimator == estimator && r.n == n &&
          std::abs(r.alpha - alpha) < 1e-12)
        return &r;
    return nullptr;
  }
};

/// FNV-1a, used to key per-scenario streams by name.
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// p-value of one dataset under one method; rejection is p < alpha.
inline std::pair<double, int> run_study_method(const StudyMethod& method,
                                               const ScenarioSpec& scenario,
                                               const FunctionalSample& xs,
                                               const ResponseVector& ys,
                                               int B, std::uint64_t seed,
                                               std::optional<bool> center) {
  BootstrapOptions boot;
  boot.B = B;
  boot.seed = seed;
  boot.keep_replicates = false;
  boot.workers = 1;
  boot.recenter = center.value_or(false);
  if (method.test == StudyTest::pcvm) {
    PcvmTestConfig cfg;
    cfg.hypothesis = scenario.hypothesis;
    cfg.basis = method.basis;
    cfg.bootstrap = boot;
    cfg.center = center;
    const auto res = run_pcvm_test(xs, ys, cfg);
    return {res.calibration.p_value, res.p};
  }
  const auto kind = method.test == StudyTest::f_test ? CompetingMethod::f_test
                                                     : CompetingMethod::delsol;
  return {calibrate_competing(kind, xs, ys, boot, method.kernel).p_value, 0};
}

/// For each sample size and replicate m the curves come from the stream
/// (seed, curves, n, m) and are shared by every scenario; noise is keyed by
/// scenario name and bootstrap draws additionally by method index.
inline PowerTable run_power_study(const PowerStudyConfig& cfg) {
  require(cfg.M >= 1 && cfg.B >= 1, ErrorKind::config,
          "power study needs M >= 1 and B >= 1");
  require(!cfg.scenarios.empty() && !cfg.methods.empty(), ErrorKind::config,
          "power study needs at least one scenario and one method");
  const OuSampler sampler(cfg.ou, cfg.grid);
  const std::size_t ns = cfg.scenarios.size();
  const std::size_t nm = cfg.methods.size();
  PowerTable table;
  table.M = cfg.M;
  table.B = cfg.B;
  table.seed = cfg.seed;
  table.ou_start = to_string(cfg.ou.start);

  for (int n : cfg.sample_sizes) {
    // pvals[(s * nm + k) * M + m], NaN on failure
    std::vector<double> pvals(ns * nm * static_cast<std::size_t>(cfg.M));
    std::vector<int> dims(pvals.size(), 0);
    parallel_for(
        0, static_cast<std::size_t>(cfg.M),
        [&](std::size_t m) {
          Engine crng = make_stream(
              cfg.seed, {stream_tag::curves, static_cast<std::uint64_t>(n), m});
          const FunctionalSample xs = sampler.sample(n, crng);
          for (std::size_t s = 0; s < ns; ++s) {
            const auto& sc = cfg.scenarios[s];
            const std::uint64_t key = fnv1a(sc.name);
            Engine nrng = make_stream(
                cfg.seed,
                {stream_tag::noise, static_cast<std::uint64_t>(n), key, m});
            const ResponseVector ys = scenario_response(xs, sc, nrng);
            for (std::size_t k = 0; k < nm; ++k) {
              const std::size_t at = (s * nm + k) * cfg.M + m;
              const std::uint64_t bseed = stream_key(
                  cfg.seed, {stream_tag::bootstrap,
                             static_cast<std::uint64_t>(n), key, k, m});
              try {
                const auto [pv, p] = run_study_method(cfg.methods[k], sc, xs,
                                                      ys, cfg.B, bseed,
                                                      cfg.center);
                pvals[at] = pv;
                dims[at] = p;
              } catch (const Error&) {
                pvals[at] = std::numeric_limits<double>::quiet_NaN();
              }
            }
          }
        },
        cfg.workers);

    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t k = 0; k < nm; ++k)
        for (double alpha : cfg.alphas) {
          PowerRow row;
          row.scenario = cfg.scenarios[s].name;
          row.hypothesis = to_string(cfg.scenarios[s].hypothesis);
          row.test = to_string(cfg.methods[k].test);
          row.estimator = cfg.methods[k].estimator();
          row.policy = cfg.methods[k].policy();
          row.n = n;
          row.alpha = alpha;
          double psum = 0.0;
          for (int m = 0; m < cfg.M; ++m) {
            const std::size_t at = (s * nm + k) * cfg.M + m;
            if (std::isnan(pvals[at])) {
              ++row.failures;
              continue;
            }
            ++row.valid;
            psum += dims[at];
            if (pvals[at] < alpha) ++row.rejections;
          }
          if (row.valid > 0) {
            row.rate = static_cast<double>(row.rejections) / row.valid;
            row.se = std::sqrt(row.rate * (1.0 - row.rate) / row.valid);
            row.mean_p = psum / row.valid;
          }
          table.rows.push_back(std::move(row));
        }
  }
  return table;
}

}  // namespace flmgof
