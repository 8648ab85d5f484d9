#include <gtest/gtest.h>

#include <cmath>

#include "../support/fixtures.hpp"

using namespace flmgof;

namespace {

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments product_moment(const VectorXd& a, const VectorXd& b) {
  const VectorXd prod = a.cwiseProduct(b);
  const double m = prod.mean();
  const double var = (prod.array() - m).square().sum() / static_cast<double>(prod.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(prod.size()))};
}

OuSampler sampler(OuStart start, const Grid& grid = Grid::uniform()) {
  OuParams p;
  p.start = start;
  return OuSampler(p, grid);
}

}  // namespace

TEST(Ou, AnchoredStartsAtZero) {
  const FunctionalSample xs = fixture::ou_sample(200, 1, OuStart::anchored);
  EXPECT_LE(xs.values().col(0).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Ou, AnchoredVarianceAndCovariance) {
  const Grid g = Grid::uniform(0.0, 1.0, 5);  // 0, .25, .5, .75, 1
  const FunctionalSample xs = fixture::ou_sample(5000, 2, OuStart::anchored, g);
  const auto& x = xs.values();
  const double theta = 1.0 / 3.0;
  const double var1 = 1.5 * (1.0 - std::exp(-2.0 * theta));
  const Moments v = product_moment(x.col(4), x.col(4));
  EXPECT_NEAR(v.mean, var1, 3.0 * v.se);
  const double cov = 1.5 * std::exp(-theta * (0.25 + 0.75)) * std::expm1(2.0 * theta * 0.25);
  const Moments c = product_moment(x.col(1), x.col(3));
  EXPECT_NEAR(c.mean, cov, 3.0 * c.se);
  OuParams anchored;
  anchored.start = OuStart::anchored;
  EXPECT_NEAR(anchored.covariance(0.25, 0.75), cov, 1e-15);
  EXPECT_NEAR(anchored.covariance(1.0, 1.0), var1, 1e-15);
}

TEST(Ou, StationaryVariance) {
  const Grid g = Grid::uniform(0.0, 1.0, 3);
  const FunctionalSample xs = fixture::ou_sample(5000, 3, OuStart::stationary, g);
  for (int k = 0; k < 3; ++k) {
    const Moments v = product_moment(xs.values().col(k), xs.values().col(k));
    EXPECT_NEAR(v.mean, 1.5, 3.0 * v.se);
  }
  const Moments c = product_moment(xs.values().col(0), xs.values().col(2));
  EXPECT_NEAR(c.mean, 1.5 * std::exp(-1.0 / 3.0), 3.0 * c.se);
}

TEST(Ou, SameStreamSamePaths) {
  EXPECT_EQ(fixture::ou_sample(10, 4).values(), fixture::ou_sample(10, 4).values());
  EXPECT_NE(fixture::ou_sample(10, 4).values(), fixture::ou_sample(10, 5).values());
}

TEST(Ou, InvalidParameters) {
  OuParams p;
  p.theta = 0.0;
  EXPECT_THROW(OuSampler(p, Grid::uniform()), Error);
}

TEST(Scenario, Constants) {
  EXPECT_EQ(parse_scenario("simple:H1,1").scale, 0.25);
  EXPECT_EQ(parse_scenario("simple:H1,3").scale, 1.00);
  EXPECT_EQ(parse_scenario("simple:H2,2").scale, 0.20);
  EXPECT_EQ(parse_scenario("simple:H3,3").delta, 0.015);
  EXPECT_EQ(parse_scenario("composite:H1,0").delta, 0.0);
  EXPECT_EQ(parse_scenario("composite:H2,2").delta, 0.05);
  EXPECT_EQ(parse_scenario("composite:H3,3").shape, BetaShape::beta3);
  EXPECT_EQ(parse_scenario("simple:H0").shape, BetaShape::zero);
  EXPECT_EQ(parse_scenario("composite:H1,0/exp").noise, NoiseKind::exponential);
  EXPECT_TRUE(parse_scenario("composite:H3,0").is_null());
  EXPECT_FALSE(parse_scenario("simple:H1,1").is_null());
}

TEST(Scenario, BetaShapes) {
  const ScenarioSpec b1 = parse_scenario("composite:H1,0");
  EXPECT_NEAR(b1.beta(0.25), 1.0, 1e-15);
  const ScenarioSpec b2 = parse_scenario("composite:H2,0");
  EXPECT_NEAR(b2.beta(0.75), 0.75, 1e-15);
  const ScenarioSpec b3 = parse_scenario("composite:H3,0");
  EXPECT_NEAR(b3.beta(0.5), -0.5, 1e-15);
  const ScenarioSpec lin = parse_scenario("simple:H1,2");
  EXPECT_NEAR(lin.beta(1.0), 0.325, 1e-15);
  const ScenarioSpec sc = parse_scenario("simple:H2,3");
  EXPECT_NEAR(sc.beta(std::cbrt(0.25)), 0.5, 1e-12);
}

TEST(Scenario, RejectsUnknownNames) {
  for (const char* bad : {"simple:H4,1", "composite:H1,4", "simple:H1,0", "bogus", "simple:H1,1/cauchy",
                          "mixed:H1,1"}) {
    try {
      (void)parse_scenario(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::config) << bad;
    }
  }
}

TEST(Scenario, NoiselessNullResponseIsZero) {
  const FunctionalSample xs = fixture::ou_sample(20, 6);
  ScenarioSpec spec = parse_scenario("simple:H0");
  spec.noise_sd = 1e-12;
  Engine rng = make_stream(1, {stream_tag::noise});
  EXPECT_LE(scenario_response(xs, spec, rng).values().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Scenario, RegressionFunctionByQuadrature) {
  const FunctionalSample xs = fixture::ou_sample(5, 7);
  const ScenarioSpec spec = parse_scenario("composite:H2,3");
  const VectorXd m = regression_function(xs, spec);
  const VectorXd beta = evaluate_on(xs.grid(), [&](double t) { return spec.beta(t); });
  for (int i = 0; i < 5; ++i) {
    const VectorXd x = xs.curve(i).transpose();
    EXPECT_NEAR(m[i], inner_product(xs.grid(), x, beta) + 0.10 * inner_product(xs.grid(), x, x), 1e-12);
  }
}

TEST(Noise, ExponentialMoments) {
  ScenarioSpec spec = parse_scenario("simple:H0/exp");
  Engine rng = make_stream(8, {stream_tag::noise});
  const VectorXd e = draw_noise(1000000, spec, rng);
  const double mean = e.mean();
  const double sd = std::sqrt((e.array() - mean).square().mean());
  EXPECT_NEAR(mean, 0.0, 0.002);
  EXPECT_NEAR(sd, 0.1, 0.002);
  EXPECT_GE(e.minCoeff(), -0.1);
}

TEST(Noise, GaussianMoments) {
  const ScenarioSpec spec = parse_scenario("simple:H0");
  Engine rng = make_stream(9, {stream_tag::noise});
  const VectorXd e = draw_noise(1000000, spec, rng);
  EXPECT_NEAR(e.mean(), 0.0, 0.002);
  EXPECT_NEAR(std::sqrt(e.squaredNorm() / 1e6), 0.1, 0.002);
}

TEST(Snr, NoSignal) {
  EXPECT_EQ(snr(parse_scenario("simple:H0"), sampler(OuStart::stationary), 1000, 1), 1.0);
}

TEST(Snr, NeedsEnoughCurves) {
  EXPECT_THROW((void)snr(parse_scenario("simple:H0"), sampler(OuStart::stationary), 999, 1), Error);
}

TEST(Snr, QuotedLinearBlockAndCompositeNull) {
  const OuSampler s = sampler(OuStart::stationary);
  EXPECT_NEAR(snr(parse_scenario("simple:H1,3"), s, 10000, 10), 0.579, 0.03);
  EXPECT_NEAR(snr(parse_scenario("composite:H1,0"), s, 10000, 10), 0.177, 0.02);
}

TEST(Snr, SignalEnergyScalesQuadratically) {
  // E[m^2] = (1/snr - 1) sigma^2 scales as the square of the multiplier
  const OuSampler s = sampler(OuStart::stationary);
  const auto energy = [&](const char* name) { return 1.0 / snr(parse_scenario(name), s, 4000, 11) - 1.0; };
  EXPECT_NEAR(energy("simple:H1,3") / energy("simple:H1,1"), 16.0, 1e-9);
  EXPECT_NEAR(energy("simple:H2,3") / energy("simple:H2,1"), 25.0, 1e-9);
  EXPECT_NEAR(energy("simple:H3,2") / energy("simple:H3,1"), 4.0, 1e-9);
}

namespace {

PowerStudyConfig small_study(std::vector<std::string> scenarios, int M) {
  PowerStudyConfig cfg;
  for (const auto& s : scenarios) cfg.scenarios.push_back(parse_scenario(s));
  StudyMethod pcvm;
  pcvm.basis.dimension = DimensionPolicy::fixed_at(6);
  cfg.methods = {pcvm, StudyMethod{StudyTest::f_test, {}, {}}};
  cfg.sample_sizes = {30};
  cfg.M = M;
  cfg.B = 40;
  cfg.seed = 77;
  return cfg;
}

}  // namespace

TEST(PowerStudy, SingleReplicateGivesIndicators) {
  const PowerTable t = run_power_study(small_study({"simple:H0", "simple:H1,3"}, 1));
  ASSERT_EQ(t.rows.size(), 2u * 2u * 3u);
  for (const auto& r : t.rows) {
    EXPECT_TRUE(r.rate == 0.0 || r.rate == 1.0);
    EXPECT_EQ(r.se, 0.0);
    EXPECT_EQ(r.valid + r.failures, 1);
  }
}

TEST(PowerStudy, StandardErrorAndNesting) {
  const PowerTable t = run_power_study(small_study({"composite:H1,0", "composite:H1,3"}, 12));
  for (const auto& r : t.rows) {
    EXPECT_DOUBLE_EQ(r.rate, static_cast<double>(r.rejections) / r.valid);
    EXPECT_DOUBLE_EQ(r.se, std::sqrt(r.rate * (1.0 - r.rate) / r.valid));
  }
  // rejection at a smaller alpha implies rejection at a larger one
  for (const char* sc : {"composite:H1,0", "composite:H1,3"})
    for (const char* test : {"pcvm", "ftest"}) {
      const std::string est = std::string(test) == "pcvm" ? "bspline" : "-";
      const auto* a10 = t.find(sc, test, est, 30, 0.10);
      const auto* a05 = t.find(sc, test, est, 30, 0.05);
      const auto* a01 = t.find(sc, test, est, 30, 0.01);
      ASSERT_TRUE(a10 && a05 && a01) << sc << " " << test;
      EXPECT_GE(a10->rejections, a05->rejections);
      EXPECT_GE(a05->rejections, a01->rejections);
    }
}

TEST(PowerStudy, DeterministicAndWorkerIndependent) {
  PowerStudyConfig cfg = small_study({"simple:H2,3"}, 6);
  cfg.workers = 1;
  const PowerTable a = run_power_study(cfg);
  cfg.workers = 4;
  const PowerTable b = run_power_study(cfg);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].rejections, b.rows[k].rejections);
    EXPECT_EQ(a.rows[k].mean_p, b.rows[k].mean_p);
  }
}

TEST(PowerStudy, ScenarioRowsDoNotDependOnOtherScenarios) {
  const PowerTable alone = run_power_study(small_study({"simple:H1,2"}, 8));
  const PowerTable both = run_power_study(small_study({"simple:H0", "simple:H1,2"}, 8));
  for (const auto& r : alone.rows) {
    const auto* other = both.find(r.scenario, r.test, r.estimator, r.n, r.alpha);
    ASSERT_NE(other, nullptr);
    EXPECT_EQ(other->rejections, r.rejections);
  }
}

TEST(PowerStudy, FailuresAreRecorded) {
  PowerStudyConfig cfg = small_study({"composite:H1,0"}, 3);
  cfg.sample_sizes = {5};  // n <= p for a 6-dimensional design
  cfg.methods.resize(1);
  const PowerTable t = run_power_study(cfg);
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.failures, 3);
    EXPECT_EQ(r.valid, 0);
  }
}

TEST(PowerStudy, InvalidConfig) {
  PowerStudyConfig cfg = small_study({"simple:H0"}, 0);
  EXPECT_THROW((void)run_power_study(cfg), Error);
  cfg.M = 1;
  cfg.scenarios.clear();
  EXPECT_THROW((void)run_power_study(cfg), Error);
}
