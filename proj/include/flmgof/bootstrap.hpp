#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "flmgof/errors.hpp"
#include "flmgof/flm.hpp"
#include "flmgof/parallel.hpp"
#include "flmgof/pcvm.hpp"
#include "flmgof/rng.hpp"

namespace flmgof {

/// Two-point multiplier law with atoms (1 -+ sqrt5)/2.
struct GoldenMultiplier {
  static inline const double sqrt5 = std::sqrt(5.0);
  static inline const double low = (1.0 - sqrt5) / 2.0;
  static inline const double high = (1.0 + sqrt5) / 2.0;
  static inline const double p_low = (5.0 + sqrt5) / 10.0;
  static inline const double p_high = (5.0 - sqrt5) / 10.0;

  static double mean() { return p_low * low + p_high * high; }
  static double variance() {
    return p_low * low * low + p_high * high * high - mean() * mean();
  }
  static double draw(Engine& rng) { return uniform01(rng) < p_low ? low : high; }
};

inline VectorXd draw_multipliers(Eigen::Index n, Engine& rng) {
  require(n >= 1, ErrorKind::config, "multipliers need n >= 1");
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = GoldenMultiplier::draw(rng);
  return v;
}

struct CalibrationResult {
  double statistic = 0.0;
  std::vector<double> replicates;  // empty when not kept
  std::int64_t exceedances = 0;    // #{replicate >= statistic}
  double p_value = 1.0;
  int B = 0;
  std::uint64_t seed = 0;
};

struct BootstrapOptions {
  int B = 1000;
  std::uint64_t seed = 0;
  bool keep_replicates = true;
  bool recenter = false;  // simple null: subtract the mean of V e
  unsigned workers = 0;
};

namespace detail {

/// Replicate b uses make_stream(seed, {bootstrap, b}); `resample(v, out)`
/// maps multipliers to bootstrap residuals.
template <class Resample>
CalibrationResult calibrate(double statistic, const PcvmComponents& comps,
                            const BootstrapOptions& opt, Resample&& resample) {
  require(opt.B >= 1, ErrorKind::config, "bootstrap needs B >= 1");
  const Eigen::Index n = comps.n();
  std::vector<double> reps(static_cast<std::size_t>(opt.B));
  parallel_for(
      0, static_cast<std::size_t>(opt.B),
      [&](std::size_t b) {
        Engine rng = make_stream(opt.seed, {stream_tag::bootstrap, b});
        const VectorXd v = draw_multipliers(n, rng);
        VectorXd e(n);
        resample(v, e);
        reps[b] = pcvm_statistic(e, comps);
      },
      opt.workers);
  CalibrationResult out;
  out.statistic = statistic;
  out.B = opt.B;
  out.seed = opt.seed;
  for (double r : reps)
    if (statistic <= r) ++out.exceedances;
  out.p_value = static_cast<double>(out.exceedances) / opt.B;
  if (opt.keep_replicates) out.replicates = std::move(reps);
  return out;
}

}  // namespace detail

/// Composite null: residual marks V_i e_i pushed through the fixed
/// annihilator, so each replicate re-estimates beta with the original design.
inline CalibrationResult calibrate_composite(const FlmFit& fit,
                                             const PcvmComponents& comps,
                                             const BootstrapOptions& opt) {
  require(fit.residuals.size() == comps.n(), ErrorKind::dimension,
          "fit and A0 come from samples of different size");
  const double stat = pcvm_statistic(fit.residuals, comps);
  const MatrixXd& m = fit.annihilator;
  const VectorXd& e = fit.residuals;
  return detail::calibrate(stat, comps, opt, [&](const VectorXd& v, VectorXd& out) {
    out.noalias() = m * v.cwiseProduct(e);
  });
}

/// Simple null: bootstrap residuals are V_i e_i with no refit, minus their
/// mean when the sample was centered.
inline CalibrationResult calibrate_simple(const VectorXd& residuals,
                                          const PcvmComponents& comps,
                                          const BootstrapOptions& opt) {
  require(residuals.size() == comps.n(), ErrorKind::dimension,
          "residuals and A0 come from samples of different size");
  const double stat = pcvm_statistic(residuals, comps);
  return detail::calibrate(stat, comps, opt, [&](const VectorXd& v, VectorXd& out) {
    out = v.cwiseProduct(residuals);
    if (opt.recenter) out.array() -= out.mean();
  });
}

}  // namespace flmgof
