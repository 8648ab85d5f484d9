#pragma once

#include <memory>
#include <optional>
#include <string>

#include "flmgof/basis.hpp"
#include "flmgof/bootstrap.hpp"
#include "flmgof/errors.hpp"
#include "flmgof/flm.hpp"
#include "flmgof/functional.hpp"
#include "flmgof/pcvm.hpp"
#include "flmgof/selection.hpp"

namespace flmgof {

enum class Hypothesis { simple, composite };

inline std::string to_string(Hypothesis h) {
  return h == Hypothesis::simple ? "simple" : "composite";
}

inline Hypothesis parse_hypothesis(const std::string& s) {
  if (s == "simple") return Hypothesis::simple;
  if (s == "composite") return Hypothesis::composite;
  fail(ErrorKind::config, "unknown hypothesis '" + s + "'");
}

/// Per-estimator defaults: B-splines by GCV, FPC by BIC, FPLS by PCV.
inline BasisConfig default_basis_config(BasisKind kind) {
  BasisConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case BasisKind::fpc:
      cfg.dimension = DimensionPolicy::automatic(Criterion::bic);
      break;
    case BasisKind::fpls:
      cfg.dimension = DimensionPolicy::automatic(Criterion::pcv);
      break;
    default:
      cfg.dimension = DimensionPolicy::automatic(Criterion::gcv);
  }
  return cfg;
}

struct PcvmTestConfig {
  Hypothesis hypothesis = Hypothesis::composite;
  BasisConfig basis = default_basis_config(BasisKind::bspline);
  std::optional<VectorXd> beta0;  // simple null on the grid; zero if absent
  BootstrapOptions bootstrap;
  std::optional<bool> center;  // default: composite yes, simple no

  [[nodiscard]] bool centers() const {
    return center.value_or(hypothesis == Hypothesis::composite);
  }
};

struct PcvmTestResult {
  Hypothesis hypothesis = Hypothesis::composite;
  std::shared_ptr<const BasisSystem> basis;
  int p = 0;
  std::optional<SelectionResult> selection;
  VectorXd residuals;
  std::optional<FlmFit> fit;  // composite only
  CalibrationResult calibration;
};

namespace detail {

/// Basis for the simple null: fixed kinds choose p on the representation
/// of the curves; data-driven kinds need a fixed p.
inline std::pair<std::shared_ptr<const BasisSystem>,
                 std::optional<SelectionResult>>
simple_null_basis(const FunctionalSample& xs, const ResponseVector& ys,
                  const BasisConfig& cfg) {
  if (cfg.dimension.fixed)
    return {make_basis(xs, ys, cfg, *cfg.dimension.fixed), std::nullopt};
  require(!is_data_driven(cfg.kind), ErrorKind::config,
          "simple null with a " + to_string(cfg.kind) +
              " basis needs a fixed p");
  std::vector<int> cands = cfg.dimension.candidates.empty()
                               ? default_candidates(cfg.kind, 1 << 30)
                               : cfg.dimension.candidates;
  const RepresentationContext ctx(xs, cfg.kind, cfg.order);
  SelectionResult sel = select_dimension(cfg.dimension.criterion, cands, ctx);
  return {make_basis(xs, ys, cfg, sel.selected), std::move(sel)};
}

}  // namespace detail

/// Centering, basis and fit, A0, then wild bootstrap.
inline PcvmTestResult run_pcvm_test(const FunctionalSample& xs_in,
                                    const ResponseVector& ys_in,
                                    const PcvmTestConfig& cfg) {
  require(xs_in.size() == ys_in.size(), ErrorKind::dimension,
          "sample has " + std::to_string(xs_in.size()) + " curves but " +
              std::to_string(ys_in.size()) + " responses");
  std::optional<std::pair<FunctionalSample, ResponseVector>> centered;
  const bool center = cfg.centers();
  if (center) centered.emplace(center_sample(xs_in, ys_in));
  const FunctionalSample& xs = centered ? centered->first : xs_in;
  const ResponseVector& ys = centered ? centered->second : ys_in;

  PcvmTestResult out;
  out.hypothesis = cfg.hypothesis;
  const unsigned workers = cfg.bootstrap.workers;
  if (cfg.hypothesis == Hypothesis::composite) {
    FlmFit fit = fit_flm(xs, ys, cfg.basis, center);
    const PcvmComponents comps = build_adot(fit.coeffs, workers);
    out.calibration = calibrate_composite(fit, comps, cfg.bootstrap);
    out.basis = fit.basis;
    out.p = fit.p;
    out.selection = fit.selection;
    out.residuals = fit.residuals;
    out.fit = std::move(fit);
    return out;
  }

  auto [basis, selection] = detail::simple_null_basis(xs, ys, cfg.basis);
  const CoefficientSet coeffs = project_sample(xs, basis);
  const VectorXd beta_values =
      cfg.beta0 ? *cfg.beta0
                : VectorXd::Zero(static_cast<Eigen::Index>(xs.grid().size()));
  require(beta_values.size() == static_cast<Eigen::Index>(xs.grid().size()),
          ErrorKind::dimension, "beta_0 does not match the grid size");
  const BetaFunction beta0 = project_beta(beta_values, basis);
  out.residuals = residuals_simple(coeffs, ys, beta0);
  const PcvmComponents comps = build_adot(coeffs, workers);
  BootstrapOptions boot = cfg.bootstrap;
  boot.recenter = center;
  out.calibration = calibrate_simple(out.residuals, comps, boot);
  out.basis = basis;
  out.p = basis->size();
  out.selection = std::move(selection);
  return out;
}

}  // namespace flmgof
