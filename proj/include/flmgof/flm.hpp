#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flmgof/basis.hpp"
#include "flmgof/errors.hpp"
#include "flmgof/functional.hpp"
#include "flmgof/selection.hpp"

namespace flmgof {

/// How to choose p: a fixed value, or a criterion over candidates.
struct DimensionPolicy {
  std::optional<int> fixed;
  Criterion criterion = Criterion::gcv;
  std::vector<int> candidates;  // empty means the kind's default range

  static DimensionPolicy fixed_at(int p) { return {p, Criterion::gcv, {}}; }
  static DimensionPolicy automatic(Criterion c, std::vector<int> cands = {}) {
    return {std::nullopt, c, std::move(cands)};
  }
  [[nodiscard]] std::string describe() const {
    return fixed ? std::to_string(*fixed) : "auto-" + to_string(criterion);
  }
};

struct BasisConfig {
  BasisKind kind = BasisKind::bspline;
  int order = 4;
  DimensionPolicy dimension = DimensionPolicy::automatic(Criterion::gcv);
};

/// p in {5..20} for B-splines, {1..10} for data-driven and Fourier kinds
/// (Fourier keeps the odd values), clipped to p < n.
inline std::vector<int> default_candidates(BasisKind kind, Eigen::Index n) {
  std::vector<int> out;
  const int lo = kind == BasisKind::bspline ? 5 : 1;
  const int hi = kind == BasisKind::bspline ? 20 : 10;
  for (int p = lo; p <= hi; ++p) {
    if (kind == BasisKind::fourier && p % 2 == 0) continue;
    if (p < n) out.push_back(p);
  }
  return out;
}

/// Cross-Gram J = (<Psi_i, theta_j>) and Z = C J.
inline MatrixXd build_design(const CoefficientSet& coeffs,
                             const BasisSystem& beta_basis) {
  require_same_grid(coeffs.basis->grid, beta_basis.grid);
  const MatrixXd j =
      cross_inner(beta_basis.grid, coeffs.basis->eval, beta_basis.eval);
  return coeffs.coeffs * j;
}

/// beta on the grid together with its basis coefficients.
struct BetaFunction {
  VectorXd values;
  std::shared_ptr<const BasisSystem> basis;  // may be null for a raw curve
  VectorXd coeffs;
};

/// Functional linear model fitted by least squares on a p-truncated basis,
/// with the same basis used for X and beta.
struct FlmFit {
  std::shared_ptr<const BasisSystem> basis;
  CoefficientSet coeffs;
  VectorXd b;
  MatrixXd design;
  VectorXd fitted;
  VectorXd residuals;
  MatrixXd annihilator;
  double df = 0.0;
  int p = 0;
  bool intercept = false;  // annihilator also removes the mean
  std::optional<SelectionResult> selection;

  [[nodiscard]] BetaFunction beta() const {
    return {(b.transpose() * basis->eval).transpose(), basis, b};
  }
};

namespace detail {

inline std::shared_ptr<const BasisSystem> make_basis(
    const FunctionalSample& xs, const ResponseVector& ys,
    const BasisConfig& cfg, int p) {
  switch (cfg.kind) {
    case BasisKind::fpc:
      return std::make_shared<const BasisSystem>(fpc_basis(xs, p));
    case BasisKind::fpls: {
      auto basis = fpls_basis(xs, ys, p);
      require(basis.size() == p, ErrorKind::rank,
              "FPLS produced only " + std::to_string(basis.size()) + " of " +
                  std::to_string(p) + " components");
      return std::make_shared<const BasisSystem>(std::move(basis));
    }
    default:
      return std::make_shared<const BasisSystem>(
          build_basis(cfg.kind, p, xs.grid(), cfg.order));
  }
}

inline FlmFit fit_with_basis(const FunctionalSample& xs,
                             const ResponseVector& ys,
                             std::shared_ptr<const BasisSystem> basis,
                             bool intercept = false) {
  const Eigen::Index n = xs.size();
  const int p = basis->size();
  require(n > p, ErrorKind::insufficient,
          "FLM fit needs n > p (n=" + std::to_string(n) +
              ", p=" + std::to_string(p) + ")");
  FlmFit fit;
  fit.basis = basis;
  fit.coeffs = project_sample(xs, basis);
  fit.design = build_design(fit.coeffs, *basis);
  fit.p = p;

  Eigen::ColPivHouseholderQR<MatrixXd> qr(fit.design);
  require(qr.rank() == p, ErrorKind::singular,
          "singular design: rank " + std::to_string(qr.rank()) + " < p = " +
              std::to_string(p));
  fit.b = qr.solve(ys.values());
  fit.fitted = fit.design * fit.b;
  fit.residuals = ys.values() - fit.fitted;
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, p);
  if (intercept) {
    // centered data: refitting a bootstrap response re-centers it too, so
    // the annihilator is the one of [1, Z]
    MatrixXd zi(n, p + 1);
    zi << VectorXd::Ones(n), fit.design;
    Eigen::HouseholderQR<MatrixXd> qri(zi);
    q = qri.householderQ() * MatrixXd::Identity(n, p + 1);
  }
  fit.annihilator = MatrixXd::Identity(n, n) - q * q.transpose();
  fit.df = p;
  fit.intercept = intercept;
  return fit;
}

}  // namespace detail

/// Regression of Y on the basis design for varying p. PCV uses the
/// closed-form leave-one-out residual e_i / (1 - h_ii) for fixed bases and
/// rebuilds the basis without observation i for data-driven ones.
class RegressionContext {
 public:
  RegressionContext(const FunctionalSample& xs, const ResponseVector& ys,
                    BasisConfig cfg)
      : xs_(xs), ys_(ys), cfg_(std::move(cfg)) {}

  std::vector<std::optional<CandidateFit>> evaluate(
      std::span<const int> candidates, bool need_press) const {
    std::vector<std::optional<CandidateFit>> out(candidates.size());
    const Eigen::Index n = xs_.size();
    const bool driven = is_data_driven(cfg_.kind);
    std::shared_ptr<const BasisSystem> full;
    if (driven) {
      const int pmax = *std::max_element(candidates.begin(), candidates.end());
      full = largest_basis(xs_, ys_, pmax);
    }
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const int p = candidates[k];
      try {
        auto basis = driven ? sub_basis(full, p)
                            : detail::make_basis(xs_, ys_, cfg_, p);
        const FlmFit fit = detail::fit_with_basis(xs_, ys_, basis);
        CandidateFit cf;
        cf.rss = fit.residuals.squaredNorm();
        cf.df = fit.df;
        cf.n_obs = static_cast<double>(n);
        if (need_press && !driven) {
          double press = 0.0;
          for (Eigen::Index i = 0; i < n; ++i) {
            const double h = 1.0 - fit.annihilator(i, i);
            require(h < 1.0 - 1e-12, ErrorKind::singular, "leverage one");
            const double e = fit.residuals[i] / (1.0 - h);
            press += e * e;
          }
          cf.press = press / static_cast<double>(n);
        }
        out[k] = cf;
      } catch (const Error&) {
      }
    }
    if (need_press && driven) leave_one_out(candidates, out);
    return out;
  }

 private:
  std::shared_ptr<const BasisSystem> largest_basis(const FunctionalSample& xs,
                                                   const ResponseVector& ys,
                                                   int pmax) const {
    try {
      if (cfg_.kind == BasisKind::fpc) {
        const int cap = static_cast<int>(
            std::min<Eigen::Index>(xs.size() - 1, xs.grid().size()));
        int p = std::min(pmax, cap);
        while (p >= 1) {
          try {
            return std::make_shared<const BasisSystem>(fpc_basis(xs, p));
          } catch (const Error&) {
            --p;
          }
        }
        return nullptr;
      }
      return std::make_shared<const BasisSystem>(fpls_basis(xs, ys, pmax));
    } catch (const Error&) {
      return nullptr;
    }
  }

  static std::shared_ptr<const BasisSystem> sub_basis(
      const std::shared_ptr<const BasisSystem>& full, int p) {
    require(full != nullptr && p <= full->size(), ErrorKind::rank,
            "data-driven basis smaller than " + std::to_string(p));
    if (p == full->size()) return full;
    return std::make_shared<const BasisSystem>(full->leading(p));
  }

  void leave_one_out(std::span<const int> candidates,
                     std::vector<std::optional<CandidateFit>>& out) const {
    const Eigen::Index n = xs_.size();
    const auto m = static_cast<Eigen::Index>(xs_.grid().size());
    int pmax = 0;
    for (std::size_t k = 0; k < candidates.size(); ++k)
      if (out[k]) pmax = std::max(pmax, candidates[k]);
    if (pmax == 0) return;
    std::vector<double> press(candidates.size(), 0.0);
    std::vector<bool> ok(candidates.size(), true);
    MatrixXd xsub(n - 1, m);
    VectorXd ysub(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index r = 0, s = 0; r < n; ++r) {
        if (r == i) continue;
        xsub.row(s) = xs_.values().row(r);
        ysub[s] = ys_.values()[r];
        ++s;
      }
      const FunctionalSample xs_i(xs_.grid(), xsub);
      const ResponseVector ys_i(ysub);
      const auto full = largest_basis(xs_i, ys_i, pmax);
      const FunctionalSample held(xs_.grid(), xs_.values().row(i));
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (!out[k] || !ok[k]) continue;
        try {
          const auto basis = sub_basis(full, candidates[k]);
          const FlmFit fit = detail::fit_with_basis(xs_i, ys_i, basis);
          const auto c = project_sample(held, basis);
          const double pred = (build_design(c, *basis) * fit.b)[0];
          const double e = ys_.values()[i] - pred;
          press[k] += e * e;
        } catch (const Error&) {
          ok[k] = false;
        }
      }
    }
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (!out[k]) continue;
      if (ok[k])
        out[k]->press = press[k] / static_cast<double>(n);
      else
        out[k].reset();
    }
  }

  const FunctionalSample& xs_;
  const ResponseVector& ys_;
  BasisConfig cfg_;
};

/// Fits the FLM; the dimension comes from the policy (fixed or selected).
/// With `intercept` the inputs must be centered and the annihilator also
/// removes the mean.
inline FlmFit fit_flm(const FunctionalSample& xs, const ResponseVector& ys,
                      const BasisConfig& cfg, bool intercept = false) {
  require(xs.size() == ys.size(), ErrorKind::dimension,
          "FLM fit: " + std::to_string(xs.size()) + " curves but " +
              std::to_string(ys.size()) + " responses");
  if (cfg.dimension.fixed) {
    return detail::fit_with_basis(
        xs, ys, detail::make_basis(xs, ys, cfg, *cfg.dimension.fixed),
        intercept);
  }
  std::vector<int> cands = cfg.dimension.candidates.empty()
                               ? default_candidates(cfg.kind, xs.size())
                               : cfg.dimension.candidates;
  const RegressionContext ctx(xs, ys, cfg);
  SelectionResult sel = select_dimension(cfg.dimension.criterion, cands, ctx);
  FlmFit fit = detail::fit_with_basis(
      xs, ys, detail::make_basis(xs, ys, cfg, sel.selected), intercept);
  fit.selection = std::move(sel);
  return fit;
}

/// Coefficients of a fixed beta_0 curve in the basis.
inline BetaFunction project_beta(const VectorXd& beta_values,
                                 std::shared_ptr<const BasisSystem> basis) {
  const FunctionalSample one(basis->grid, beta_values.transpose());
  const auto cs = project_sample(one, basis);
  return {beta_values, basis, cs.coeffs.row(0).transpose()};
}

/// eps_i = Y_i - <X_i^(p), beta_0^(p)> = Y_i - (C Psi b0)_i.
inline VectorXd residuals_simple(const CoefficientSet& coeffs,
                                 const ResponseVector& ys,
                                 const BetaFunction& beta0) {
  require(coeffs.coeffs.rows() == ys.size(), ErrorKind::dimension,
          "simple residuals: coefficient rows do not match responses");
  require(beta0.coeffs.size() == coeffs.basis->size(), ErrorKind::dimension,
          "beta_0 coefficients do not match the basis size");
  return ys.values() - coeffs.coeffs * (coeffs.basis->gram * beta0.coeffs);
}

}  // namespace flmgof
