#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flmgof/basis.hpp"
#include "flmgof/errors.hpp"
#include "flmgof/functional.hpp"

namespace flmgof {

/// gcv uses the squared denominator (1 - df/n)^2; gcv_linear the
/// unsquared one.
enum class Criterion { gcv, gcv_linear, pcv, bic };

inline std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::gcv: return "gcv";
    case Criterion::gcv_linear: return "gcv-linear";
    case Criterion::pcv: return "pcv";
    case Criterion::bic: return "bic";
  }
  return "?";
}

inline Criterion parse_criterion(const std::string& s) {
  if (s == "gcv") return Criterion::gcv;
  if (s == "gcv-linear") return Criterion::gcv_linear;
  if (s == "pcv") return Criterion::pcv;
  if (s == "bic") return Criterion::bic;
  fail(ErrorKind::config, "unknown selection criterion '" + s + "'");
}

/// What a fit context reports for one candidate dimension.
struct CandidateFit {
  double rss = 0.0;       // residual sum of squares
  double df = 0.0;        // degrees of freedom used
  double n_obs = 0.0;     // number of fitted observations
  double press = std::numeric_limits<double>::quiet_NaN();  // mean LOO error
};

struct CandidateScore {
  int p = 0;
  bool feasible = false;
  double rss = std::numeric_limits<double>::quiet_NaN();
  double value = std::numeric_limits<double>::quiet_NaN();
};

struct SelectionResult {
  Criterion criterion = Criterion::gcv;
  int selected = 0;
  std::vector<CandidateScore> scores;
};

/// GCV(p) = RSS / (n (1 - df/n)^2), the linear variant drops the square;
/// BIC(p) = n log(RSS/n) + df log n; PCV(p) = mean squared leave-one-out
/// prediction error.
inline double criterion_value(Criterion c, const CandidateFit& fit) {
  const double n = fit.n_obs;
  switch (c) {
    case Criterion::gcv:
    case Criterion::gcv_linear: {
      const double shrink = 1.0 - fit.df / n;
      if (!(shrink > 0.0)) return std::numeric_limits<double>::infinity();
      return fit.rss /
             (n * (c == Criterion::gcv ? shrink * shrink : shrink));
    }
    case Criterion::bic:
      return n * std::log(fit.rss / n) + fit.df * std::log(n);
    case Criterion::pcv:
      return fit.press;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Context concept: `std::vector<std::optional<CandidateFit>>
/// evaluate(std::span<const int> candidates, bool need_press) const`;
/// nullopt marks an infeasible candidate.
template <class Context>
SelectionResult select_dimension(Criterion criterion,
                                 std::span<const int> candidates,
                                 const Context& context) {
  require(!candidates.empty(), ErrorKind::selection,
          "dimension selection needs at least one candidate");
  const auto fits = context.evaluate(candidates, criterion == Criterion::pcv);
  SelectionResult out;
  out.criterion = criterion;
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    CandidateScore score;
    score.p = candidates[k];
    if (fits[k]) {
      score.rss = fits[k]->rss;
      score.value = criterion_value(criterion, *fits[k]);
      score.feasible = !std::isnan(score.value);
    }
    // first minimum wins ties
    if (score.feasible && (!found || score.value < best)) {
      best = score.value;
      out.selected = score.p;
      found = true;
    }
    out.scores.push_back(score);
  }
  require(found, ErrorKind::selection,
          "no feasible candidate dimension among " +
              std::to_string(candidates.size()));
  return out;
}

/// Representation of the curves themselves in fixed bases of varying size;
/// RSS is the total squared L2 projection residual and the per-curve
/// observation count is the grid size.
class RepresentationContext {
 public:
  RepresentationContext(const FunctionalSample& xs, BasisKind kind,
                        int order = 4)
      : xs_(xs), kind_(kind), order_(order) {
    require(!is_data_driven(kind), ErrorKind::config,
            "representation selection needs a fixed basis kind");
  }

  std::vector<std::optional<CandidateFit>> evaluate(
      std::span<const int> candidates, bool need_press) const {
    std::vector<std::optional<CandidateFit>> out;
    const auto t = static_cast<double>(xs_.grid().size());
    const VectorXd& w = xs_.grid().weights();
    for (int p : candidates) {
      try {
        const auto basis = std::make_shared<const BasisSystem>(
            build_basis(kind_, p, xs_.grid(), order_));
        const auto cs = project_sample(xs_, basis);
        const MatrixXd resid = xs_.values() - reconstruct(cs);
        CandidateFit fit;
        // scaled to grid-point units so n_obs = T matches the L2 residual
        fit.rss = (resid.array().square().matrix() * w).sum() * t /
                  xs_.grid().length();
        fit.df = p;
        fit.n_obs = t;
        if (need_press) {
          // hat diagonal of the weighted projection per grid point
          const MatrixXd& e = basis->eval;
          const MatrixXd ginv_e =
              basis->gram.llt().solve(e);  // p x T
          double press = 0.0;
          for (Eigen::Index k = 0; k < e.cols(); ++k) {
            const double h = w[k] * e.col(k).dot(ginv_e.col(k));
            if (h >= 1.0 - 1e-12) { press = std::numeric_limits<double>::infinity(); break; }
            press += (resid.col(k).array() / (1.0 - h)).square().sum();
          }
          fit.press = press / (t * static_cast<double>(xs_.size()));
        }
        out.emplace_back(fit);
      } catch (const Error&) {
        out.emplace_back(std::nullopt);
      }
    }
    return out;
  }

 private:
  const FunctionalSample& xs_;
  BasisKind kind_;
  int order_;
};

}  // namespace flmgof
