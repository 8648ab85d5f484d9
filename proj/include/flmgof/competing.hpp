#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "flmgof/bootstrap.hpp"
#include "flmgof/errors.hpp"
#include "flmgof/functional.hpp"
#include "flmgof/parallel.hpp"
#include "flmgof/rng.hpp"

namespace flmgof {

enum class CompetingMethod { f_test, delsol };

inline std::string to_string(CompetingMethod m) {
  return m == CompetingMethod::f_test ? "ftest" : "delsol";
}

/// K(t) = 2 phi(|t|).
inline double delsol_kernel(double t) {
  return 2.0 * std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

/// Fixed bandwidth, or PCV over a grid (empty grid: distance quantiles).
struct KernelConfig {
  std::optional<double> bandwidth;
  std::vector<double> pcv_grid;
};

/// L2 distances between curves, from the curve Gram matrix.
inline MatrixXd curve_distances(const FunctionalSample& xs) {
  const MatrixXd g = cross_inner(xs.grid(), xs.values(), xs.values());
  const Eigen::Index n = xs.size();
  MatrixXd d = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) =
          std::sqrt(std::max(0.0, g(i, i) + g(j, j) - 2.0 * g(i, j)));
  return d;
}

namespace detail {

/// Gram matrix of the centered curves; D_n^2 = y_c^T G y_c / n^2.
inline MatrixXd centered_gram(const FunctionalSample& xs) {
  const Eigen::RowVectorXd mean = xs.values().colwise().mean();
  const MatrixXd xc = xs.values().rowwise() - mean;
  return cross_inner(xs.grid(), xc, xc);
}

inline double f_from_gram(const MatrixXd& g, const VectorXd& y) {
  const double n = static_cast<double>(y.size());
  const VectorXd yc = y.array() - y.mean();
  return std::sqrt(std::max(0.0, yc.dot(g * yc))) / n;
}

inline MatrixXd kernel_matrix(const MatrixXd& dist, double h) {
  return dist.unaryExpr([h](double d) { return delsol_kernel(d / h); });
}

inline double delsol_from_kernel(const MatrixXd& k, const VectorXd& y) {
  return (k * y).squaredNorm() / static_cast<double>(y.size());
}

}  // namespace detail

/// D_n = || n^{-1} sum_i (X_i - Xbar)(Y_i - Ybar) ||.
inline double f_test_statistic(const FunctionalSample& xs,
                               const ResponseVector& ys) {
  require(xs.size() == ys.size(), ErrorKind::dimension,
          "F-test: " + std::to_string(xs.size()) + " curves but " +
              std::to_string(ys.size()) + " responses");
  require(xs.size() >= 2, ErrorKind::insufficient, "F-test needs n >= 2");
  const Eigen::RowVectorXd xbar = xs.values().colwise().mean();
  const VectorXd yc = ys.values().array() - ys.values().mean();
  const MatrixXd xc = xs.values().rowwise() - xbar;
  const VectorXd curve =
      (xc.transpose() * yc) / static_cast<double>(xs.size());
  return l2_norm(xs.grid(), curve);
}

/// T_n = n^{-1} sum_j ( sum_i Y_i K(||X_j - X_i|| / h) )^2.
inline double delsol_statistic(const FunctionalSample& xs,
                               const ResponseVector& ys, double h) {
  require(xs.size() == ys.size(), ErrorKind::dimension,
          "Delsol test: " + std::to_string(xs.size()) + " curves but " +
              std::to_string(ys.size()) + " responses");
  require(h > 0.0 && std::isfinite(h), ErrorKind::config,
          "bandwidth must be positive");
  return detail::delsol_from_kernel(detail::kernel_matrix(curve_distances(xs), h),
                                    ys.values());
}

/// Type-7 quantiles of the off-diagonal distances: a lower tail down to the
/// smallest distance followed by 0.05, 0.10, ..., 0.50.
inline std::vector<double> default_bandwidth_grid(const MatrixXd& dist) {
  std::vector<double> d;
  for (Eigen::Index i = 0; i < dist.rows(); ++i)
    for (Eigen::Index j = i + 1; j < dist.cols(); ++j) d.push_back(dist(i, j));
  require(!d.empty(), ErrorKind::insufficient,
          "bandwidth grid needs at least two curves");
  std::sort(d.begin(), d.end());
  std::vector<double> probs = {0.0, 0.001, 0.0025, 0.005, 0.01, 0.025};
  for (int k = 1; k <= 10; ++k) probs.push_back(0.05 * k);
  std::vector<double> out;
  for (double q : probs) {
    const double pos = q * static_cast<double>(d.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, d.size() - 1);
    out.push_back(d[lo] + (pos - static_cast<double>(lo)) * (d[hi] - d[lo]));
  }
  return out;
}

struct BandwidthChoice {
  double h = 0.0;
  std::vector<double> grid;
  std::vector<double> scores;  // NaN where every neighborhood is empty
};

/// Leave-one-out Nadaraya-Watson prediction error over the grid; the first
/// minimum is selected.
inline BandwidthChoice pcv_bandwidth(const MatrixXd& dist, const VectorXd& y,
                                     std::vector<double> grid = {}) {
  require(dist.rows() == y.size(), ErrorKind::dimension,
          "distance matrix does not match the response");
  if (grid.empty()) grid = default_bandwidth_grid(dist);
  BandwidthChoice out;
  out.grid = grid;
  const Eigen::Index n = y.size();
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (double h : grid) {
    double score = std::numeric_limits<double>::quiet_NaN();
    if (h > 0.0 && std::isfinite(h)) {
      const MatrixXd k = detail::kernel_matrix(dist, h);
      double sse = 0.0;
      bool ok = true;
      for (Eigen::Index j = 0; j < n && ok; ++j) {
        const double den = k.col(j).sum() - k(j, j);
        if (!(den > 0.0)) {
          ok = false;
          break;
        }
        const double num = k.col(j).dot(y) - k(j, j) * y[j];
        const double e = y[j] - num / den;
        sse += e * e;
      }
      if (ok) score = sse / static_cast<double>(n);
    }
    out.scores.push_back(score);
    if (!std::isnan(score) && (!found || score < best)) {
      best = score;
      out.h = h;
      found = true;
    }
  }
  require(found, ErrorKind::selection,
          "every bandwidth gives empty leave-one-out neighborhoods");
  return out;
}

inline BandwidthChoice pcv_bandwidth(const FunctionalSample& xs,
                                     const ResponseVector& ys,
                                     std::vector<double> grid = {}) {
  return pcv_bandwidth(curve_distances(xs), ys.values(), std::move(grid));
}

struct CompetingResult {
  CompetingMethod method = CompetingMethod::f_test;
  double statistic = 0.0;
  std::vector<double> replicates;
  std::int64_t exceedances = 0;
  double p_value = 1.0;
  int B = 0;
  std::uint64_t seed = 0;
  double bandwidth = std::numeric_limits<double>::quiet_NaN();  // delsol only
};

/// Golden wild bootstrap under the no-effect null. The F-test resamples
/// V (Y - Ybar). Delsol resamples V Y, or V (Y - Ybar) recentered when
/// opt.recenter is set. The Delsol bandwidth is resolved once on the
/// original sample.
inline CompetingResult calibrate_competing(CompetingMethod method,
                                           const FunctionalSample& xs,
                                           const ResponseVector& ys,
                                           const BootstrapOptions& opt,
                                           const KernelConfig& kernel = {}) {
  require(xs.size() == ys.size(), ErrorKind::dimension,
          "competing test: " + std::to_string(xs.size()) + " curves but " +
              std::to_string(ys.size()) + " responses");
  require(xs.size() >= 2, ErrorKind::insufficient,
          "competing tests need n >= 2");
  require(opt.B >= 1, ErrorKind::config, "bootstrap needs B >= 1");
  const Eigen::Index n = xs.size();
  const bool centered = method == CompetingMethod::f_test || opt.recenter;
  const VectorXd yc = centered
                          ? VectorXd(ys.values().array() - ys.values().mean())
                          : ys.values();

  CompetingResult out;
  out.method = method;
  out.B = opt.B;
  out.seed = opt.seed;

  MatrixXd kernel_or_gram;
  if (method == CompetingMethod::f_test) {
    kernel_or_gram = detail::centered_gram(xs);
  } else {
    const MatrixXd dist = curve_distances(xs);
    out.bandwidth = kernel.bandwidth
                        ? *kernel.bandwidth
                        : pcv_bandwidth(dist, yc, kernel.pcv_grid).h;
    require(out.bandwidth > 0.0, ErrorKind::config,
            "bandwidth must be positive");
    kernel_or_gram = detail::kernel_matrix(dist, out.bandwidth);
  }
  const auto stat = [&](const VectorXd& y) {
    return method == CompetingMethod::f_test
               ? detail::f_from_gram(kernel_or_gram, y)
               : detail::delsol_from_kernel(kernel_or_gram, y);
  };
  out.statistic = stat(yc);

  std::vector<double> reps(static_cast<std::size_t>(opt.B));
  parallel_for(
      0, static_cast<std::size_t>(opt.B),
      [&](std::size_t b) {
        Engine rng = make_stream(opt.seed, {stream_tag::bootstrap, b});
        const VectorXd v = draw_multipliers(n, rng);
        VectorXd y = v.cwiseProduct(yc);
        if (centered) y.array() -= y.mean();
        reps[b] = stat(y);
      },
      opt.workers);
  for (double r : reps)
    if (out.statistic <= r) ++out.exceedances;
  out.p_value = static_cast<double>(out.exceedances) / opt.B;
  if (opt.keep_replicates) out.replicates = std::move(reps);
  return out;
}

}  // namespace flmgof
