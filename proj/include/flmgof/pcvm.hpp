#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "flmgof/basis.hpp"
#include "flmgof/errors.hpp"
#include "flmgof/functional.hpp"
#include "flmgof/parallel.hpp"

namespace flmgof {

/// Rows x'_k = R x_k, i.e. C R^T. Euclidean distances between rows equal L2
/// distances between the reconstructed curves.
inline MatrixXd transform_coefficients(const CoefficientSet& cs) {
  const MatrixXd& r = cs.basis->chol;
  require(r.rows() == cs.coeffs.cols(), ErrorKind::dimension,
          "coefficient width does not match the Cholesky factor");
  return cs.coeffs * r.triangularView<Eigen::Upper>().transpose();
}

/// Measure (in radians of dihedral angle) of the set of directions xi with
/// a.xi <= 0 and b.xi <= 0, so that the spherical area is this value times
/// pi^{p/2-1} / Gamma(p/2).
inline double wedge_angle(const Eigen::Ref<const VectorXd>& a,
                          const Eigen::Ref<const VectorXd>& b, double tol) {
  require(a.size() == b.size(), ErrorKind::dimension,
          "wedge vectors differ in length");
  require(a.allFinite() && b.allFinite(), ErrorKind::numeric,
          "wedge vectors contain non-finite values");
  const double na = a.norm();
  const double nb = b.norm();
  const bool za = na <= tol;
  const bool zb = nb <= tol;
  if (za && zb) return 2.0 * std::numbers::pi;
  if (za || zb || (a - b).norm() <= tol) return std::numbers::pi;
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::abs(std::numbers::pi - std::acos(c));
}

/// Aggregated wedge matrix A0 with A0_ij = sum_r wedge(x'_i - x'_r,
/// x'_j - x'_r), stored as a packed upper triangle, and the scalar that turns
/// angles into areas.
class PcvmComponents {
 public:
  PcvmComponents() = default;
  PcvmComponents(int n, int p, double factor, std::vector<double> packed)
      : n_(n), p_(p), factor_(factor), packed_(std::move(packed)) {
    require(packed_.size() == packed_size(n), ErrorKind::dimension,
            "packed A0 has the wrong length");
  }

  static std::size_t packed_size(int n) {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1) / 2;
  }

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] int p() const noexcept { return p_; }
  [[nodiscard]] double factor() const noexcept { return factor_; }
  [[nodiscard]] const std::vector<double>& packed() const noexcept {
    return packed_;
  }

  [[nodiscard]] double at(int i, int j) const {
    if (i > j) std::swap(i, j);
    return packed_[offset(i) + static_cast<std::size_t>(j - i)];
  }

  [[nodiscard]] MatrixXd dense() const {
    MatrixXd out(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) out(i, j) = out(j, i) = at(i, j);
    return out;
  }

  /// e^T A0 e from the packed triangle.
  [[nodiscard]] double quadratic_form(const Eigen::Ref<const VectorXd>& e) const {
    require(e.size() == n_, ErrorKind::dimension,
            "residual length " + std::to_string(e.size()) +
                " does not match n = " + std::to_string(n_));
    double diag = 0.0;
    double off = 0.0;
    std::size_t k = 0;
    for (int i = 0; i < n_; ++i) {
      const double ei = e[i];
      diag += packed_[k++] * ei * ei;
      double row = 0.0;
      for (int j = i + 1; j < n_; ++j) row += packed_[k++] * e[j];
      off += ei * row;
    }
    return diag + 2.0 * off;
  }

 private:
  [[nodiscard]] std::size_t offset(int i) const {
    const auto si = static_cast<std::size_t>(i);
    const auto sn = static_cast<std::size_t>(n_);
    return si * sn - (si * si - si) / 2;
  }

  int n_ = 0;
  int p_ = 0;
  double factor_ = 0.0;
  std::vector<double> packed_;
};

/// pi^{p/2-1} / Gamma(p/2) * |R|^{-1}, in log space.
inline double geometry_factor(int p, double log_det_r) {
  require(p >= 1 && p <= 300, ErrorKind::config,
          "PCvM geometry needs 1 <= p <= 300 (got " + std::to_string(p) + ")");
  const double half = 0.5 * p;
  return std::exp((half - 1.0) * std::log(std::numbers::pi) -
                  std::lgamma(half) - log_det_r);
}

/// Builds A0 from transformed coefficients (one row per curve). Rows of the
/// packed triangle are split across workers; each cell sums r in index order
/// so the result does not depend on the worker count.
inline PcvmComponents build_adot(const MatrixXd& xprime, double log_det_r = 0.0,
                                 unsigned workers = 0) {
  const auto n = static_cast<int>(xprime.rows());
  const auto p = static_cast<int>(xprime.cols());
  require(n >= 1, ErrorKind::insufficient, "A0 needs at least one curve");
  require(xprime.allFinite(), ErrorKind::numeric,
          "transformed coefficients contain non-finite values");
  const double factor = geometry_factor(p, log_det_r);

  // pairwise distances, then the tie tolerance relative to their scale
  MatrixXd dist = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      dist(i, j) = dist(j, i) = (xprime.row(i) - xprime.row(j)).norm();
  const double tol = 1e-12 * dist.maxCoeff();

  const MatrixXd xt = xprime.transpose();  // columns are curves
  std::vector<double> packed(PcvmComponents::packed_size(n));
  std::vector<std::size_t> row_offset(static_cast<std::size_t>(n));
  for (int i = 0, k = 0; i < n; ++i) {
    row_offset[static_cast<std::size_t>(i)] = static_cast<std::size_t>(k);
    k += n - i;
  }
  constexpr double pi = std::numbers::pi;
  parallel_for(
      0, n,
      [&](int i) {
        VectorXd a(p);
        VectorXd b(p);
        std::size_t k = row_offset[static_cast<std::size_t>(i)];
        packed[k++] = (n + 1) * pi;
        for (int j = i + 1; j < n; ++j) {
          const bool same = dist(i, j) <= tol;
          double sum = 0.0;
          for (int r = 0; r < n; ++r) {
            const double na = dist(i, r);
            const double nb = dist(j, r);
            const bool za = na <= tol;
            const bool zb = nb <= tol;
            if (za && zb) {
              sum += 2.0 * pi;
            } else if (za || zb || same) {
              sum += pi;
            } else {
              a = xt.col(i) - xt.col(r);
              b = xt.col(j) - xt.col(r);
              const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
              sum += std::abs(pi - std::acos(c));
            }
          }
          packed[k++] = sum;
        }
      },
      workers);
  return {n, p, factor, std::move(packed)};
}

/// A0 and factor for a coefficient set, through x' = R x.
inline PcvmComponents build_adot(const CoefficientSet& cs,
                                 unsigned workers = 0) {
  return build_adot(transform_coefficients(cs), cs.basis->log_det_chol(),
                    workers);
}

/// n^{-2} * factor * e^T A0 e.
inline double pcvm_statistic(const Eigen::Ref<const VectorXd>& residuals,
                             const PcvmComponents& comps) {
  const double n = comps.n();
  return comps.factor() * comps.quadratic_form(residuals) / (n * n);
}

}  // namespace flmgof
