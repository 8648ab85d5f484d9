#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "flmgof/errors.hpp"
#include "flmgof/functional.hpp"

namespace flmgof {

enum class BasisKind { bspline, fourier, fpc, fpls };

inline std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::bspline: return "bspline";
    case BasisKind::fourier: return "fourier";
    case BasisKind::fpc: return "fpc";
    case BasisKind::fpls: return "fpls";
  }
  return "?";
}

inline BasisKind parse_basis_kind(const std::string& s) {
  if (s == "bspline") return BasisKind::bspline;
  if (s == "fourier") return BasisKind::fourier;
  if (s == "fpc") return BasisKind::fpc;
  if (s == "fpls") return BasisKind::fpls;
  fail(ErrorKind::config, "unknown basis kind '" + s + "'");
}

[[nodiscard]] constexpr bool is_data_driven(BasisKind kind) noexcept {
  return kind == BasisKind::fpc || kind == BasisKind::fpls;
}

/// A p-truncated basis evaluated on a grid.
///
/// eval is p x T (row j is Psi_j on the grid), gram = (<Psi_i, Psi_j>) under
/// the grid quadrature, chol is the upper factor R with gram = R^T R.
struct BasisSystem {
  BasisKind kind = BasisKind::bspline;
  Grid grid = Grid::uniform();
  MatrixXd eval;
  MatrixXd gram;
  MatrixXd chol;

  int order = 0;               // bspline only
  std::vector<double> knots;   // bspline only, full knot vector
  VectorXd eigenvalues;        // fpc: variance of each retained component
  VectorXd spectrum;           // fpc: every eigenvalue of the covariance
  bool truncated = false;      // fpls: fewer components than requested

  [[nodiscard]] int size() const noexcept {
    return static_cast<int>(eval.rows());
  }

  /// log |R| = sum log R_kk.
  [[nodiscard]] double log_det_chol() const {
    return chol.diagonal().array().log().sum();
  }

  /// First p functions. Nested kinds (fpc, fpls) keep their meaning; the
  /// leading block of R is the Cholesky factor of the leading Gram block.
  [[nodiscard]] BasisSystem leading(int p) const {
    require(p >= 1 && p <= size(), ErrorKind::config,
            "cannot take " + std::to_string(p) + " of " +
                std::to_string(size()) + " basis functions");
    BasisSystem out = *this;
    out.eval = eval.topRows(p);
    out.gram = gram.topLeftCorner(p, p);
    out.chol = chol.topLeftCorner(p, p);
    if (eigenvalues.size() >= p) out.eigenvalues = eigenvalues.head(p);
    return out;
  }
};

namespace detail {

/// Fills gram and chol and checks conditioning.
inline void finalize_basis(BasisSystem& basis) {
  MatrixXd g = cross_inner(basis.grid, basis.eval, basis.eval);
  g = 0.5 * (g + g.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(g, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  require(hi > 0.0 && lo > 1e-10 * hi, ErrorKind::singular,
          "ill-conditioned basis: Gram eigenvalues in [" + std::to_string(lo) +
              ", " + std::to_string(hi) + "]");
  Eigen::LLT<MatrixXd> llt(g);
  require(llt.info() == Eigen::Success, ErrorKind::singular,
          "Gram matrix is not positive definite");
  basis.gram = std::move(g);
  basis.chol = llt.matrixU();
}

/// Flips each row so its largest-magnitude entry is positive.
inline void fix_signs(MatrixXd& rows) {
  for (Eigen::Index j = 0; j < rows.rows(); ++j) {
    Eigen::Index at = 0;
    rows.row(j).cwiseAbs().maxCoeff(&at);
    if (rows(j, at) < 0) rows.row(j) *= -1.0;
  }
}

/// Cox-de Boor evaluation of all order-k B-splines on the knot vector.
inline MatrixXd bspline_eval(const std::vector<double>& knots, int order,
                             int p, const std::vector<double>& xs) {
  const int degree = order - 1;
  MatrixXd out = MatrixXd::Zero(p, static_cast<Eigen::Index>(xs.size()));
  std::vector<double> left(order), right(order), values(order);
  for (std::size_t c = 0; c < xs.size(); ++c) {
    const double x = xs[c];
    // span mu with knots[mu] <= x < knots[mu+1], clamped to [degree, p-1]
    int mu = degree;
    while (mu < p - 1 && x >= knots[mu + 1]) ++mu;
    values[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
      left[j] = x - knots[mu + 1 - j];
      right[j] = knots[mu + j] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double denom = right[r + 1] + left[j - r];
        const double temp = denom == 0.0 ? 0.0 : values[r] / denom;
        values[r] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      values[j] = saved;
    }
    for (int r = 0; r <= degree; ++r)
      out(mu - degree + r, static_cast<Eigen::Index>(c)) = values[r];
  }
  return out;
}

}  // namespace detail

/// B-splines of the given order with equidistant interior knots over the grid
/// span, p functions in total.
inline BasisSystem bspline_basis(const Grid& grid, int p, int order = 4) {
  require(order >= 1, ErrorKind::config, "B-spline order must be positive");
  require(p >= order, ErrorKind::config,
          "B-spline basis needs p >= order (p=" + std::to_string(p) +
              ", order=" + std::to_string(order) + ")");
  require(static_cast<std::size_t>(p) <= grid.size(), ErrorKind::config,
          "B-spline basis larger than the grid");
  BasisSystem basis;
  basis.kind = BasisKind::bspline;
  basis.grid = grid;
  basis.order = order;
  const int interior = p - order;
  const double a = grid.lower();
  const double b = grid.upper();
  basis.knots.assign(static_cast<std::size_t>(order), a);
  for (int k = 1; k <= interior; ++k)
    basis.knots.push_back(a + (b - a) * k / (interior + 1));
  basis.knots.insert(basis.knots.end(), static_cast<std::size_t>(order), b);
  basis.eval = detail::bspline_eval(basis.knots, order, p, grid.points());
  detail::finalize_basis(basis);
  return basis;
}

/// Fourier basis normalized to unit L2 norm over the grid span:
/// 1, sqrt2 sin(2 pi u), sqrt2 cos(2 pi u), sqrt2 sin(4 pi u), ...
inline BasisSystem fourier_basis(const Grid& grid, int p) {
  require(p >= 1 && p % 2 == 1, ErrorKind::config,
          "Fourier basis needs an odd p (got " + std::to_string(p) + ")");
  BasisSystem basis;
  basis.kind = BasisKind::fourier;
  basis.grid = grid;
  const double len = grid.length();
  const auto m = static_cast<Eigen::Index>(grid.size());
  basis.eval.resize(p, m);
  const double c0 = 1.0 / std::sqrt(len);
  const double c1 = std::sqrt(2.0 / len);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double u = (grid.points()[static_cast<std::size_t>(k)] -
                      grid.lower()) / len;
    basis.eval(0, k) = c0;
    for (int j = 1; 2 * j <= p - 1; ++j) {
      const double arg = 2.0 * std::numbers::pi * j * u;
      basis.eval(2 * j - 1, k) = c1 * std::sin(arg);
      basis.eval(2 * j, k) = c1 * std::cos(arg);
    }
  }
  detail::finalize_basis(basis);
  return basis;
}

/// Fixed (data-independent) bases.
inline BasisSystem build_basis(BasisKind kind, int p, const Grid& grid,
                               int order = 4) {
  switch (kind) {
    case BasisKind::bspline: return bspline_basis(grid, p, order);
    case BasisKind::fourier: return fourier_basis(grid, p);
    default:
      fail(ErrorKind::config, to_string(kind) +
                                  " is data-driven; use fpc_basis/fpls_basis");
  }
}

/// Least-squares coefficients of every curve in a basis.
struct CoefficientSet {
  MatrixXd coeffs;  // n x p, row i = x_{i,p}
  std::shared_ptr<const BasisSystem> basis;
};

/// Rows solve gram * c_i = (<X_i, Psi_j>)_j, the L2 projection normal
/// equations under the grid quadrature.
inline CoefficientSet project_sample(const FunctionalSample& xs,
                                     std::shared_ptr<const BasisSystem> basis) {
  require(basis != nullptr, ErrorKind::config, "null basis");
  require_same_grid(xs.grid(), basis->grid);
  require(basis->chol.rows() == basis->size() && basis->size() > 0,
          ErrorKind::singular, "basis has no Cholesky factor");
  const MatrixXd rhs = cross_inner(xs.grid(), basis->eval, xs.values());
  const auto r = basis->chol.triangularView<Eigen::Upper>();
  MatrixXd ct = r.transpose().solve(rhs);
  ct = r.solve(ct);
  require(ct.allFinite(), ErrorKind::singular,
          "projection produced non-finite coefficients");
  return {ct.transpose(), std::move(basis)};
}

inline CoefficientSet project_sample(const FunctionalSample& xs,
                                     const BasisSystem& basis) {
  return project_sample(xs, std::make_shared<const BasisSystem>(basis));
}

/// Curves sum_j c_ij Psi_j on the grid.
inline MatrixXd reconstruct(const CoefficientSet& cs) {
  return cs.coeffs * cs.basis->eval;
}

/// Eigenfunctions of the empirical covariance operator.
///
/// Solves the symmetric problem for W^{1/2} Cov W^{1/2} through an SVD of
/// X W^{1/2} / sqrt(n); eigenfunctions are W^{-1/2} v, orthonormal under the
/// grid quadrature. Curves are expected to be centered.
inline BasisSystem fpc_basis(const FunctionalSample& xs, int p) {
  const Eigen::Index n = xs.size();
  const auto m = static_cast<Eigen::Index>(xs.grid().size());
  require(p >= 1, ErrorKind::config, "FPC basis needs p >= 1");
  require(p <= std::min<Eigen::Index>(n - 1, m), ErrorKind::rank,
          "FPC basis of size " + std::to_string(p) + " exceeds min(n-1, T) = " +
              std::to_string(std::min<Eigen::Index>(n - 1, m)));
  const VectorXd sw = xs.grid().weights().cwiseSqrt();
  const MatrixXd a =
      xs.values() * sw.asDiagonal() / std::sqrt(static_cast<double>(n));
  Eigen::BDCSVD<MatrixXd> svd(a, Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  require(s.size() >= p && s[0] > 0.0, ErrorKind::rank,
          "FPC basis: sample covariance is zero");
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > 1e-9 * s[0]) ++rank;
  require(p <= rank, ErrorKind::rank,
          "FPC basis of size " + std::to_string(p) +
              " exceeds covariance rank " + std::to_string(rank));

  BasisSystem basis;
  basis.kind = BasisKind::fpc;
  basis.grid = xs.grid();
  MatrixXd v = svd.matrixV().leftCols(p).transpose();  // p x T, Euclidean
  basis.eval = v * sw.cwiseInverse().asDiagonal();
  detail::fix_signs(basis.eval);
  basis.spectrum = s.array().square();
  basis.eigenvalues = basis.spectrum.head(p);
  detail::finalize_basis(basis);
  return basis;
}

/// PLS1 components of (X, Y) in the quadrature metric.
///
/// Component k is the unit weight maximizing the squared covariance of the
/// deflated curves with the deflated response; scores are regressed out of
/// both before the next step. Weights are re-orthonormalized (modified
/// Gram-Schmidt, two passes) and sign-fixed. Stops early with truncated=true
/// when the remaining covariance vanishes.
inline BasisSystem fpls_basis(const FunctionalSample& xs,
                              const ResponseVector& ys, int p) {
  require(xs.size() == ys.size(), ErrorKind::dimension,
          "FPLS: " + std::to_string(xs.size()) + " curves but " +
              std::to_string(ys.size()) + " responses");
  require(p >= 1, ErrorKind::config, "FPLS basis needs p >= 1");
  const auto m = static_cast<Eigen::Index>(xs.grid().size());
  const VectorXd sw = xs.grid().weights().cwiseSqrt();
  MatrixXd e = xs.values() * sw.asDiagonal();
  VectorXd f = ys.values();

  std::vector<VectorXd> weights;
  double first_norm = 0.0;
  for (int k = 0; k < p; ++k) {
    VectorXd w = e.transpose() * f;
    const double wn = w.norm();
    if (k == 0) first_norm = wn;
    if (!(wn > 0.0) || wn <= 1e-10 * first_norm) break;
    w /= wn;
    const VectorXd t = e * w;
    const double tt = t.squaredNorm();
    if (!(tt > 0.0)) break;
    const VectorXd loading = e.transpose() * t / tt;
    const double q = f.dot(t) / tt;
    e -= t * loading.transpose();
    f -= q * t;
    weights.push_back(std::move(w));
  }
  require(!weights.empty(), ErrorKind::rank,
          "FPLS: response has zero covariance with the curves");

  const auto got = static_cast<Eigen::Index>(weights.size());
  MatrixXd v(got, m);
  for (Eigen::Index k = 0; k < got; ++k) {
    VectorXd w = weights[static_cast<std::size_t>(k)];
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < k; ++j)
        w -= v.row(j).dot(w) * v.row(j).transpose();
    v.row(k) = w.transpose() / w.norm();
  }
  BasisSystem basis;
  basis.kind = BasisKind::fpls;
  basis.grid = xs.grid();
  basis.eval = v * sw.cwiseInverse().asDiagonal();
  detail::fix_signs(basis.eval);
  basis.truncated = got < p;
  detail::finalize_basis(basis);
  return basis;
}

}  // namespace flmgof
