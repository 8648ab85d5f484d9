#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "flmgof/errors.hpp"

namespace flmgof {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Quadrature {
  automatic,  // Simpson when equispaced with an odd point count, else trapezoid
  simpson,
  trapezoid,
};

/// Ordered abscissae with quadrature weights for L2 inner products.
class Grid {
 public:
  explicit Grid(std::vector<double> points,
                Quadrature rule = Quadrature::automatic)
      : points_(std::move(points)) {
    require(points_.size() >= 2, ErrorKind::config,
            "grid needs at least 2 points");
    for (std::size_t k = 0; k < points_.size(); ++k) {
      require(std::isfinite(points_[k]), ErrorKind::numeric,
              "grid point " + std::to_string(k) + " is not finite");
      if (k > 0)
        require(points_[k] > points_[k - 1], ErrorKind::config,
                "grid must be strictly increasing (index " +
                    std::to_string(k) + ")");
    }
    rule_ = resolve(rule);
    compute_weights();
  }

  /// size equidistant points on [a, b]; default is 201 points on [0, 1].
  static Grid uniform(double a = 0.0, double b = 1.0, std::size_t size = 201,
                      Quadrature rule = Quadrature::automatic) {
    require(size >= 2, ErrorKind::config, "grid needs at least 2 points");
    std::vector<double> pts(size);
    for (std::size_t k = 0; k < size; ++k)
      pts[k] = a + (b - a) * static_cast<double>(k) /
                       static_cast<double>(size - 1);
    pts.back() = b;
    return Grid(std::move(pts), rule);
  }

  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] const std::vector<double>& points() const noexcept {
    return points_;
  }
  [[nodiscard]] const VectorXd& weights() const noexcept { return weights_; }
  [[nodiscard]] double lower() const noexcept { return points_.front(); }
  [[nodiscard]] double upper() const noexcept { return points_.back(); }
  [[nodiscard]] double length() const noexcept { return upper() - lower(); }
  [[nodiscard]] Quadrature rule() const noexcept { return rule_; }

  [[nodiscard]] bool equispaced(double rel_tol = 1e-9) const {
    const double h = length() / static_cast<double>(size() - 1);
    for (std::size_t k = 1; k < size(); ++k)
      if (std::abs((points_[k] - points_[k - 1]) - h) > rel_tol * h)
        return false;
    return true;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.points_ == b.points_ && a.rule_ == b.rule_;
  }

 private:
  Quadrature resolve(Quadrature rule) const {
    const bool simpson_ok = size() >= 3 && size() % 2 == 1 && equispaced();
    if (rule == Quadrature::automatic)
      return simpson_ok ? Quadrature::simpson : Quadrature::trapezoid;
    if (rule == Quadrature::simpson)
      require(simpson_ok, ErrorKind::config,
              "Simpson rule needs an equispaced grid with an odd point count");
    return rule;
  }

  void compute_weights() {
    const std::size_t m = size();
    weights_ = VectorXd::Zero(static_cast<Eigen::Index>(m));
    if (rule_ == Quadrature::simpson) {
      const double h = length() / static_cast<double>(m - 1);
      for (std::size_t k = 0; k < m; ++k) {
        double c = (k == 0 || k == m - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        weights_[static_cast<Eigen::Index>(k)] = c * h / 3.0;
      }
    } else {
      for (std::size_t k = 0; k + 1 < m; ++k) {
        const double half = 0.5 * (points_[k + 1] - points_[k]);
        weights_[static_cast<Eigen::Index>(k)] += half;
        weights_[static_cast<Eigen::Index>(k + 1)] += half;
      }
    }
  }

  std::vector<double> points_;
  Quadrature rule_ = Quadrature::automatic;
  VectorXd weights_;
};

/// n curves on a shared grid; row i is curve X_i.
class FunctionalSample {
 public:
  FunctionalSample(Grid grid, MatrixXd values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    require(values_.rows() >= 1, ErrorKind::insufficient,
            "functional sample needs at least one curve");
    require(static_cast<std::size_t>(values_.cols()) == grid_.size(),
            ErrorKind::dimension,
            "curve length " + std::to_string(values_.cols()) +
                " does not match grid size " + std::to_string(grid_.size()));
    require(values_.allFinite(), ErrorKind::numeric,
            "functional sample contains non-finite values");
  }

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] const MatrixXd& values() const noexcept { return values_; }
  [[nodiscard]] Eigen::Index size() const noexcept { return values_.rows(); }
  [[nodiscard]] auto curve(Eigen::Index i) const { return values_.row(i); }

 private:
  Grid grid_;
  MatrixXd values_;
};

/// Scalar responses paired with a FunctionalSample.
class ResponseVector {
 public:
  explicit ResponseVector(VectorXd values) : values_(std::move(values)) {
    require(values_.allFinite(), ErrorKind::numeric,
            "response contains non-finite values");
  }
  [[nodiscard]] const VectorXd& values() const noexcept { return values_; }
  [[nodiscard]] Eigen::Index size() const noexcept { return values_.size(); }

 private:
  VectorXd values_;
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  require(a == b, ErrorKind::dimension, "curves live on different grids");
}

/// Quadrature approximation of the integral of f*g.
///
/// Each term is w_k * (f_k * g_k), so swapping f and g gives the same sum
/// bit for bit.
inline double inner_product(const Grid& grid,
                            const Eigen::Ref<const VectorXd>& f,
                            const Eigen::Ref<const VectorXd>& g) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  require(f.size() == m && g.size() == m, ErrorKind::dimension,
          "curve length does not match grid size");
  const VectorXd& w = grid.weights();
  double s = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) s += w[k] * (f[k] * g[k]);
  return s;
}

inline double l2_norm(const Grid& grid, const Eigen::Ref<const VectorXd>& f) {
  return std::sqrt(std::max(0.0, inner_product(grid, f, f)));
}

/// Evaluates fn on every grid point.
template <class Fn>
VectorXd evaluate_on(const Grid& grid, Fn&& fn) {
  VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k)
    v[static_cast<Eigen::Index>(k)] = fn(grid.points()[k]);
  return v;
}

/// Matrix of inner products <A_i, B_j> for curve rows of A and B.
inline MatrixXd cross_inner(const Grid& grid, const MatrixXd& a,
                            const MatrixXd& b) {
  require(static_cast<std::size_t>(a.cols()) == grid.size() &&
              static_cast<std::size_t>(b.cols()) == grid.size(),
          ErrorKind::dimension, "curve length does not match grid size");
  return a * grid.weights().asDiagonal() * b.transpose();
}

/// Subtracts the pointwise functional mean and the response mean.
inline std::pair<FunctionalSample, ResponseVector> center_sample(
    const FunctionalSample& xs, const ResponseVector& ys) {
  require(xs.size() == ys.size(), ErrorKind::dimension,
          "sample has " + std::to_string(xs.size()) + " curves but " +
              std::to_string(ys.size()) + " responses");
  require(xs.size() >= 2, ErrorKind::insufficient,
          "centering needs at least 2 observations");
  const Eigen::RowVectorXd mean = xs.values().colwise().mean();
  MatrixXd xc = xs.values().rowwise() - mean;
  VectorXd yc = ys.values().array() - ys.values().mean();
  return {FunctionalSample(xs.grid(), std::move(xc)),
          ResponseVector(std::move(yc))};
}

}  // namespace flmgof
