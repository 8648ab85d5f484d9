#pragma once

#include <random>

#include "flmgof/flmgof.hpp"

namespace fixture {

using flmgof::FunctionalSample;
using flmgof::Grid;
using flmgof::MatrixXd;
using flmgof::ResponseVector;
using flmgof::VectorXd;

inline MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = z(rng);
  return m;
}

inline VectorXd gaussian_vector(Eigen::Index n, std::uint64_t seed) {
  return gaussian_matrix(n, 1, seed).col(0);
}

/// OU sample on the default 201-point grid.
inline FunctionalSample ou_sample(Eigen::Index n, std::uint64_t seed,
                                  flmgof::OuStart start =
                                      flmgof::OuStart::stationary,
                                  const Grid& grid = Grid::uniform()) {
  flmgof::OuParams params;
  params.start = start;
  const flmgof::OuSampler sampler(params, grid);
  flmgof::Engine rng = flmgof::make_stream(seed, {flmgof::stream_tag::curves});
  return sampler.sample(n, rng);
}

inline ResponseVector response(const FunctionalSample& xs,
                               const std::string& scenario,
                               std::uint64_t seed) {
  flmgof::Engine rng = flmgof::make_stream(seed, {flmgof::stream_tag::noise});
  return flmgof::scenario_response(xs, flmgof::parse_scenario(scenario), rng);
}

}  // namespace fixture
