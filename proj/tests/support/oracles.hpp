#pragma once

// Reference computations used only by tests. None of these call into the
// library's numerical code paths.

#include <array>
#include <vector>

namespace pairpref::oracle {

/// Standard normal CDF by composite Simpson quadrature of the density.
double phi(double z);

/// Inverse of phi() by bisection on [-12, 12].
double phi_inv(double p);

/// Fast CDF for inner loops of the grid oracles (erfc based, independent of
/// the library's preference code).
double phi_fast(double z);

/// f(x; alpha, gamma) for D = 1.
double preference_1d(double x, double alpha, double gamma);

struct Observation1d {
  double x_ref;
  double x_alt;
  int r;
};

struct Gaussian2 {
  std::array<double, 2> mean;
  std::array<std::array<double, 2>, 2> cov;
};

struct Moments2 {
  std::array<double, 2> mean;
  std::array<std::array<double, 2>, 2> cov;
};

/// Exact posterior moments over (alpha, gamma) for D = 1 by midpoint
/// quadrature of prior * likelihood on an n x n grid over [lo, hi]^2.
Moments2 grid_posterior(const Gaussian2& prior, const std::vector<Observation1d>& obs,
                        int n, double lo, double hi);

/// Nuisance-marginalized mutual information (bits) between the response to
/// {x_ref, x_alt} and alpha, for D = 1, by enumeration over an n x n grid
/// spanning +-width standard deviations of each coordinate.
double grid_mutual_information(const Gaussian2& belief, double x_ref, double x_alt, int n,
                               double width = 7.0);

}  // namespace pairpref::oracle
