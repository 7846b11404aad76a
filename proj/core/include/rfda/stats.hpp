#pragma once

#include <span>
#include <vector>

namespace rfda {

/// Pairwise (cascade) summation; the result depends only on the order of
/// the input, never on how the input was produced.
double pairwise_sum(std::span<const double> xs);
double mean_of(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(std::span<const double> xs);
double median_of(std::vector<double> xs);

/// Trapezoid quadrature weights for a sorted grid.
std::vector<double> trapezoid_weights(std::span<const double> grid);

/// Index g with grid[g] <= t <= grid[g+1] and the fraction of the way from
/// grid[g] to grid[g+1]. t must lie in [grid.front(), grid.back()].
struct Bracket {
  int lower = 0;
  double fraction = 0.0;
};
Bracket locate(std::span<const double> grid, double t);

/// n equispaced points covering [lo, hi].
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace rfda
