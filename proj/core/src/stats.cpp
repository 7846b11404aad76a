#include "rfda/stats.hpp"

#include <algorithm>
#include <cmath>

#include "rfda/error.hpp"

namespace rfda {

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mu) * (xs[i] - mu);
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(xs.size() - 1));
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) throw ValidationError("median of an empty sample");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::vector<double> trapezoid_weights(std::span<const double> grid) {
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    const double h = grid[g + 1] - grid[g];
    w[g] += 0.5 * h;
    w[g + 1] += 0.5 * h;
  }
  return w;
}

Bracket locate(std::span<const double> grid, double t) {
  if (grid.empty()) throw ValidationError("locate: empty grid");
  if (t < grid.front() || t > grid.back())
    throw ValidationError("time " + std::to_string(t) + " lies outside the grid range");
  if (grid.size() == 1) return {0, 0.0};
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  int g = static_cast<int>(it - grid.begin()) - 1;
  g = std::clamp(g, 0, static_cast<int>(grid.size()) - 2);
  const double frac = (t - grid[g]) / (grid[g + 1] - grid[g]);
  return {g, std::clamp(frac, 0.0, 1.0)};
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw ValidationError("linspace needs at least one point");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  out.back() = hi;
  return out;
}

}  // namespace rfda
