#include "rfda/rng.hpp"

#include <cmath>

#include "rfda/error.hpp"

namespace rfda {

double RandomStream::normal() {
  double u = uniform();
  while (u <= 0.0) u = uniform();
  const double v = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.14159265358979323846 * v);
}

int RandomStream::poisson(double mean) {
  if (!(mean >= 0.0) || mean > 500.0)
    throw ValidationError("poisson mean must lie in [0, 500]");
  const double u = uniform();
  double p = std::exp(-mean);
  double cdf = p;
  int k = 0;
  while (u > cdf && k < 10000) {
    ++k;
    p *= mean / k;
    cdf += p;
    if (p == 0.0 && k > mean) break;
  }
  return k;
}

}  // namespace rfda
