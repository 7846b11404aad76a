#include "rfda/kernel.hpp"

#include <cmath>
#include <string>

#include "rfda/error.hpp"

namespace rfda {

namespace {
// ∫_{-1}^{1} exp(-2x²) dx
const double kGaussNorm = std::sqrt(3.14159265358979323846 / 2.0) * std::erf(std::sqrt(2.0));
}  // namespace

double Kernel::operator()(double x) const {
  if (!(std::abs(x) < 1.0)) return 0.0;
  switch (type) {
    case KernelType::epanechnikov:
      return 0.75 * (1.0 - x * x);
    case KernelType::gaussian_truncated:
      return std::exp(-2.0 * x * x) / kGaussNorm;
  }
  return 0.0;
}

KernelType parse_kernel(std::string_view name) {
  if (name == "epanechnikov") return KernelType::epanechnikov;
  if (name == "gaussian-truncated") return KernelType::gaussian_truncated;
  throw ValidationError("unknown kernel '" + std::string(name) + "'");
}

std::string_view to_string(KernelType type) {
  return type == KernelType::epanechnikov ? "epanechnikov" : "gaussian-truncated";
}

}  // namespace rfda
