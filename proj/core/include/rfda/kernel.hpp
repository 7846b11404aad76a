#pragma once

#include <string_view>

namespace rfda {

enum class KernelType { epanechnikov, gaussian_truncated };

/// Symmetric smoothing kernel supported on (-1, 1).
struct Kernel {
  KernelType type = KernelType::epanechnikov;

  double operator()(double x) const;
  /// K_h(u) = K(u/h)/h.
  double scaled(double u, double h) const { return (*this)(u / h) / h; }
};

KernelType parse_kernel(std::string_view name);
std::string_view to_string(KernelType type);

}  // namespace rfda
