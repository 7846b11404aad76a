#pragma once

#include <vector>

#include "rfda/simulation.hpp"
#include "rfda/smoother.hpp"

namespace rfda {

/// Relative errors of a fitted covariance surface against the truth, as
/// fractions (reports multiply by 100). Each cell Ĉ(t_g, t_h) is moved from
/// (μ̂(t_g), μ̂(t_h)) to (μ(t_g), μ(t_h)) by bundle transport and compared in
/// the G-norm; the sup and the double integral are taken on the surface grid.
struct SurfaceError {
  /// sup ‖PĈ - C‖_G / sup ‖C‖_G.
  double rmuie = 0.0;
  /// (∫∫ ‖PĈ - C‖²_G)^{1/2} / (∫∫ ‖C‖²_G)^{1/2} with trapezoid quadrature.
  double rrmise = 0.0;
};

/// The surface's own mean curve is used for the transport.
SurfaceError surface_error(const CovSurface& surface, const SimTruth& truth);
double rmuie(const CovSurface& surface, const SimTruth& truth, const MeanCurve& mean);
double rrmise(const CovSurface& surface, const SimTruth& truth, const MeanCurve& mean);

/// sup_g d(μ̂(t_g), μ(t_g)).
double mean_sup_error(const MeanCurve& mean, const SimTruth& truth);

/// Per-cell transported error norms ‖PĈ - C‖_G (row g, column h).
Mat cell_errors(const CovSurface& surface, const SimTruth& truth);

}  // namespace rfda
