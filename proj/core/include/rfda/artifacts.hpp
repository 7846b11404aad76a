#pragma once

#include "rfda/experiment.hpp"
#include "rfda/fpca.hpp"
#include "rfda/serialize.hpp"
#include "rfda/simulation.hpp"

namespace rfda {

/// JSON documents exchanged by the command-line tool. Every document carries
/// a "type" field; a truth document also contains the fields of a covariance
/// document (the true mean and covariance on a grid), so it can be read
/// wherever a fitted surface is expected.

Json mean_to_json(const MeanCurve& mean);
/// Accepts a mean document or any document with a nested "mean".
MeanCurve mean_from_json(const Json& j);

Json surface_to_json(const CovSurface& surface);
CovSurface surface_from_json(const Json& j);

Json truth_to_json(const SimTruth& truth, const std::vector<double>& grid);
SimTruth truth_from_json(const Json& j);
/// The truth written as a surface on a grid, in the truth's own frames.
CovSurface truth_surface(const SimTruth& truth, const std::vector<double>& grid);

Json eigen_to_json(const EigenSystem& eig);
Json scores_to_json(const Scores& scores);
Json selection_to_json(const BandwidthSelection& sel);

/// Plot-ready CSV s,t,gnorm of ‖Ĉ(s,t)‖_G on the surface grid.
std::string gnorm_csv(const CovSurface& surface);

}  // namespace rfda
