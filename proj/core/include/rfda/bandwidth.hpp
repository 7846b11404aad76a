#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rfda/smoother.hpp"

namespace rfda {

/// Strictly increasing positive candidate bandwidths.
struct BandwidthGrid {
  std::vector<double> values;
};

/// Sorts and deduplicates the candidates; throws on non-positive values.
BandwidthGrid make_bandwidth_grid(std::vector<double> values);

/// `count` geometric values from 1.5 × the median within-subject time gap to
/// half the domain length.
BandwidthGrid default_bandwidth_grid(const SparseDataset& data, int count = 8);

enum class BandwidthPolicy { fixed, cv, gcv };
BandwidthPolicy parse_bandwidth_policy(std::string_view name);
std::string_view to_string(BandwidthPolicy policy);

/// Subject-level fold labels in [0, folds): a seeded permutation dealt
/// round-robin.
std::vector<int> assign_folds(std::size_t subjects, int folds, std::uint64_t seed);

struct CvOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  /// Grid on which candidate fits are computed.
  int grid_points = 51;
  KernelType kernel = KernelType::epanechnikov;
  int threads = 1;
};

struct RiskRow {
  double h = 0.0;
  double risk = 0.0;
  bool ok = false;
  std::string error;
};

struct BandwidthSelection {
  double selected = 0.0;
  std::vector<RiskRow> table;
};

/// Smallest risk among the successful rows; ties (up to rounding) go to the
/// larger bandwidth. Throws NumericalError listing every failure when no row
/// succeeded.
BandwidthSelection select_bandwidth(std::vector<RiskRow> table, std::string_view what);

/// Subject-level K-fold CV of the held-out Σ d²(Y_ij, μ̂^{(-fold)}(T_ij)); ties go
/// to the larger bandwidth.
BandwidthSelection cv_mean(const SparseDataset& data, const BandwidthGrid& grid,
                           const CvOptions& options = {});

/// Subject-level K-fold CV of the held-out Σ_{j≠k} ‖raw_ijk - Ĉ^{(-fold)}(T_ij, T_ik)‖²_G.
BandwidthSelection cv_cov(const SparseDataset& data, const MeanCurve& mean,
                          const BandwidthGrid& grid, const CvOptions& options = {});

/// One-pass GCV: residual sum of squares of the full-data fit over
/// (1 - tr H / N)², with tr H the sum of the smoother's self-weights.
BandwidthSelection gcv_mean(const SparseDataset& data, const BandwidthGrid& grid,
                            const CvOptions& options = {});
BandwidthSelection gcv_cov(const SparseDataset& data, const MeanCurve& mean,
                           const BandwidthGrid& grid, const CvOptions& options = {});

/// Risk table as CSV with header h,risk,ok.
std::string risk_table_csv(const BandwidthSelection& sel);

}  // namespace rfda
