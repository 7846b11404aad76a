#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rfda/geometry.hpp"

namespace rfda {

/// How subjects are weighted in the mean (λ_i) and covariance (ν_i) fits.
/// obs-equal: λ_i = 1/Σm_j, ν_i = 1/Σm_j(m_j-1);
/// subject-equal: λ_i = 1/(n m_i), ν_i = 1/(n' m_i(m_i-1)) with n' the number
/// of subjects having at least two observations.
enum class WeightScheme { obs_equal, subject_equal };

WeightScheme parse_weight_scheme(std::string_view name);
std::string_view to_string(WeightScheme scheme);

struct Subject {
  std::string id;
  std::vector<double> times;
  std::vector<Point> points;

  std::size_t size() const { return times.size(); }
};

/// Sparse longitudinal sample of manifold-valued curves.
struct SparseDataset {
  GeometryPtr geometry;
  std::vector<Subject> subjects;
  WeightScheme weights = WeightScheme::obs_equal;
  double domain_lo = 0.0;
  double domain_hi = 1.0;
  /// Subjects whose times arrived unsorted and were sorted on ingestion.
  std::size_t resorted_subjects = 0;

  std::size_t total_observations() const;
  /// Subjects with at least two observations (used by the covariance fit).
  std::size_t covariance_subjects() const;
  /// λ_i for every subject; Σ λ_i m_i = 1.
  std::vector<double> mean_weights() const;
  /// ν_i for every subject (0 when m_i < 2); Σ ν_i m_i (m_i - 1) = 1.
  std::vector<double> cov_weights() const;

  /// Checks times inside the domain and points on the manifold; throws
  /// ValidationError naming the offending subject.
  void validate() const;

  /// Copy keeping only the listed subjects (in the given order).
  SparseDataset subset(const std::vector<std::size_t>& indices) const;
};

/// Reads the JSON-lines format: a header {"geometry": ..., "domain": [a, b],
/// "weights": "obs"|"subject"} followed by one {"id", "times", "points"}
/// record per subject. Unsorted times are sorted and counted.
SparseDataset ingest(std::istream& in);
SparseDataset read_dataset(const std::string& path);
void export_dataset(std::ostream& out, const SparseDataset& data);
void write_dataset(const std::string& path, const SparseDataset& data);

}  // namespace rfda
