#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rfda/linalg.hpp"

namespace rfda {

enum class GeometryKind { euclidean, sphere, spd_log_cholesky, spd_affine_invariant };

/// A point of the manifold in ambient coordinates: a column vector for the
/// Euclidean space and the sphere, a symmetric m×m matrix for the SPD kinds.
struct Point {
  Mat coords;
};

/// A tangent vector, carrying the point it is attached to.
struct Tangent {
  Point base;
  Mat components;
};

class Geometry;

/// Orthonormal basis of a tangent space.
///
/// Besides the basis vectors (stored column-wise as flattened ambient arrays)
/// the frame keeps its dual rows, so that the coefficients of a tangent u are
/// `dual * vec(u)`. The dual depends on the metric at the base point and is
/// filled in by Geometry when the frame is built.
class Frame {
 public:
  Frame() = default;

  const Point& base() const { return base_; }
  int dim() const { return static_cast<int>(vectors_.cols()); }
  const Mat& vectors() const { return vectors_; }
  const Mat& dual() const { return dual_; }

  Tangent vector(int k) const;

  /// Coefficients of u; throws ValidationError if u is based elsewhere.
  Vec coefficients(const Tangent& u) const;
  /// Coefficients of ambient components assumed to be based at base().
  Vec coefficients_of(const Mat& components) const { return dual_ * linalg::vec(components); }
  /// Σ c_k e_k.
  Tangent combine(const Vec& c) const;
  Mat combine_components(const Vec& c) const;

  /// Frame with vectors e'_j = Σ_k o(j,k) e_k; coefficients map as c' = o c.
  Frame rotated(const Mat& o) const;

 private:
  friend class Geometry;
  Point base_;
  Mat vectors_;
  Mat dual_;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
};

/// Riemannian manifold interface consumed by every estimator.
///
/// Public operations validate their arguments and throw ValidationError for
/// invalid points or mismatched base points, and GuardError when a pair of
/// points leaves the region where geodesics are unique. All operations are
/// pure.
class Geometry {
 public:
  virtual ~Geometry() = default;

  GeometryKind kind() const { return kind_; }
  /// Intrinsic dimension d.
  int dim() const { return dim_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  /// Number of ambient coordinates, rows()*cols().
  Eigen::Index ambient_size() const { return rows_ * cols_; }
  double tolerance() const { return tol_; }
  /// "euclidean:d", "sphere:d", "spd-lc:m" or "spd-ai:m".
  virtual std::string descriptor() const = 0;

  bool is_valid_point(const Point& p) const;
  void validate_point(const Point& p) const;

  double inner(const Point& p, const Tangent& u, const Tangent& v) const;
  double norm(const Point& p, const Tangent& v) const;
  Point exp(const Point& p, const Tangent& v) const;
  Tangent log(const Point& p, const Point& q) const;
  double dist(const Point& p, const Point& q) const;
  /// Parallel transport of v from p to q along the minimizing geodesic.
  Tangent transport(const Point& p, const Point& q, const Tangent& v) const;

  /// Deterministic orthonormal frame at p (Gram–Schmidt on the canonical
  /// ambient basis).
  Frame onb(const Point& p) const;
  /// The reference frame transported from its base point to p.
  Frame onb(const Point& p, const Frame& reference) const;
  Frame transport_frame(const Frame& f, const Point& q) const;
  /// Builds a frame from D×d flattened vectors; they must be orthonormal at p.
  Frame make_frame(const Point& p, const Mat& vectors) const;

  Tangent project_tangent(const Point& p, const Mat& raw) const;
  Tangent zero(const Point& p) const;

  /// D×D matrix G with inner(p,u,v) = vec(u)ᵀ G vec(v) for tangents u, v.
  Mat metric_tensor(const Point& p) const;

  /// Throws ValidationError unless u is based at p.
  void check_base(const Point& p, const Tangent& u) const;

  /// log and inner without argument checks, for inner loops over points that
  /// were validated on entry.
  Mat log_unchecked(const Mat& p, const Mat& q) const { return log_impl(p, q); }
  double inner_unchecked(const Mat& p, const Mat& u, const Mat& v) const { return inner_impl(p, u, v); }

  /// Logs at p of many points at once. `points` holds one flattened point per
  /// column; `logs` receives the flattened log components and `sq_norms` their
  /// squared norms. Points are not validated.
  virtual void log_batch(const Mat& p, const Mat& points, Mat& logs, Vec& sq_norms) const;

 protected:
  Geometry(GeometryKind kind, int dim, Eigen::Index rows, Eigen::Index cols, double tol);

  virtual bool point_ok(const Mat& p) const = 0;
  virtual double inner_impl(const Mat& p, const Mat& u, const Mat& v) const = 0;
  virtual Mat exp_impl(const Mat& p, const Mat& v) const = 0;
  virtual Mat log_impl(const Mat& p, const Mat& q) const = 0;
  virtual double dist_impl(const Mat& p, const Mat& q) const = 0;
  virtual Mat transport_impl(const Mat& p, const Mat& q, const Mat& v) const = 0;
  virtual Mat project_impl(const Mat& p, const Mat& raw) const = 0;
  virtual Mat metric_tensor_impl(const Mat& p) const = 0;
  /// Candidate ambient directions fed to Gram–Schmidt, in canonical order.
  virtual std::vector<Mat> canonical_directions(const Mat& p) const = 0;

  Frame frame_from_vectors(const Mat& p, Mat vectors) const;
  void check_shape(const Mat& a, const char* what) const;

 private:
  GeometryKind kind_;
  int dim_;
  Eigen::Index rows_;
  Eigen::Index cols_;
  double tol_;
};

using GeometryPtr = std::shared_ptr<const Geometry>;

class EuclideanGeometry final : public Geometry {
 public:
  explicit EuclideanGeometry(int d, double tol = 1e-12);
  std::string descriptor() const override;
  void log_batch(const Mat& p, const Mat& points, Mat& logs, Vec& sq_norms) const override;

 protected:
  bool point_ok(const Mat& p) const override;
  double inner_impl(const Mat& p, const Mat& u, const Mat& v) const override;
  Mat exp_impl(const Mat& p, const Mat& v) const override;
  Mat log_impl(const Mat& p, const Mat& q) const override;
  double dist_impl(const Mat& p, const Mat& q) const override;
  Mat transport_impl(const Mat& p, const Mat& q, const Mat& v) const override;
  Mat project_impl(const Mat& p, const Mat& raw) const override;
  Mat metric_tensor_impl(const Mat& p) const override;
  std::vector<Mat> canonical_directions(const Mat& p) const override;
};

/// Unit sphere S^d ⊂ R^{d+1} with the round metric.
class SphereGeometry final : public Geometry {
 public:
  explicit SphereGeometry(int d, double tol = 1e-12);
  std::string descriptor() const override;
  void log_batch(const Mat& p, const Mat& points, Mat& logs, Vec& sq_norms) const override;

  /// Velocities at or beyond this norm are rejected by exp.
  static constexpr double kInjectivityRadius = 3.14159265358979323846;
  /// Below this angle exp/log switch to their series expansions.
  static constexpr double kSmallAngle = 1e-8;

 protected:
  bool point_ok(const Mat& p) const override;
  double inner_impl(const Mat& p, const Mat& u, const Mat& v) const override;
  Mat exp_impl(const Mat& p, const Mat& v) const override;
  Mat log_impl(const Mat& p, const Mat& q) const override;
  double dist_impl(const Mat& p, const Mat& q) const override;
  Mat transport_impl(const Mat& p, const Mat& q, const Mat& v) const override;
  Mat project_impl(const Mat& p, const Mat& raw) const override;
  Mat metric_tensor_impl(const Mat& p) const override;
  std::vector<Mat> canonical_directions(const Mat& p) const override;
};

/// SPD matrices with the Log-Cholesky metric. The map
/// c(P) = (strictly lower part of chol(P), log of its diagonal) is an
/// isometry onto Euclidean space, so every operation is computed in these
/// flat coordinates.
class SpdLogCholeskyGeometry final : public Geometry {
 public:
  explicit SpdLogCholeskyGeometry(int m, double tol = 1e-12);
  std::string descriptor() const override;
  void log_batch(const Mat& p, const Mat& points, Mat& logs, Vec& sq_norms) const override;

  int order() const { return m_; }
  /// Flat coordinates, ordered (i, j) for i = 0..m-1, j = 0..i.
  Vec coordinates(const Mat& p) const;
  Mat from_coordinates(const Vec& c) const;
  /// Differential of c at p applied to a symmetric tangent.
  Vec coordinate_differential(const Mat& p, const Mat& v) const;
  /// Inverse of coordinate_differential.
  Mat tangent_from_differential(const Mat& p, const Vec& dc) const;
  /// The frame whose vectors map to the coordinate axes; it is parallel.
  Frame coordinate_frame(const Point& p) const;

 protected:
  bool point_ok(const Mat& p) const override;
  double inner_impl(const Mat& p, const Mat& u, const Mat& v) const override;
  Mat exp_impl(const Mat& p, const Mat& v) const override;
  Mat log_impl(const Mat& p, const Mat& q) const override;
  double dist_impl(const Mat& p, const Mat& q) const override;
  Mat transport_impl(const Mat& p, const Mat& q, const Mat& v) const override;
  Mat project_impl(const Mat& p, const Mat& raw) const override;
  Mat metric_tensor_impl(const Mat& p) const override;
  std::vector<Mat> canonical_directions(const Mat& p) const override;

 private:
  Mat cholesky(const Mat& p) const;
  int m_;
};

/// SPD matrices with the affine-invariant metric tr(P⁻¹UP⁻¹V).
class SpdAffineGeometry final : public Geometry {
 public:
  explicit SpdAffineGeometry(int m, double tol = 1e-12);
  std::string descriptor() const override;
  void log_batch(const Mat& p, const Mat& points, Mat& logs, Vec& sq_norms) const override;
  int order() const { return m_; }

 protected:
  bool point_ok(const Mat& p) const override;
  double inner_impl(const Mat& p, const Mat& u, const Mat& v) const override;
  Mat exp_impl(const Mat& p, const Mat& v) const override;
  Mat log_impl(const Mat& p, const Mat& q) const override;
  double dist_impl(const Mat& p, const Mat& q) const override;
  Mat transport_impl(const Mat& p, const Mat& q, const Mat& v) const override;
  Mat project_impl(const Mat& p, const Mat& raw) const override;
  Mat metric_tensor_impl(const Mat& p) const override;
  std::vector<Mat> canonical_directions(const Mat& p) const override;

 private:
  int m_;
};

/// Parses "euclidean:d", "sphere:d", "spd-lc:m" or "spd-ai:m".
GeometryPtr make_geometry(std::string_view descriptor, double tol = 1e-12);

/// Symmetric basis matrices in canonical order (i, j) with j <= i; off-diagonal
/// entries are (E_ij + E_ji)/√2 so the family is Frobenius-orthonormal.
std::vector<Mat> canonical_symmetric_basis(int m);

}  // namespace rfda
