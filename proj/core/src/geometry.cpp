#include "rfda/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "rfda/error.hpp"

namespace rfda {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFrameTolerance = 1e-9;

bool same_point(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const double scale = 1.0 + std::max(linalg::max_abs(a), linalg::max_abs(b));
  return linalg::max_abs(a - b) <= 1e-9 * scale;
}

bool symmetric_within(const Mat& a, double tol) {
  return linalg::max_abs(a - a.transpose()) <= tol * std::max(1.0, linalg::max_abs(a));
}

Mat kron_sym(const Mat& a) {
  const Eigen::Index m = a.rows();
  Mat out(m * m, m * m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) out.block(i * m, j * m, m, m) = a(i, j) * a;
  return out;
}

}  // namespace

// ---------------------------------------------------------------- Frame

Tangent Frame::vector(int k) const {
  return {base_, linalg::unvec(vectors_.col(k), rows_, cols_)};
}

Vec Frame::coefficients(const Tangent& u) const {
  if (!same_point(u.base.coords, base_.coords))
    throw ValidationError("frame coefficients: tangent is based at a different point");
  return coefficients_of(u.components);
}

Tangent Frame::combine(const Vec& c) const { return {base_, combine_components(c)}; }

Mat Frame::combine_components(const Vec& c) const {
  if (c.size() != vectors_.cols())
    throw ValidationError("frame combine: coefficient vector has the wrong length");
  return linalg::unvec(vectors_ * c, rows_, cols_);
}

Frame Frame::rotated(const Mat& o) const {
  if (o.rows() != dim() || o.cols() != dim())
    throw ValidationError("frame rotation must be a d×d matrix");
  Frame f = *this;
  f.vectors_ = vectors_ * o.transpose();
  f.dual_ = o * dual_;
  return f;
}

// ---------------------------------------------------------------- Geometry

Geometry::Geometry(GeometryKind kind, int dim, Eigen::Index rows, Eigen::Index cols, double tol)
    : kind_(kind), dim_(dim), rows_(rows), cols_(cols), tol_(tol) {
  if (dim < 1) throw ValidationError("geometry dimension must be positive");
  if (!(tol > 0)) throw ValidationError("geometry tolerance must be positive");
}

void Geometry::check_shape(const Mat& a, const char* what) const {
  if (a.rows() != rows_ || a.cols() != cols_) {
    std::ostringstream os;
    os << what << ": expected a " << rows_ << "x" << cols_ << " array, got " << a.rows() << "x"
       << a.cols();
    throw ValidationError(os.str());
  }
}

bool Geometry::is_valid_point(const Point& p) const {
  if (p.coords.rows() != rows_ || p.coords.cols() != cols_) return false;
  if (!p.coords.allFinite()) return false;
  return point_ok(p.coords);
}

void Geometry::validate_point(const Point& p) const {
  check_shape(p.coords, "point");
  if (!is_valid_point(p)) throw ValidationError("point is not on the manifold " + descriptor());
}

void Geometry::check_base(const Point& p, const Tangent& u) const {
  check_shape(u.components, "tangent");
  if (!same_point(p.coords, u.base.coords))
    throw ValidationError("tangent vector is based at a different point");
}

double Geometry::inner(const Point& p, const Tangent& u, const Tangent& v) const {
  validate_point(p);
  check_base(p, u);
  check_base(p, v);
  return inner_impl(p.coords, u.components, v.components);
}

double Geometry::norm(const Point& p, const Tangent& v) const {
  return std::sqrt(std::max(0.0, inner(p, v, v)));
}

Point Geometry::exp(const Point& p, const Tangent& v) const {
  validate_point(p);
  check_base(p, v);
  return {exp_impl(p.coords, v.components)};
}

Tangent Geometry::log(const Point& p, const Point& q) const {
  validate_point(p);
  validate_point(q);
  return {p, log_impl(p.coords, q.coords)};
}

double Geometry::dist(const Point& p, const Point& q) const {
  validate_point(p);
  validate_point(q);
  return dist_impl(p.coords, q.coords);
}

Tangent Geometry::transport(const Point& p, const Point& q, const Tangent& v) const {
  validate_point(p);
  validate_point(q);
  check_base(p, v);
  return {q, transport_impl(p.coords, q.coords, v.components)};
}

void Geometry::log_batch(const Mat& p, const Mat& points, Mat& logs, Vec& sq_norms) const {
  logs.resize(ambient_size(), points.cols());
  sq_norms.resize(points.cols());
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    const Mat v = log_impl(p, linalg::unvec(points.col(c), rows_, cols_));
    logs.col(c) = linalg::vec(v);
    sq_norms(c) = inner_impl(p, v, v);
  }
}

Tangent Geometry::project_tangent(const Point& p, const Mat& raw) const {
  validate_point(p);
  check_shape(raw, "project_tangent input");
  return {p, project_impl(p.coords, raw)};
}

Tangent Geometry::zero(const Point& p) const { return {p, Mat::Zero(rows_, cols_)}; }

Mat Geometry::metric_tensor(const Point& p) const {
  validate_point(p);
  return metric_tensor_impl(p.coords);
}

Frame Geometry::frame_from_vectors(const Mat& p, Mat vectors) const {
  Frame f;
  f.base_ = Point{p};
  f.dual_ = vectors.transpose() * metric_tensor_impl(p);
  f.vectors_ = std::move(vectors);
  f.rows_ = rows_;
  f.cols_ = cols_;
  return f;
}

Frame Geometry::onb(const Point& p) const {
  validate_point(p);
  const std::vector<Mat> dirs = canonical_directions(p.coords);
  Mat basis(ambient_size(), dim_);
  int k = 0;
  for (const Mat& dir : dirs) {
    if (k == dim_) break;
    Mat w = project_impl(p.coords, dir);
    // Two passes of modified Gram–Schmidt.
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < k; ++j) {
        const Mat e = linalg::unvec(basis.col(j), rows_, cols_);
        w -= inner_impl(p.coords, w, e) * e;
      }
    }
    const double nw = std::sqrt(std::max(0.0, inner_impl(p.coords, w, w)));
    if (nw < 1e-8) continue;
    basis.col(k++) = linalg::vec(w / nw);
  }
  if (k != dim_) throw NumericalError("onb: canonical directions do not span the tangent space");
  return frame_from_vectors(p.coords, std::move(basis));
}

Frame Geometry::onb(const Point& p, const Frame& reference) const {
  return transport_frame(reference, p);
}

Frame Geometry::transport_frame(const Frame& f, const Point& q) const {
  validate_point(q);
  validate_point(f.base());
  if (f.dim() != dim_) throw ValidationError("frame dimension does not match the geometry");
  Mat moved(ambient_size(), dim_);
  for (int k = 0; k < dim_; ++k) {
    const Mat e = linalg::unvec(f.vectors().col(k), rows_, cols_);
    moved.col(k) = linalg::vec(project_impl(q.coords, transport_impl(f.base().coords, q.coords, e)));
  }
  return frame_from_vectors(q.coords, std::move(moved));
}

Frame Geometry::make_frame(const Point& p, const Mat& vectors) const {
  validate_point(p);
  if (vectors.rows() != ambient_size() || vectors.cols() != dim_)
    throw ValidationError("frame vectors must form a D×d array");
  Frame f = frame_from_vectors(p.coords, vectors);
  const Mat gram = f.dual() * f.vectors();
  if (linalg::max_abs(gram - Mat::Identity(dim_, dim_)) > kFrameTolerance)
    throw ValidationError("frame vectors are not orthonormal at their base point");
  return f;
}

// ---------------------------------------------------------------- Euclidean

EuclideanGeometry::EuclideanGeometry(int d, double tol)
    : Geometry(GeometryKind::euclidean, d, d, 1, tol) {}

std::string EuclideanGeometry::descriptor() const { return "euclidean:" + std::to_string(dim()); }

bool EuclideanGeometry::point_ok(const Mat&) const { return true; }

double EuclideanGeometry::inner_impl(const Mat&, const Mat& u, const Mat& v) const {
  return u.cwiseProduct(v).sum();
}

Mat EuclideanGeometry::exp_impl(const Mat& p, const Mat& v) const { return p + v; }
Mat EuclideanGeometry::log_impl(const Mat& p, const Mat& q) const { return q - p; }

void EuclideanGeometry::log_batch(const Mat& p, const Mat& points, Mat& logs, Vec& sq_norms) const {
  logs = points.colwise() - p.col(0);
  sq_norms = logs.colwise().squaredNorm().transpose();
}
double EuclideanGeometry::dist_impl(const Mat& p, const Mat& q) const { return (q - p).norm(); }
Mat EuclideanGeometry::transport_impl(const Mat&, const Mat&, const Mat& v) const { return v; }
Mat EuclideanGeometry::project_impl(const Mat&, const Mat& raw) const { return raw; }
Mat EuclideanGeometry::metric_tensor_impl(const Mat&) const {
  return Mat::Identity(ambient_size(), ambient_size());
}

std::vector<Mat> EuclideanGeometry::canonical_directions(const Mat&) const {
  std::vector<Mat> out;
  for (int i = 0; i < dim(); ++i) out.push_back(Mat(Vec::Unit(dim(), i)));
  return out;
}

// ---------------------------------------------------------------- Sphere

SphereGeometry::SphereGeometry(int d, double tol) : Geometry(GeometryKind::sphere, d, d + 1, 1, tol) {}

std::string SphereGeometry::descriptor() const { return "sphere:" + std::to_string(dim()); }

bool SphereGeometry::point_ok(const Mat& p) const { return std::abs(p.norm() - 1.0) <= tolerance(); }

double SphereGeometry::inner_impl(const Mat&, const Mat& u, const Mat& v) const {
  return u.cwiseProduct(v).sum();
}

Mat SphereGeometry::exp_impl(const Mat& p, const Mat& v) const {
  const double theta = v.norm();
  if (theta >= kInjectivityRadius)
    throw GuardError("sphere exp: velocity norm reaches the injectivity radius pi");
  Mat out;
  if (theta < kSmallAngle) {
    out = (1.0 - 0.5 * theta * theta) * p + (1.0 - theta * theta / 6.0) * v;
  } else {
    out = std::cos(theta) * p + (std::sin(theta) / theta) * v;
  }
  return out / out.norm();
}

Mat SphereGeometry::log_impl(const Mat& p, const Mat& q) const {
  const double theta = dist_impl(p, q);
  if (theta > kPi - tolerance() || (q + p).norm() <= tolerance())
    throw GuardError("sphere log: points are antipodal");
  const double c = p.cwiseProduct(q).sum();
  Mat w = q - c * p;
  w -= p.cwiseProduct(w).sum() * p;
  if (theta < kSmallAngle) return (1.0 + theta * theta / 6.0) * w;
  const double s = w.norm();
  if (s == 0.0) return Mat::Zero(p.rows(), 1);
  return (theta / s) * w;
}

void SphereGeometry::log_batch(const Mat& p, const Mat& points, Mat& logs, Vec& sq_norms) const {
  const auto pc = p.col(0);
  const Eigen::RowVectorXd minus = (points.colwise() - pc).colwise().norm();
  const Eigen::RowVectorXd plus = (points.colwise() + pc).colwise().norm();
  const Eigen::RowVectorXd c = pc.transpose() * points;
  logs = points - pc * c;
  logs -= pc * (pc.transpose() * logs);
  sq_norms.resize(points.cols());
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    const double theta = 2.0 * std::atan2(minus(k), plus(k));
    if (theta > kPi - tolerance() || plus(k) <= tolerance())
      throw GuardError("sphere log: points are antipodal");
    const double s = logs.col(k).norm();
    double scale = 0.0;
    if (theta < kSmallAngle) {
      scale = 1.0 + theta * theta / 6.0;
    } else if (s > 0.0) {
      scale = theta / s;
    }
    logs.col(k) *= scale;
    sq_norms(k) = logs.col(k).squaredNorm();
  }
}

double SphereGeometry::dist_impl(const Mat& p, const Mat& q) const {
  return 2.0 * std::atan2((p - q).norm(), (p + q).norm());
}

Mat SphereGeometry::transport_impl(const Mat& p, const Mat& q, const Mat& v) const {
  const double denom = 1.0 + p.cwiseProduct(q).sum();
  if (denom <= tolerance()) throw GuardError("sphere transport: points are antipodal");
  Mat out = v - (q.cwiseProduct(v).sum() / denom) * (p + q);
  out -= q.cwiseProduct(out).sum() * q;
  return out;
}

Mat SphereGeometry::project_impl(const Mat& p, const Mat& raw) const {
  return raw - p.cwiseProduct(raw).sum() * p;
}

Mat SphereGeometry::metric_tensor_impl(const Mat&) const {
  return Mat::Identity(ambient_size(), ambient_size());
}

std::vector<Mat> SphereGeometry::canonical_directions(const Mat& p) const {
  // Skip the canonical axis most aligned with p; first index wins ties.
  Eigen::Index skip = 0;
  p.col(0).cwiseAbs().maxCoeff(&skip);
  std::vector<Mat> out;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    if (i != skip) out.push_back(Mat(Vec::Unit(p.rows(), i)));
  return out;
}

// ---------------------------------------------------------------- SPD shared

std::vector<Mat> canonical_symmetric_basis(int m) {
  std::vector<Mat> out;
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      Mat e = Mat::Zero(m, m);
      if (i == j) {
        e(i, i) = 1.0;
      } else {
        e(i, j) = r;
        e(j, i) = r;
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

namespace {

bool spd_point_ok(const Mat& p, double tol) {
  if (!symmetric_within(p, tol)) return false;
  Eigen::LLT<Mat> llt(linalg::symmetrize(p));
  if (llt.info() != Eigen::Success) return false;
  return llt.matrixLLT().diagonal().minCoeff() > 0.0;
}

int spd_dim(int m) {
  if (m < 2) throw ValidationError("SPD geometries require matrix order m >= 2");
  return m * (m + 1) / 2;
}

}  // namespace

// ---------------------------------------------------------------- Log-Cholesky

SpdLogCholeskyGeometry::SpdLogCholeskyGeometry(int m, double tol)
    : Geometry(GeometryKind::spd_log_cholesky, spd_dim(m), m, m, tol), m_(m) {}

std::string SpdLogCholeskyGeometry::descriptor() const { return "spd-lc:" + std::to_string(m_); }

bool SpdLogCholeskyGeometry::point_ok(const Mat& p) const { return spd_point_ok(p, tolerance()); }

Mat SpdLogCholeskyGeometry::cholesky(const Mat& p) const {
  Eigen::LLT<Mat> llt(linalg::symmetrize(p));
  if (llt.info() != Eigen::Success) throw ValidationError("log-Cholesky: matrix is not SPD");
  return llt.matrixL();
}

Vec SpdLogCholeskyGeometry::coordinates(const Mat& p) const {
  const Mat l = cholesky(p);
  Vec c(dim());
  int k = 0;
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j <= i; ++j) c(k++) = (i == j) ? std::log(l(i, i)) : l(i, j);
  return c;
}

Mat SpdLogCholeskyGeometry::from_coordinates(const Vec& c) const {
  if (c.size() != dim()) throw ValidationError("log-Cholesky coordinates have the wrong length");
  Mat l = Mat::Zero(m_, m_);
  int k = 0;
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j <= i; ++j) l(i, j) = (i == j) ? std::exp(c(k++)) : c(k++);
  return linalg::symmetrize(l * l.transpose());
}

Vec SpdLogCholeskyGeometry::coordinate_differential(const Mat& p, const Mat& v) const {
  const Mat l = cholesky(p);
  const auto lt = l.triangularView<Eigen::Lower>();
  // X = L⁻¹ V L⁻ᵀ
  Mat x = lt.solve(linalg::symmetrize(v));
  x = lt.solve(x.transpose()).transpose();
  Mat half = x.triangularView<Eigen::StrictlyLower>();
  half.diagonal() = 0.5 * x.diagonal();
  const Mat dl = l * half;
  Vec dc(dim());
  int k = 0;
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j <= i; ++j) dc(k++) = (i == j) ? dl(i, i) / l(i, i) : dl(i, j);
  return dc;
}

Mat SpdLogCholeskyGeometry::tangent_from_differential(const Mat& p, const Vec& dc) const {
  const Mat l = cholesky(p);
  Mat dl = Mat::Zero(m_, m_);
  int k = 0;
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j <= i; ++j) dl(i, j) = (i == j) ? l(i, i) * dc(k++) : dc(k++);
  const Mat u = dl * l.transpose();
  return u + u.transpose();
}

Frame SpdLogCholeskyGeometry::coordinate_frame(const Point& p) const {
  validate_point(p);
  Mat vectors(ambient_size(), dim());
  for (int k = 0; k < dim(); ++k)
    vectors.col(k) = linalg::vec(tangent_from_differential(p.coords, Vec::Unit(dim(), k)));
  return frame_from_vectors(p.coords, std::move(vectors));
}

double SpdLogCholeskyGeometry::inner_impl(const Mat& p, const Mat& u, const Mat& v) const {
  return coordinate_differential(p, u).dot(coordinate_differential(p, v));
}

Mat SpdLogCholeskyGeometry::exp_impl(const Mat& p, const Mat& v) const {
  return from_coordinates(coordinates(p) + coordinate_differential(p, v));
}

Mat SpdLogCholeskyGeometry::log_impl(const Mat& p, const Mat& q) const {
  return tangent_from_differential(p, coordinates(q) - coordinates(p));
}

void SpdLogCholeskyGeometry::log_batch(const Mat& p, const Mat& points, Mat& logs,
                                       Vec& sq_norms) const {
  const Vec cp = coordinates(p);
  logs.resize(ambient_size(), points.cols());
  sq_norms.resize(points.cols());
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    const Vec dc = coordinates(linalg::unvec(points.col(k), m_, m_)) - cp;
    logs.col(k) = linalg::vec(tangent_from_differential(p, dc));
    sq_norms(k) = dc.squaredNorm();
  }
}

double SpdLogCholeskyGeometry::dist_impl(const Mat& p, const Mat& q) const {
  return (coordinates(q) - coordinates(p)).norm();
}

Mat SpdLogCholeskyGeometry::transport_impl(const Mat& p, const Mat& q, const Mat& v) const {
  return tangent_from_differential(q, coordinate_differential(p, v));
}

Mat SpdLogCholeskyGeometry::project_impl(const Mat&, const Mat& raw) const {
  return linalg::symmetrize(raw);
}

Mat SpdLogCholeskyGeometry::metric_tensor_impl(const Mat& p) const {
  Mat j(dim(), ambient_size());
  for (int b = 0; b < m_; ++b) {
    for (int a = 0; a < m_; ++a) {
      Mat e = Mat::Zero(m_, m_);
      e(a, b) += 0.5;
      e(b, a) += 0.5;
      j.col(a + b * m_) = coordinate_differential(p, e);
    }
  }
  return j.transpose() * j;
}

std::vector<Mat> SpdLogCholeskyGeometry::canonical_directions(const Mat&) const {
  return canonical_symmetric_basis(m_);
}

// ---------------------------------------------------------------- Affine-invariant

SpdAffineGeometry::SpdAffineGeometry(int m, double tol)
    : Geometry(GeometryKind::spd_affine_invariant, spd_dim(m), m, m, tol), m_(m) {}

std::string SpdAffineGeometry::descriptor() const { return "spd-ai:" + std::to_string(m_); }

bool SpdAffineGeometry::point_ok(const Mat& p) const { return spd_point_ok(p, tolerance()); }

double SpdAffineGeometry::inner_impl(const Mat& p, const Mat& u, const Mat& v) const {
  Eigen::LLT<Mat> llt(linalg::symmetrize(p));
  const Mat a = llt.solve(u);
  const Mat b = llt.solve(v);
  return (a * b).trace();
}

Mat SpdAffineGeometry::exp_impl(const Mat& p, const Mat& v) const {
  const auto sp = linalg::sqrt_pair_spd(p);
  const Mat inner = linalg::expm_sym(linalg::symmetrize(sp.inv_root * v * sp.inv_root));
  return linalg::symmetrize(sp.root * inner * sp.root);
}

Mat SpdAffineGeometry::log_impl(const Mat& p, const Mat& q) const {
  const auto sp = linalg::sqrt_pair_spd(p);
  const Mat inner = linalg::logm_spd(linalg::symmetrize(sp.inv_root * q * sp.inv_root));
  return linalg::symmetrize(sp.root * inner * sp.root);
}

void SpdAffineGeometry::log_batch(const Mat& p, const Mat& points, Mat& logs, Vec& sq_norms) const {
  const auto sp = linalg::sqrt_pair_spd(p);
  logs.resize(ambient_size(), points.cols());
  sq_norms.resize(points.cols());
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    const Mat q = linalg::unvec(points.col(k), m_, m_);
    const Mat inner = linalg::logm_spd(linalg::symmetrize(sp.inv_root * q * sp.inv_root));
    logs.col(k) = linalg::vec(linalg::symmetrize(sp.root * inner * sp.root));
    sq_norms(k) = inner.squaredNorm();
  }
}

double SpdAffineGeometry::dist_impl(const Mat& p, const Mat& q) const {
  const auto sp = linalg::sqrt_pair_spd(p);
  Eigen::SelfAdjointEigenSolver<Mat> es(linalg::symmetrize(sp.inv_root * q * sp.inv_root),
                                        Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = std::log(std::max(es.eigenvalues()(i), linalg::kEigenFloor));
    s += l * l;
  }
  return std::sqrt(s);
}

Mat SpdAffineGeometry::transport_impl(const Mat& p, const Mat& q, const Mat& v) const {
  // Γ(V) = E V Eᵀ with E = (Q P⁻¹)^{1/2} = P^{1/2} (P^{-1/2} Q P^{-1/2})^{1/2} P^{-1/2}.
  const auto sp = linalg::sqrt_pair_spd(p);
  const Mat mid = linalg::sqrtm_spd(linalg::symmetrize(sp.inv_root * q * sp.inv_root));
  const Mat e = sp.root * mid * sp.inv_root;
  return linalg::symmetrize(e * v * e.transpose());
}

Mat SpdAffineGeometry::project_impl(const Mat&, const Mat& raw) const {
  return linalg::symmetrize(raw);
}

Mat SpdAffineGeometry::metric_tensor_impl(const Mat& p) const {
  Eigen::LLT<Mat> llt(linalg::symmetrize(p));
  const Mat pinv = llt.solve(Mat::Identity(m_, m_));
  return kron_sym(linalg::symmetrize(pinv));
}

std::vector<Mat> SpdAffineGeometry::canonical_directions(const Mat&) const {
  return canonical_symmetric_basis(m_);
}

// ---------------------------------------------------------------- factory

GeometryPtr make_geometry(std::string_view descriptor, double tol) {
  const auto colon = descriptor.find(':');
  if (colon == std::string_view::npos)
    throw ValidationError("geometry descriptor must look like kind:n, got '" +
                          std::string(descriptor) + "'");
  const std::string_view kind = descriptor.substr(0, colon);
  const std::string_view num = descriptor.substr(colon + 1);
  int n = 0;
  const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
  if (ec != std::errc() || ptr != num.data() + num.size() || n < 1)
    throw ValidationError("geometry descriptor has an invalid size: '" + std::string(descriptor) +
                          "'");
  if (kind == "euclidean") return std::make_shared<EuclideanGeometry>(n, tol);
  if (kind == "sphere") return std::make_shared<SphereGeometry>(n, tol);
  if (kind == "spd-lc") return std::make_shared<SpdLogCholeskyGeometry>(n, tol);
  if (kind == "spd-ai") return std::make_shared<SpdAffineGeometry>(n, tol);
  throw ValidationError("unknown geometry kind '" + std::string(kind) + "'");
}

}  // namespace rfda
