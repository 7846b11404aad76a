#include "rfda/bundle.hpp"

#include <algorithm>
#include <cmath>

#include "rfda/error.hpp"

namespace rfda {

namespace {

bool same_base(const Point& a, const Point& b) {
  const double scale = 1.0 + std::max(linalg::max_abs(a.coords), linalg::max_abs(b.coords));
  return a.coords.rows() == b.coords.rows() && a.coords.cols() == b.coords.cols() &&
         linalg::max_abs(a.coords - b.coords) <= 1e-9 * scale;
}

}  // namespace

FiberElement::FiberElement(Frame source, Frame target, Mat coefficients)
    : source_(std::move(source)), target_(std::move(target)), coef_(std::move(coefficients)) {
  if (coef_.rows() != target_.dim() || coef_.cols() != source_.dim())
    throw ValidationError("fiber element coefficients do not match the frame dimensions");
}

Tangent FiberElement::apply(const Tangent& u) const {
  return target_.combine(coef_ * source_.coefficients(u));
}

FiberElement FiberElement::adjoint() const { return {target_, source_, coef_.transpose()}; }

FiberElement FiberElement::reframed(const Geometry& geom, const Frame& source,
                                    const Frame& target) const {
  if (!same_base(source.base(), source_.base()) || !same_base(target.base(), target_.base()))
    throw ValidationError("reframed: new frames must sit at the same base points");
  const Mat rs = frame_transfer(geom, source_, source);
  const Mat rt = frame_transfer(geom, target_, target);
  return {source, target, rt * coef_ * rs.transpose()};
}

Mat frame_transfer(const Geometry& geom, const Frame& from, const Frame& to) {
  if (from.dim() != to.dim()) throw ValidationError("frame_transfer: dimension mismatch");
  const int d = from.dim();
  Mat m(d, d);
  for (int k = 0; k < d; ++k) {
    const Tangent moved = geom.transport(from.base(), to.base(), from.vector(k));
    m.col(k) = to.coefficients_of(moved.components);
  }
  return m;
}

FiberElement tensor(const Geometry& geom, const Frame& at_source, const Frame& at_target,
                    const Tangent& u, const Tangent& v) {
  geom.check_base(at_source.base(), u);
  geom.check_base(at_target.base(), v);
  const Vec a = at_source.coefficients_of(u.components);
  const Vec b = at_target.coefficients_of(v.components);
  return {at_source, at_target, b * a.transpose()};
}

FiberElement raw_cov(const Geometry& geom, const Frame& mean_at_s, const Frame& mean_at_t,
                     const Point& y_s, const Point& y_t) {
  const Tangent u = geom.log(mean_at_s.base(), y_s);
  const Tangent v = geom.log(mean_at_t.base(), y_t);
  return tensor(geom, mean_at_s, mean_at_t, u, v);
}

FiberElement bundle_transport(const Geometry& geom, const FiberElement& c, const Frame& to_source,
                              const Frame& to_target) {
  const Mat ms = frame_transfer(geom, c.source_frame(), to_source);
  const Mat mt = frame_transfer(geom, c.target_frame(), to_target);
  return {to_source, to_target, mt * c.coefficients() * ms.transpose()};
}

double bundle_inner(const Geometry& geom, const FiberElement& a, const FiberElement& b) {
  if (!same_base(a.source(), b.source()) || !same_base(a.target(), b.target()))
    throw ValidationError("bundle_inner: elements belong to different fibers");
  const FiberElement aligned = b.reframed(geom, a.source_frame(), a.target_frame());
  return a.coefficients().cwiseProduct(aligned.coefficients()).sum();
}

double bundle_norm(const Geometry& geom, const FiberElement& a) {
  return std::sqrt(std::max(0.0, bundle_inner(geom, a, a)));
}

double holonomy_defect(const Geometry& geom, const Point& p1, const Point& p2, const Point& q1,
                       const Point& q2, const Point& y) {
  const Tangent around = geom.transport(q1, p1, geom.transport(q2, q1, geom.log(q2, y)));
  const Tangent direct = geom.transport(p2, p1, geom.log(p2, y));
  const Tangent diff{p1, around.components - direct.components};
  return geom.norm(p1, diff);
}

double loop_holonomy(const Geometry& geom, const Point& p1, const Point& p2, const Point& q1,
                     const Point& q2, const Tangent& v) {
  const Tangent moved =
      geom.transport(p2, q2, geom.transport(p1, p2, geom.transport(q1, p1, geom.transport(q2, q1, v))));
  return geom.norm(q2, {q2, moved.components - v.components});
}

}  // namespace rfda
