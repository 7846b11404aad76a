#pragma once

#include "rfda/geometry.hpp"

namespace rfda {

/// Element of the fiber L(p, q): a linear map T_pM → T_qM, stored as its
/// coefficient matrix relative to frames attached at p (source) and q
/// (target). u = Σ u_k e_k(p) is sent to Σ_j (A u)_j e_j(q).
class FiberElement {
 public:
  FiberElement() = default;
  FiberElement(Frame source, Frame target, Mat coefficients);

  const Frame& source_frame() const { return source_; }
  const Frame& target_frame() const { return target_; }
  const Point& source() const { return source_.base(); }
  const Point& target() const { return target_.base(); }
  const Mat& coefficients() const { return coef_; }

  /// Image of a tangent vector at the source point.
  Tangent apply(const Tangent& u) const;
  /// The adjoint map T_qM → T_pM (coefficients transpose, frames swapped).
  FiberElement adjoint() const;
  /// Same map written in other frames at the same base points.
  FiberElement reframed(const Geometry& geom, const Frame& source, const Frame& target) const;

 private:
  Frame source_;
  Frame target_;
  Mat coef_;
};

/// Orthogonal d×d matrix sending coefficients in `from` to coefficients in
/// `to` of the transported vectors: column k holds the `to`-coefficients of
/// transport(from.base → to.base, from[k]).
Mat frame_transfer(const Geometry& geom, const Frame& from, const Frame& to);

/// u ⊗ v: the rank-one map x ↦ ⟨u, x⟩ v from T_pM to T_qM.
FiberElement tensor(const Geometry& geom, const Frame& at_source, const Frame& at_target,
                    const Tangent& u, const Tangent& v);

/// Raw covariance Log_{μ(s)} y_s ⊗ Log_{μ(t)} y_t, written in the given
/// frames at μ(s) and μ(t).
FiberElement raw_cov(const Geometry& geom, const Frame& mean_at_s, const Frame& mean_at_t,
                     const Point& y_s, const Point& y_t);

/// Bundle parallel transport: (PC)(u) = P_{q→q'} C P_{p'→p} u, expressed in
/// the supplied frames at the new base points.
FiberElement bundle_transport(const Geometry& geom, const FiberElement& c, const Frame& to_source,
                              const Frame& to_target);

/// Hilbert–Schmidt inner product of two elements of the same fiber.
double bundle_inner(const Geometry& geom, const FiberElement& a, const FiberElement& b);
double bundle_norm(const Geometry& geom, const FiberElement& a);

/// ‖P_{q1→p1} P_{q2→q1} Log_{q2} y − P_{p2→p1} Log_{p2} y‖_{p1}: the failure of
/// transports around the quadrilateral p1, p2, q2, q1 to commute.
double holonomy_defect(const Geometry& geom, const Point& p1, const Point& p2, const Point& q1,
                       const Point& q2, const Point& y);

/// ‖P_{p2→q2} P_{p1→p2} P_{q1→p1} P_{q2→q1} v − v‖_{q2}: transport of v around the
/// quadrilateral q2, q1, p1, p2. Zero on flat geometries.
double loop_holonomy(const Geometry& geom, const Point& p1, const Point& p2, const Point& q1,
                     const Point& q2, const Tangent& v);

}  // namespace rfda
