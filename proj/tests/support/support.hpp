#pragma once

#include <cmath>
#include <vector>

#include "rfda/geometry.hpp"
#include "rfda/linalg.hpp"
#include "rfda/rng.hpp"
#include "rfda/dataset.hpp"

namespace rfda::testing {

inline Mat normal_matrix(RandomStream& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Mat a(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) a(i, j) = scale * rng.normal();
  return a;
}

inline Point random_point(const Geometry& g, RandomStream& rng, double spread = 1.0) {
  switch (g.kind()) {
    case GeometryKind::euclidean:
      return {normal_matrix(rng, g.rows(), 1, spread)};
    case GeometryKind::sphere: {
      Mat x = normal_matrix(rng, g.rows(), 1);
      return {x / x.norm()};
    }
    default: {
      const Mat s = normal_matrix(rng, g.rows(), g.cols(), 0.5 * spread);
      return {linalg::expm_sym(linalg::symmetrize(s))};
    }
  }
}

/// Random tangent at p with norm `length`.
inline Tangent random_tangent(const Geometry& g, const Point& p, RandomStream& rng, double length) {
  Tangent v = g.project_tangent(p, normal_matrix(rng, g.rows(), g.cols()));
  v.components *= length / g.norm(p, v);
  return v;
}

/// Point at distance < radius from p.
inline Point nearby(const Geometry& g, const Point& p, RandomStream& rng, double radius) {
  return g.exp(p, random_tangent(g, p, rng, radius * rng.uniform()));
}

inline Mat random_orthogonal(RandomStream& rng, int d) {
  return linalg::orthogonal_factor(normal_matrix(rng, d, d));
}

inline std::vector<GeometryPtr> all_geometries() {
  return {make_geometry("euclidean:3"), make_geometry("sphere:2"), make_geometry("spd-lc:2"),
          make_geometry("spd-ai:2")};
}

/// Scalar dataset on Euclidean(1) built from times and values.
inline SparseDataset scalar_dataset(const std::vector<std::vector<double>>& times,
                                    const std::vector<std::vector<double>>& values) {
  SparseDataset d;
  d.geometry = make_geometry("euclidean:1");
  for (std::size_t i = 0; i < times.size(); ++i) {
    Subject s;
    s.id = "s" + std::to_string(i);
    s.times = times[i];
    for (double y : values[i]) s.points.push_back({Mat::Constant(1, 1, y)});
    d.subjects.push_back(std::move(s));
  }
  return d;
}

}  // namespace rfda::testing
