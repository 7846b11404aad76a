#include "rfda/serialize.hpp"

#include <fstream>

#include "rfda/error.hpp"

namespace rfda {

Json ambient_to_json(const Geometry& geom, const Mat& a) {
  Json j = Json::array();
  if (geom.cols() == 1) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) j.push_back(a(i, 0));
    return j;
  }
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

Mat ambient_from_json(const Geometry& geom, const Json& j) {
  if (!j.is_array()) throw ValidationError("expected an array of coordinates");
  Mat a(geom.rows(), geom.cols());
  if (geom.cols() == 1) {
    if (static_cast<Eigen::Index>(j.size()) != geom.rows())
      throw ValidationError("coordinate array has length " + std::to_string(j.size()) +
                            ", expected " + std::to_string(geom.rows()));
    for (Eigen::Index i = 0; i < geom.rows(); ++i) {
      if (!j[i].is_number()) throw ValidationError("coordinates must be numbers");
      a(i, 0) = j[i].get<double>();
    }
    return a;
  }
  if (static_cast<Eigen::Index>(j.size()) != geom.rows())
    throw ValidationError("matrix has the wrong number of rows");
  for (Eigen::Index r = 0; r < geom.rows(); ++r) {
    const Json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != geom.cols())
      throw ValidationError("matrix row has the wrong length");
    for (Eigen::Index c = 0; c < geom.cols(); ++c) {
      if (!row[c].is_number()) throw ValidationError("matrix entries must be numbers");
      a(r, c) = row[c].get<double>();
    }
  }
  return a;
}

Json point_to_json(const Geometry& geom, const Point& p) { return ambient_to_json(geom, p.coords); }

Point point_from_json(const Geometry& geom, const Json& j) {
  Point p{ambient_from_json(geom, j)};
  geom.validate_point(p);
  return p;
}

Json matrix_to_json(const Mat& a) {
  Json j = Json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

Mat matrix_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("expected a nested array for a matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  Mat a(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols)
      throw ValidationError("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = j[r][c].get<double>();
  }
  return a;
}

Json vector_to_json(const Vec& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Vec vector_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

Json frame_to_json(const Geometry& geom, const Frame& f) {
  Json j = Json::array();
  for (int k = 0; k < f.dim(); ++k) j.push_back(ambient_to_json(geom, f.vector(k).components));
  return j;
}

Frame frame_from_json(const Geometry& geom, const Point& base, const Json& j) {
  if (!j.is_array() || static_cast<int>(j.size()) != geom.dim())
    throw ValidationError("a frame needs exactly d tangent vectors");
  Mat vectors(geom.ambient_size(), geom.dim());
  for (int k = 0; k < geom.dim(); ++k) vectors.col(k) = linalg::vec(ambient_from_json(geom, j[k]));
  return geom.make_frame(base, vectors);
}

Json fiber_to_json(const Geometry& geom, const FiberElement& c) {
  return Json{{"source", point_to_json(geom, c.source())},
              {"source_frame", frame_to_json(geom, c.source_frame())},
              {"target", point_to_json(geom, c.target())},
              {"target_frame", frame_to_json(geom, c.target_frame())},
              {"coefficients", matrix_to_json(c.coefficients())}};
}

FiberElement fiber_from_json(const Geometry& geom, const Json& j) {
  const Point s = point_from_json(geom, j.at("source"));
  const Point t = point_from_json(geom, j.at("target"));
  return {frame_from_json(geom, s, j.at("source_frame")),
          frame_from_json(geom, t, j.at("target_frame")), matrix_from_json(j.at("coefficients"))};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << j.dump(1) << '\n';
}

}  // namespace rfda
