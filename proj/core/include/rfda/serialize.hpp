#pragma once

#include <nlohmann/json.hpp>

#include "rfda/bundle.hpp"
#include "rfda/geometry.hpp"

namespace rfda {

using Json = nlohmann::json;

/// Points and tangents: number arrays for vector geometries, row-major
/// nested arrays for the SPD kinds.
Json ambient_to_json(const Geometry& geom, const Mat& a);
Mat ambient_from_json(const Geometry& geom, const Json& j);
Json point_to_json(const Geometry& geom, const Point& p);
/// Parses and validates a point.
Point point_from_json(const Geometry& geom, const Json& j);

Json matrix_to_json(const Mat& a);
Mat matrix_from_json(const Json& j);
Json vector_to_json(const Vec& v);
Vec vector_from_json(const Json& j);

/// A frame is serialized as the list of its tangent vectors.
Json frame_to_json(const Geometry& geom, const Frame& f);
Frame frame_from_json(const Geometry& geom, const Point& base, const Json& j);

Json fiber_to_json(const Geometry& geom, const FiberElement& c);
FiberElement fiber_from_json(const Geometry& geom, const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace rfda
