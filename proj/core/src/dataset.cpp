#include "rfda/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rfda/error.hpp"
#include "rfda/serialize.hpp"

namespace rfda {

WeightScheme parse_weight_scheme(std::string_view name) {
  if (name == "obs" || name == "obs-equal") return WeightScheme::obs_equal;
  if (name == "subject" || name == "subject-equal") return WeightScheme::subject_equal;
  throw ValidationError("unknown weight scheme '" + std::string(name) + "'");
}

std::string_view to_string(WeightScheme scheme) {
  return scheme == WeightScheme::obs_equal ? "obs" : "subject";
}

std::size_t SparseDataset::total_observations() const {
  std::size_t n = 0;
  for (const auto& s : subjects) n += s.size();
  return n;
}

std::size_t SparseDataset::covariance_subjects() const {
  return static_cast<std::size_t>(
      std::count_if(subjects.begin(), subjects.end(), [](const Subject& s) { return s.size() >= 2; }));
}

std::vector<double> SparseDataset::mean_weights() const {
  std::vector<double> w(subjects.size(), 0.0);
  const double total = static_cast<double>(total_observations());
  const double n = static_cast<double>(subjects.size());
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const double mi = static_cast<double>(subjects[i].size());
    if (mi == 0) continue;
    w[i] = weights == WeightScheme::obs_equal ? 1.0 / total : 1.0 / (n * mi);
  }
  return w;
}

std::vector<double> SparseDataset::cov_weights() const {
  std::vector<double> w(subjects.size(), 0.0);
  double pairs = 0.0;
  for (const auto& s : subjects) {
    const double mi = static_cast<double>(s.size());
    if (s.size() >= 2) pairs += mi * (mi - 1.0);
  }
  const double n = static_cast<double>(covariance_subjects());
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const double mi = static_cast<double>(subjects[i].size());
    if (subjects[i].size() < 2) continue;
    w[i] = weights == WeightScheme::obs_equal ? 1.0 / pairs : 1.0 / (n * mi * (mi - 1.0));
  }
  return w;
}

void SparseDataset::validate() const {
  if (!geometry) throw ValidationError("dataset has no geometry");
  if (!(domain_lo < domain_hi)) throw ValidationError("dataset domain is empty");
  for (const auto& s : subjects) {
    if (s.times.size() != s.points.size())
      throw ValidationError("subject '" + s.id + "': times and points differ in length");
    if (s.times.empty()) throw ValidationError("subject '" + s.id + "' has no observations");
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!(s.times[j] >= domain_lo && s.times[j] <= domain_hi))
        throw ValidationError("subject '" + s.id + "': time outside the domain");
      if (j > 0 && s.times[j] < s.times[j - 1])
        throw ValidationError("subject '" + s.id + "': times are not sorted");
      if (!geometry->is_valid_point(s.points[j]))
        throw ValidationError("subject '" + s.id + "': observation " + std::to_string(j) +
                              " is not a valid point of " + geometry->descriptor());
    }
  }
}

SparseDataset SparseDataset::subset(const std::vector<std::size_t>& indices) const {
  SparseDataset out;
  out.geometry = geometry;
  out.weights = weights;
  out.domain_lo = domain_lo;
  out.domain_hi = domain_hi;
  out.subjects.reserve(indices.size());
  for (std::size_t i : indices) out.subjects.push_back(subjects.at(i));
  return out;
}

namespace {

Subject parse_subject(const Geometry& geom, const Json& rec, std::size_t line_no) {
  Subject s;
  if (!rec.is_object() || !rec.contains("times") || !rec.contains("points"))
    throw ValidationError("line " + std::to_string(line_no) +
                          ": subject record needs 'times' and 'points'");
  if (rec.contains("id")) {
    s.id = rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump();
  } else {
    s.id = "line" + std::to_string(line_no);
  }
  const Json& times = rec["times"];
  const Json& points = rec["points"];
  if (!times.is_array() || !points.is_array() || times.size() != points.size())
    throw ValidationError("subject '" + s.id + "': 'times' and 'points' must be arrays of equal length");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!times[j].is_number()) throw ValidationError("subject '" + s.id + "': non-numeric time");
    s.times.push_back(times[j].get<double>());
    try {
      s.points.push_back(point_from_json(geom, points[j]));
    } catch (const ValidationError& e) {
      throw ValidationError("subject '" + s.id + "', observation " + std::to_string(j) + ": " +
                            e.what());
    }
  }
  return s;
}

}  // namespace

SparseDataset ingest(std::istream& in) {
  SparseDataset data;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::exception& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (!have_header) {
      if (!rec.is_object() || !rec.contains("geometry"))
        throw ValidationError("first record must be a header with a 'geometry' field");
      data.geometry = make_geometry(rec["geometry"].get<std::string>());
      if (rec.contains("domain")) {
        const Json& dom = rec["domain"];
        if (!dom.is_array() || dom.size() != 2)
          throw ValidationError("header 'domain' must be a two-element array");
        data.domain_lo = dom[0].get<double>();
        data.domain_hi = dom[1].get<double>();
      }
      if (rec.contains("weights"))
        data.weights = parse_weight_scheme(rec["weights"].get<std::string>());
      have_header = true;
      continue;
    }
    Subject s = parse_subject(*data.geometry, rec, line_no);
    if (!std::is_sorted(s.times.begin(), s.times.end())) {
      std::vector<std::size_t> order(s.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return s.times[a] < s.times[b]; });
      Subject sorted{s.id, {}, {}};
      for (std::size_t k : order) {
        sorted.times.push_back(s.times[k]);
        sorted.points.push_back(s.points[k]);
      }
      s = std::move(sorted);
      ++data.resorted_subjects;
    }
    data.subjects.push_back(std::move(s));
  }
  if (!have_header) throw ValidationError("dataset is empty: missing header record");
  data.validate();
  return data;
}

SparseDataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset '" + path + "'");
  return ingest(in);
}

void export_dataset(std::ostream& out, const SparseDataset& data) {
  const Geometry& geom = *data.geometry;
  Json header{{"geometry", geom.descriptor()},
              {"domain", Json::array({data.domain_lo, data.domain_hi})},
              {"weights", std::string(to_string(data.weights))}};
  out << header.dump() << '\n';
  for (const auto& s : data.subjects) {
    Json pts = Json::array();
    for (const auto& p : s.points) pts.push_back(point_to_json(geom, p));
    Json rec{{"id", s.id}, {"times", s.times}, {"points", std::move(pts)}};
    out << rec.dump() << '\n';
  }
}

void write_dataset(const std::string& path, const SparseDataset& data) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write dataset '" + path + "'");
  export_dataset(out, data);
}

}  // namespace rfda
