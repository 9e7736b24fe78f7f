#ifndef VMORPH_JSON_IO_HPP
#define VMORPH_JSON_IO_HPP

#include <cmath>
#include <string>

#include <json.hpp>

#include "vmorph/assessment.hpp"
#include "vmorph/height_grid.hpp"
#include "vmorph/morphology.hpp"
#include "vmorph/registration.hpp"
#include "vmorph/symmetry.hpp"
#include "vmorph/transform.hpp"

namespace vmorph {

using nlohmann::json;

inline json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline json mat_json(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

/// NaN is not representable in JSON; emit null.
inline json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const SimilarityTransform& t) {
  return {{"translation_mm", vec_json(t.translation)}, {"angles_deg", vec_json(t.angles)}, {"scale", t.scale}};
}

inline SimilarityTransform transform_from_json(const json& j) {
  SimilarityTransform t;
  const auto& x = j.at("translation_mm");
  const auto& a = j.at("angles_deg");
  t.translation = {x.at(0).get<double>(), x.at(1).get<double>(), x.at(2).get<double>()};
  t.angles = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
  t.scale = j.at("scale").get<double>();
  t.validate();
  return t;
}

inline json to_json(const MetricValues& m) {
  return {{"D", m.d}, {"sqrt_D2", m.rms}, {"sqrt_D2_plane", num_json(m.rms_plane)}};
}

inline json to_json(const RegistrationReport& r) {
  return {{"method", r.method},
          {"transform", to_json(r.transform)},
          {"metrics", to_json(r.metrics)},
          {"iterations", r.iterations},
          {"evaluations", r.evaluations},
          {"converged", r.converged}};
}

inline json to_json(const GridDifferenceStats& s) {
  return {{"max", s.max}, {"mean", s.mean}, {"median", s.median}, {"stddev", s.stddev}, {"count", s.count}};
}

inline json to_json(const GridSpec& g) {
  return {{"origin", json::array({g.x0, g.y0})}, {"spacing", g.spacing}, {"nx", g.nx}, {"ny", g.ny}};
}

inline json to_json(const FittedPlane& p) {
  return {{"normal", vec_json(p.normal)},
          {"offset_mm", p.offset},
          {"rms_mm", p.rms},
          {"source", to_string(p.source)},
          {"tilt_deg", p.tilt_degrees()}};
}

inline json to_json(const SymmetryFrame& f) {
  return {{"rotation", mat_json(f.rotation)},
          {"z_bar_mm", f.z_bar},
          {"n_g", f.n_g},
          {"upper_plane", to_json(f.upper)},
          {"lower_plane", to_json(f.lower)},
          {"average_plane", to_json(f.average)}};
}

inline SymmetryFrame frame_from_json(const json& j) {
  SymmetryFrame f;
  const auto& r = j.at("rotation");
  for (int i = 0; i < 9; ++i) f.rotation(i / 3, i % 3) = r.at(static_cast<std::size_t>(i)).get<double>();
  f.z_bar = j.at("z_bar_mm").get<double>();
  f.n_g = j.at("n_g").get<std::size_t>();
  return f;
}

inline json to_json(const AsymmetryStats& s) {
  return {{"count", s.count},     {"violations", s.violations}, {"min", s.min},
          {"max", s.max},         {"mean", s.mean},             {"mean_abs", s.mean_abs},
          {"max_abs", s.max_abs}};
}

inline json histogram_json(const std::vector<std::size_t>& h, double width) {
  json bins = json::array();
  for (std::size_t k = 0; k < h.size(); ++k)
    bins.push_back({{"lo", width * static_cast<double>(k)}, {"hi", width * static_cast<double>(k + 1)}, {"count", h[k]}});
  return bins;
}

inline json to_json(const ErrorDistribution& e) {
  return {{"count", e.distances.size()},
          {"mean_mm", e.mean},
          {"threshold_mm", e.threshold},
          {"fraction_above", e.fraction_above},
          {"histogram", histogram_json(e.histogram, e.bin_width)}};
}

inline json to_json(const ChannelTrace& t) {
  std::size_t edge = 0, ambiguous = 0;
  for (const auto& s : t.stations) {
    edge += s.at_window_edge;
    ambiguous += s.ambiguous;
  }
  return {{"stations_requested", t.requested},
          {"stations_detected", t.stations.size()},
          {"stations_skipped", t.skipped},
          {"at_window_edge", edge},
          {"ambiguous_inward", ambiguous},
          {"no_channel", t.no_channel},
          {"contour_length_mm", t.contour_length},
          {"smoothing_lambda", t.lambda},
          {"smoothing_rms_mm", t.smoothing_rms}};
}

}  // namespace vmorph

#endif  // VMORPH_JSON_IO_HPP
