#ifndef VMORPH_TOOLS_CLI_HPP
#define VMORPH_TOOLS_CLI_HPP

// Commands of the vmorph executable. Each command reads an effective JSON
// config (defaults < config file < flags), writes its artifacts below the
// output directory and finishes with manifest.json.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vmorph/vmorph.hpp"

namespace vmorph::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- config

inline json default_config() {
  return json::parse(R"({
    "inputs": {
      "body": null, "compare": null, "reference": null, "moving": null,
      "sound_board": null, "sound_board_contour": null,
      "back": null, "back_contour": null, "frame": null
    },
    "masks": {"removed": null, "sound_board": null, "back": null},
    "isolate": {"spacing": 1.0, "split_z": 0.0, "cut_x": true, "cut_y": true,
                "x_intervals": [], "y_intervals": []},
    "register": {"metric": "point_to_point", "allow_scale": true, "ftol": 1e-5,
                 "max_sweeps": 200, "normals_k": 10, "init": "identity",
                 "all_metrics": false, "icp_sample": 10000},
    "assess": {"threshold": 2.0, "bin_width": 0.1},
    "simplify": {"fractions": [0.25, 0.05], "spacing": 1.0},
    "symmetry": {"config": "two_contours_masked", "spacing": 1.0},
    "contours": {"spacing": 2.0, "range": 24.0},
    "asymmetry": {"bin_width": 0.25},
    "channel": {"stations": 400, "window": 15.0, "smoothing_rms": 0.5},
    "seed": 0,
    "format": "ply-binary-le",
    "output": "vmorph_out"
  })");
}

namespace detail {

inline bool is_count(const json& v) { return v.is_number_integer() && v.get<std::int64_t>() >= 0; }

inline std::string type_name(const json& v) {
  if (v.is_null()) return "path";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  return "object";
}

/// Input entries may be a path or {"path", "format", "scale"}; both become
/// the object form with the path resolved against `base`.
inline json normalize_input(const json& v, const std::string& key, const fs::path& base) {
  json out = {{"path", nullptr}, {"format", nullptr}, {"scale", 1.0}};
  if (v.is_string()) {
    out["path"] = v;
  } else if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!out.contains(it.key())) throw InputError("unknown config key '" + key + "." + it.key() + "'");
      out[it.key()] = it.value();
    }
    if (!out["path"].is_string()) throw InputError("config key '" + key + ".path' must be a string");
    if (!out["format"].is_null() && !out["format"].is_string())
      throw InputError("config key '" + key + ".format' must be a string");
    if (!out["scale"].is_number()) throw InputError("config key '" + key + ".scale' must be a number");
  } else {
    throw InputError("config key '" + key + "' must be a path or an object");
  }
  out["path"] = (base / out["path"].get<std::string>()).lexically_normal().generic_string();
  return out;
}

inline void merge(json& dst, const json& src, const std::string& prefix, const fs::path& base) {
  if (!src.is_object()) throw InputError("config '" + (prefix.empty() ? std::string("root") : prefix) + "' must be an object");
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!dst.contains(it.key())) throw InputError("unknown config key '" + key + "'");
    json& d = dst[it.key()];
    const json& v = it.value();
    if (d.is_object() && prefix != "inputs" && prefix != "masks") {
      merge(d, v, key, base);
    } else if (prefix == "inputs") {
      d = v.is_null() ? json(nullptr) : normalize_input(v, key, base);
    } else if (prefix == "masks") {
      if (!v.is_null() && !v.is_string()) throw InputError("config key '" + key + "' must be a path");
      d = v.is_null() ? json(nullptr) : json((base / v.get<std::string>()).lexically_normal().generic_string());
    } else if (key == "output") {
      if (!v.is_string()) throw InputError("config key 'output' must be a string");
      d = (base / v.get<std::string>()).lexically_normal().generic_string();
    } else {
      const bool ok = d.is_boolean()          ? v.is_boolean()
                      : d.is_number_integer() ? is_count(v)
                      : d.is_number()         ? v.is_number()
                      : d.is_string()         ? v.is_string()
                      : d.is_array()          ? v.is_array()
                                              : false;
      if (!ok) throw InputError("config key '" + key + "' must be of type " + type_name(d));
      d = v;
    }
  }
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InputError("config: " + what);
}

}  // namespace detail

/// Range and reference checks on an effective config.
inline void validate_config(const json& c) {
  using detail::require;
  const auto pos = [&](const json& v) { return v.get<double>() > 0.0; };
  require(pos(c["isolate"]["spacing"]), "isolate.spacing must be positive");
  require(c["isolate"]["cut_x"].get<bool>() || c["isolate"]["cut_y"].get<bool>(), "isolate needs cut_x or cut_y");
  for (const char* k : {"x_intervals", "y_intervals"})
    for (const json& iv : c["isolate"][k]) {
      require(iv.is_object() && iv.contains("min") && iv.contains("max") && iv["min"].is_number() &&
                  iv["max"].is_number() && iv.value("count", 4) >= 0,
              std::string("isolate.") + k + " entries are {min, max, count}");
      require(iv["min"].get<double>() <= iv["max"].get<double>(), std::string("isolate.") + k + " has min > max");
    }
  const json& r = c["register"];
  parse_metric(r["metric"].get<std::string>());
  require(pos(r["ftol"]), "register.ftol must be positive");
  require(r["max_sweeps"].get<std::int64_t>() >= 1, "register.max_sweeps must be at least 1");
  require(r["normals_k"].get<std::int64_t>() >= 3, "register.normals_k must be at least 3");
  require(r["icp_sample"].get<std::int64_t>() >= 1, "register.icp_sample must be at least 1");
  require(r["init"] == "identity" || r["init"] == "moments", "register.init is 'identity' or 'moments'");
  require(c["assess"]["threshold"].get<double>() >= 0.0, "assess.threshold must be non-negative");
  require(pos(c["assess"]["bin_width"]), "assess.bin_width must be positive");
  require(!c["simplify"]["fractions"].empty(), "simplify.fractions is empty");
  for (const json& f : c["simplify"]["fractions"])
    require(f.is_number() && f.get<double>() > 0.0 && f.get<double>() <= 1.0, "simplify.fractions lie in (0, 1]");
  require(pos(c["simplify"]["spacing"]), "simplify.spacing must be positive");
  parse_plane_source(c["symmetry"]["config"].get<std::string>());
  require(pos(c["symmetry"]["spacing"]), "symmetry.spacing must be positive");
  require(pos(c["contours"]["spacing"]), "contours.spacing must be positive");
  require(pos(c["contours"]["range"]), "contours.range must be positive");
  require(pos(c["asymmetry"]["bin_width"]), "asymmetry.bin_width must be positive");
  require(c["channel"]["stations"].get<std::int64_t>() >= 4, "channel.stations must be at least 4");
  require(pos(c["channel"]["window"]), "channel.window must be positive");
  require(c["channel"]["smoothing_rms"].get<double>() >= 0.0, "channel.smoothing_rms must be non-negative");
  parse_mesh_format(c["format"].get<std::string>());
  for (auto it = c["inputs"].begin(); it != c["inputs"].end(); ++it) {
    if (it->is_null()) continue;
    const std::string path = (*it)["path"].get<std::string>();
    if (!fs::exists(path)) throw InputError("no such file: '" + path + "'");
    if (!(*it)["format"].is_null()) parse_mesh_format((*it)["format"].get<std::string>());
    require((*it)["scale"].get<double>() > 0.0, "inputs." + it.key() + ".scale must be positive");
  }
  for (auto it = c["masks"].begin(); it != c["masks"].end(); ++it)
    if (!it->is_null() && !fs::exists(it->get<std::string>()))
      throw InputError("no such file: '" + it->get<std::string>() + "'");
}

inline json load_config_file(const fs::path& path) {
  if (!fs::exists(path)) throw InputError("no such file: '" + path.string() + "'");
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("cannot parse config '" + path.string() + "': " + e.what());
  }
}

/// Defaults overlaid with `user`, whose relative paths resolve against `base`.
inline json effective_config(const json& user, const fs::path& base) {
  json c = default_config();
  detail::merge(c, user, "", base);
  return c;
}

/// Overlays `overrides` (paths relative to the working directory) on an
/// effective config.
inline void apply_overrides(json& config, const json& overrides) { detail::merge(config, overrides, "", fs::path()); }

// ---------------------------------------------------------------- hashing

inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------- run state

/// One command invocation: effective config, output bookkeeping, warnings
/// and stage timings.
class Run {
 public:
  Run(std::string command, json config) : command_(std::move(command)), config_(std::move(config)) {
    validate_config(config_);
    out_ = config_["output"].get<std::string>();
    format_ = parse_mesh_format(config_["format"].get<std::string>());
    started_ = utc_now();
  }

  const json& cfg() const { return config_; }
  const json& cfg(const char* block) const { return config_[block]; }
  Diagnostics* diag() { return &diag_; }
  const fs::path& out_dir() const { return out_; }
  std::uint64_t seed() const { return config_["seed"].get<std::uint64_t>(); }

  bool has_input(const char* role) const { return !config_["inputs"][role].is_null(); }
  bool has_mask(const char* role) const { return !config_["masks"][role].is_null(); }

  TriangleMesh mesh_input(const char* role) {
    const json& in = config_["inputs"][role];
    if (in.is_null()) throw InputError(std::string("missing input '") + role + "'");
    const fs::path path = in["path"].get<std::string>();
    const MeshFormat fmt =
        in["format"].is_null() ? format_from_path(path) : parse_mesh_format(in["format"].get<std::string>());
    record_input(role, path);
    return load_mesh(path, fmt, in["scale"].get<double>(), &diag_);
  }

  std::vector<Index> index_input(const char* role) {
    const fs::path path = config_["inputs"][role]["path"].get<std::string>();
    record_input(role, path);
    return load_index_list(path);
  }

  VertexMask mask_input(const char* role) {
    if (!has_mask(role)) return {};
    const fs::path path = config_["masks"][role].get<std::string>();
    record_input(std::string("mask.") + role, path);
    return load_mask(path);
  }

  std::string mesh_ext() const { return format_ == MeshFormat::obj ? ".obj" : ".ply"; }

  void emit(const std::string& rel, const std::string& bytes) {
    vmorph::detail::write_file(out_ / rel, bytes);
    outputs_[rel] = {{"bytes", bytes.size()}, {"fnv1a", hex64(fnv1a(bytes))}};
  }
  void emit_json(const std::string& rel, const json& j) { emit(rel, j.dump(2) + "\n"); }
  std::string emit_mesh(const std::string& stem, const TriangleMesh& m) {
    const std::string rel = stem + mesh_ext();
    emit(rel, encode_mesh(m, format_));
    return rel;
  }

  template <class Fn>
  auto timed(const std::string& stage, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Stop {
      Run* run;
      std::string stage;
      std::chrono::steady_clock::time_point t0;
      ~Stop() {
        const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - t0;
        run->timings_.push_back({{"stage", stage}, {"ms", ms.count()}});
      }
    } stop{this, stage, t0};
    return fn();
  }

  const std::vector<std::string>& warnings() const { return diag_.warnings; }

  /// Replay record. Everything outside "run" is a function of the config and
  /// the input bytes.
  void write_manifest() {
    json outputs = json::array();
    for (const auto& [path, info] : outputs_) outputs.push_back({{"path", path}, {"bytes", info["bytes"]}, {"fnv1a", info["fnv1a"]}});
    const json m = {
        {"tool", "vmorph"},
        {"version", VMORPH_VERSION},
        {"command", command_},
        {"libraries",
         {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
        {"config", config_},
        {"config_hash", hex64(fnv1a(config_.dump()))},
        {"inputs", inputs_},
        {"outputs", outputs},
        {"warnings", diag_.warnings},
        {"run", {{"started_utc", started_}, {"finished_utc", utc_now()}, {"timings", timings_}}}};
    vmorph::detail::write_file(out_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  void record_input(const std::string& role, const fs::path& path) {
    const std::string bytes = vmorph::detail::read_file(path);
    inputs_.push_back({{"role", role}, {"path", path.generic_string()}, {"bytes", bytes.size()}, {"fnv1a", hex64(fnv1a(bytes))}});
  }

  std::string command_;
  json config_;
  fs::path out_;
  MeshFormat format_;
  Diagnostics diag_;
  std::string started_;
  json inputs_ = json::array();
  std::map<std::string, json> outputs_;
  json timings_ = json::array();
};

// ---------------------------------------------------------------- encoders

inline std::string g9(double v) { return vmorph::detail::format_g9(v); }

inline std::string xyz(const Vec3& p) { return g9(p.x()) + "," + g9(p.y()) + "," + g9(p.z()); }

inline std::string grid_csv(const HeightGrid& g) { return encode_grid_csv(g); }

inline std::string histogram_csv(const std::vector<std::size_t>& h, double width) {
  std::string out = "lo,hi,count\n";
  for (std::size_t k = 0; k < h.size(); ++k)
    out += g9(width * static_cast<double>(k)) + "," + g9(width * static_cast<double>(k + 1)) + "," +
           std::to_string(h[k]) + "\n";
  return out;
}

inline std::string percent_label(double fraction) { return g9(100.0 * fraction); }

// ---------------------------------------------------------------- stages

struct Plates {
  PlateMesh sound_board, back;
};

inline std::vector<ExtraPointInterval> intervals_from(const json& a) {
  std::vector<ExtraPointInterval> out;
  for (const json& iv : a) out.push_back({iv["min"].get<double>(), iv["max"].get<double>(), iv.value("count", 4)});
  return out;
}

/// PCA orientation, rough split at split_z and contour isolation of both
/// plates. Plate files are written in the oriented frame.
inline Plates stage_isolate(Run& run, const TriangleMesh& body, const std::string& dir,
                            const VertexMask& removed = {}) {
  return run.timed(dir + "isolate", [&] {
    const json& c = run.cfg("isolate");
    const PrincipalFrame frame = principal_frame(body.vertices());
    const TriangleMesh oriented = orient_to_frame(body, frame);
    const auto removed_flags = removed.flags(body.vertex_count());

    IsolationParams params;
    params.spacing = c["spacing"].get<double>();
    params.cut_x = c["cut_x"].get<bool>();
    params.cut_y = c["cut_y"].get<bool>();
    params.x_intervals = intervals_from(c["x_intervals"]);
    params.y_intervals = intervals_from(c["y_intervals"]);

    Plates plates;
    json summary = {{"frame", {{"centroid", vec_json(frame.centroid)}, {"axes", mat_json(frame.axes)},
                               {"variances", vec_json(frame.variances)}}},
                    {"split_z_mm", c["split_z"]},
                    {"plates", json::object()}};
    for (PlateSide side : {PlateSide::sound_board, PlateSide::back}) {
      std::vector<Index> origin;
      const TriangleMesh rough = rough_plate(oriented, side, c["split_z"].get<double>(), &origin);
      std::vector<Index> local_removed;
      for (Index v = 0; v < origin.size(); ++v)
        if (removed_flags[origin[v]]) local_removed.push_back(v);
      params.removed = VertexMask(std::move(local_removed));
      IsolationResult r = isolate_plate(rough, side, params, run.diag());
      PlateMesh plate = std::move(r.plate);
      for (Index& v : plate.source_index) v = origin[v];

      const std::string name = to_string(side);
      const std::string file = run.emit_mesh(dir + name, plate.mesh);
      std::string idx = "# contour of " + file + " (vertex indices, cyclic)\n";
      for (Index v : plate.contour) idx += std::to_string(v) + "\n";
      run.emit(dir + name + "_contour.txt", idx);
      std::string src = "# body vertex index of every vertex of " + file + "\n";
      for (Index v : plate.source_index) src += std::to_string(v) + "\n";
      run.emit(dir + name + "_source.txt", src);
      std::string csv = "index,x,y,z\n";
      for (Index v : plate.contour) csv += std::to_string(v) + "," + xyz(plate.mesh.vertices()[v]) + "\n";
      run.emit(dir + name + "_contour.csv", csv);

      std::size_t inserted = 0;
      for (ContourSource s : r.contour.source) inserted += s == ContourSource::inserted_intermediate;
      summary["plates"][name] = {{"mesh", file},
                                 {"vertices", plate.mesh.vertex_count()},
                                 {"faces", plate.mesh.face_count()},
                                 {"inner_vertices", plate.inner_vertex_count},
                                 {"contour_vertices", plate.contour.size()},
                                 {"contour_inserted", inserted},
                                 {"extreme_points", r.extreme_points.size()},
                                 {"anchors", r.anchors.size()},
                                 {"components", connected_components(plate.mesh).size()}};
      (side == PlateSide::sound_board ? plates.sound_board : plates.back) = std::move(plate);
    }
    run.emit_json(dir + "isolate.json", summary);
    return plates;
  });
}

/// Plates from `inputs.sound_board` / `inputs.back` with their contour
/// files, or isolated from `inputs.body`.
inline Plates acquire_plates(Run& run, const std::string& isolate_dir) {
  if (run.has_input("sound_board") || run.has_input("back")) {
    Plates p;
    for (PlateSide side : {PlateSide::sound_board, PlateSide::back}) {
      const std::string name = to_string(side);
      const std::string contour = name + "_contour";
      if (!run.has_input(name.c_str()) || !run.has_input(contour.c_str()))
        throw InputError("plate inputs need sound_board, sound_board_contour, back and back_contour");
      PlateMesh& plate = side == PlateSide::sound_board ? p.sound_board : p.back;
      plate.side = side;
      plate.mesh = run.mesh_input(name.c_str());
      plate.contour = run.index_input(contour.c_str());
      VertexMask(plate.contour).validate(plate.mesh.vertex_count());
      plate.inner_vertex_count = plate.mesh.vertex_count() - plate.contour.size();
    }
    return p;
  }
  if (!run.has_input("body")) throw InputError("missing input 'body' (or the plate inputs)");
  const TriangleMesh body = run.mesh_input("body");
  return stage_isolate(run, body, isolate_dir, run.mask_input("removed"));
}

struct Registration {
  RegistrationReport report;
  TriangleMesh registered;
};

inline json table_row(const std::string& method, const RegistrationReport& rep, const MetricValues& m) {
  return {{"method", method},
          {"D", m.d},
          {"sqrt_D2", m.rms},
          {"sqrt_D2_plane", num_json(m.rms_plane)},
          {"transform", to_json(rep.transform)},
          {"converged", rep.converged}};
}

/// Registers `moving` (p) onto `reference` (s).
inline Registration stage_register(Run& run, const TriangleMesh& reference, const TriangleMesh& moving,
                                   const std::string& dir) {
  return run.timed(dir + "register", [&] {
    const json& c = run.cfg("register");
    RegistrationOptions opt;
    opt.metric = parse_metric(c["metric"].get<std::string>());
    opt.allow_scale = c["allow_scale"].get<bool>();
    opt.ftol = c["ftol"].get<double>();
    opt.max_sweeps = c["max_sweeps"].get<std::size_t>();
    const bool all = c["all_metrics"].get<bool>();
    const auto& s = reference.vertices();
    const auto& p = moving.vertices();

    NormalField normals;
    const bool need_normals = all || opt.metric == Metric::point_to_plane_sq;
    if (need_normals) normals = estimate_normals(s, c["normals_k"].get<std::size_t>(), run.diag());
    const NormalField* np = need_normals ? &normals : nullptr;
    const SimilarityTransform init =
        c["init"] == "moments" ? moment_alignment(s, p, opt.allow_scale) : SimilarityTransform::identity();

    Registration out;
    out.report = register_clouds(s, p, opt, init, np);
    if (!out.report.converged)
      warn(run.diag(), "registration stopped after " + std::to_string(out.report.iterations) +
                           " sweeps without meeting ftol");
    json j = {{"reference_points", s.size()},
              {"moving_points", p.size()},
              {"options", {{"metric", to_string(opt.metric)}, {"allow_scale", opt.allow_scale},
                           {"ftol", opt.ftol}, {"max_sweeps", opt.max_sweeps}, {"init", c["init"]}}},
              {"initial", to_json(init)},
              {"report", to_json(out.report)},
              {"history", out.report.history}};

    if (all) {
      json rows = json::array();
      SimilarityTransform ours_p2p;
      for (Metric m : {Metric::point_to_point, Metric::point_to_point_sq, Metric::point_to_plane_sq}) {
        RegistrationOptions o = opt;
        o.metric = m;
        const RegistrationReport rep = m == opt.metric ? out.report : register_clouds(s, p, o, init, np);
        if (m == Metric::point_to_point) ours_p2p = rep.transform;
        rows.push_back(table_row(to_string(m), rep, evaluate_metrics(s, p, rep.transform, np)));
      }
      IcpOptions icp;
      icp.sample = c["icp_sample"].get<std::size_t>();
      icp.seed = run.seed();
      const RegistrationReport ext = icp_point_to_plane(s, p, normals, ours_p2p.scale, init, icp);
      rows.push_back(table_row("icp_external_scaling", ext, ext.metrics));
      const RegistrationReport fixed = icp_point_to_plane(s, p, normals, 1.0, init, icp);
      rows.push_back(table_row("icp_no_scaling", fixed, fixed.metrics));
      j["all_metrics"] = {{"columns", {"D", "sqrt_D2", "sqrt_D2_plane"}}, {"rows", rows}};
    }
    run.emit_json(dir + "registration.json", j);
    out.registered = transform_vertices(moving, AffineMap(out.report.transform));
    run.emit_mesh(dir + "registered", out.registered);
    return out;
  });
}

/// Per-point error of `p` against the reference mesh, with the sampling floor.
inline ErrorDistribution stage_assess(Run& run, const TriangleMesh& reference, std::span<const Vec3> p,
                                      const std::string& dir) {
  return run.timed(dir + "assess", [&] {
    const json& c = run.cfg("assess");
    const ErrorDistribution e =
        error_distribution(reference.vertices(), p, c["threshold"].get<double>(), c["bin_width"].get<double>());
    json j = to_json(e);
    j["sampling_floor_mm"] = nullptr;
    j["mean_over_floor"] = nullptr;
    if (reference.face_count() > 0) {
      const double floor = sampling_floor(reference);
      j["sampling_floor_mm"] = floor;
      if (floor > 0.0) j["mean_over_floor"] = e.mean / floor;
    } else {
      warn(run.diag(), "reference has no faces; sampling floor not reported");
    }
    json fr = json::array();
    for (double t : {0.5, 1.0, 2.0, 3.0}) fr.push_back({{"threshold_mm", t}, {"fraction_above", e.fraction_above_threshold(t)}});
    j["fractions"] = fr;
    run.emit_json(dir + "distribution.json", j);
    std::string csv = "x,y,z,d\n";
    for (std::size_t i = 0; i < e.distances.size(); ++i) csv += xyz(e.positions[i]) + "," + g9(e.distances[i]) + "\n";
    run.emit(dir + "heatmap.csv", csv);
    run.emit(dir + "histogram.csv", histogram_csv(e.histogram, e.bin_width));
    return e;
  });
}

/// Decimation to each configured fraction and the height-grid deviation from
/// the full mesh.
inline void stage_simplify(Run& run, const TriangleMesh& mesh, const std::string& dir) {
  run.timed(dir + "simplify", [&] {
    const json& c = run.cfg("simplify");
    const GridSpec spec = grid_covering({&mesh}, c["spacing"].get<double>());
    const HeightGrid full = interpolate_grid(mesh, spec, SurfaceSide::upper);
    json rows = json::array();
    for (const json& fj : c["fractions"]) {
      const double f = fj.get<double>();
      const auto target = static_cast<std::size_t>(std::llround(f * static_cast<double>(mesh.face_count())));
      const TriangleMesh dec = decimate(mesh, target);
      const std::string label = percent_label(f);
      const std::string file = run.emit_mesh(dir + "simplified_" + label, dec);
      const HeightGrid g = interpolate_grid(dec, spec, SurfaceSide::upper);
      HeightGrid diff(spec);
      for (std::size_t k = 0; k < spec.size(); ++k)
        if (full.valid(k) && g.valid(k)) diff.values[k] = g.values[k] - full.values[k];
      run.emit(dir + "difference_" + label + ".csv", grid_csv(diff));
      rows.push_back({{"fraction", f},
                      {"mesh", file},
                      {"faces", dec.face_count()},
                      {"vertices", dec.vertex_count()},
                      {"grid", to_json(grid_difference_stats(full, g))},
                      {"D_mm", point_to_point(mesh.vertices(), dec.vertices())}});
    }
    run.emit_json(dir + "simplify.json", {{"faces", mesh.face_count()},
                                          {"vertices", mesh.vertex_count()},
                                          {"grid", to_json(spec)},
                                          {"rows", rows}});
  });
}

/// Symmetry data for plates whose frame is already known.
inline SymmetryResult symmetry_from_frame(const Plates& plates, const SymmetryFrame& frame, double spacing) {
  SymmetryResult r;
  r.frame = frame;
  const auto rot = [&](const Vec3& p) { return Vec3(frame.rotation * p); };
  const TriangleMesh sb = transform_vertices(plates.sound_board.mesh, rot);
  const TriangleMesh bk = transform_vertices(plates.back.mesh, rot);
  const GridSpec spec = grid_covering({&sb, &bk}, spacing);
  r.sb_grid = interpolate_grid(sb, spec, SurfaceSide::upper);
  r.b_grid = interpolate_grid(bk, spec, SurfaceSide::lower);
  r.sound_board = transform_plate(plates.sound_board, frame);
  r.back = transform_plate(plates.back, frame);
  return r;
}

inline SymmetryResult stage_symmetry(Run& run, const Plates& plates, const std::string& dir) {
  return run.timed(dir + "symmetry", [&] {
    const json& c = run.cfg("symmetry");
    const double spacing = c["spacing"].get<double>();
    if (run.has_input("frame")) {
      const fs::path path = run.cfg()["inputs"]["frame"]["path"].get<std::string>();
      const json j = load_config_file(path);
      return symmetry_from_frame(plates, frame_from_json(j.contains("frame") ? j["frame"] : j), spacing);
    }
    const PlaneSource source = parse_plane_source(c["config"].get<std::string>());
    const VertexMask sb_mask = run.mask_input("sound_board");
    const VertexMask b_mask = run.mask_input("back");
    sb_mask.validate(plates.sound_board.mesh.vertex_count());
    b_mask.validate(plates.back.mesh.vertex_count());
    if (source == PlaneSource::two_contours_masked && sb_mask.empty() && b_mask.empty())
      warn(run.diag(), "no contour masks given; two_contours_masked fits the full contours");
    SymmetryResult r = build_symmetry_frame(plates.sound_board, plates.back, source, sb_mask, b_mask, spacing);
    json angles = json::array();
    for (const PlaneAngleRow& row : configuration_angles(plates.sound_board, plates.back, sb_mask, b_mask))
      angles.push_back({{"config", to_string(row.source)}, {"angle_deg", row.angle_degrees}, {"average_plane", to_json(row.average)}});
    run.emit_json(dir + "symmetry.json", {{"config", to_string(source)},
                                          {"frame", to_json(r.frame)},
                                          {"configuration_angles", angles},
                                          {"grid", to_json(r.sb_grid.spec)}});
    run.emit_mesh(dir + "sound_board_sym", r.sound_board.mesh);
    run.emit_mesh(dir + "back_sym", r.back.mesh);
    return r;
  });
}

inline void stage_contours(Run& run, const SymmetryResult& sym, const std::string& dir) {
  run.timed(dir + "contours", [&] {
    const json& c = run.cfg("contours");
    ContourOptions opt;
    opt.spacing = c["spacing"].get<double>();
    opt.range = c["range"].get<double>();
    json index = json::object();
    for (const PlateMesh* plate : {&sym.sound_board, &sym.back}) {
      const ContourLineSet set = contour_lines(plate->mesh, plate->side, opt, run.diag());
      const std::string name = to_string(plate->side);
      std::string csv = "level,z,polyline,closed,x,y,z\n";
      json levels = json::array();
      for (std::size_t l = 0; l < set.levels.size(); ++l) {
        const ContourLevel& lv = set.levels[l];
        double length = 0.0;
        std::size_t points = 0;
        for (std::size_t k = 0; k < lv.polylines.size(); ++k) {
          const SectionPolyline& pl = lv.polylines[k];
          length += pl.length();
          points += pl.points.size();
          for (const Vec3& q : pl.points)
            csv += std::to_string(l) + "," + g9(lv.z) + "," + std::to_string(k) + "," + (pl.closed ? "1" : "0") + "," +
                   xyz(q) + "\n";
        }
        levels.push_back({{"z_mm", lv.z}, {"polylines", lv.polylines.size()}, {"points", points}, {"length_mm", length}});
      }
      run.emit(dir + "contours_" + name + ".csv", csv);
      index[name] = {{"file", "contours_" + name + ".csv"}, {"base_mm", set.base}, {"spacing_mm", set.spacing}, {"levels", levels}};
    }
    run.emit_json(dir + "contours.json", index);
  });
}

inline void stage_asymmetry(Run& run, const SymmetryResult& sym, const std::string& dir) {
  run.timed(dir + "asymmetry", [&] {
    const double bin = run.cfg("asymmetry")["bin_width"].get<double>();
    const AsymmetryField f = asymmetry_field(sym.sb_grid, sym.b_grid, sym.frame.z_bar, run.diag(), bin);
    run.emit(dir + "asymmetry_grid.csv", grid_csv(f.a));
    run.emit(dir + "midpoint_grid.csv", grid_csv(f.midpoint));
    run.emit(dir + "asymmetry_histogram.csv", histogram_csv(f.histogram, f.bin_width));
    run.emit_json(dir + "asymmetry.json", {{"z_bar_mm", sym.frame.z_bar},
                                           {"grid", to_json(f.a.spec)},
                                           {"stats", to_json(f.stats)},
                                           {"histogram", histogram_json(f.histogram, f.bin_width)}});
  });
}

inline std::map<PlateSide, ChannelTrace> stage_channel(Run& run, const SymmetryResult& sym, const std::string& dir) {
  return run.timed(dir + "channel", [&] {
    const json& c = run.cfg("channel");
    ChannelOptions opt;
    opt.stations = c["stations"].get<std::size_t>();
    opt.window = c["window"].get<double>();
    opt.smoothing_rms = c["smoothing_rms"].get<double>();
    std::map<PlateSide, ChannelTrace> traces;
    json summary = json::object();
    for (const PlateMesh* plate : {&sym.sound_board, &sym.back}) {
      ChannelTrace t = channel_of_minima(*plate, opt, run.diag());
      const std::string name = to_string(plate->side);
      std::string csv = "arc_length,tx,ty,tz,mx,my,mz,offset,sx,sy,sz,at_window_edge,ambiguous\n";
      for (std::size_t i = 0; i < t.stations.size(); ++i) {
        const ChannelStation& st = t.stations[i];
        csv += g9(st.arc_length) + "," + xyz(st.tangent_point) + "," + xyz(st.minimum) + "," + g9(st.offset) + "," +
               (i < t.smoothed.size() ? xyz(t.smoothed[i]) : std::string(",,")) + "," +
               (st.at_window_edge ? "1" : "0") + "," + (st.ambiguous ? "1" : "0") + "\n";
      }
      run.emit(dir + "channel_" + name + ".csv", csv);
      summary[name] = to_json(t);
      traces.emplace(plate->side, std::move(t));
    }
    run.emit_json(dir + "channel.json", summary);
    return traces;
  });
}

// ---------------------------------------------------------------- commands

inline void cmd_isolate(Run& run) {
  if (!run.has_input("body")) throw InputError("isolate needs a body mesh");
  const TriangleMesh body = run.mesh_input("body");
  stage_isolate(run, body, "", run.mask_input("removed"));
}

inline void cmd_register(Run& run) {
  const TriangleMesh s = run.mesh_input("reference");
  const TriangleMesh p = run.mesh_input("moving");
  const Registration r = stage_register(run, s, p, "");
  stage_assess(run, s, r.registered.vertices(), "");
}

inline void cmd_assess(Run& run) {
  const TriangleMesh s = run.mesh_input("reference");
  const TriangleMesh p = run.mesh_input("moving");
  stage_assess(run, s, p.vertices(), "");
}

inline void cmd_simplify(Run& run) {
  if (run.has_input("reference")) {
    stage_simplify(run, run.mesh_input("reference"), "");
    return;
  }
  stage_simplify(run, acquire_plates(run, "isolate/").sound_board.mesh, "");
}

inline void cmd_symmetry(Run& run) { stage_symmetry(run, acquire_plates(run, "isolate/"), ""); }

inline void cmd_contours(Run& run) { stage_contours(run, stage_symmetry(run, acquire_plates(run, "isolate/"), "symmetry/"), ""); }

inline void cmd_asymmetry(Run& run) { stage_asymmetry(run, stage_symmetry(run, acquire_plates(run, "isolate/"), "symmetry/"), ""); }

inline void cmd_channel(Run& run) { stage_channel(run, stage_symmetry(run, acquire_plates(run, "isolate/"), "symmetry/"), ""); }

/// Every stage in order: isolation, registration and assessment against the
/// compare body (when given), simplification, symmetry, contour lines,
/// asymmetry and the channel of minima.
inline void cmd_pipeline(Run& run) {
  const Plates plates = acquire_plates(run, "isolate/");
  if (run.has_input("compare")) {
    const TriangleMesh compare = run.mesh_input("compare");
    const Plates other = stage_isolate(run, compare, "isolate_compare/");
    const Registration r = stage_register(run, plates.sound_board.mesh, other.sound_board.mesh, "register/");
    stage_assess(run, plates.sound_board.mesh, r.registered.vertices(), "assess/");
  }
  stage_simplify(run, plates.sound_board.mesh, "simplify/");
  const SymmetryResult sym = stage_symmetry(run, plates, "symmetry/");
  stage_contours(run, sym, "contours/");
  stage_asymmetry(run, sym, "asymmetry/");
  stage_channel(run, sym, "channel/");
}

inline const std::map<std::string, std::function<void(Run&)>>& commands() {
  static const std::map<std::string, std::function<void(Run&)>> table = {
      {"isolate", cmd_isolate},   {"register", cmd_register},   {"assess", cmd_assess},
      {"simplify", cmd_simplify}, {"symmetry", cmd_symmetry},   {"contours", cmd_contours},
      {"asymmetry", cmd_asymmetry}, {"channel", cmd_channel}, {"pipeline", cmd_pipeline}};
  return table;
}

/// Positional mesh arguments fill these input roles in order.
inline std::vector<std::string> positional_roles(const std::string& command) {
  if (command == "register" || command == "assess") return {"reference", "moving"};
  if (command == "simplify") return {"reference"};
  if (command == "pipeline") return {"body", "compare"};
  return {"body"};
}

/// Config key that `--spacing` overrides for each command.
inline std::vector<std::string> spacing_keys(const std::string& command) {
  if (command == "isolate") return {"isolate"};
  if (command == "contours") return {"contours"};
  if (command == "simplify") return {"simplify"};
  if (command == "register" || command == "assess") return {};
  if (command == "pipeline") return {"simplify", "symmetry"};
  return {"symmetry"};
}

}  // namespace vmorph::cli

#endif  // VMORPH_TOOLS_CLI_HPP
