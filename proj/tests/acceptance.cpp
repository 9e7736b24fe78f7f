// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "vmorph/vmorph.hpp"

using namespace vmorph;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double angle_between(const Vec3& a, const Vec3& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

synthetic::PlateSpec arched(std::size_t rings, std::size_t rim, double base = 20.0) {
  synthetic::PlateSpec s;
  s.height = synthetic::Arch{synthetic::ViolinOutline{}, base, 15.0};
  s.rings = rings;
  s.rim_points = rim;
  return s;
}

PlateMesh moved(const PlateMesh& p, const Mat3& r, const Vec3& t) {
  PlateMesh out = p;
  out.mesh = transform_vertices(p.mesh, [&](const Vec3& q) { return Vec3(r * q + t); });
  return out;
}

// ------------------------------------------------------------------ 1

Outcome transform_recovery() {
  const auto s = synthetic::sample_plate(synthetic::ViolinOutline{}, synthetic::Arch{}, 20000, 1);
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), ang(-5.0, 5.0), k(0.95, 1.05);
  double worst_a = 0, worst_x = 0, worst_k = 0, worst_t = 0;
  std::size_t ok = 0;
  for (int c = 0; c < 20; ++c) {
    Vec3 dir;
    do dir = Vec3(unit(rng), unit(rng), unit(rng));
    while (dir.norm() > 1.0 || dir.norm() < 1e-3);
    const double radius = 20.0 * std::cbrt(0.5 * (unit(rng) + 1.0));
    const SimilarityTransform truth{radius * dir.normalized(), Vec3(ang(rng), ang(rng), ang(rng)), k(rng)};
    const auto p = synthetic::add_noise(vmorph::apply(truth, std::span<const Vec3>(s)), 0.05, 100 + c);
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = register_clouds(s, p);
    const double dt = seconds_since(t0);
    const SimilarityTransform expect = truth.inverse();
    const double ea = (rep.transform.angles - expect.angles).cwiseAbs().maxCoeff();
    const double ex = (rep.transform.translation - expect.translation).cwiseAbs().maxCoeff();
    const double ek = std::abs(rep.transform.scale - expect.scale);
    worst_a = std::max(worst_a, ea);
    worst_x = std::max(worst_x, ex);
    worst_k = std::max(worst_k, ek);
    worst_t = std::max(worst_t, dt);
    ok += ea < 0.1 && ex < 0.1 && ek < 0.002 && dt < 60.0;
  }
  return {ok == 20, fmt("%zu/20 cases; worst angle %.2e deg, translation %.2e mm, K %.2e, time %.1f s", ok, worst_a,
                        worst_x, worst_k, worst_t)};
}

// ------------------------------------------------------------------ 2

Outcome metric_inequalities() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> size(5, 200);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t violations = 0, pairs = 0;
  double max_ratio = 0.0;
  for (int t = 0; t < 1200; ++t) {
    const auto s = oracle::random_cloud(static_cast<std::size_t>(size(rng)), 1000 + t, 10.0 + 5.0 * u(rng));
    const auto p = oracle::random_cloud(static_cast<std::size_t>(size(rng)), 5000 + t, 10.0 + 5.0 * u(rng));
    NormalField n;
    if (t % 2 == 0) {
      for (std::size_t i = 0; i < s.size(); ++i) n.push_back(Vec3(u(rng), u(rng), u(rng) + 2.0).normalized());
    } else {
      n = estimate_normals(s, std::min<std::size_t>(10, s.size() - 1));
    }
    const SimilarityTransform tr{Vec3(u(rng), u(rng), u(rng)), 5.0 * Vec3(u(rng), u(rng), u(rng)), 1.0 + 0.05 * u(rng)};
    const auto m = evaluate_metrics(s, p, tr, &n);
    violations += !(m.d <= m.rms + 1e-12) + !(m.rms_plane <= m.rms + 1e-12);
    max_ratio = std::max({max_ratio, m.d / m.rms, m.rms_plane / m.rms});
    ++pairs;
  }
  return {violations == 0 && pairs >= 1000,
          fmt("%zu pairs, %zu violations, largest D/sqrt(D2) or plane/sqrt(D2) ratio %.6f", pairs, violations, max_ratio)};
}

// ------------------------------------------------------------------ 3

Outcome nn_oracle() {
  std::size_t equal = 0;
  const int cases = 10;
  for (int t = 0; t < cases; ++t) {
    const auto s = oracle::random_cloud(500, 300 + t), p = oracle::random_cloud(500, 400 + t);
    equal += point_to_point(s, p) == oracle::mean_nn_distance(s, p);
  }
  return {equal == cases, fmt("%zu/%d pairs of 500x500 points bit-identical to the exhaustive sum", equal, cases)};
}

// ------------------------------------------------------------------ 4

Outcome contour_isolation() {
  const auto sk = synthetic::make_skirted_plate(arched(40, 400));
  const auto r = isolate_plate(sk.mesh, PlateSide::sound_board);
  const auto& loop = r.contour.vertex_indices;
  std::set<std::pair<Index, Index>> edges;
  for (const Face& f : sk.mesh.faces())
    for (int i = 0; i < 3; ++i) edges.insert(std::minmax(f[i], f[(i + 1) % 3]));
  std::size_t non_adjacent = 0;
  for (std::size_t i = 0; i < loop.size(); ++i) non_adjacent += !edges.count(std::minmax(loop[i], loop[(i + 1) % loop.size()]));
  const std::set<Index> distinct(loop.begin(), loop.end());

  std::vector<char> on_contour(sk.mesh.vertex_count(), 0), kept(sk.mesh.vertex_count(), 0);
  for (Index v : loop) on_contour[v] = 1;
  for (Index v : r.plate.source_index) kept[v] = 1;
  std::size_t plate = 0, plate_kept = 0, skirt = 0, skirt_kept = 0;
  for (Index v = 0; v < sk.mesh.vertex_count(); ++v) {
    if (on_contour[v]) continue;
    if (sk.plate_label[v]) {
      ++plate;
      plate_kept += kept[v];
    } else {
      ++skirt;
      skirt_kept += kept[v];
    }
  }
  const bool pass = plate_kept == plate && skirt_kept == 0 && non_adjacent == 0 && distinct.size() == loop.size() &&
                    loop.size() >= 3;
  return {pass, fmt("plate %zu/%zu kept, skirt %zu/%zu kept, loop of %zu vertices with %zu non-adjacent steps and %zu "
                    "repeats",
                    plate_kept, plate, skirt_kept, skirt, loop.size(), non_adjacent, loop.size() - distinct.size())};
}

// ------------------------------------------------------------------ 5

Outcome tsp_oracle() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::size_t sets = 0, optimal = 0;
  double worst = 0.0;
  for (std::size_t n = 3; n <= 9; ++n)
    for (int rep = 0; rep < 40; ++rep) {
      std::vector<Vec3> v;
      for (std::size_t i = 0; i < n; ++i) v.emplace_back(u(rng), u(rng), 0.2 * u(rng));
      const TriangleMesh m(v, {});
      std::vector<Index> anchors(n);
      std::iota(anchors.begin(), anchors.end(), Index{0});
      std::shuffle(anchors.begin(), anchors.end(), rng);
      const auto loop = order_loop(m, anchors);
      std::vector<Vec3> pts;
      for (Index a : loop) pts.push_back(v[a]);
      std::vector<std::size_t> id(n);
      std::iota(id.begin(), id.end(), std::size_t{0});
      const double gap = oracle::cycle_length(pts, id) - oracle::optimal_tour_length(v);
      worst = std::max(worst, gap);
      optimal += std::abs(gap) <= 1e-9;
      ++sets;
    }
  return {optimal == sets, fmt("%zu/%zu anchor sets (sizes 3..9) optimal; worst excess %.2e mm", optimal, sets, worst)};
}

// ------------------------------------------------------------------ 6

Outcome symmetry() {
  const PlateMesh sb0 = synthetic::make_plate(arched(40, 400, 5.0));
  const PlateMesh bk0 = synthetic::mirrored_plate(sb0);
  const Mat3 r = rotation_z(deg2rad(4)) * rotation_y(deg2rad(-2)) * rotation_x(deg2rad(1.5));
  const Vec3 t(2.0, -1.0, 3.0);
  const Vec3 n_true = r * Vec3::UnitZ();
  const double off_true = n_true.dot(t);
  double worst_angle = 0, worst_offset = 0, worst_asym = 0;
  for (PlaneSource src : {PlaneSource::two_meshes, PlaneSource::two_contours, PlaneSource::two_contours_masked}) {
    const auto res = build_symmetry_frame(moved(sb0, r, t), moved(bk0, r, t), src);
    worst_angle = std::max(worst_angle, angle_between(res.frame.average.normal, n_true));
    worst_offset = std::max(worst_offset, std::abs(res.frame.average.offset - off_true));
    const auto f = asymmetry_field(res.sb_grid, res.b_grid, res.frame.z_bar);
    worst_asym = std::max(worst_asym, f.stats.count ? f.stats.max_abs : 1e9);
    if (f.stats.violations) worst_asym = 1e9;
  }

  const auto body = synthetic::make_body(arched(30, 300));
  const Mat3 tilt = rotation_x(deg2rad(0.8)) * rotation_y(deg2rad(-0.6));
  const TriangleMesh tilted = transform_vertices(body.mesh, [&](const Vec3& p) { return Vec3(tilt * p); });
  const auto top = isolate_plate(rough_plate(tilted, PlateSide::sound_board), PlateSide::sound_board);
  const auto bot = isolate_plate(rough_plate(tilted, PlateSide::back), PlateSide::back);
  std::vector<Index> raised;
  for (Index v : top.plate.contour)
    if (top.plate.mesh.vertices()[v].x() > 150) raised.push_back(v);
  const auto rows = configuration_angles(top.plate, bot.plate, VertexMask(raised), {});
  double spread = 0.0;
  for (const auto& a : rows)
    for (const auto& b : rows) spread = std::max(spread, std::abs(a.angle_degrees - b.angle_degrees));

  const bool pass = worst_angle < 1e-6 && worst_offset < 1e-6 && worst_asym < 1e-6 && spread < 1.0;
  return {pass, fmt("mirror fixture: plane %.2e rad, offset %.2e mm, asymmetry %.2e mm; skirted body configurations "
                    "within %.3f deg (%.3f / %.3f / %.3f deg tilt)",
                    worst_angle, worst_offset, worst_asym, spread, rows[0].angle_degrees, rows[1].angle_degrees,
                    rows[2].angle_degrees)};
}

// ------------------------------------------------------------------ 7

Outcome asymmetry_identity() {
  double worst = 0.0;
  std::size_t nodes = 0, fixtures = 0;
  auto check = [&](const HeightGrid& sb, const HeightGrid& b, double z_bar) {
    const auto f = asymmetry_field(sb, b, z_bar);
    for (std::size_t k = 0; k < f.a.values.size(); ++k)
      if (f.a.valid(k)) {
        worst = std::max(worst, std::abs(f.a.values[k] - f.midpoint.values[k]));
        ++nodes;
      }
    ++fixtures;
  };
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> up(0.1, 20), dn(-20, -0.1), zb(-3, 3);
  const GridSpec spec{0, 0, 1, 40, 30};
  for (int t = 0; t < 20; ++t) {
    const double z_bar = zb(rng);
    HeightGrid sb(spec), b(spec);
    for (std::size_t k = 0; k < spec.size(); ++k) {
      sb.values[k] = z_bar + up(rng);
      b.values[k] = z_bar + dn(rng);
    }
    check(sb, b, z_bar);
  }
  const PlateMesh sb0 = synthetic::make_plate(arched(40, 400, 5.0));
  const auto mirror = build_symmetry_frame(sb0, synthetic::mirrored_plate(sb0));
  check(mirror.sb_grid, mirror.b_grid, mirror.frame.z_bar);
  synthetic::PlateSpec top = arched(40, 400, 4.0);
  top.height = synthetic::Arch{synthetic::ViolinOutline{}, 4.0, 12.0};
  synthetic::PlateSpec bottom = top;
  bottom.height = [](double x, double y) { return -3.0 - 0.0001 * x * x - 0.00005 * y * y; };
  const auto skew = build_symmetry_frame(synthetic::make_plate(top), synthetic::make_plate(bottom, PlateSide::back));
  check(skew.sb_grid, skew.b_grid, skew.frame.z_bar);
  const auto body = synthetic::make_body(arched(30, 300));
  const auto a = isolate_plate(rough_plate(body.mesh, PlateSide::sound_board), PlateSide::sound_board);
  const auto b = isolate_plate(rough_plate(body.mesh, PlateSide::back), PlateSide::back);
  const auto bres = build_symmetry_frame(a.plate, b.plate);
  check(bres.sb_grid, bres.b_grid, bres.frame.z_bar);
  return {worst <= 1e-12, fmt("%zu fixtures, %zu valid nodes, worst |difference| %.2e mm", fixtures, nodes, worst)};
}

// ------------------------------------------------------------------ 8

Outcome grid_exactness() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> slope(-0.3, 0.3), c(-10, 10);
  double worst = 0.0;
  std::size_t nodes = 0;
  for (int t = 0; t < 10; ++t) {
    const double a = slope(rng), b = slope(rng), k = c(rng);
    const auto plane = [=](double x, double y) { return a * x + b * y + k; };
    std::vector<TriangleMesh> meshes = {synthetic::make_grid(31, 23, 1.7, plane, -25.0, -18.0)};
    synthetic::PlateSpec s;
    s.height = plane;
    s.rings = 20;
    s.rim_points = 200;
    meshes.push_back(synthetic::make_plate(s).mesh);
    for (const TriangleMesh& m : meshes)
      for (double spacing : {1.0, 0.7}) {
        const auto g = interpolate_grid(m, spacing, SurfaceSide::upper);
        for (std::size_t iy = 0; iy < g.spec.ny; ++iy)
          for (std::size_t ix = 0; ix < g.spec.nx; ++ix) {
            const std::size_t idx = iy * g.spec.nx + ix;
            if (!g.valid(idx)) continue;
            const double x = g.spec.x(ix), y = g.spec.y(iy);
            worst = std::max(worst, std::abs(g.values[idx] - plane(x, y)));
            ++nodes;
          }
      }
  }
  return {worst <= 1e-9 && nodes > 0, fmt("%zu valid nodes over 40 grids, worst error %.2e mm", nodes, worst)};
}

// ------------------------------------------------------------------ 9

Outcome simplification_order() {
  const double r = 40.0;
  const auto m = synthetic::make_hemisphere(r, 60, 240);
  const auto grid = grid_covering({&m}, 1.0);
  const auto base = interpolate_grid(m, grid, SurfaceSide::upper);
  const auto s25 = grid_difference_stats(base, interpolate_grid(decimate(m, m.face_count() / 4), grid, SurfaceSide::upper));
  const auto s05 = grid_difference_stats(base, interpolate_grid(decimate(m, m.face_count() / 20), grid, SurfaceSide::upper));
  const bool pass = s25.mean < s05.mean && s25.mean < 0.01 * r && s05.mean < 0.01 * r;
  return {pass, fmt("mean error %.3e mm at 25%% faces, %.3e mm at 5%% faces (limit %.2f mm)", s25.mean, s05.mean, 0.01 * r)};
}

// ------------------------------------------------------------------ 10

PlateMesh dome(double groove_depth) {
  synthetic::PlateSpec s;
  s.outline = synthetic::CircleOutline{100.0};
  synthetic::Arch a{synthetic::CircleOutline{100.0}, 2.0, 15.0};
  a.groove_depth = groove_depth;
  s.height = a;
  s.rings = 100;
  s.rim_points = 1000;
  return synthetic::make_plate(s);
}

Outcome channel_detection() {
  synthetic::Arch a{synthetic::CircleOutline{100.0}, 2.0, 15.0};
  a.groove_depth = 1.0;
  double r0 = 0.0, best = 1e9;
  for (double r = 80.0; r <= 100.0; r += 1e-4)
    if (a(r, 0.0) < best) {
      best = a(r, 0.0);
      r0 = r;
    }
  const auto p = dome(1.0);
  const double edge = mean_edge_length(p.mesh);
  const auto tr = channel_of_minima(p);
  std::size_t good = 0;
  for (const auto& st : tr.stations) good += std::abs(std::hypot(st.minimum.x(), st.minimum.y()) - r0) <= edge;
  const auto flat = channel_of_minima(dome(0.0));
  const bool pass = 100 * good >= 95 * tr.requested && !tr.no_channel && flat.no_channel;
  return {pass, fmt("%zu/%zu stations within %.3f mm of r0 = %.3f mm; grooveless dome no-channel flag %s", good,
                    tr.requested, edge, r0, flat.no_channel ? "set" : "not set")};
}

// ------------------------------------------------------------------ 11, 12

// CT-like density: mean edge about 0.5 mm.
constexpr std::size_t kCtRings = 240;

struct Pair {
  PlateMesh plate, resampled, reduced;
};

const Pair& ct_pair() {
  static const Pair p = [] {
    synthetic::Arch arch;
    arch.base = 2.0;
    arch.groove_depth = 1.0;
    synthetic::PlateSpec spec;
    spec.height = arch;
    spec.rings = kCtRings;
    spec.rim_points = 10 * kCtRings;
    synthetic::PlateSpec other = spec;
    other.rings = kCtRings * 91 / 100;
    other.rim_points = 10 * other.rings + 7;
    const synthetic::Reduction red{spec.outline, spec.height, 5.0};
    return Pair{synthetic::make_plate(spec), synthetic::make_plate(other), synthetic::make_plate(red.reduced(spec))};
  }();
  return p;
}

Outcome reduction_signature() {
  const Pair& p = ct_pair();
  const auto t0 = std::chrono::steady_clock::now();
  const double same = cross_compare(p.plate.mesh, p.resampled.mesh).registration.metrics.d;
  const double cross = cross_compare(p.plate.mesh, p.reduced.mesh).registration.metrics.d;
  const double ratio = cross / same;

  const auto ca = channel_of_minima(p.plate), cb = channel_of_minima(p.reduced);
  auto joint = [](const ChannelTrace& t) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& st : t.stations)
      if (std::abs(st.tangent_point.y()) < 20.0) {
        s += st.offset;
        ++n;
      }
    return n ? s / static_cast<double>(n) : std::nan("");
  };
  const double off_a = joint(ca), off_b = joint(cb);
  const bool pass = ratio >= 3.0 && off_b < off_a;
  return {pass, fmt("(a) cross D %.3f mm vs same-plate D %.3f mm, ratio %.2f (need >= 3); (b) joint-region channel "
                    "offset %.3f -> %.3f mm (%s); %.0f s",
                    cross, same, ratio, off_a, off_b, off_b < off_a ? "reduced" : "not reduced", seconds_since(t0))};
}

Outcome sampling_floor_band() {
  const Pair& p = ct_pair();
  const double floor = sampling_floor(p.plate.mesh);
  const double d = point_to_point(p.plate.mesh.vertices(), p.resampled.mesh.vertices());
  const double d_rev = point_to_point(p.resampled.mesh.vertices(), p.plate.mesh.vertices());
  const double lo = std::min(d, d_rev) / floor, hi = std::max(d, d_rev) / floor;
  return {lo >= 0.5 && hi <= 2.0, fmt("mean edge %.3f mm, floor %.3f mm, D %.3f / %.3f mm (ratios %.2f, %.2f)",
                                      3.0 * floor, floor, d, d_rev, d / floor, d_rev / floor)};
}

// ------------------------------------------------------------------ 13

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  const fs::path dir = fs::temp_directory_path() / "vmorph_acceptance_pipeline";
  fs::remove_all(dir);
  fs::create_directories(dir);
  synthetic::PlateSpec spec = arched(40, 400);
  spec.height = synthetic::Arch{synthetic::ViolinOutline{}, 20.0, 15.0, 1.0};
  save_mesh(dir / "body.ply", synthetic::make_body(spec).mesh, MeshFormat::ply_binary_le);
  synthetic::PlateSpec other = arched(36, 367);
  other.height = spec.height;
  const SimilarityTransform t{Vec3(3.0, -2.0, 1.5), Vec3(1.5, -1.0, 2.0), 1.01};
  save_mesh(dir / "compare.ply", transform_vertices(synthetic::make_body(other).mesh, AffineMap(t)),
            MeshFormat::ply_binary_le);
  const json config = {{"inputs", {{"body", "body.ply"}, {"compare", "compare.ply"}}},
                       {"register", {{"all_metrics", true}}},
                       {"seed", 3},
                       {"output", "run"}};
  detail::write_file(dir / "config.json", config.dump(2));

  const std::string cmd = std::string(VMORPH_CLI) + " pipeline --config " + (dir / "config.json").string() + " >" +
                          (dir / "log.txt").string() + " 2>&1";
  for (const char* name : {"first", "second"}) {
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
      return {false, std::string("pipeline exited with failure: ") + slurp(dir / "log.txt")};
    fs::rename(dir / "run", dir / name);
  }

  std::size_t binary = 0, json_files = 0, other_files = 0;
  std::vector<std::string> differing;
  for (const auto& e : fs::recursive_directory_iterator(dir / "first")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), dir / "first");
    const fs::path twin = dir / "second" / rel;
    if (!fs::exists(twin)) {
      differing.push_back(rel.string() + " (missing)");
      continue;
    }
    if (rel.extension() == ".json") {
      json a = json::parse(slurp(e.path())), b = json::parse(slurp(twin));
      a.erase("run");
      b.erase("run");
      if (a != b) differing.push_back(rel.string());
      ++json_files;
    } else {
      if (slurp(e.path()) != slurp(twin)) differing.push_back(rel.string());
      (rel.extension() == ".ply" ? binary : other_files) += 1;
    }
  }
  std::size_t second_count = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "second")) second_count += e.is_regular_file();
  const std::size_t first_count = binary + json_files + other_files + differing.size();
  std::string diff;
  for (const auto& d : differing) diff += " " + d;
  const bool pass = differing.empty() && binary > 0 && second_count == binary + json_files + other_files;
  if (pass) fs::remove_all(dir);
  return {pass, fmt("%zu binary meshes and %zu text files byte-identical, %zu JSON documents equal outside the run "
                    "block (%zu vs %zu files)%s",
                    binary, other_files, json_files, first_count, second_count, diff.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"transform recovery", transform_recovery},
      {"metric inequalities", metric_inequalities},
      {"nearest-neighbour oracle", nn_oracle},
      {"contour isolation", contour_isolation},
      {"tour oracle", tsp_oracle},
      {"symmetry", symmetry},
      {"asymmetry identity", asymmetry_identity},
      {"grid exactness", grid_exactness},
      {"simplification ordering", simplification_order},
      {"channel detection", channel_detection},
      {"reduction signature", reduction_signature},
      {"sampling floor", sampling_floor_band},
      {"reproducibility", reproducibility}};
  // Optional arguments select criteria by number.
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", n, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
