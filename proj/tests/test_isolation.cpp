#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "vmorph/graph.hpp"
#include "vmorph/isolation.hpp"
#include "vmorph/synthetic.hpp"

using namespace vmorph;

namespace {

synthetic::PlateSpec arched_spec(std::size_t rings = 40, std::size_t rim = 400) {
  synthetic::PlateSpec s;
  s.height = synthetic::Arch{synthetic::ViolinOutline{}, 20.0, 15.0};
  s.rings = rings;
  s.rim_points = rim;
  return s;
}

void expect_closed_loop(const TriangleMesh& mesh, const std::vector<Index>& loop) {
  ASSERT_GE(loop.size(), 3u);
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Index a = loop[i], b = loop[(i + 1) % loop.size()];
    EXPECT_NE(a, b);
    EXPECT_TRUE(mesh.graph().adjacent(a, b)) << a << " - " << b;
  }
}

std::vector<Vec3> points_of(const TriangleMesh& m, const std::vector<Index>& idx) {
  std::vector<Vec3> out;
  for (Index i : idx) out.push_back(m.vertices()[i]);
  return out;
}

}  // namespace

// ---------------------------------------------------------- map_to_vertices

TEST(MapToVertices, CoincidentPoint) {
  const auto m = synthetic::make_hemisphere(10.0, 10, 40);
  const std::vector<Vec3> q{m.vertices()[57]};
  EXPECT_EQ(map_to_vertices(m, q), std::vector<Index>{57});
}

TEST(MapToVertices, MatchesLinearScanAndDedups) {
  const auto m = synthetic::make_grid(100, 100, 1.0, [](double x, double y) { return std::sin(x * 0.1) * std::cos(y * 0.07); });
  ASSERT_EQ(m.vertex_count(), 10000u);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-2.0, 101.0);
  std::vector<Vec3> q;
  for (int i = 0; i < 1000; ++i) q.emplace_back(u(rng), u(rng), u(rng) * 0.01);
  std::vector<Index> expect;
  std::vector<char> seen(m.vertex_count(), 0);
  for (const Vec3& p : q) {
    const auto v = static_cast<Index>(oracle::nearest(m.vertices(), p));
    if (!seen[v]) {
      seen[v] = 1;
      expect.push_back(v);
    }
  }
  EXPECT_EQ(map_to_vertices(m, q), expect);
}

TEST(MapToVertices, TwoPointsOnOneVertex) {
  const auto m = synthetic::make_grid(3, 3, 1.0, [](double, double) { return 0.0; });
  const std::vector<Vec3> q{{1.1, 1.0, 0.0}, {0.9, 1.05, 0.0}, {2, 2, 0}};
  EXPECT_EQ(map_to_vertices(m, q), (std::vector<Index>{4, 8}));
}

// ---------------------------------------------------------------- order_loop

TEST(OrderLoop, ShuffledCircleRecoversCircularOrder) {
  std::vector<Vec3> v;
  for (int k = 0; k < 8; ++k) v.emplace_back(std::cos(k * std::numbers::pi / 4), std::sin(k * std::numbers::pi / 4), 0);
  const TriangleMesh m(v, {});
  std::vector<Index> anchors{5, 2, 7, 0, 3, 6, 1, 4};
  const auto loop = order_loop(m, anchors);
  ASSERT_EQ(loop.size(), 8u);
  EXPECT_EQ(loop[0], 0u);
  const int step = loop[1] == 1 ? 1 : 7;
  for (int k = 0; k < 8; ++k) EXPECT_EQ(loop[static_cast<std::size_t>(k)], static_cast<Index>((k * step) % 8));
}

TEST(OrderLoop, LargeCircleUsesHeuristicAndStillRecoversOrder) {
  std::vector<Vec3> v;
  const int n = 60;
  for (int k = 0; k < n; ++k) v.emplace_back(50 * std::cos(2 * k * std::numbers::pi / n), 30 * std::sin(2 * k * std::numbers::pi / n), 0);
  const TriangleMesh m(v, {});
  std::vector<Index> anchors(n);
  std::iota(anchors.begin(), anchors.end(), Index{0});
  std::shuffle(anchors.begin(), anchors.end(), std::mt19937_64(3));
  const auto loop = order_loop(m, anchors);
  EXPECT_EQ(loop[0], 0u);
  std::vector<std::size_t> order(loop.begin(), loop.end());
  std::vector<std::size_t> ideal(n);
  std::iota(ideal.begin(), ideal.end(), std::size_t{0});
  EXPECT_NEAR(oracle::cycle_length(v, order), oracle::cycle_length(v, ideal), 1e-9);
}

TEST(OrderLoop, SmallSetsMatchExhaustiveOptimum) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (std::size_t n = 3; n <= 9; ++n)
    for (int rep = 0; rep < 12; ++rep) {
      std::vector<Vec3> v;
      for (std::size_t i = 0; i < n + 3; ++i) v.emplace_back(u(rng), u(rng), 0.2 * u(rng));
      const TriangleMesh m(v, {});
      std::vector<Index> anchors;
      for (std::size_t i = 0; i < n; ++i) anchors.push_back(static_cast<Index>(i + 2));
      std::shuffle(anchors.begin(), anchors.end(), rng);
      const auto loop = order_loop(m, anchors);
      ASSERT_EQ(loop.size(), n);
      EXPECT_EQ(loop[0], 2u);
      const auto pts = points_of(m, loop);
      std::vector<std::size_t> id(n);
      std::iota(id.begin(), id.end(), std::size_t{0});
      EXPECT_NEAR(oracle::cycle_length(pts, id), oracle::optimal_tour_length(pts), 1e-9) << "n=" << n;
    }
}

TEST(OrderLoop, ThreeAnchorsFormACycle) {
  const TriangleMesh m({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  const auto loop = order_loop(m, {2, 0, 1});
  std::vector<Index> sorted = loop;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<Index>{0, 1, 2}));
  EXPECT_THROW(order_loop(m, {0, 1}), InputError);
  EXPECT_THROW(order_loop(m, {0, 1, 1}), InputError);
}

// ------------------------------------------------------------- close_contour

TEST(CloseContour, AdjacentAnchorsNeedNoInsertions) {
  const auto m = synthetic::make_grid(4, 4, 1.0, [](double, double) { return 0.0; });
  const std::vector<Index> ring{0, 1, 2, 3, 7, 11, 15, 14, 13, 12, 8, 4};
  const auto c = close_contour(m, ring);
  EXPECT_EQ(c.vertex_indices, ring);
  for (auto s : c.source) EXPECT_EQ(s, ContourSource::nearest_neighbour);
}

TEST(CloseContour, InsertedVerticesFollowShortestPaths) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  const auto m = synthetic::make_grid(7, 7, 1.0, [&](double, double) { return u(rng); });
  const auto all = oracle::all_pairs(m);
  const std::vector<Index> anchors{0, 2, 4, 6, 20, 34, 48, 46, 44, 42, 28, 14};
  const auto c = close_contour(m, anchors);
  expect_closed_loop(m, c.vertex_indices);
  // Walk the contour between consecutive anchors and compare segment lengths.
  std::size_t pos = 0;
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    ASSERT_EQ(c.vertex_indices[pos], anchors[k]);
    EXPECT_EQ(c.source[pos], ContourSource::nearest_neighbour);
    const Index next = anchors[(k + 1) % anchors.size()];
    double len = 0.0;
    std::size_t q = pos;
    do {
      const std::size_t r = (q + 1) % c.size();
      len += distance(m.vertices()[c.vertex_indices[q]], m.vertices()[c.vertex_indices[r]]);
      q = r;
      if (c.vertex_indices[q] != next) {
        EXPECT_EQ(c.source[q], ContourSource::inserted_intermediate);
      }
    } while (c.vertex_indices[q] != next);
    EXPECT_NEAR(len, all[anchors[k]][next], 1e-12);
    pos = q;
  }
}

TEST(CloseContour, IsletAnchorNamesPair) {
  auto g = synthetic::make_grid(4, 4, 1.0, [](double, double) { return 0.0; });
  std::vector<Vec3> v = g.vertices();
  std::vector<Face> f = g.faces();
  v.push_back({10, 10, 0});
  v.push_back({11, 10, 0});
  v.push_back({10, 11, 0});
  f.push_back({16, 17, 18});
  const TriangleMesh m(v, f);
  try {
    close_contour(m, {0, 3, 17, 12});
    FAIL();
  } catch (const DisconnectedError& e) {
    EXPECT_NE(std::string(e.what()).find("3 and 17"), std::string::npos) << e.what();
  }
}

TEST(CloseContour, BackAndForthCollapses) {
  // On a 4 x 2 strip, 0 -> 3 -> 2 walks 0 1 2 3 2; the (2, 3, 2) spike goes.
  const auto m = synthetic::make_grid(4, 2, 1.0, [](double, double) { return 0.0; });
  Diagnostics d;
  const auto c = close_contour(m, {0, 3, 2, 6, 4}, &d);
  EXPECT_EQ(c.vertex_indices, (std::vector<Index>{0, 1, 2, 6, 5, 4}));
  expect_closed_loop(m, c.vertex_indices);
  EXPECT_TRUE(d.warnings.empty());
}

// ------------------------------------------------------------- isolate_plate

TEST(IsolatePlate, SkirtedPlateKeepsPlateDropsSkirt) {
  const auto sk = synthetic::make_skirted_plate(arched_spec());
  const auto r = isolate_plate(sk.mesh, PlateSide::sound_board);
  expect_closed_loop(sk.mesh, r.contour.vertex_indices);
  std::vector<char> on_contour(sk.mesh.vertex_count(), 0);
  for (Index v : r.contour.vertex_indices) on_contour[v] = 1;
  std::vector<char> kept(sk.mesh.vertex_count(), 0);
  ASSERT_EQ(r.plate.source_index.size(), r.plate.mesh.vertex_count());
  for (Index v : r.plate.source_index) kept[v] = 1;
  std::size_t plate_missing = 0, skirt_kept = 0;
  for (Index v = 0; v < sk.mesh.vertex_count(); ++v) {
    if (sk.plate_label[v] && !on_contour[v] && !kept[v]) ++plate_missing;
    if (!sk.plate_label[v] && kept[v] && !on_contour[v]) ++skirt_kept;
  }
  EXPECT_EQ(plate_missing, 0u);
  EXPECT_EQ(skirt_kept, 0u);
  EXPECT_EQ(connected_components(r.plate.mesh).size(), 1u);
  EXPECT_LE(r.plate.inner_vertex_count, sk.mesh.vertex_count() - r.contour.size());
}

TEST(IsolatePlate, InnerMeshIsSeparatedFromOuterPart) {
  const auto sk = synthetic::make_skirted_plate(arched_spec(30, 300));
  const auto r = isolate_plate(sk.mesh, PlateSide::sound_board);
  std::vector<char> on_contour(sk.mesh.vertex_count(), 0), kept(sk.mesh.vertex_count(), 0);
  for (Index v : r.contour.vertex_indices) on_contour[v] = 1;
  for (Index v : r.plate.source_index) kept[v] = 1;
  for (const Edge& e : sk.mesh.graph().edges()) {
    const bool a_in = kept[e.a] && !on_contour[e.a], b_in = kept[e.b] && !on_contour[e.b];
    const bool a_out = !kept[e.a], b_out = !kept[e.b];
    EXPECT_FALSE((a_in && b_out) || (b_in && a_out));
  }
  for (Index v : r.contour.vertex_indices) EXPECT_LT(v, sk.mesh.vertex_count());
}

TEST(IsolatePlate, IsDeterministic) {
  const auto sk = synthetic::make_skirted_plate(arched_spec(20, 200));
  const auto a = isolate_plate(sk.mesh, PlateSide::sound_board);
  const auto b = isolate_plate(sk.mesh, PlateSide::sound_board);
  EXPECT_EQ(a.contour.vertex_indices, b.contour.vertex_indices);
  EXPECT_EQ(a.plate.mesh.vertices(), b.plate.mesh.vertices());
  EXPECT_EQ(a.plate.mesh.faces(), b.plate.mesh.faces());
}

TEST(IsolatePlate, PlateAlreadyCutAtContour) {
  const auto p = synthetic::make_plate(arched_spec(20, 200));
  ClosedContour c;
  c.vertex_indices = p.contour;
  const auto inner = extract_inner(p.mesh, c, PlateSide::sound_board);
  EXPECT_EQ(inner.inner_vertex_count, p.mesh.vertex_count() - p.contour.size());
  EXPECT_EQ(inner.mesh.vertex_count(), p.mesh.vertex_count());
  EXPECT_EQ(inner.mesh.face_count(), p.mesh.face_count());
}

TEST(IsolatePlate, LoopAroundApexIsFragmentation) {
  auto spec = arched_spec(20, 200);
  std::vector<std::vector<Index>> ids;
  const auto mesh = synthetic::ring_mesh(synthetic::plate_rings(spec), &ids);
  ClosedContour c;
  c.vertex_indices = ids[1];
  EXPECT_THROW(extract_inner(mesh, c, PlateSide::sound_board), FragmentationError);
}

TEST(IsolatePlate, SoundHoleMaskIsExcluded) {
  const auto sk = synthetic::make_skirted_plate(arched_spec(30, 300));
  std::vector<Index> hole;
  for (Index v = 0; v < sk.mesh.vertex_count(); ++v) {
    const Vec3& p = sk.mesh.vertices()[v];
    if (sk.plate_label[v] && std::hypot(p.x() - 40, p.y() - 50) < 6) hole.push_back(v);
  }
  ASSERT_FALSE(hole.empty());
  IsolationParams params;
  params.removed = VertexMask(hole);
  const auto r = isolate_plate(sk.mesh, PlateSide::sound_board, params);
  for (Index v : r.plate.source_index) EXPECT_FALSE(params.removed.contains(v));
}

TEST(IsolatePlate, BodyYieldsTwoSingleComponentPlates) {
  const auto body = synthetic::make_body(arched_spec(30, 300));
  for (PlateSide side : {PlateSide::sound_board, PlateSide::back}) {
    const auto rough = rough_plate(body.mesh, side);
    const auto r = isolate_plate(rough, side);
    EXPECT_EQ(connected_components(r.plate.mesh).size(), 1u) << to_string(side);
    const auto& label = side == PlateSide::sound_board ? body.top_label : body.bottom_label;
    std::size_t labelled = 0;
    for (char c : label) labelled += c != 0;
    EXPECT_GE(r.plate.mesh.vertex_count() + 0u, labelled - r.contour.size()) << to_string(side);
    for (const Vec3& p : r.plate.mesh.vertices())
      EXPECT_GT(side == PlateSide::sound_board ? p.z() : -p.z(), 19.0 - 1e-9);
  }
}
