#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "vmorph/kdtree.hpp"
#include "vmorph/orientation.hpp"
#include "vmorph/slicing.hpp"
#include "vmorph/synthetic.hpp"
#include "vmorph/transform.hpp"

using namespace vmorph;

namespace {

std::vector<Vec3> box_points(double a, double b, double c, int n = 6) {
  std::vector<Vec3> pts;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      for (int k = 0; k <= n; ++k)
        pts.emplace_back(a * (i / double(n) - 0.5), b * (j / double(n) - 0.5), c * (k / double(n) - 0.5));
  return pts;
}

Mat3 random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-180.0, 180.0);
  return SimilarityTransform{Vec3::Zero(), Vec3(u(rng), u(rng) / 2, u(rng)), 1.0}.rotation();
}

double total_length(const std::vector<SectionPolyline>& ps) {
  double s = 0.0;
  for (const auto& p : ps) s += p.length();
  return s;
}

}  // namespace

// ----------------------------------------------------------------- kd-tree

TEST(KdTree, NearestMatchesLinearScan) {
  const auto pts = oracle::random_cloud(10000, 1);
  const auto queries = oracle::random_cloud(1000, 2, 12.0);
  const KdTree tree(pts);
  for (const Vec3& q : queries) {
    const auto nb = tree.nearest(q);
    EXPECT_EQ(nb.index, oracle::nearest(pts, q));
    EXPECT_EQ(nb.squared_distance, squared_distance(pts[nb.index], q));
  }
}

TEST(KdTree, HintDoesNotChangeAnswer) {
  const auto pts = oracle::random_cloud(3000, 3);
  const KdTree tree(pts);
  Index hint = 0;
  for (const Vec3& q : oracle::random_cloud(300, 4)) {
    const auto a = tree.nearest(q);
    const auto b = tree.nearest(q, hint);
    EXPECT_EQ(a.index, b.index);
    hint = static_cast<Index>((hint * 7 + 13) % pts.size());
  }
}

TEST(KdTree, TiesResolveToLowestIndex) {
  std::vector<Vec3> pts(40, Vec3(1, 2, 3));
  pts.push_back({0, 0, 0});
  const KdTree tree(pts);
  EXPECT_EQ(tree.nearest(Vec3(1, 2, 3)).index, 0u);
  EXPECT_EQ(tree.nearest(Vec3(1, 2, 3), 17).index, 0u);
}

TEST(KdTree, KnnMatchesSortedScan) {
  const auto pts = oracle::random_cloud(2000, 5);
  const KdTree tree(pts);
  for (const Vec3& q : oracle::random_cloud(50, 6)) {
    std::vector<std::pair<double, Index>> all;
    for (Index i = 0; i < pts.size(); ++i) all.push_back({oracle::sq(pts[i], q), i});
    std::sort(all.begin(), all.end());
    const auto got = tree.knn(q, 10);
    ASSERT_EQ(got.size(), 10u);
    for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(got[k].index, all[k].second);
  }
}

// -------------------------------------------------------------- orientation

TEST(PrincipalFrame, AxisAlignedBox) {
  const auto f = principal_frame(box_points(20, 10, 4));
  EXPECT_LT((f.axes - Mat3::Identity()).norm(), 1e-12);
  EXPECT_LT(f.centroid.norm(), 1e-12);
  EXPECT_GT(f.variances[0], f.variances[1]);
  EXPECT_GT(f.variances[1], f.variances[2]);
}

TEST(PrincipalFrame, RotatedBoxRecoversRotatedAxes) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Mat3 R = random_rotation(seed);
    auto pts = box_points(20, 10, 4);
    for (Vec3& p : pts) p = R * p + Vec3(3, -2, 7);
    const auto f = principal_frame(pts);
    for (int k = 0; k < 3; ++k) {
      const Vec3 expect = R.col(k);
      EXPECT_NEAR(std::abs(f.axis(k).dot(expect)), 1.0, 1e-9) << "axis " << k;
    }
    // Sign convention.
    EXPECT_GE(f.axis(0).x(), -1e-9);
    EXPECT_GE(f.axis(1).y(), -1e-9);
    EXPECT_NEAR(f.axes.determinant(), 1.0, 1e-12);
    EXPECT_LT((f.axes.transpose() * f.axes - Mat3::Identity()).norm(), 1e-9);
  }
}

TEST(PrincipalFrame, IsotropicPointsAreRankDeficient) {
  std::vector<Vec3> corners;
  for (int i = 0; i < 8; ++i) corners.emplace_back(i & 1 ? 1 : -1, i & 2 ? 1 : -1, i & 4 ? 1 : -1);
  EXPECT_THROW(principal_frame(corners), RankDeficiencyError);
  std::vector<Vec3> octa{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  EXPECT_THROW(principal_frame(octa), RankDeficiencyError);
}

TEST(PrincipalFrame, CoplanarAndTinySetsAreRankDeficient) {
  EXPECT_THROW(principal_frame(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}), RankDeficiencyError);
  std::vector<Vec3> flat;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) flat.emplace_back(i, j, 0.0);
  EXPECT_THROW(principal_frame(flat), RankDeficiencyError);
}

TEST(OrientToFrame, AlignedMeshMapsToItself) {
  auto pts = box_points(20, 10, 4);
  const TriangleMesh box(pts, {});
  const auto f = principal_frame(pts);
  const auto o = orient_to_frame(box, f);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_LT((o.vertices()[i] - pts[i]).norm(), 1e-12);
}

TEST(OrientToFrame, TiltedShellHasDiagonalCovariance) {
  synthetic::PlateSpec spec;
  spec.height = synthetic::Arch{};
  spec.rings = 20;
  spec.rim_points = 200;
  const auto body = synthetic::make_body(spec);
  const SimilarityTransform tilt{Vec3(4, -7, 11), Vec3(0, 10, 0), 1.0};
  const auto tilted = vmorph::apply(tilt, body.mesh);
  const auto o = orient_to_frame(tilted, principal_frame(tilted.vertices()));
  const Mat3 cov = covariance(o.vertices());
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (r != c) {
        EXPECT_NEAR(cov(r, c), 0.0, 1e-9);
      }
  EXPECT_GT(cov(0, 0), cov(1, 1));
  EXPECT_GT(cov(1, 1), cov(2, 2));
}

TEST(OrientToFrame, RigidlyMovedCopiesAgreeUpToAxisSigns) {
  synthetic::PlateSpec spec;
  spec.height = synthetic::Arch{};
  spec.rings = 15;
  spec.rim_points = 150;
  const auto body = synthetic::make_body(spec).mesh;
  // An asymmetric bump keeps the third-axis sign determined by the data.
  const auto base = transform_vertices(body, [](const Vec3& p) {
    return Vec3(p.x(), p.y(), p.z() + 2.0 * std::exp(-((p.x() - 60) * (p.x() - 60) + (p.y() - 30) * (p.y() - 30)) / 400));
  });
  const auto a = orient_to_frame(base, principal_frame(base.vertices()));
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Mat3 R = random_rotation(seed + 100);
    const auto moved = transform_vertices(base, [&](const Vec3& p) { return Vec3(R * p + Vec3(10, 20, -5)); });
    const auto b = orient_to_frame(moved, principal_frame(moved.vertices()));
    // World-referenced signs depend on the pose; compare modulo axis flips.
    double best = std::numeric_limits<double>::infinity();
    for (int flips = 0; flips < 8; ++flips) {
      const Vec3 sgn(flips & 1 ? -1 : 1, flips & 2 ? -1 : 1, flips & 4 ? -1 : 1);
      double worst = 0.0;
      for (std::size_t i = 0; i < a.vertex_count(); ++i)
        worst = std::max(worst, (a.vertices()[i] - b.vertices()[i].cwiseProduct(sgn)).norm());
      best = std::min(best, worst);
    }
    EXPECT_LT(best, 1e-6) << "seed " << seed;
  }
}

TEST(OrientToFrame, IsIsometryAndIdempotent) {
  const auto pts = oracle::random_cloud(200, 11);
  auto stretched = pts;
  for (Vec3& p : stretched) p = Vec3(3 * p.x() + p.y(), 1.5 * p.y(), 0.5 * p.z() + 0.1 * p.x());
  const TriangleMesh m(stretched, {});
  const auto f = principal_frame(stretched);
  const auto o = orient_to_frame(m, f);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = i + 1; j < 50; ++j) {
      const double d0 = distance(stretched[i], stretched[j]);
      EXPECT_NEAR(distance(o.vertices()[i], o.vertices()[j]), d0, 1e-9 * d0);
    }
  const auto again = principal_frame(o.vertices());
  EXPECT_LT((again.axes - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
}

// ------------------------------------------------------------------ slicing

TEST(CrossSection, UnitCubeSquare) {
  const auto ps = cross_section(oracle::unit_cube(), SectionPlane::make(Vec3::UnitZ(), 0.5));
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_TRUE(ps[0].closed);
  EXPECT_NEAR(ps[0].length(), 4.0, 1e-9);
}

TEST(CrossSection, PlaneThroughVerticesIsNudged) {
  const auto ps = cross_section(oracle::unit_cube(), SectionPlane::make(Vec3::UnitZ(), 1.0 - 1e-13));
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_TRUE(ps[0].closed);
  EXPECT_NEAR(ps[0].length(), 4.0, 1e-6);
}

TEST(CrossSection, SphereEquatorApproachesCircumference) {
  const auto sphere = synthetic::make_sphere(10.0, 70, 140);
  ASSERT_GE(sphere.face_count(), 10000u);
  const auto ps = cross_section(sphere, SectionPlane::make(Vec3::UnitZ(), 0.0));
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_TRUE(ps[0].closed);
  const double circ = 2.0 * std::numbers::pi * 10.0;
  EXPECT_NEAR(ps[0].length(), circ, 0.01 * circ);
  const auto coarse = cross_section(synthetic::make_sphere(10.0, 20, 40), SectionPlane::make(Vec3::UnitZ(), 0.0));
  EXPECT_LT(std::abs(coarse[0].length() - circ), 1.0 * circ);
  EXPECT_GT(std::abs(coarse[0].length() - circ), std::abs(ps[0].length() - circ));
}

TEST(CrossSection, PlaneAboveMeshIsEmpty) {
  EXPECT_TRUE(cross_section(oracle::unit_cube(), SectionPlane::make(Vec3::UnitZ(), 2.0)).empty());
}

TEST(CrossSection, PointsLieOnPlaneAndClosedMeshGivesClosedCurves) {
  const auto sphere = synthetic::make_sphere(10.0, 30, 60);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    const Vec3 n = Vec3(g(rng), g(rng), g(rng)).normalized();
    const auto plane = SectionPlane::make(n, 8.0 * (t / 20.0 - 0.5));
    for (const auto& pl : cross_section(sphere, plane)) {
      EXPECT_TRUE(pl.closed);
      for (std::size_t i = 0; i < pl.points.size(); ++i) {
        EXPECT_LT(std::abs(plane.signed_distance(pl.points[i])), 1e-9);
        if (i) {
          EXPECT_GT(distance(pl.points[i], pl.points[i - 1]), 1e-9);
        }
      }
    }
  }
}

TEST(CrossSection, SeparateLobesStaySeparate) {
  // Two spheres side by side: one plane, two closed curves.
  const auto s = synthetic::make_sphere(5.0, 20, 40);
  std::vector<Vec3> v = s.vertices();
  std::vector<Face> f = s.faces();
  const auto off = static_cast<Index>(v.size());
  for (const Vec3& p : s.vertices()) v.push_back(p + Vec3(10.0, 0, 0));
  for (const Face& t : s.faces()) f.push_back({t[0] + off, t[1] + off, t[2] + off});
  const auto ps = cross_section(TriangleMesh(v, f), SectionPlane::make(Vec3::UnitZ(), 0.3));
  EXPECT_EQ(ps.size(), 2u);
}

TEST(CrossSection, LengthInvariantUnderRigidMotion) {
  const auto sphere = synthetic::make_sphere(10.0, 30, 60);
  const auto stretched = transform_vertices(sphere, [](const Vec3& p) { return Vec3(2 * p.x(), p.y(), 0.7 * p.z()); });
  const SectionPlane plane = SectionPlane::make(Vec3(0.3, 0.1, 1).normalized(), 1.5);
  const double base = total_length(cross_section(stretched, plane));
  const Mat3 R = random_rotation(9);
  const Vec3 t(5, -3, 2);
  const auto moved = transform_vertices(stretched, [&](const Vec3& p) { return Vec3(R * p + t); });
  const Vec3 n2 = R * plane.normal;
  const auto plane2 = SectionPlane::make(n2, plane.offset + n2.dot(t));
  EXPECT_NEAR(total_length(cross_section(moved, plane2)), base, 1e-9 * base);
}

TEST(CrossSection, SourceEdgesRecorded) {
  const auto cube = oracle::unit_cube();
  const auto ps = cross_section(cube, SectionPlane::make(Vec3::UnitZ(), 0.25));
  ASSERT_EQ(ps.size(), 1u);
  ASSERT_EQ(ps[0].source_edges.size(), ps[0].points.size());
  for (std::size_t i = 0; i < ps[0].points.size(); ++i) {
    const Edge e = ps[0].source_edges[i];
    EXPECT_NE(cube.vertices()[e.a].z(), cube.vertices()[e.b].z());
  }
}

TEST(ExtremePoints, RectangularPlateLongEdges) {
  const auto plate = synthetic::make_grid(41, 11, 1.0, [](double, double) { return 0.0; }, -20.0, -5.0);
  ExtremePointOptions opt;
  const auto pts = extreme_points(plate, Axis::x, opt);
  ASSERT_EQ(pts.size(), 2u * 39u);  // offsets strictly inside (-20, 20)
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(std::abs(pts[i].y()), 5.0, 1e-12);
    EXPECT_NEAR(pts[i].y(), i % 2 == 0 ? -5.0 : 5.0, 1e-12);
  }
}

TEST(ExtremePoints, EllipseShellMatchesAnalyticBoundary) {
  synthetic::PlateSpec spec;
  spec.outline = synthetic::ViolinOutline{150.0, 90.0, 0.0};
  spec.height = [](double x, double y) { return 10.0 - 1e-4 * (x * x + y * y); };
  const auto plate = synthetic::make_plate(spec).mesh;
  const double edge = mean_edge_length(plate);
  ExtremePointOptions opt;
  opt.spacing = 1.0;
  const auto pts = extreme_points(plate, Axis::x, opt);
  ASSERT_FALSE(pts.empty());
  for (const Vec3& p : pts) {
    const double u = p.x() / 150.0;
    const double y_true = 90.0 * std::sqrt(std::max(0.0, 1.0 - u * u));
    EXPECT_NEAR(std::abs(p.y()), y_true, edge) << "x=" << p.x();
  }
}

TEST(ExtremePoints, IntervalKeepsMorePoints) {
  const auto plate = synthetic::make_grid(41, 11, 1.0, [](double, double) { return 0.0; }, -20.0, -5.0);
  ExtremePointOptions opt;
  opt.intervals.push_back({-2.5, 2.5, 6});
  const auto pts = extreme_points(plate, Axis::x, opt);
  EXPECT_EQ(pts.size(), 2u * 34u + 6u * 5u);
}

TEST(ExtremePoints, CoarseSpacingFallsBackToMidPlane) {
  const auto plate = synthetic::make_grid(5, 5, 1.0, [](double, double) { return 0.0; });
  Diagnostics d;
  ExtremePointOptions opt;
  opt.spacing = 100.0;
  const auto pts = extreme_points(plate, Axis::y, opt, &d);
  EXPECT_EQ(pts.size(), 2u);
  EXPECT_FALSE(d.warnings.empty());
  EXPECT_THROW(section_offsets(0, 1, 0.0), InputError);
}
