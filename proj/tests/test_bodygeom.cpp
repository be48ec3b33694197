#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "genb/bodygeom.hpp"

using namespace genb;

namespace {

// fx = fy = 1, principal point at the origin: a vertex (x, y, 1) lands on pixel (x, y).
const CameraModel kUnitCam{1.0, 1.0, 0.0, 0.0};

Vec3f v(double x, double y, double z = 1.0) {
  return {static_cast<float>(x * z), static_cast<float>(y * z), static_cast<float>(z)};
}

bool strictly_inside(const std::array<std::array<long double, 2>, 3>& t, long double px, long double py) {
  auto cross = [](auto a, auto b, long double x, long double y) {
    return (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
  };
  const long double e0 = cross(t[0], t[1], px, py), e1 = cross(t[1], t[2], px, py),
                    e2 = cross(t[2], t[0], px, py);
  return (e0 > 0 && e1 > 0 && e2 > 0) || (e0 < 0 && e1 < 0 && e2 < 0);
}

}  // namespace

TEST(Projection, RoundTripBelowMicroPixel) {
  const CameraModel cam{1120.5, 1118.25, 639.5, 359.5};
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1279.0), vv(0.0, 719.0), z(0.5, 40.0);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double pu = u(gen), pv = vv(gen), d = z(gen);
    const auto p = backproject(pu, pv, d, cam);
    const std::vector<Vec3f> pts{{static_cast<float>(p[0]), static_cast<float>(p[1]),
                                  static_cast<float>(p[2])}};
    // float storage alone moves a point at 40 m by ~2e-6 m; project in double instead.
    const double ru = cam.fx * p[0] / p[2] + cam.cx, rv = cam.fy * p[1] / p[2] + cam.cy;
    worst = std::max({worst, std::abs(ru - pu), std::abs(rv - pv)});
    const Joints2D j = project_points(pts, cam);
    ASSERT_TRUE(j.valid[0]);
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Projection, PointsBehindCameraAreInvalid) {
  const std::vector<Vec3f> pts{{0, 0, 0}, {0, 0, -1}, {1, 1, 2}};
  const Joints2D j = project_points(pts, kUnitCam);
  EXPECT_EQ(j.valid, (std::vector<std::uint8_t>{0, 0, 1}));
  EXPECT_DOUBLE_EQ(j.points[2][0], 0.5);
}

TEST(Projection, ClipToFrame) {
  Joints2D j{{{-3.0, 5.0}, {10.0, 10.0}, {20.5, 3.0}}, {1, 1, 1}};
  clip_to_frame(j, {20, 20}, 2.0);
  EXPECT_EQ(j.valid, (std::vector<std::uint8_t>{0, 1, 1}));
}

TEST(TriangleLabel, MajorityThenLowestEnum) {
  EXPECT_EQ(triangle_label(BodyPart::feet, BodyPart::body, BodyPart::feet), BodyPart::feet);
  EXPECT_EQ(triangle_label(BodyPart::body, BodyPart::hands, BodyPart::hands), BodyPart::hands);
  EXPECT_EQ(triangle_label(BodyPart::feet, BodyPart::face, BodyPart::body), BodyPart::face);
  EXPECT_EQ(triangle_label(BodyPart::scalp, BodyPart::scalp, BodyPart::scalp), BodyPart::scalp);
}

TEST(Rasterizer, MatchesHalfPlaneOracle) {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> coord(-5.0, 45.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<std::array<long double, 2>, 3> t{};
    std::vector<Vec3f> verts;
    for (auto& p : t) {
      // Continuous coordinates: no pixel center lies exactly on an edge.
      p = {coord(gen), coord(gen)};
      verts.push_back(v(static_cast<double>(p[0]), static_cast<double>(p[1])));
    }
    const std::vector<Face> faces{{0, 1, 2}};
    const std::vector<BodyPart> labels(3, BodyPart::body);
    const LabelRaster r = rasterize_labels(verts, faces, labels, kUnitCam, {40, 40});
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 40; ++x) {
        // Vertices are stored as floats; use the stored values in the oracle.
        std::array<std::array<long double, 2>, 3> tf{};
        for (int k = 0; k < 3; ++k) tf[k] = {verts[k][0], verts[k][1]};
        const bool expect = strictly_inside(tf, x, y);
        ASSERT_EQ(r.labels.at(x, y) != kNoLabel, expect) << "trial " << trial << " px " << x << "," << y;
      }
    }
  }
}

TEST(Rasterizer, SharedEdgesCoverEachPixelOnce) {
  // A fan of 8 triangles around a lattice-aligned center; every edge passes through pixel
  // centers, so the fill rule decides ownership.
  const double c = 16.0;
  const std::array<std::array<double, 2>, 8> ring{{{4, 4}, {16, 2}, {28, 4}, {30, 16},
                                                    {28, 28}, {16, 30}, {4, 28}, {2, 16}}};
  Image<int> count(32, 32, 1, 0);
  Image<int> hull(32, 32, 1, 0);
  for (int k = 0; k < 8; ++k) {
    const auto& a = ring[k];
    const auto& b = ring[(k + 1) % 8];
    const std::vector<Vec3f> verts{v(c, c), v(a[0], a[1]), v(b[0], b[1])};
    const std::vector<Face> faces{{0, 1, 2}};
    const std::vector<BodyPart> labels(3, BodyPart::body);
    const LabelRaster r = rasterize_labels(verts, faces, labels, kUnitCam, {32, 32});
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) count.at(x, y) += r.labels.at(x, y) != kNoLabel;
    }
  }
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      EXPECT_LE(count.at(x, y), 1) << x << "," << y;
    }
  }
  // Interior pixels (strictly inside the octagon) are covered exactly once.
  for (int y = 6; y <= 26; ++y) {
    for (int x = 6; x <= 26; ++x) EXPECT_EQ(count.at(x, y), 1) << x << "," << y;
  }
}

TEST(Rasterizer, PerspectiveCorrectDepth) {
  // Plane z = 2 + 0.5 * X (camera space), sampled by a big triangle.
  const CameraModel cam{100.0, 100.0, 32.0, 32.0};
  auto on_plane = [](double X, double Y) -> Vec3f {
    return {static_cast<float>(X), static_cast<float>(Y), static_cast<float>(2.0 + 0.5 * X)};
  };
  const std::vector<Vec3f> verts{on_plane(-0.8, -0.8), on_plane(0.8, -0.8), on_plane(0.0, 1.2)};
  const std::vector<Face> faces{{0, 1, 2}};
  const std::vector<BodyPart> labels(3, BodyPart::body);
  const LabelRaster r = rasterize_labels(verts, faces, labels, cam, {64, 64});
  int checked = 0;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      if (r.labels.at(x, y) == kNoLabel) continue;
      // Ray (u, v) hits the plane at z = 2 / (1 - 0.5 * (u - cx) / fx).
      const double expect = 2.0 / (1.0 - 0.5 * (x - cam.cx) / cam.fx);
      EXPECT_NEAR(r.depth.at(x, y), expect, 1e-5 * expect);
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Rasterizer, NearestSurfaceWins) {
  const std::vector<Vec3f> verts{v(0, 0, 3), v(20, 0, 3), v(0, 20, 3), v(0, 0, 2), v(20, 0, 2),
                                 v(0, 20, 2)};
  const std::vector<Face> faces{{0, 1, 2}, {3, 4, 5}};
  const std::vector<BodyPart> labels{BodyPart::feet, BodyPart::feet, BodyPart::feet,
                                     BodyPart::face, BodyPart::face, BodyPart::face};
  for (auto order : {faces, std::vector<Face>{faces[1], faces[0]}}) {
    const LabelRaster r = rasterize_labels(verts, order, labels, kUnitCam, {24, 24});
    EXPECT_EQ(r.labels.at(3, 3), static_cast<std::uint8_t>(BodyPart::face));
    EXPECT_FLOAT_EQ(r.depth.at(3, 3), 2.0f);
  }
}

TEST(Rasterizer, DegenerateMeshes) {
  const std::vector<Vec3f> verts{v(0, 0), v(5, 0), v(0, 5)};
  const std::vector<BodyPart> labels(3, BodyPart::body);
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::IoError;
  };
  EXPECT_EQ(code([&] { rasterize_labels(verts, {}, labels, kUnitCam, {8, 8}); }), Errc::DegenerateMesh);
  const std::vector<Face> bad{{0, 1, 3}};
  EXPECT_EQ(code([&] { rasterize_labels(verts, bad, labels, kUnitCam, {8, 8}); }), Errc::DegenerateMesh);
  const std::vector<Face> ok{{0, 1, 2}};
  const std::vector<BodyPart> short_labels(2, BodyPart::body);
  EXPECT_EQ(code([&] { rasterize_labels(verts, ok, short_labels, kUnitCam, {8, 8}); }),
            Errc::DegenerateMesh);
}

namespace {

// A 10x10-pixel square at depth 2 with a face-labelled top half.
struct Square {
  std::vector<Vec3f> verts;
  std::vector<Face> faces;
  std::vector<BodyPart> labels;
};

Square square_person() {
  Square s;
  const double z = 2.0;
  s.verts = {v(4.5, 4.5, z), v(14.5, 4.5, z), v(14.5, 9.5, z), v(4.5, 9.5, z),
             v(4.5, 9.5, z), v(14.5, 9.5, z), v(14.5, 14.5, z), v(4.5, 14.5, z)};
  s.faces = {{0, 1, 2}, {0, 2, 3}, {4, 5, 6}, {4, 6, 7}};
  s.labels = {BodyPart::face, BodyPart::face, BodyPart::face, BodyPart::face,
              BodyPart::body, BodyPart::body, BodyPart::body, BodyPart::body};
  return s;
}

}  // namespace

TEST(PartMasks, OcclusionUsesFiveMillimeterTolerance) {
  const Square s = square_person();
  const Resolution res{20, 20};
  ImageF scene(20, 20, 1, 2.0f - 0.004f);  // 4 mm in front: still visible
  PartMaskSet m = rasterize_person(s.verts, s.faces, s.labels, kUnitCam, res, &scene);
  EXPECT_EQ(count_nonzero(m.silhouette), 100u);
  EXPECT_EQ(m.face_pixel_count, 50);

  scene = ImageF(20, 20, 1, 2.0f - 0.006f);  // 6 mm in front: occluded
  m = rasterize_person(s.verts, s.faces, s.labels, kUnitCam, res, &scene);
  EXPECT_EQ(count_nonzero(m.silhouette), 0u);
  EXPECT_EQ(count_nonzero(m.unoccluded_body), 100u);
  EXPECT_EQ(m.face_pixel_count, 0);
}

TEST(PartMasks, InvalidSceneDepthCountsAsVisible) {
  const Square s = square_person();
  ImageF scene(20, 20, 1, 0.5f);
  scene.at(5, 5) = 0.0f;
  scene.at(6, 5) = std::numeric_limits<float>::quiet_NaN();
  scene.at(7, 5) = std::numeric_limits<float>::infinity();
  const PartMaskSet m = rasterize_person(s.verts, s.faces, s.labels, kUnitCam, {20, 20}, &scene);
  EXPECT_EQ(count_nonzero(m.silhouette), 3u);
  EXPECT_EQ(m.face_pixel_count, 3);
}

TEST(PartMasks, VisibilityRatio) {
  const Square s = square_person();
  ImageF scene(20, 20, 1, 10.0f);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 8; ++x) scene.at(x, y) = 1.0f;  // hides columns 5..7 = 30 px
  }
  const PartMaskSet m = rasterize_person(s.verts, s.faces, s.labels, kUnitCam, {20, 20}, &scene);
  EXPECT_DOUBLE_EQ(visibility_ratio(m), 0.7);
  EXPECT_EQ(count_nonzero(m.part(BodyPart::body)), 35u);

  // Entirely outside the frame: no reference silhouette.
  std::vector<Vec3f> away = s.verts;
  for (auto& p : away) p[0] += 100.0f;
  const PartMaskSet off = rasterize_person(away, s.faces, s.labels, kUnitCam, {20, 20});
  EXPECT_THROW(visibility_ratio(off), Error);
}

TEST(PartMasks, PartsPartitionTheSilhouette) {
  const Square s = square_person();
  const PartMaskSet m = rasterize_person(s.verts, s.faces, s.labels, kUnitCam, {20, 20});
  Mask all(20, 20);
  std::size_t total = 0;
  for (const auto& p : m.parts) {
    total += count_nonzero(p);
    all = mask_union(all, p);
  }
  EXPECT_EQ(total, count_nonzero(m.silhouette));
  EXPECT_EQ(all, m.silhouette);
}
