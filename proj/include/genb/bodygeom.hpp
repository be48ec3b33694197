#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "genb/dataio.hpp"
#include "genb/error.hpp"
#include "genb/image.hpp"

namespace genb {

struct Resolution {
  int width = 0;
  int height = 0;
};

struct Joints2D {
  std::vector<std::array<double, 2>> points;  // pixels
  std::vector<std::uint8_t> valid;
};

/// Pinhole projection, pixel centers at integer coordinates. Points with Z <= 0 are flagged
/// invalid and their coordinates are left at zero.
inline Joints2D project_points(std::span<const Vec3f> points, const CameraModel& cam) {
  Joints2D out;
  out.points.resize(points.size(), {0.0, 0.0});
  out.valid.resize(points.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = points[i][0], y = points[i][1], z = points[i][2];
    if (!(z > 0.0) || !std::isfinite(x) || !std::isfinite(y)) continue;
    out.points[i] = {cam.fx * x / z + cam.cx, cam.fy * y / z + cam.cy};
    out.valid[i] = 1;
  }
  return out;
}

/// Joints further than `margin` pixels outside the frame become invalid.
inline void clip_to_frame(Joints2D& joints, Resolution res, double margin) {
  for (std::size_t i = 0; i < joints.points.size(); ++i) {
    const auto [u, v] = joints.points[i];
    if (u < -margin || v < -margin || u > res.width - 1 + margin || v > res.height - 1 + margin) {
      joints.valid[i] = 0;
    }
  }
}

inline std::array<double, 3> backproject(double u, double v, double depth, const CameraModel& cam) {
  return {(u - cam.cx) / cam.fx * depth, (v - cam.cy) / cam.fy * depth, depth};
}

/// Majority vote over the three vertex labels; ties go to the lowest enum value.
inline BodyPart triangle_label(BodyPart a, BodyPart b, BodyPart c) {
  if (a == b || a == c) return a;
  if (b == c) return b;
  return std::min({a, b, c});
}

inline constexpr std::uint8_t kNoLabel = 0xFF;
/// Scene depth tolerance in meters.
inline constexpr double kDepthTolerance = 0.005;

/// Nearest-surface label and depth per pixel.
struct LabelRaster {
  Image<std::uint8_t> labels;  // BodyPart or kNoLabel
  ImageF depth;                // +inf where uncovered
};

/// Z-buffered software rasterization of a labeled triangle mesh. Samples at integer pixel
/// centers with a top-left fill rule; depth is interpolated perspective-correctly.
/// Triangles with a vertex at or behind the camera plane are culled.
inline LabelRaster rasterize_labels(std::span<const Vec3f> vertices, std::span<const Face> faces,
                                    std::span<const BodyPart> labels, const CameraModel& cam,
                                    Resolution res) {
  if (faces.empty()) throw Error(Errc::DegenerateMesh, "mesh has zero triangles");
  if (labels.size() != vertices.size()) {
    throw Error(Errc::DegenerateMesh, "label count differs from vertex count");
  }
  LabelRaster out{Image<std::uint8_t>(res.width, res.height, 1, kNoLabel),
                  ImageF(res.width, res.height, 1, std::numeric_limits<float>::infinity())};

  struct ScreenVertex {
    double x, y, inv_z;
  };
  auto edge = [](const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
    return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
  };
  // Edge a->b of a positively oriented triangle (y down) is top or left.
  auto top_left = [](const ScreenVertex& a, const ScreenVertex& b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    return (dy == 0.0 && dx > 0.0) || dy < 0.0;
  };

  for (const Face& f : faces) {
    std::array<ScreenVertex, 3> sv{};
    bool culled = false;
    for (int k = 0; k < 3; ++k) {
      const auto idx = static_cast<std::size_t>(f[k]);
      if (idx >= vertices.size()) throw Error(Errc::DegenerateMesh, "face index out of range");
      const Vec3f& p = vertices[idx];
      if (!(p[2] > 1e-6f)) {
        culled = true;
        break;
      }
      sv[k] = {cam.fx * p[0] / p[2] + cam.cx, cam.fy * p[1] / p[2] + cam.cy, 1.0 / p[2]};
    }
    if (culled) continue;
    double area = edge(sv[0], sv[1], sv[2].x, sv[2].y);
    if (area == 0.0 || !std::isfinite(area)) continue;
    if (area < 0.0) {
      std::swap(sv[1], sv[2]);
      area = -area;
    }
    const auto label = static_cast<std::uint8_t>(triangle_label(
        labels[static_cast<std::size_t>(f[0])], labels[static_cast<std::size_t>(f[1])],
        labels[static_cast<std::size_t>(f[2])]));

    const int x_min = std::max(0, static_cast<int>(std::ceil(std::min({sv[0].x, sv[1].x, sv[2].x}))));
    const int x_max = std::min(res.width - 1,
                               static_cast<int>(std::floor(std::max({sv[0].x, sv[1].x, sv[2].x}))));
    const int y_min = std::max(0, static_cast<int>(std::ceil(std::min({sv[0].y, sv[1].y, sv[2].y}))));
    const int y_max = std::min(res.height - 1,
                               static_cast<int>(std::floor(std::max({sv[0].y, sv[1].y, sv[2].y}))));
    const bool tl0 = top_left(sv[1], sv[2]);
    const bool tl1 = top_left(sv[2], sv[0]);
    const bool tl2 = top_left(sv[0], sv[1]);

    for (int y = y_min; y <= y_max; ++y) {
      for (int x = x_min; x <= x_max; ++x) {
        const double w0 = edge(sv[1], sv[2], x, y);
        const double w1 = edge(sv[2], sv[0], x, y);
        const double w2 = edge(sv[0], sv[1], x, y);
        const bool inside = (w0 > 0 || (w0 == 0 && tl0)) && (w1 > 0 || (w1 == 0 && tl1)) &&
                            (w2 > 0 || (w2 == 0 && tl2));
        if (!inside) continue;
        const double inv_z = (w0 * sv[0].inv_z + w1 * sv[1].inv_z + w2 * sv[2].inv_z) / area;
        const auto z = static_cast<float>(1.0 / inv_z);
        if (z < out.depth.at(x, y)) {
          out.depth.at(x, y) = z;
          out.labels.at(x, y) = label;
        }
      }
    }
  }
  return out;
}

/// Per-person part masks. `parts` and `silhouette` are occlusion-aware when a scene depth
/// buffer was supplied; `unoccluded_body` is always the person rendered alone.
struct PartMaskSet {
  std::array<Mask, kBodyPartCount> parts;
  Mask silhouette;
  Mask unoccluded_body;
  long face_pixel_count = 0;

  const Mask& part(BodyPart p) const { return parts[static_cast<int>(p)]; }
};

inline PartMaskSet rasterize_person(std::span<const Vec3f> vertices, std::span<const Face> faces,
                                    std::span<const BodyPart> labels, const CameraModel& cam,
                                    Resolution res, const ImageF* scene_depth = nullptr,
                                    double depth_tolerance = kDepthTolerance) {
  if (scene_depth && (scene_depth->width() != res.width || scene_depth->height() != res.height)) {
    throw Error(Errc::ResolutionMismatch, "scene depth buffer resolution differs from frame");
  }
  const LabelRaster raster = rasterize_labels(vertices, faces, labels, cam, res);
  PartMaskSet set;
  for (auto& m : set.parts) m = Mask(res.width, res.height);
  set.silhouette = Mask(res.width, res.height);
  set.unoccluded_body = Mask(res.width, res.height);
  for (int y = 0; y < res.height; ++y) {
    for (int x = 0; x < res.width; ++x) {
      const auto label = raster.labels.at(x, y);
      if (label == kNoLabel) continue;
      set.unoccluded_body.at(x, y) = 1;
      if (scene_depth) {
        const float scene = scene_depth->at(x, y);
        const bool scene_valid = std::isfinite(scene) && scene > 0.0f;
        if (scene_valid && raster.depth.at(x, y) > scene + depth_tolerance) continue;
      }
      set.parts[label].at(x, y) = 1;
      set.silhouette.at(x, y) = 1;
    }
  }
  set.face_pixel_count = static_cast<long>(count_nonzero(set.part(BodyPart::face)));
  return set;
}

inline PartMaskSet rasterize_person(const PersonGT& person, const MeshTopology& topo,
                                    const CameraModel& cam, Resolution res,
                                    const ImageF* scene_depth = nullptr) {
  return rasterize_person(person.vertices, topo.faces, person.part_labels, cam, res, scene_depth);
}

/// Fraction of the unoccluded silhouette that survives occlusion.
inline double visibility_ratio(const PartMaskSet& set) {
  const auto reference = count_nonzero(set.unoccluded_body);
  if (reference == 0) throw Error(Errc::EmptyReference, "unoccluded silhouette is empty");
  return static_cast<double>(count_nonzero(set.silhouette)) / static_cast<double>(reference);
}

}  // namespace genb
