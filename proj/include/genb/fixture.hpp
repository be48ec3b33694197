#pragma once

// Procedural test scenes: box humanoids with per-vertex part labels, SMPL-X-layout joints,
// and depth/segmentation/rgb rendered with the same rasterizer the pipeline uses.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "genb/bodygeom.hpp"
#include "genb/dataio.hpp"
#include "genb/digest.hpp"
#include "genb/image.hpp"
#include "genb/rng.hpp"

namespace genb::fixture {

inline constexpr int kJointCount = 127;
/// Camera-space y of the floor (the camera sits this far above it).
inline constexpr double kFloorY = 1.0;
inline constexpr float kBackgroundDepth = 30.0f;

struct HumanoidSpec {
  int person_id = 0;
  double x = 0.0;  // camera-space position of the feet center
  double z = 4.0;
  double height = 1.8;
  Gender gender = Gender::female;
  std::string race = "caucasian";
  std::optional<std::string> hair_color;
  bool simulated_cloth = true;
  bool cloth_skin_mask_present = false;
};

/// Axis-aligned image rectangle drawn as an environment object at `depth`.
struct Occluder {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
  float depth = 1.0f;
};

struct FrameSpec {
  std::string frame_id;
  int width = 640;
  int height = 480;
  std::vector<HumanoidSpec> persons;
  std::vector<Occluder> occluders;
};

inline CameraModel camera_for(int width, int height) {
  return {500.0, 500.0, (width - 1) / 2.0, (height - 1) / 2.0};
}

namespace detail {

// Boxes in person-local meters: x right, y up from the floor, z toward the back.
struct Box {
  double x0, x1, y0, y1, z0, z1;
  BodyPart label;
};

inline const std::vector<Box>& humanoid_boxes() {
  static const std::vector<Box> boxes = {
      {-0.17, -0.03, 0.00, 0.08, -0.15, 0.10, BodyPart::feet},
      {0.03, 0.17, 0.00, 0.08, -0.15, 0.10, BodyPart::feet},
      {-0.17, -0.03, 0.08, 0.90, -0.07, 0.07, BodyPart::body},
      {0.03, 0.17, 0.08, 0.90, -0.07, 0.07, BodyPart::body},
      {-0.20, 0.20, 0.90, 1.48, -0.11, 0.11, BodyPart::body},
      {-0.32, -0.21, 0.88, 1.46, -0.05, 0.05, BodyPart::body},
      {0.21, 0.32, 0.88, 1.46, -0.05, 0.05, BodyPart::body},
      {-0.32, -0.21, 0.74, 0.88, -0.05, 0.05, BodyPart::hands},
      {0.21, 0.32, 0.74, 0.88, -0.05, 0.05, BodyPart::hands},
      {-0.05, 0.05, 1.48, 1.54, -0.05, 0.05, BodyPart::body},
      {-0.11, 0.11, 1.54, 1.74, -0.12, 0.10, BodyPart::face},
      {-0.12, 0.12, 1.74, 1.82, -0.13, 0.12, BodyPart::scalp},
  };
  return boxes;
}

inline constexpr double kModelHeight = 1.82;

}  // namespace detail

/// Shared face list: 12 triangles per box over 8 box-local vertices.
inline std::shared_ptr<const MeshTopology> humanoid_topology() {
  static constexpr int kQuads[6][4] = {{0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1},
                                       {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3}};
  auto topo = std::make_shared<MeshTopology>();
  const int boxes = static_cast<int>(detail::humanoid_boxes().size());
  for (int b = 0; b < boxes; ++b) {
    const int base = b * 8;
    for (const auto& q : kQuads) {
      topo->faces.push_back({base + q[0], base + q[1], base + q[2]});
      topo->faces.push_back({base + q[0], base + q[2], base + q[3]});
    }
  }
  return topo;
}

inline PersonGT make_humanoid(const HumanoidSpec& spec) {
  PersonGT p;
  p.person_id = spec.person_id;
  p.gender = spec.gender;
  p.race = spec.race;
  p.hair_color = spec.hair_color;
  p.cloth_skin_mask_present = spec.cloth_skin_mask_present;
  const double s = spec.height / detail::kModelHeight;
  auto to_camera = [&](double x, double y, double z) -> Vec3f {
    return {static_cast<float>(spec.x + s * x), static_cast<float>(kFloorY - s * y),
            static_cast<float>(spec.z + s * z)};
  };
  for (const auto& b : detail::humanoid_boxes()) {
    for (int k = 0; k < 8; ++k) {
      p.vertices.push_back(to_camera((k & 1) ? b.x1 : b.x0, (k & 2) ? b.y1 : b.y0,
                                     (k & 4) ? b.z1 : b.z0));
      p.part_labels.push_back(b.label);
    }
  }
  // SMPL-X joint layout; joints not modeled here sit at the pelvis.
  p.joints3d.assign(kJointCount, to_camera(0.0, 0.92, 0.0));
  auto set = [&](int idx, double x, double y, double z) { p.joints3d[idx] = to_camera(x, y, z); };
  set(1, 0.10, 0.90, 0.0);    // left hip
  set(2, -0.10, 0.90, 0.0);   // right hip
  set(4, 0.10, 0.49, 0.0);    // left knee
  set(5, -0.10, 0.49, 0.0);   // right knee
  set(7, 0.10, 0.08, 0.0);    // left ankle
  set(8, -0.10, 0.08, 0.0);   // right ankle
  set(12, 0.0, 1.50, 0.0);    // neck
  set(15, 0.0, 1.64, 0.0);    // head
  set(16, 0.26, 1.44, 0.0);   // left shoulder
  set(17, -0.26, 1.44, 0.0);  // right shoulder
  set(18, 0.26, 1.16, 0.0);   // left elbow
  set(19, -0.26, 1.16, 0.0);  // right elbow
  set(20, 0.26, 0.86, 0.0);   // left wrist
  set(21, -0.26, 0.86, 0.0);  // right wrist
  set(55, 0.0, 1.62, -0.12);  // nose
  set(56, -0.04, 1.67, -0.12);
  set(57, 0.04, 1.67, -0.12);
  set(58, -0.11, 1.64, -0.02);
  set(59, 0.11, 1.64, -0.02);
  return p;
}

namespace detail {

inline std::array<std::uint8_t, 3> part_color(const PersonGT& p, BodyPart part) {
  const std::uint64_t h = splitmix64(fnv1a64(p.race) + static_cast<std::uint64_t>(p.person_id));
  auto ch = [&](int shift, int lo, int span) {
    return static_cast<std::uint8_t>(lo + static_cast<int>((h >> shift) % static_cast<std::uint64_t>(span)));
  };
  switch (part) {
    case BodyPart::scalp: return {ch(0, 40, 120), ch(8, 30, 80), ch(16, 20, 50)};
    case BodyPart::face:
    case BodyPart::hands: return {ch(24, 150, 90), ch(32, 110, 70), ch(40, 90, 60)};
    case BodyPart::body: return {ch(48, 30, 200), ch(56, 30, 200), ch(4, 30, 200)};
    case BodyPart::feet: return {ch(12, 10, 60), ch(20, 10, 60), ch(28, 10, 60)};
  }
  return {128, 128, 128};
}

}  // namespace detail

/// Renders rgb, metric depth and segmentation for a scene of humanoids and occluders.
inline FrameRecord render_frame(const FrameSpec& spec,
                                std::shared_ptr<const MeshTopology> topology = humanoid_topology()) {
  FrameRecord f;
  f.frame_id = spec.frame_id;
  f.topology = topology;
  f.camera = camera_for(spec.width, spec.height);
  const Resolution res{spec.width, spec.height};
  f.depth = ImageF(spec.width, spec.height, 1, kBackgroundDepth);
  f.seg = ImageU8(spec.width, spec.height, 1, 0);
  f.rgb = ImageU8(spec.width, spec.height, 3);
  const std::uint64_t frame_hash = fnv1a64(spec.frame_id);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const bool check = ((x / 32) + (y / 32)) % 2 == 0;
      f.rgb.at(x, y, 0) = static_cast<std::uint8_t>(60 + (x * 120) / spec.width + (check ? 20 : 0));
      f.rgb.at(x, y, 1) = static_cast<std::uint8_t>(70 + (y * 100) / spec.height);
      f.rgb.at(x, y, 2) = static_cast<std::uint8_t>(90 + (frame_hash % 60) + (check ? 0 : 15));
    }
  }
  for (const auto& hs : spec.persons) f.persons.push_back(make_humanoid(hs));
  std::sort(f.persons.begin(), f.persons.end(),
            [](const PersonGT& a, const PersonGT& b) { return a.person_id < b.person_id; });

  for (std::size_t i = 0; i < f.persons.size(); ++i) {
    const PersonGT& p = f.persons[i];
    const bool cloth = spec.persons.end() != std::find_if(spec.persons.begin(), spec.persons.end(),
                                                          [&](const HumanoidSpec& h) {
                                                            return h.person_id == p.person_id &&
                                                                   h.simulated_cloth;
                                                          });
    const LabelRaster r = rasterize_labels(p.vertices, topology->faces, p.part_labels, f.camera, res);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const auto label = r.labels.at(x, y);
        if (label == kNoLabel || !(r.depth.at(x, y) < f.depth.at(x, y))) continue;
        f.depth.at(x, y) = r.depth.at(x, y);
        const auto part = static_cast<BodyPart>(label);
        f.seg.at(x, y) = (cloth && part == BodyPart::body) ? seg_value_cloth(p.person_id)
                                                           : seg_value_body(p.person_id);
        const auto color = detail::part_color(p, part);
        const double shade = 1.0 - 0.03 * ((x + y) % 5);
        for (int c = 0; c < 3; ++c) {
          f.rgb.at(x, y, c) = static_cast<std::uint8_t>(std::lround(color[c] * shade));
        }
      }
    }
  }
  for (const auto& o : spec.occluders) {
    for (int y = std::max(0, o.y0); y < std::min(spec.height, o.y1); ++y) {
      for (int x = std::max(0, o.x0); x < std::min(spec.width, o.x1); ++x) {
        if (!(o.depth < f.depth.at(x, y))) continue;
        f.depth.at(x, y) = o.depth;
        f.seg.at(x, y) = 0;
        f.rgb.at(x, y, 0) = 90;
        f.rgb.at(x, y, 1) = 80;
        f.rgb.at(x, y, 2) = 70;
      }
    }
  }
  check_frame(f);
  return f;
}

/// Hides exactly `count` visible pixels of `mask` (raster order) behind an environment surface
/// 1 m in front of the camera.
inline void occlude_pixels(FrameRecord& f, const Mask& mask, long count) {
  for (int y = 0; y < mask.height() && count > 0; ++y) {
    for (int x = 0; x < mask.width() && count > 0; ++x) {
      if (!mask.at(x, y)) continue;
      f.depth.at(x, y) = 1.0f;
      f.seg.at(x, y) = 0;
      for (int c = 0; c < 3; ++c) f.rgb.at(x, y, c) = 100;
      --count;
    }
  }
}

/// The standard multi-frame scene set. Every frame has at least one fully processed person.
/// Frame i%5==0 adds an occluded person (skipped), i%5==2 a distant one (head and hair dropped);
/// in i%5==3 the clothing comes from the skin texture.
inline std::vector<FrameSpec> standard_scenes(int frames) {
  static const std::vector<std::string> races = {"caucasian", "black", "asian", "hispanic",
                                                 "middle eastern", "south asian"};
  std::vector<FrameSpec> out;
  for (int i = 0; i < frames; ++i) {
    FrameSpec s;
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04d", i);
    s.frame_id = name;
    HumanoidSpec main;
    main.person_id = 1;
    main.x = -0.6 + 0.3 * (i % 5);
    main.z = 3.6 + 0.2 * (i % 3);
    main.height = 1.65 + 0.05 * (i % 4);
    main.gender = (i % 2 == 0) ? Gender::female : Gender::male;
    main.race = races[static_cast<std::size_t>(i) % races.size()];
    if (i % 3 == 1) main.hair_color = "redhead";
    main.cloth_skin_mask_present = (i % 5 == 3);
    main.simulated_cloth = !main.cloth_skin_mask_present;
    s.persons.push_back(main);
    switch (i % 5) {
      case 0: {  // second person mostly hidden behind a pillar
        HumanoidSpec back;
        back.person_id = 4;
        back.x = 1.4;
        back.z = 6.0;
        back.gender = Gender::male;
        back.race = "asian";
        s.persons.push_back(back);
        s.occluders.push_back({440, 0, 520, 480, 2.0f});
        break;
      }
      case 2: {  // distant person: face under 100 pixels
        HumanoidSpec far;
        far.person_id = 7;
        far.x = 2.0;
        far.z = 14.0;
        far.race = "black";
        s.persons.push_back(far);
        break;
      }
      default:
        break;
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_dataset(const std::filesystem::path& root, const std::vector<FrameSpec>& scenes) {
  std::filesystem::create_directories(root);
  const auto topo = humanoid_topology();
  write_topology(root, *topo);
  for (const auto& s : scenes) write_frame_inputs(root, render_frame(s, topo));
}

}  // namespace genb::fixture
