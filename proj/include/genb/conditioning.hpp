#pragma once

// Control images derived from ground truth: normalized depth, surface normals, Canny edges on
// depth, and an OpenPose-style skeleton rendering, all in a square model-resolution crop.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "genb/bodygeom.hpp"
#include "genb/dataio.hpp"
#include "genb/error.hpp"
#include "genb/image.hpp"

namespace genb {

inline constexpr int kModelResolution = 512;

/// Square window [x0, x0+side) x [y0, y0+side) of the frame, resampled to out_size.
struct CropSpec {
  int x0 = 0;
  int y0 = 0;
  int side = kModelResolution;
  int out_size = kModelResolution;

  double scale() const noexcept { return static_cast<double>(out_size) / side; }
  double frame_to_crop_x(double u) const noexcept { return (u - x0 + 0.5) * scale() - 0.5; }
  double frame_to_crop_y(double v) const noexcept { return (v - y0 + 0.5) * scale() - 0.5; }
  double crop_to_frame_x(double i) const noexcept { return (i + 0.5) / scale() - 0.5 + x0; }
  double crop_to_frame_y(double j) const noexcept { return (j + 0.5) / scale() - 0.5 + y0; }

  bool operator==(const CropSpec&) const = default;
};

/// Window centered on the mask centroid with side max(min_side, 1.2 * longest bbox edge).
/// If the centroid-centered window would cut the bbox it is shifted just enough to contain it,
/// then clamped inside the frame. Frames smaller than the side shrink the side to fit.
inline CropSpec compute_crop(const Mask& target, int frame_width, int frame_height,
                             int min_side = kModelResolution, int out_size = kModelResolution,
                             double margin_factor = 1.2) {
  const BoundingBox box = bounding_box(target);
  if (box.empty()) throw Error(Errc::EmptyMask, "compute_crop: target mask is empty");
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (int y = box.y0; y <= box.y1; ++y) {
    for (int x = box.x0; x <= box.x1; ++x) {
      if (!target.at(x, y)) continue;
      sx += x;
      sy += y;
      ++n;
    }
  }
  const double cx = sx / static_cast<double>(n);
  const double cy = sy / static_cast<double>(n);

  CropSpec crop;
  crop.out_size = out_size;
  crop.side = std::max<int>(
      min_side, static_cast<int>(std::lround(margin_factor * std::max(box.width(), box.height()))));
  crop.side = std::min({crop.side, frame_width, frame_height});

  auto place = [&](double center, int lo, int hi, int extent) {
    int start = static_cast<int>(std::lround(center - crop.side / 2.0));
    // Contain [lo, hi] when the side allows it.
    if (hi - lo + 1 <= crop.side) start = std::clamp(start, hi + 1 - crop.side, lo);
    return std::clamp(start, 0, extent - crop.side);
  };
  crop.x0 = place(cx, box.x0, box.x1, frame_width);
  crop.y0 = place(cy, box.y0, box.y1, frame_height);
  return crop;
}

/// Intrinsics of the resampled crop.
inline CameraModel crop_camera(const CameraModel& cam, const CropSpec& crop) {
  const double s = crop.scale();
  return {cam.fx * s, cam.fy * s, crop.frame_to_crop_x(cam.cx), crop.frame_to_crop_y(cam.cy)};
}

inline ImageU8 extract_crop(const ImageU8& frame, const CropSpec& crop) {
  ImageU8 out(crop.out_size, crop.out_size, frame.channels());
  if (crop.side == crop.out_size) {
    for (int j = 0; j < crop.out_size; ++j) {
      for (int i = 0; i < crop.out_size; ++i) {
        for (int c = 0; c < frame.channels(); ++c) {
          out.at(i, j, c) = frame.at(crop.x0 + i, crop.y0 + j, c);
        }
      }
    }
    return out;
  }
  for (int j = 0; j < crop.out_size; ++j) {
    for (int i = 0; i < crop.out_size; ++i) {
      for (int c = 0; c < frame.channels(); ++c) {
        const double v =
            sample_bilinear(frame, crop.crop_to_frame_x(i), crop.crop_to_frame_y(j), c);
        out.at(i, j, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

/// Nearest-neighbour crop of a float raster (keeps invalid depth values unmixed).
inline ImageF extract_crop_nearest(const ImageF& frame, const CropSpec& crop) {
  ImageF out(crop.out_size, crop.out_size, frame.channels());
  for (int j = 0; j < crop.out_size; ++j) {
    const int fy = crop.y0 + std::min(crop.side - 1, static_cast<int>((j + 0.5) / crop.scale()));
    for (int i = 0; i < crop.out_size; ++i) {
      const int fx = crop.x0 + std::min(crop.side - 1, static_cast<int>((i + 0.5) / crop.scale()));
      for (int c = 0; c < frame.channels(); ++c) out.at(i, j, c) = frame.at(fx, fy, c);
    }
  }
  return out;
}

/// A crop pixel is set if any frame pixel it covers is set.
inline Mask crop_mask_any(const Mask& frame_mask, const CropSpec& crop) {
  Mask out(crop.out_size, crop.out_size);
  const long side = crop.side, n = crop.out_size;
  auto range = [&](long i) {
    const long lo = i * side / n;
    const long hi = std::max(lo + 1, ((i + 1) * side + n - 1) / n);
    return std::pair{lo, hi};
  };
  for (long j = 0; j < n; ++j) {
    const auto [ylo, yhi] = range(j);
    for (long i = 0; i < n; ++i) {
      const auto [xlo, xhi] = range(i);
      bool hit = false;
      for (long y = ylo; y < yhi && !hit; ++y) {
        for (long x = xlo; x < xhi && !hit; ++x) {
          hit = frame_mask.at(static_cast<int>(crop.x0 + x), static_cast<int>(crop.y0 + y)) != 0;
        }
      }
      out.at(static_cast<int>(i), static_cast<int>(j)) = hit;
    }
  }
  return out;
}

/// Frame-space mask of a crop-space mask (nearest crop pixel per frame pixel).
inline Mask crop_mask_to_frame(const Mask& crop_mask, const CropSpec& crop, int frame_width,
                               int frame_height) {
  Mask out(frame_width, frame_height);
  for (int y = crop.y0; y < crop.y0 + crop.side; ++y) {
    const int j = std::clamp(static_cast<int>((y - crop.y0 + 0.5) * crop.scale()), 0,
                             crop.out_size - 1);
    for (int x = crop.x0; x < crop.x0 + crop.side; ++x) {
      const int i = std::clamp(static_cast<int>((x - crop.x0 + 0.5) * crop.scale()), 0,
                               crop.out_size - 1);
      out.at(x, y) = crop_mask.at(i, j);
    }
  }
  return out;
}

/// Pastes a crop back into the frame where `frame_mask` is set.
inline void paste_crop(ImageU8& frame, const ImageU8& crop_img, const CropSpec& crop,
                       const Mask& frame_mask) {
  for (int y = crop.y0; y < crop.y0 + crop.side; ++y) {
    for (int x = crop.x0; x < crop.x0 + crop.side; ++x) {
      if (!frame_mask.at(x, y)) continue;
      for (int c = 0; c < frame.channels(); ++c) {
        if (crop.side == crop.out_size) {
          frame.at(x, y, c) = crop_img.at(x - crop.x0, y - crop.y0, c);
        } else {
          const double v =
              sample_bilinear(crop_img, crop.frame_to_crop_x(x), crop.frame_to_crop_y(y), c);
          frame.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
      }
    }
  }
}

inline Mask valid_depth_mask(const ImageF& depth) {
  Mask out(depth.width(), depth.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float d = depth.storage()[i];
    out.storage()[i] = std::isfinite(d) && d > 0.0f;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Depth

/// (d - min) / (max - min) over valid pixels; invalid pixels are 0. A constant depth maps to
/// 0.5, an empty valid set to all zeros.
inline ImageF normalize_depth(const ImageF& depth, const Mask& valid) {
  if (!depth.same_resolution(valid)) throw Error(Errc::ShapeMismatch, "normalize_depth");
  ImageF out(depth.width(), depth.height(), 1, 0.0f);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (!valid.storage()[i]) continue;
    lo = std::min(lo, static_cast<double>(depth.storage()[i]));
    hi = std::max(hi, static_cast<double>(depth.storage()[i]));
  }
  if (!(hi >= lo)) return out;
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (!valid.storage()[i]) continue;
    const double v = hi > lo ? (depth.storage()[i] - lo) / (hi - lo) : 0.5;
    out.storage()[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normals

/// Maps a camera-space unit normal (x right, y down, z forward) to 8-bit RGB with the
/// viewer-facing normal (0, 0, -1) at (128, 128, 255).
inline std::array<std::uint8_t, 3> encode_normal(double nx, double ny, double nz) {
  const std::array<double, 3> e{nx, -ny, -nz};
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) {
    out[c] = static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * (e[c] + 1.0) / 2.0), 0L, 255L));
  }
  return out;
}

inline std::array<double, 3> decode_normal(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double ex = r / 255.0 * 2.0 - 1.0;
  const double ey = g / 255.0 * 2.0 - 1.0;
  const double ez = b / 255.0 * 2.0 - 1.0;
  return {ex, -ey, -ez};
}

/// Normals of the backprojected surface P(u,v) = d * K^-1 (u, v, 1) from central differences
/// (one-sided next to invalid pixels), oriented toward the camera. Pixels where either
/// tangent is undefined encode the zero vector (128, 128, 128).
inline ImageU8 normals_from_depth(const ImageF& depth, const CameraModel& cam, const Mask& valid) {
  const int w = depth.width(), h = depth.height();
  ImageU8 out(w, h, 3, 128);
  using P3 = std::array<double, 3>;
  auto point = [&](int x, int y) -> P3 { return backproject(x, y, depth.at(x, y), cam); };
  auto ok = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && valid.at(x, y); };
  auto tangent = [&](int x, int y, int dx, int dy, P3& t) {
    const bool fwd = ok(x + dx, y + dy), back = ok(x - dx, y - dy);
    if (!fwd && !back) return false;
    const P3 a = fwd ? point(x + dx, y + dy) : point(x, y);
    const P3 b = back ? point(x - dx, y - dy) : point(x, y);
    const double scale = (fwd && back) ? 0.5 : 1.0;
    for (int c = 0; c < 3; ++c) t[c] = (a[c] - b[c]) * scale;
    return true;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!valid.at(x, y)) continue;
      P3 tu{}, tv{};
      if (!tangent(x, y, 1, 0, tu) || !tangent(x, y, 0, 1, tv)) continue;
      P3 n{tu[1] * tv[2] - tu[2] * tv[1], tu[2] * tv[0] - tu[0] * tv[2],
           tu[0] * tv[1] - tu[1] * tv[0]};
      const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
      if (!(len > 1e-12)) continue;
      for (auto& c : n) c /= len;
      if (n[2] > 0.0) {
        for (auto& c : n) c = -c;
      }
      const auto enc = encode_normal(n[0], n[1], n[2]);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = enc[c];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canny

struct CannyParams {
  double sigma = 1.4;
  int kernel_size = 5;
  double low = 0.04;
  double high = 0.10;

  bool operator==(const CannyParams&) const = default;
};

inline std::vector<double> gaussian_kernel(double sigma, int size) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const int half = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double x = i - half;
    k[static_cast<std::size_t>(i)] = std::exp(-(x * x) / (2.0 * sigma * sigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (auto& v : k) v /= sum;
  return k;
}

/// Canny on a one-channel raster: separable Gaussian blur, Sobel (scaled by 1/8, so the
/// magnitude approximates the per-pixel slope), non-maximum suppression over four quantized
/// directions and 8-connected hysteresis. Borders replicate. Output is a 0/1 mask.
inline Mask canny_on_depth(const ImageF& image, const CannyParams& params = {}) {
  if (!(params.low > 0.0 && params.low < params.high)) {
    throw Error(Errc::InvalidConfig, "canny thresholds must satisfy 0 < low < high");
  }
  if (params.kernel_size < 1 || params.kernel_size % 2 == 0) {
    throw Error(Errc::InvalidConfig, "canny kernel size must be odd");
  }
  const int w = image.width(), h = image.height();
  const auto kernel = gaussian_kernel(params.sigma, params.kernel_size);
  const int half = params.kernel_size / 2;
  auto cx = [w](int x) { return std::clamp(x, 0, w - 1); };
  auto cy = [h](int y) { return std::clamp(y, 0, h - 1); };

  std::vector<double> tmp(static_cast<std::size_t>(w) * h), blur(tmp.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < params.kernel_size; ++k) acc += kernel[k] * image.at(cx(x + k - half), y);
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < params.kernel_size; ++k) {
        acc += kernel[k] * tmp[static_cast<std::size_t>(cy(y + k - half)) * w + x];
      }
      blur[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  auto b = [&](int x, int y) { return blur[static_cast<std::size_t>(cy(y)) * w + cx(x)]; };

  std::vector<double> gx(blur.size()), gy(blur.size()), mag(blur.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = (b(x + 1, y - 1) + 2.0 * b(x + 1, y) + b(x + 1, y + 1)) -
                        (b(x - 1, y - 1) + 2.0 * b(x - 1, y) + b(x - 1, y + 1));
      const double dy = (b(x - 1, y + 1) + 2.0 * b(x, y + 1) + b(x + 1, y + 1)) -
                        (b(x - 1, y - 1) + 2.0 * b(x, y - 1) + b(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gx[i] = dx / 8.0;
      gy[i] = dy / 8.0;
      mag[i] = std::hypot(gx[i], gy[i]);
    }
  }
  auto m = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
    return mag[static_cast<std::size_t>(y) * w + x];
  };

  // 0 = suppressed, 1 = weak candidate, 2 = strong.
  std::vector<std::uint8_t> state(blur.size(), 0);
  const double tan22 = std::tan(std::numbers::pi / 8.0);
  const double tan67 = std::tan(3.0 * std::numbers::pi / 8.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double v = mag[i];
      if (!(v > params.low)) continue;
      const double ax = std::abs(gx[i]), ay = std::abs(gy[i]);
      bool keep = false;
      if (ay <= ax * tan22) {
        keep = v > m(x - 1, y) && v >= m(x + 1, y);
      } else if (ay >= ax * tan67) {
        keep = v > m(x, y - 1) && v >= m(x, y + 1);
      } else if (gx[i] * gy[i] > 0.0) {
        keep = v > m(x - 1, y - 1) && v > m(x + 1, y + 1);
      } else {
        keep = v > m(x + 1, y - 1) && v > m(x - 1, y + 1);
      }
      if (keep) state[i] = v > params.high ? 2 : 1;
    }
  }

  Mask out(w, h);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i] == 2) stack.push_back(i);
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    if (out.storage()[i]) continue;
    out.storage()[i] = 1;
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (state[j] != 0 && !out.storage()[j]) stack.push_back(j);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pose rendering (OpenPose body-18 convention)

namespace openpose {

inline constexpr int kJointCount = 18;

// OpenPose order: nose, neck, r_shoulder, r_elbow, r_wrist, l_shoulder, l_elbow, l_wrist,
// r_hip, r_knee, r_ankle, l_hip, l_knee, l_ankle, r_eye, l_eye, r_ear, l_ear.
// Source indices into the 127-joint SMPL-X layout.
inline constexpr std::array<int, kJointCount> kFromSmplx = {55, 12, 17, 19, 21, 16, 18, 20, 2,
                                                            5,  8,  1,  4,  7,  56, 57, 58, 59};

inline constexpr std::array<int, 5> kFaceJoints = {0, 14, 15, 16, 17};

inline constexpr bool is_face_joint(int j) {
  return j == 0 || j == 14 || j == 15 || j == 16 || j == 17;
}

inline constexpr std::array<std::array<int, 2>, 17> kLimbs = {{{1, 2},
                                                               {1, 5},
                                                               {2, 3},
                                                               {3, 4},
                                                               {5, 6},
                                                               {6, 7},
                                                               {1, 8},
                                                               {8, 9},
                                                               {9, 10},
                                                               {1, 11},
                                                               {11, 12},
                                                               {12, 13},
                                                               {1, 0},
                                                               {0, 14},
                                                               {14, 16},
                                                               {0, 15},
                                                               {15, 17}}};

using Rgb = std::array<std::uint8_t, 3>;
inline constexpr std::array<Rgb, kJointCount> kColors = {{{255, 0, 0},
                                                          {255, 85, 0},
                                                          {255, 170, 0},
                                                          {255, 255, 0},
                                                          {170, 255, 0},
                                                          {85, 255, 0},
                                                          {0, 255, 0},
                                                          {0, 255, 85},
                                                          {0, 255, 170},
                                                          {0, 255, 255},
                                                          {0, 170, 255},
                                                          {0, 85, 255},
                                                          {0, 0, 255},
                                                          {85, 0, 255},
                                                          {170, 0, 255},
                                                          {255, 0, 255},
                                                          {255, 0, 170},
                                                          {255, 0, 85}}};

inline constexpr double kStickWidth = 4.0;
inline constexpr double kJointRadius = 4.0;
inline constexpr long kMinFacePixels = 100;

}  // namespace openpose

/// Picks the OpenPose body-18 subset out of SMPL-X joints. Missing joints are invalid.
inline Joints2D smplx_to_openpose(const Joints2D& smplx) {
  Joints2D out;
  out.points.resize(openpose::kJointCount, {0.0, 0.0});
  out.valid.resize(openpose::kJointCount, 0);
  for (int j = 0; j < openpose::kJointCount; ++j) {
    const auto src = static_cast<std::size_t>(openpose::kFromSmplx[j]);
    if (src < smplx.points.size()) {
      out.points[j] = smplx.points[src];
      out.valid[j] = smplx.valid[src];
    }
  }
  return out;
}

namespace detail {

inline void fill_ellipse(ImageU8& canvas, double x1, double y1, double x2, double y2,
                         double half_width, const openpose::Rgb& color) {
  const double mx = (x1 + x2) / 2.0, my = (y1 + y2) / 2.0;
  const double len = std::hypot(x2 - x1, y2 - y1);
  if (!(len > 1e-9)) return;
  const double a = len / 2.0, bw = half_width;
  const double ux = (x2 - x1) / len, uy = (y2 - y1) / len;
  const double reach = std::max(a, bw);
  const int x_lo = std::max(0, static_cast<int>(std::floor(mx - reach)));
  const int x_hi = std::min(canvas.width() - 1, static_cast<int>(std::ceil(mx + reach)));
  const int y_lo = std::max(0, static_cast<int>(std::floor(my - reach)));
  const int y_hi = std::min(canvas.height() - 1, static_cast<int>(std::ceil(my + reach)));
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      const double dx = x - mx, dy = y - my;
      const double along = dx * ux + dy * uy;
      const double across = -dx * uy + dy * ux;
      if ((along * along) / (a * a) + (across * across) / (bw * bw) > 1.0) continue;
      for (int c = 0; c < 3; ++c) canvas.at(x, y, c) = color[c];
    }
  }
}

inline void fill_disc(ImageU8& canvas, double px, double py, double r, const openpose::Rgb& color) {
  const int x_lo = std::max(0, static_cast<int>(std::floor(px - r)));
  const int x_hi = std::min(canvas.width() - 1, static_cast<int>(std::ceil(px + r)));
  const int y_lo = std::max(0, static_cast<int>(std::floor(py - r)));
  const int y_hi = std::min(canvas.height() - 1, static_cast<int>(std::ceil(py + r)));
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      if ((x - px) * (x - px) + (y - py) * (y - py) > r * r) continue;
      for (int c = 0; c < 3; ++c) canvas.at(x, y, c) = color[c];
    }
  }
}

}  // namespace detail

/// Renders OpenPose body-18 joints (already in canvas coordinates): limbs as ellipses at 60%
/// color, then joint discs. With fewer than 100 visible face pixels the face joints and
/// every limb touching them are dropped.
inline ImageU8 render_pose_image(const Joints2D& joints, long face_pixel_count, int size) {
  ImageU8 canvas(size, size, 3, 0);
  if (joints.points.size() != openpose::kJointCount) {
    throw Error(Errc::ShapeMismatch, "render_pose_image expects 18 OpenPose joints");
  }
  std::array<bool, openpose::kJointCount> use{};
  for (int j = 0; j < openpose::kJointCount; ++j) use[j] = joints.valid[j] != 0;
  if (face_pixel_count < openpose::kMinFacePixels) {
    for (int j : openpose::kFaceJoints) use[j] = false;
  }
  for (std::size_t l = 0; l < openpose::kLimbs.size(); ++l) {
    const auto [a, b] = openpose::kLimbs[l];
    if (!use[a] || !use[b]) continue;
    openpose::Rgb color{};
    for (int c = 0; c < 3; ++c) {
      color[c] = static_cast<std::uint8_t>(openpose::kColors[l][c] * 0.6);
    }
    detail::fill_ellipse(canvas, joints.points[a][0], joints.points[a][1], joints.points[b][0],
                         joints.points[b][1], openpose::kStickWidth, color);
  }
  for (int j = 0; j < openpose::kJointCount; ++j) {
    if (!use[j]) continue;
    detail::fill_disc(canvas, joints.points[j][0], joints.points[j][1], openpose::kJointRadius,
                      openpose::kColors[j]);
  }
  return canvas;
}

// ---------------------------------------------------------------------------

struct ConditioningSet {
  CropSpec crop;
  ImageF depth_norm;  // [0, 1]
  ImageU8 normals;    // RGB
  Mask edges;         // 0/1
  ImageU8 pose;       // RGB
};

/// Builds all four control images for one crop. `joints` are SMPL-X joints in frame pixels.
inline ConditioningSet build_conditioning(const ImageF& frame_depth, const CameraModel& cam,
                                          const CropSpec& crop, const Joints2D& joints,
                                          long face_pixel_count, const CannyParams& canny = {}) {
  ConditioningSet set;
  set.crop = crop;
  const ImageF depth = extract_crop_nearest(frame_depth, crop);
  const Mask valid = valid_depth_mask(depth);
  set.depth_norm = normalize_depth(depth, valid);
  set.normals = normals_from_depth(depth, crop_camera(cam, crop), valid);
  set.edges = canny_on_depth(set.depth_norm, canny);

  Joints2D op = smplx_to_openpose(joints);
  for (auto& p : op.points) p = {crop.frame_to_crop_x(p[0]), crop.frame_to_crop_y(p[1])};
  set.pose = render_pose_image(op, face_pixel_count, crop.out_size);
  return set;
}

}  // namespace genb
