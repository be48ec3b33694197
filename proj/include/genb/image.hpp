#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "genb/error.hpp"

namespace genb {

/// Interleaved row-major raster (HWC).
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<std::size_t>(width) * height * channels, fill) {
    if (width < 0 || height < 0 || channels <= 0) {
      throw Error(Errc::ShapeMismatch, "invalid image shape");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const noexcept { return data_.empty(); }

  bool in_bounds(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  const T& at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const Image<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height() &&
           channels_ == other.channels();
  }

  template <typename U>
  bool same_resolution(const Image<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

using ImageU8 = Image<std::uint8_t>;
using ImageF = Image<float>;
/// Binary mask, one channel, values 0 or 1.
using Mask = Image<std::uint8_t>;

inline std::size_t count_nonzero(const Mask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.data().begin(), mask.data().end(), [](auto v) { return v != 0; }));
}

inline bool any(const Mask& mask) {
  return std::any_of(mask.data().begin(), mask.data().end(), [](auto v) { return v != 0; });
}

inline Mask mask_union(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw Error(Errc::ShapeMismatch, "mask_union: shape mismatch");
  Mask out(a.width(), a.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.storage()[i] = (a.storage()[i] | b.storage()[i]) ? 1 : 0;
  }
  return out;
}

/// Square (Chebyshev) dilation by `radius` pixels.
inline Mask dilate(const Mask& mask, int radius) {
  if (radius <= 0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  // Separable max filter: rows, then columns.
  Mask rows(w, h);
  for (int y = 0; y < h; ++y) {
    int last = -1'000'000;
    for (int x = 0; x < w + radius; ++x) {
      if (x < w && mask.at(x, y)) last = x;
      const int target = x - radius;
      if (target >= 0 && target < w && x - last <= 2 * radius) rows.at(target, y) = 1;
    }
  }
  Mask out(w, h);
  for (int x = 0; x < w; ++x) {
    int last = -1'000'000;
    for (int y = 0; y < h + radius; ++y) {
      if (y < h && rows.at(x, y)) last = y;
      const int target = y - radius;
      if (target >= 0 && target < h && y - last <= 2 * radius) out.at(x, target) = 1;
    }
  }
  return out;
}

struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;  // inclusive
  int y1 = -1;

  bool empty() const noexcept { return x1 < x0 || y1 < y0; }
  int width() const noexcept { return empty() ? 0 : x1 - x0 + 1; }
  int height() const noexcept { return empty() ? 0 : y1 - y0 + 1; }
};

inline BoundingBox bounding_box(const Mask& mask) {
  BoundingBox box{mask.width(), mask.height(), -1, -1};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      box.x0 = std::min(box.x0, x);
      box.y0 = std::min(box.y0, y);
      box.x1 = std::max(box.x1, x);
      box.y1 = std::max(box.y1, y);
    }
  }
  if (box.x1 < 0) return BoundingBox{};
  return box;
}

/// Bilinear sample with edge clamping; (x, y) in pixel-center coordinates.
template <typename T>
double sample_bilinear(const Image<T>& img, double x, double y, int c) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
  const double bottom = (1.0 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
  return (1.0 - fy) * top + fy * bottom;
}

/// Bilinear resize with pixel-center alignment. Same-size input is returned unchanged.
inline ImageU8 resize_bilinear(const ImageU8& src, int width, int height) {
  if (src.width() == width && src.height() == height) return src;
  ImageU8 out(width, height, src.channels());
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < src.channels(); ++c) {
        const double v = sample_bilinear(src, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5, c);
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace genb
