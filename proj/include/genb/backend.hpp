#pragma once

// The denoiser backend contract. The orchestrator owns the compositing math; a backend only
// encodes, decodes, embeds prompts, performs single reverse steps and extracts features.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genb/error.hpp"
#include "genb/image.hpp"

namespace genb {

struct LatentTensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;  // CHW

  LatentTensor() = default;
  LatentTensor(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t size() const noexcept { return data.size(); }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(height) * width; }
  bool same_shape(const LatentTensor& o) const noexcept {
    return channels == o.channels && height == o.height && width == o.width;
  }
  float& at(int c, int y, int x) { return data[c * plane() + static_cast<std::size_t>(y) * width + x]; }
  float at(int c, int y, int x) const {
    return data[c * plane() + static_cast<std::size_t>(y) * width + x];
  }
  bool operator==(const LatentTensor&) const = default;
};

/// Spatial (h x w) binary mask over latent cells.
struct LatentMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> cells;

  std::uint8_t at(int y, int x) const { return cells[static_cast<std::size_t>(y) * width + x]; }
  bool operator==(const LatentMask&) const = default;
};

/// Sampling schedule reported by the backend. timesteps descend; alpha_bars[i] = abar(timesteps[i]).
struct NoiseSchedule {
  std::string id;
  std::vector<int> timesteps;
  std::vector<double> alpha_bars;

  int num_steps() const noexcept { return static_cast<int>(timesteps.size()); }
  /// abar of the timestep reached after step i; the clean signal (1.0) after the last step.
  double alpha_bar_after(int i) const {
    return i + 1 < num_steps() ? alpha_bars[static_cast<std::size_t>(i + 1)] : 1.0;
  }
};

inline void validate(const NoiseSchedule& s) {
  if (s.timesteps.empty() || s.timesteps.size() != s.alpha_bars.size()) {
    throw Error(Errc::BackendError, "schedule: timesteps/alpha_bars length mismatch");
  }
  for (std::size_t i = 0; i < s.timesteps.size(); ++i) {
    if (!(s.alpha_bars[i] > 0.0 && s.alpha_bars[i] <= 1.0)) {
      throw Error(Errc::BackendError, "schedule: alpha_bar outside (0,1]");
    }
    if (i > 0 && (s.timesteps[i] >= s.timesteps[i - 1] || s.alpha_bars[i] < s.alpha_bars[i - 1])) {
      throw Error(Errc::BackendError, "schedule: timesteps must descend with non-decreasing abar");
    }
  }
}

enum class ControlType { depth, normals, edges, pose };
inline constexpr std::array<ControlType, 4> kAllControls = {ControlType::depth, ControlType::normals,
                                                            ControlType::edges, ControlType::pose};

inline const char* to_string(ControlType t) {
  switch (t) {
    case ControlType::depth: return "depth";
    case ControlType::normals: return "normals";
    case ControlType::edges: return "edges";
    case ControlType::pose: return "pose";
  }
  return "depth";
}

inline ControlType parse_control(const std::string& s) {
  if (s == "depth") return ControlType::depth;
  if (s == "normals") return ControlType::normals;
  if (s == "edges") return ControlType::edges;
  if (s == "pose") return ControlType::pose;
  throw Error(Errc::UnsupportedControl, "unknown control type '" + s + "'");
}

/// Control image as HWC float in [0, 1].
struct ControlInput {
  ControlType type = ControlType::depth;
  std::shared_ptr<const ImageF> image;
  double weight = 1.0;
};

struct DenoiseRequest {
  LatentTensor latent;
  int step_index = 0;  // position in the negotiated schedule
  std::string schedule_id;
  std::string prompt_embed;
  std::string negative_embed;
  std::vector<ControlInput> controls;
  double guidance_scale = 7.5;
  std::uint64_t seed = 0;
};

struct BackendInfo {
  std::string name;
  std::string version;
  int latent_channels = 4;
  int spatial_factor = 8;
  std::string schedule;
  std::vector<ControlType> controls;

  bool supports(ControlType t) const {
    for (auto c : controls) {
      if (c == t) return true;
    }
    return false;
  }
};

struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;  // row-major

  std::span<const float> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

inline constexpr std::size_t kFeatureDim = 2048;

class Backend {
 public:
  virtual ~Backend() = default;

  virtual BackendInfo info() = 0;
  virtual NoiseSchedule schedule(int num_steps) = 0;
  virtual LatentTensor encode(const ImageU8& rgb) = 0;
  virtual ImageU8 decode(const LatentTensor& latent) = 0;
  /// Returns an opaque handle for the embedded (prompt, negative prompt) pair.
  virtual std::string text_embed(const std::string& prompt, const std::string& negative) = 0;
  virtual LatentTensor denoise(const DenoiseRequest& request) = 0;
  virtual FeatureMatrix features(std::span<const ImageU8> images) = 0;
};

/// Converts an 8-bit raster to a float control image in [0, 1].
inline std::shared_ptr<const ImageF> to_control_image(const ImageU8& img) {
  auto out = std::make_shared<ImageF>(img.width(), img.height(), img.channels());
  for (std::size_t i = 0; i < img.size(); ++i) out->storage()[i] = img.storage()[i] / 255.0f;
  return out;
}

inline std::shared_ptr<const ImageF> to_control_image(const ImageF& img) {
  return std::make_shared<ImageF>(img);
}

}  // namespace genb
