#pragma once

// Noise-level arithmetic shared by the orchestrator and the mock backend.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "genb/backend.hpp"
#include "genb/error.hpp"
#include "genb/rng.hpp"

namespace genb {

/// Number of reverse steps run for a denoising strength and the schedule position of the first.
struct StartPoint {
  int steps = 0;        // k
  int start_index = 0;  // N - k, zero-based into the schedule
};

/// k = round(strength * N), at least one step. Throws InvalidStrength outside (0, 1].
inline StartPoint strength_to_start(double strength, int num_steps) {
  if (!(strength > 0.0 && strength <= 1.0)) {
    throw Error(Errc::InvalidStrength, "strength must lie in (0, 1], got " + std::to_string(strength));
  }
  if (num_steps <= 0) throw Error(Errc::InvalidConfig, "schedule has no steps");
  const int k = std::clamp(static_cast<int>(std::lround(strength * num_steps)), 1, num_steps);
  return {k, num_steps - k};
}

/// sqrt(abar) * x0 + sqrt(1 - abar) * eps.
inline LatentTensor forward_noise(const LatentTensor& x0, double alpha_bar, const LatentTensor& eps) {
  if (!x0.same_shape(eps)) throw Error(Errc::ShapeMismatch, "forward_noise: eps shape differs");
  if (!(alpha_bar >= 0.0 && alpha_bar <= 1.0)) {
    throw Error(Errc::InvalidConfig, "forward_noise: alpha_bar outside [0, 1]");
  }
  LatentTensor out = x0;
  if (alpha_bar == 1.0) return out;
  const auto a = static_cast<float>(std::sqrt(alpha_bar));
  const auto b = static_cast<float>(std::sqrt(1.0 - alpha_bar));
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a * x0.data[i] + b * eps.data[i];
  return out;
}

inline LatentTensor forward_noise(const LatentTensor& x0, const NoiseSchedule& schedule,
                                  int step_index, const LatentTensor& eps) {
  if (step_index < 0 || step_index >= schedule.num_steps()) {
    throw Error(Errc::InvalidConfig, "forward_noise: step index outside schedule");
  }
  return forward_noise(x0, schedule.alpha_bars[static_cast<std::size_t>(step_index)], eps);
}

inline LatentTensor standard_normal_like(const LatentTensor& like, std::uint64_t seed) {
  LatentTensor eps(like.channels, like.height, like.width);
  fill_standard_normal(seed, eps.data);
  return eps;
}

}  // namespace genb
