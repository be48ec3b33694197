#pragma once

// Deterministic in-process backend. The latent codec reshapes 8x8 pixel blocks into channels,
// so decode(encode(x)) == x exactly and latent assertions map to exact pixel assertions.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "genb/backend.hpp"
#include "genb/diffusion.hpp"
#include "genb/digest.hpp"
#include "genb/rng.hpp"

namespace genb {

class MockBackend final : public Backend {
 public:
  enum class Mode {
    target,        // denoise -> forward_noise(target, abar after step, seeded eps)
    constant,      // denoise -> fixed latent
    prompt_color,  // like target, with a flat-color target derived from the prompt handle
  };

  struct Options {
    Mode mode = Mode::prompt_color;
    int resolution = 512;
    LatentTensor target;    // Mode::target
    LatentTensor constant;  // Mode::constant
    std::vector<ControlType> supported_controls{kAllControls.begin(), kAllControls.end()};
    std::string fail_prompt_substring;  // denoise fails for prompts containing this
  };

  static constexpr int kFactor = 8;
  static constexpr int kTrainSteps = 1000;

  MockBackend() : MockBackend(Options{}) {}
  explicit MockBackend(Options options) : options_(std::move(options)) {}

  int latent_channels() const { return kFactor * kFactor * 3; }
  int latent_size() const { return options_.resolution / kFactor; }

  BackendInfo info() override {
    return {"mock", "1", latent_channels(), kFactor,
            "scaled-linear betas 0.00085..0.012, T=1000, leading spacing",
            options_.supported_controls};
  }

  NoiseSchedule schedule(int num_steps) override { return make_schedule(num_steps); }

  static NoiseSchedule make_schedule(int num_steps) {
    if (num_steps <= 0 || num_steps > kTrainSteps) {
      throw Error(Errc::BackendError, "mock schedule: num_steps must be in [1, 1000]");
    }
    std::vector<double> cumulative(kTrainSteps);
    const double b0 = std::sqrt(0.00085), b1 = std::sqrt(0.012);
    double prod = 1.0;
    for (int t = 0; t < kTrainSteps; ++t) {
      const double s = b0 + (b1 - b0) * t / (kTrainSteps - 1);
      prod *= 1.0 - s * s;
      cumulative[static_cast<std::size_t>(t)] = prod;
    }
    NoiseSchedule s;
    s.id = "mock-" + std::to_string(num_steps);
    const int ratio = kTrainSteps / num_steps;
    for (int i = 0; i < num_steps; ++i) {
      const int t = (num_steps - 1 - i) * ratio + 1;
      s.timesteps.push_back(t);
      s.alpha_bars.push_back(cumulative[static_cast<std::size_t>(t)]);
    }
    return s;
  }

  LatentTensor encode(const ImageU8& rgb) override {
    ++encode_calls_;
    const int r = options_.resolution;
    if (rgb.width() != r || rgb.height() != r || rgb.channels() != 3) {
      throw Error(Errc::BackendError, "mock encode expects " + std::to_string(r) + "x" +
                                          std::to_string(r) + " RGB");
    }
    LatentTensor out(latent_channels(), latent_size(), latent_size());
    for (int y = 0; y < r; ++y) {
      for (int x = 0; x < r; ++x) {
        for (int c = 0; c < 3; ++c) {
          out.at(block_channel(x, y, c), y / kFactor, x / kFactor) =
              static_cast<float>(rgb.at(x, y, c) / 127.5 - 1.0);
        }
      }
    }
    return out;
  }

  ImageU8 decode(const LatentTensor& latent) override {
    ++decode_calls_;
    check_latent(latent);
    const int r = options_.resolution;
    ImageU8 out(r, r, 3);
    for (int y = 0; y < r; ++y) {
      for (int x = 0; x < r; ++x) {
        for (int c = 0; c < 3; ++c) {
          const double v = (latent.at(block_channel(x, y, c), y / kFactor, x / kFactor) + 1.0) * 127.5;
          out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
      }
    }
    return out;
  }

  std::string text_embed(const std::string& prompt, const std::string& negative) override {
    const std::uint64_t h = fnv1a64(prompt + '\x1f' + negative);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    std::string handle = std::string("mock-emb-") + buf;
    std::lock_guard lock(mutex_);
    prompts_[handle] = prompt;
    prompt_log_.push_back(prompt);
    return handle;
  }

  LatentTensor denoise(const DenoiseRequest& req) override {
    ++denoise_calls_;
    check_latent(req.latent);
    const NoiseSchedule s = schedule_from_id(req.schedule_id);
    if (req.step_index < 0 || req.step_index >= s.num_steps()) {
      throw Error(Errc::BackendError, "mock denoise: step index outside schedule");
    }
    for (const auto& c : req.controls) {
      if (!info().supports(c.type)) {
        throw Error(Errc::UnsupportedControl, std::string("control ") + to_string(c.type));
      }
      if (!(c.weight >= 0.0)) throw Error(Errc::BackendError, "control weight must be >= 0");
      if (!c.image || c.image->width() != options_.resolution ||
          c.image->height() != options_.resolution) {
        throw Error(Errc::BackendError, "control image must match model resolution");
      }
    }
    std::string prompt;
    {
      std::lock_guard lock(mutex_);
      auto it = prompts_.find(req.prompt_embed);
      if (it == prompts_.end()) throw Error(Errc::BackendError, "unknown embedding handle");
      prompt = it->second;
    }
    if (!options_.fail_prompt_substring.empty() &&
        prompt.find(options_.fail_prompt_substring) != std::string::npos) {
      throw Error(Errc::BackendError, "injected failure for prompt '" + prompt + "'");
    }
    switch (options_.mode) {
      case Mode::constant:
        check_latent(options_.constant);
        return options_.constant;
      case Mode::target:
        check_latent(options_.target);
        return forward_noise(options_.target, s.alpha_bar_after(req.step_index),
                             standard_normal_like(options_.target, req.seed));
      case Mode::prompt_color: {
        const LatentTensor target = color_target(req.prompt_embed);
        return forward_noise(target, s.alpha_bar_after(req.step_index),
                             standard_normal_like(target, req.seed));
      }
    }
    throw Error(Errc::BackendError, "unknown mock mode");
  }

  FeatureMatrix features(std::span<const ImageU8> images) override {
    ++feature_calls_;
    FeatureMatrix out{images.size(), kFeatureDim, std::vector<float>(images.size() * kFeatureDim)};
    for (std::size_t i = 0; i < images.size(); ++i) {
      const auto& img = images[i];
      Sha256 hasher;
      const std::string dims = std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                               "x" + std::to_string(img.channels());
      hasher.update(dims).update(img.data());
      const auto digest = hasher.finish();
      std::uint64_t seed = 0;
      for (int b = 0; b < 8; ++b) seed = (seed << 8) | digest[static_cast<std::size_t>(b)];
      fill_standard_normal(seed, std::span(out.data.data() + i * kFeatureDim, kFeatureDim));
    }
    return out;
  }

  long encode_calls() const { return encode_calls_; }
  long decode_calls() const { return decode_calls_; }
  long denoise_calls() const { return denoise_calls_; }
  long feature_calls() const { return feature_calls_; }
  std::vector<std::string> prompt_log() const {
    std::lock_guard lock(mutex_);
    return prompt_log_;
  }
  void reset_counters() {
    encode_calls_ = decode_calls_ = denoise_calls_ = feature_calls_ = 0;
    std::lock_guard lock(mutex_);
    prompt_log_.clear();
  }

  /// Latent of a flat-color crop whose color is a hash of the embedding handle.
  LatentTensor color_target(const std::string& handle) const {
    const std::uint64_t h = splitmix64(fnv1a64(handle));
    LatentTensor out(latent_channels(), latent_size(), latent_size());
    for (int c = 0; c < out.channels; ++c) {
      const int rgb = c % 3;
      const auto level = static_cast<double>((h >> (rgb * 8)) & 0xFF);
      std::fill_n(out.data.begin() + static_cast<long>(c * out.plane()), out.plane(),
                  static_cast<float>(level / 127.5 - 1.0));
    }
    return out;
  }

 private:
  static int block_channel(int x, int y, int c) {
    return ((y % kFactor) * kFactor + (x % kFactor)) * 3 + c;
  }

  void check_latent(const LatentTensor& t) const {
    if (t.channels != latent_channels() || t.height != latent_size() || t.width != latent_size()) {
      throw Error(Errc::BackendError, "latent shape does not match mock geometry");
    }
  }

  static NoiseSchedule schedule_from_id(const std::string& id) {
    constexpr std::string_view prefix = "mock-";
    if (id.rfind(prefix, 0) != 0) throw Error(Errc::BackendError, "unknown schedule id " + id);
    try {
      return make_schedule(std::stoi(id.substr(prefix.size())));
    } catch (const std::logic_error&) {
      throw Error(Errc::BackendError, "unknown schedule id " + id);
    }
  }

  Options options_;
  std::atomic<long> encode_calls_{0};
  std::atomic<long> decode_calls_{0};
  std::atomic<long> denoise_calls_{0};
  std::atomic<long> feature_calls_{0};
  mutable std::mutex mutex_;
  std::map<std::string, std::string> prompts_;
  std::vector<std::string> prompt_log_;
};

}  // namespace genb
