#pragma once

// HTTP client for a worker speaking wire protocol v1.

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "genb/backend.hpp"
#include "genb/wire.hpp"

namespace genb {

using json = nlohmann::json;

struct RemoteOptions {
  int pool_size = 4;
  int timeout_seconds = 300;
  int max_retries = 3;
  int backoff_ms = 100;
};

class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(std::string url, RemoteOptions options = {})
      : url_(std::move(url)), options_(options) {
    for (int i = 0; i < std::max(1, options_.pool_size); ++i) {
      auto client = std::make_unique<httplib::Client>(url_);
      if (!client->is_valid()) throw Error(Errc::InvalidConfig, "invalid backend url " + url_);
      client->set_connection_timeout(std::chrono::seconds(10));
      client->set_read_timeout(std::chrono::seconds(options_.timeout_seconds));
      client->set_write_timeout(std::chrono::seconds(options_.timeout_seconds));
      client->set_keep_alive(true);
      idle_.push_back(client.get());
      clients_.push_back(std::move(client));
    }
  }

  const std::string& url() const { return url_; }

  bool healthy() {
    try {
      return request("GET", "/v1/health", {}).value("status", "") == "ok";
    } catch (const Error&) {
      return false;
    }
  }

  BackendInfo info() override {
    std::call_once(info_once_, [this] { info_ = wire::decode_info(request("GET", "/v1/info", {})); });
    return info_;
  }

  NoiseSchedule schedule(int num_steps) override {
    return wire::decode_schedule(request("POST", "/v1/schedule", {{"num_steps", num_steps}}));
  }

  LatentTensor encode(const ImageU8& rgb) override {
    return wire::decode_latent(request("POST", "/v1/encode", {{"image", wire::encode_image(rgb)}}).at("latent"));
  }

  ImageU8 decode(const LatentTensor& latent) override {
    return wire::decode_image(
        request("POST", "/v1/decode", {{"latent", wire::encode_latent(latent)}}).at("image"));
  }

  std::string text_embed(const std::string& prompt, const std::string& negative) override {
    return request("POST", "/v1/text_embed", {{"prompt", prompt}, {"negative", negative}})
        .at("embed_id")
        .get<std::string>();
  }

  LatentTensor denoise(const DenoiseRequest& req) override {
    return wire::decode_latent(request("POST", "/v1/denoise", wire::encode_denoise(req)).at("latent"));
  }

  FeatureMatrix features(std::span<const ImageU8> images) override {
    if (images.empty()) return {0, kFeatureDim, {}};
    const auto& first = images.front();
    std::vector<float> values;
    values.reserve(images.size() * first.size());
    for (const auto& img : images) {
      if (!img.same_shape(first)) throw Error(Errc::ShapeMismatch, "feature batch shapes differ");
      for (auto v : img.data()) values.push_back(v / 255.0f);
    }
    const json body = {{"images", wire::encode_tensor(values, {images.size(),
                                                               static_cast<std::size_t>(first.height()),
                                                               static_cast<std::size_t>(first.width()),
                                                               static_cast<std::size_t>(first.channels())})}};
    wire::Tensor t = wire::decode_tensor(request("POST", "/v1/features", body).at("features"));
    if (t.shape.size() != 2 || t.shape[0] != images.size()) {
      throw Error(Errc::BackendError, "features response has wrong shape");
    }
    return {t.shape[0], t.shape[1], std::move(t.data)};
  }

 private:
  class Lease {
   public:
    explicit Lease(RemoteBackend& owner) : owner_(owner) {
      std::unique_lock lock(owner_.pool_mutex_);
      owner_.pool_cv_.wait(lock, [&] { return !owner_.idle_.empty(); });
      client_ = owner_.idle_.back();
      owner_.idle_.pop_back();
    }
    ~Lease() {
      {
        std::lock_guard lock(owner_.pool_mutex_);
        owner_.idle_.push_back(client_);
      }
      owner_.pool_cv_.notify_one();
    }
    httplib::Client& operator*() { return *client_; }

   private:
    RemoteBackend& owner_;
    httplib::Client* client_ = nullptr;
  };

  // Every v1 endpoint is a pure function of its request, so all of them may be retried.
  wire::json request(const std::string& method, const std::string& path, const wire::json& body) {
    std::string last_error = "no attempt";
    const std::string payload = body.dump();
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(options_.backoff_ms << (attempt - 1)));
      }
      httplib::Result res{nullptr, httplib::Error::Unknown};
      {
        Lease lease(*this);
        res = method == "GET" ? (*lease).Get(path) : (*lease).Post(path, payload, "application/json");
      }
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 503) {
        last_error = "503 overloaded";
        continue;
      }
      wire::json reply;
      try {
        reply = wire::json::parse(res->body);
      } catch (const wire::json::exception&) {
        throw Error(Errc::BackendError, path + ": unparseable response (HTTP " +
                                            std::to_string(res->status) + ")");
      }
      if (res->status != 200) {
        const std::string code = reply.value("code", "BackendError");
        const std::string message = reply.value("message", "");
        throw Error(code == "UnsupportedControl" ? Errc::UnsupportedControl : Errc::BackendError,
                    path + ": HTTP " + std::to_string(res->status) + " " + code + ": " + message);
      }
      return reply;
    }
    throw Error(Errc::BackendError, path + ": giving up after retries: " + last_error);
  }

  std::string url_;
  RemoteOptions options_;
  std::vector<std::unique_ptr<httplib::Client>> clients_;
  std::vector<httplib::Client*> idle_;
  std::mutex pool_mutex_;
  std::condition_variable pool_cv_;
  std::once_flag info_once_;
  BackendInfo info_;
};

}  // namespace genb
