#pragma once

// Wire protocol v1: HTTP/1.1 + JSON envelopes. Numeric arrays travel as
// {"shape": [...], "dtype": "f32", "data": <base64 of little-endian float32>}.
// Images are HWC tensors scaled to [0, 1]; latents are CHW tensors.

#include <atomic>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <httplib.h>
// _res leaks from <resolv.h>.
#ifdef _res
#undef _res
#endif
#include <nlohmann/json.hpp>

#include "genb/backend.hpp"
#include "genb/digest.hpp"
#include "genb/error.hpp"

namespace genb::wire {

using json = nlohmann::json;

inline constexpr const char* kProtocolVersion = "v1";

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;
};

inline json encode_tensor(std::span<const float> values, const std::vector<std::size_t>& shape) {
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  if (count != values.size()) throw Error(Errc::ShapeMismatch, "tensor shape does not match data");
  return {{"shape", shape},
          {"dtype", "f32"},
          {"data", base64_encode({reinterpret_cast<const std::uint8_t*>(values.data()),
                                  values.size() * sizeof(float)})}};
}

inline Tensor decode_tensor(const json& j) {
  Tensor t;
  std::vector<std::uint8_t> bytes;
  try {
    if (j.at("dtype").get<std::string>() != "f32") {
      throw Error(Errc::ShapeMismatch, "tensor dtype must be f32");
    }
    t.shape = j.at("shape").get<std::vector<std::size_t>>();
    bytes = base64_decode(j.at("data").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(Errc::ShapeMismatch, std::string("malformed tensor: ") + e.what());
  }
  std::size_t count = 1;
  for (auto d : t.shape) count *= d;
  if (count * sizeof(float) != bytes.size()) {
    throw Error(Errc::ShapeMismatch, "tensor payload does not match shape");
  }
  t.data.resize(count);
  std::memcpy(t.data.data(), bytes.data(), bytes.size());
  return t;
}

inline json encode_latent(const LatentTensor& l) {
  return encode_tensor(l.data, {static_cast<std::size_t>(l.channels),
                                static_cast<std::size_t>(l.height),
                                static_cast<std::size_t>(l.width)});
}

inline LatentTensor decode_latent(const json& j) {
  Tensor t = decode_tensor(j);
  if (t.shape.size() != 3) throw Error(Errc::ShapeMismatch, "latent must be [C, H, W]");
  LatentTensor l;
  l.channels = static_cast<int>(t.shape[0]);
  l.height = static_cast<int>(t.shape[1]);
  l.width = static_cast<int>(t.shape[2]);
  l.data = std::move(t.data);
  for (float v : l.data) {
    if (!std::isfinite(v)) throw Error(Errc::ShapeMismatch, "latent has non-finite entries");
  }
  return l;
}

inline json encode_image(const ImageU8& img) {
  std::vector<float> values(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) values[i] = img.storage()[i] / 255.0f;
  return encode_tensor(values, {static_cast<std::size_t>(img.height()),
                                static_cast<std::size_t>(img.width()),
                                static_cast<std::size_t>(img.channels())});
}

inline json encode_image(const ImageF& img) {
  return encode_tensor(img.data(), {static_cast<std::size_t>(img.height()),
                                    static_cast<std::size_t>(img.width()),
                                    static_cast<std::size_t>(img.channels())});
}

inline ImageF decode_image_f(const json& j) {
  Tensor t = decode_tensor(j);
  if (t.shape.size() != 3) throw Error(Errc::ShapeMismatch, "image must be [H, W, C]");
  ImageF img(static_cast<int>(t.shape[1]), static_cast<int>(t.shape[0]),
             static_cast<int>(t.shape[2]));
  img.storage() = std::move(t.data);
  return img;
}

inline ImageU8 to_u8(const ImageF& f) {
  ImageU8 img(f.width(), f.height(), f.channels());
  for (std::size_t i = 0; i < f.size(); ++i) {
    img.storage()[i] =
        static_cast<std::uint8_t>(std::clamp(std::lround(f.storage()[i] * 255.0), 0L, 255L));
  }
  return img;
}

inline ImageU8 decode_image(const json& j) { return to_u8(decode_image_f(j)); }

inline json encode_info(const BackendInfo& info) {
  json controls = json::array();
  for (auto c : info.controls) controls.push_back(to_string(c));
  return {{"name", info.name},
          {"version", info.version},
          {"protocol", kProtocolVersion},
          {"latent_channels", info.latent_channels},
          {"spatial_factor", info.spatial_factor},
          {"schedule", info.schedule},
          {"controls", controls}};
}

inline BackendInfo decode_info(const json& j) {
  BackendInfo info;
  info.name = j.at("name").get<std::string>();
  info.version = j.at("version").get<std::string>();
  info.latent_channels = j.at("latent_channels").get<int>();
  info.spatial_factor = j.at("spatial_factor").get<int>();
  info.schedule = j.value("schedule", std::string{});
  for (const auto& c : j.at("controls")) info.controls.push_back(parse_control(c.get<std::string>()));
  return info;
}

inline json encode_schedule(const NoiseSchedule& s) {
  return {{"schedule_id", s.id}, {"timesteps", s.timesteps}, {"alpha_bars", s.alpha_bars}};
}

inline NoiseSchedule decode_schedule(const json& j) {
  NoiseSchedule s;
  s.id = j.at("schedule_id").get<std::string>();
  s.timesteps = j.at("timesteps").get<std::vector<int>>();
  s.alpha_bars = j.at("alpha_bars").get<std::vector<double>>();
  validate(s);
  return s;
}

inline json encode_denoise(const DenoiseRequest& r) {
  json controls = json::array();
  for (const auto& c : r.controls) {
    if (!c.image) throw Error(Errc::ShapeMismatch, "control without image");
    controls.push_back({{"type", to_string(c.type)}, {"weight", c.weight}, {"image", encode_image(*c.image)}});
  }
  return {{"latent", encode_latent(r.latent)},
          {"schedule_id", r.schedule_id},
          {"step_index", r.step_index},
          {"embed_id", r.prompt_embed},
          {"negative_embed_id", r.negative_embed},
          {"controls", controls},
          {"guidance", r.guidance_scale},
          {"seed", r.seed}};
}

inline DenoiseRequest decode_denoise(const json& j) {
  DenoiseRequest r;
  r.latent = decode_latent(j.at("latent"));
  r.schedule_id = j.at("schedule_id").get<std::string>();
  r.step_index = j.at("step_index").get<int>();
  r.prompt_embed = j.at("embed_id").get<std::string>();
  r.negative_embed = j.value("negative_embed_id", std::string{});
  r.guidance_scale = j.at("guidance").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& c : j.at("controls")) {
    r.controls.push_back({parse_control(c.at("type").get<std::string>()),
                          std::make_shared<const ImageF>(decode_image_f(c.at("image"))),
                          c.at("weight").get<double>()});
  }
  return r;
}

inline json error_body(const std::string& code, const std::string& message) {
  return {{"code", code}, {"message", message}};
}

struct ServerOptions {
  int max_in_flight = 16;
};

/// Serves the v1 endpoints on top of any Backend (used to expose the mock over HTTP).
inline void mount(httplib::Server& server, Backend& backend, ServerOptions options = {}) {
  auto in_flight = std::make_shared<std::atomic<int>>(0);

  auto wrap = [&backend, in_flight, options](auto handler) {
    return [&backend, in_flight, options, handler](const httplib::Request& req,
                                                   httplib::Response& res) {
      if (in_flight->fetch_add(1) >= options.max_in_flight) {
        in_flight->fetch_sub(1);
        res.status = 503;
        res.set_content(error_body("Overloaded", "too many requests in flight").dump(),
                        "application/json");
        return;
      }
      try {
        json body = req.body.empty() ? json::object() : json::parse(req.body);
        res.set_content(handler(backend, body).dump(), "application/json");
        res.status = 200;
      } catch (const Error& e) {
        res.status = 400;
        res.set_content(error_body(to_string(e.code()), e.what()).dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 400;
        res.set_content(error_body("BadRequest", e.what()).dump(), "application/json");
      }
      in_flight->fetch_sub(1);
    };
  };

  server.Get("/v1/health", wrap([](Backend&, const json&) { return json{{"status", "ok"}}; }));
  server.Get("/v1/info", wrap([](Backend& b, const json&) { return encode_info(b.info()); }));
  server.Post("/v1/schedule", wrap([](Backend& b, const json& j) {
                return encode_schedule(b.schedule(j.at("num_steps").get<int>()));
              }));
  server.Post("/v1/encode", wrap([](Backend& b, const json& j) {
                return json{{"latent", encode_latent(b.encode(decode_image(j.at("image"))))}};
              }));
  server.Post("/v1/decode", wrap([](Backend& b, const json& j) {
                return json{{"image", encode_image(b.decode(decode_latent(j.at("latent"))))}};
              }));
  server.Post("/v1/text_embed", wrap([](Backend& b, const json& j) {
                return json{{"embed_id", b.text_embed(j.at("prompt").get<std::string>(),
                                                      j.value("negative", std::string{}))}};
              }));
  server.Post("/v1/denoise", wrap([](Backend& b, const json& j) {
                return json{{"latent", encode_latent(b.denoise(decode_denoise(j)))}};
              }));
  server.Post("/v1/features", wrap([](Backend& b, const json& j) {
                Tensor t = decode_tensor(j.at("images"));
                if (t.shape.size() != 4) throw Error(Errc::ShapeMismatch, "images must be [N,H,W,C]");
                const auto n = t.shape[0], h = t.shape[1], w = t.shape[2], c = t.shape[3];
                std::vector<ImageU8> images;
                for (std::size_t i = 0; i < n; ++i) {
                  ImageF f(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
                  std::copy_n(t.data.begin() + static_cast<long>(i * h * w * c), h * w * c,
                              f.storage().begin());
                  images.push_back(to_u8(f));
                }
                FeatureMatrix fm = b.features(images);
                return json{{"features", encode_tensor(fm.data, {fm.rows, fm.cols})}};
              }));
}

}  // namespace genb::wire
