#pragma once

// Per-part partial-noise inpainting. For each eligible person (ascending id) the head, hair,
// body and feet are processed in that order, each on the image produced by the previous part.
// A part is encoded and noised to an intermediate timestep chosen by its strength. During
// denoising the region outside its latent mask is replaced at every step by a freshly re-noised
// copy of the original latent. The decoded crop is composited back only inside the dilated
// pixel mask, so everything outside that mask keeps its original bytes.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "genb/backend.hpp"
#include "genb/bodygeom.hpp"
#include "genb/conditioning.hpp"
#include "genb/dataio.hpp"
#include "genb/diffusion.hpp"
#include "genb/digest.hpp"
#include "genb/error.hpp"
#include "genb/rng.hpp"

namespace genb {

enum class Part { head, hair, body, feet };
inline constexpr std::array<Part, 4> kPartOrder = {Part::head, Part::hair, Part::body, Part::feet};

inline const char* to_string(Part p) {
  switch (p) {
    case Part::head: return "head";
    case Part::hair: return "hair";
    case Part::body: return "body";
    case Part::feet: return "feet";
  }
  return "body";
}

inline Part parse_part(const std::string& name) {
  for (Part p : kPartOrder) {
    if (name == to_string(p)) return p;
  }
  throw Error(Errc::UnknownPart, "unknown part '" + name + "'");
}

// ---------------------------------------------------------------------------
// Configuration

inline constexpr double kDefaultBodyStrength = 0.35;
inline constexpr double kDefaultFeetStrength = 0.5;
inline constexpr double kVisibilityThreshold = 0.8;
inline constexpr int kMaskDilation = 3;

struct GenerationConfig {
  std::uint64_t global_seed = 0;
  int steps = 40;
  double guidance = 7.5;
  // Indexed by Part.
  std::array<double, 4> strengths = {kDefaultBodyStrength, kDefaultBodyStrength,
                                     kDefaultBodyStrength, kDefaultFeetStrength};
  // Indexed by ControlType; nullopt disables the control.
  std::array<std::optional<double>, 4> controls = {1.0, 1.0, 1.0, 1.0};
  std::string preset = "none";
  std::string negative_prompt;
  CannyParams canny;
  std::string debug_mode = "none";  // none | whole-body | img2img

  double strength(Part p) const { return strengths[static_cast<int>(p)]; }
  std::optional<double> control(ControlType t) const { return controls[static_cast<int>(t)]; }
};

inline void validate(const GenerationConfig& c) {
  if (c.steps <= 0) throw Error(Errc::InvalidConfig, "steps must be positive");
  if (!(c.guidance >= 0.0)) throw Error(Errc::InvalidConfig, "guidance must be >= 0");
  for (Part p : kPartOrder) {
    const double s = c.strength(p);
    if (!(s > 0.0 && s <= 1.0)) {
      throw Error(Errc::InvalidStrength, std::string("strength for ") + to_string(p) +
                                             " outside (0,1]: " + std::to_string(s));
    }
  }
  for (ControlType t : kAllControls) {
    if (auto w = c.control(t); w && !(*w >= 0.0)) {
      throw Error(Errc::InvalidConfig, std::string("control weight for ") + to_string(t) + " < 0");
    }
  }
  if (c.debug_mode != "none" && c.debug_mode != "whole-body" && c.debug_mode != "img2img") {
    throw Error(Errc::InvalidConfig, "unknown debug_mode '" + c.debug_mode + "'");
  }
}

inline nlohmann::json to_json(const GenerationConfig& c) {
  nlohmann::json strengths = nlohmann::json::object();
  for (Part p : kPartOrder) strengths[to_string(p)] = c.strength(p);
  nlohmann::json controls = nlohmann::json::object();
  for (ControlType t : kAllControls) {
    const auto w = c.control(t);
    controls[to_string(t)] = w ? nlohmann::json(*w) : nlohmann::json(nullptr);
  }
  return {{"global_seed", c.global_seed},
          {"steps", c.steps},
          {"guidance", c.guidance},
          {"strengths", strengths},
          {"controls", controls},
          {"preset", c.preset},
          {"negative_prompt", c.negative_prompt},
          {"canny",
           {{"sigma", c.canny.sigma},
            {"kernel", c.canny.kernel_size},
            {"low", c.canny.low},
            {"high", c.canny.high}}},
          {"debug_mode", c.debug_mode}};
}

/// Applies an ablation preset:
///   single-<depth|normals|edges|pose>  one control, uniform strength 0.5
///   cumulative-<2|3|4>                 depth+pose[+edges[+normals]], uniform strength 0.5
///   noise-<s>                          all four controls, uniform strength s
inline GenerationConfig apply_preset(GenerationConfig c, const std::string& name) {
  if (name.empty() || name == "none") {
    c.preset = "none";
    return c;
  }
  auto uniform = [&](double s) { c.strengths = {s, s, s, s}; };
  auto enable_only = [&](std::initializer_list<ControlType> on) {
    c.controls = {std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    for (auto t : on) c.controls[static_cast<int>(t)] = 1.0;
  };
  if (name.rfind("single-", 0) == 0) {
    enable_only({parse_control(name.substr(7))});
    uniform(0.5);
  } else if (name.rfind("cumulative-", 0) == 0) {
    const std::string k = name.substr(11);
    if (k == "2") {
      enable_only({ControlType::depth, ControlType::pose});
    } else if (k == "3") {
      enable_only({ControlType::depth, ControlType::pose, ControlType::edges});
    } else if (k == "4") {
      enable_only({ControlType::depth, ControlType::pose, ControlType::edges, ControlType::normals});
    } else {
      throw Error(Errc::InvalidConfig, "unknown preset '" + name + "'");
    }
    uniform(0.5);
  } else if (name.rfind("noise-", 0) == 0) {
    double s = 0.0;
    try {
      std::size_t pos = 0;
      s = std::stod(name.substr(6), &pos);
      if (pos != name.size() - 6) throw std::invalid_argument(name);
    } catch (const std::logic_error&) {
      throw Error(Errc::InvalidConfig, "unknown preset '" + name + "'");
    }
    if (!(s > 0.0 && s <= 1.0)) throw Error(Errc::InvalidStrength, "preset noise level outside (0,1]");
    enable_only({ControlType::depth, ControlType::pose, ControlType::edges, ControlType::normals});
    uniform(s);
  } else {
    throw Error(Errc::InvalidConfig, "unknown preset '" + name + "'");
  }
  c.preset = name;
  return c;
}

/// The control ablation rows and noise sweep used for the published comparisons.
inline std::vector<std::string> ablation_presets() {
  return {"single-edges", "single-depth", "single-normals", "single-pose", "cumulative-2",
          "cumulative-3", "cumulative-4", "noise-0.3",      "noise-0.5",   "noise-0.7",
          "noise-0.9"};
}

/// Parses a config file body. Missing fields keep their defaults; the preset is applied last.
inline GenerationConfig config_from_json(const nlohmann::json& j) {
  GenerationConfig c;
  try {
    c.global_seed = j.value("global_seed", c.global_seed);
    c.steps = j.value("steps", c.steps);
    c.guidance = j.value("guidance", c.guidance);
    c.negative_prompt = j.value("negative_prompt", c.negative_prompt);
    c.debug_mode = j.value("debug_mode", c.debug_mode);
    if (j.contains("strengths")) {
      for (const auto& [k, v] : j.at("strengths").items()) {
        c.strengths[static_cast<int>(parse_part(k))] = v.get<double>();
      }
    }
    if (j.contains("controls")) {
      for (const auto& [k, v] : j.at("controls").items()) {
        c.controls[static_cast<int>(parse_control(k))] =
            v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      }
    }
    if (j.contains("canny")) {
      const auto& cj = j.at("canny");
      c.canny.sigma = cj.value("sigma", c.canny.sigma);
      c.canny.kernel_size = cj.value("kernel", c.canny.kernel_size);
      c.canny.low = cj.value("low", c.canny.low);
      c.canny.high = cj.value("high", c.canny.high);
    }
    const std::string preset = j.value("preset", std::string("none"));
    c = apply_preset(c, preset);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
  validate(c);
  return c;
}

inline std::string config_hash(const GenerationConfig& c) { return sha256_hex(to_json(c).dump()); }

// ---------------------------------------------------------------------------
// Seeds and prompts

/// Stable per-(frame, person, part) seed: FNV-1a over "global_seed/frame_id/person_id/part".
inline std::uint64_t part_seed(std::uint64_t global_seed, const std::string& frame_id,
                               int person_id, const std::string& part) {
  return fnv1a64(std::to_string(global_seed) + "/" + frame_id + "/" + std::to_string(person_id) +
                 "/" + part);
}

namespace prompts {
inline const std::vector<std::string> kHairColors = {"blond", "brunette", "redhead"};
inline const std::vector<std::string> kHairTypes = {"straight", "wavy", "curly",
                                                    "coily",    "mullet", "afro"};
inline const std::vector<std::string> kShoeTypes = {"oxford shoes", "boots", "sneakers", "sandals",
                                                    "crocs"};
}  // namespace prompts

struct PersonMeta {
  Gender gender = Gender::neutral;
  std::string race;
  std::optional<std::string> hair_color;
};

inline PersonMeta meta_of(const PersonGT& p) { return {p.gender, p.race, p.hair_color}; }

inline const std::string& pick(const std::vector<std::string>& pool, std::mt19937_64& rng) {
  return pool[static_cast<std::size_t>(rng() % pool.size())];
}

inline std::string build_prompt(Part part, const PersonMeta& meta, std::mt19937_64& rng) {
  const std::string gender = to_string(meta.gender);
  switch (part) {
    case Part::head:
      return "Realistic " + meta.race + " " + gender + " face";
    case Part::hair: {
      const std::string color = meta.hair_color ? *meta.hair_color : pick(prompts::kHairColors, rng);
      return "Realistic " + color + " " + pick(prompts::kHairTypes, rng) + " " + meta.race + " " +
             gender;
    }
    case Part::body:
      return "Realistic " + gender + " clothes";
    case Part::feet:
      return "Realistic " + gender + " " + pick(prompts::kShoeTypes, rng);
  }
  throw Error(Errc::UnknownPart, "unknown part");
}

inline std::string build_prompt(const std::string& part, const PersonMeta& meta, std::mt19937_64& rng) {
  return build_prompt(parse_part(part), meta, rng);
}

// ---------------------------------------------------------------------------
// Masks and eligibility

/// Frame-space masks for the four processed parts, indexed by Part. The body mask is the
/// simulated-cloth segmentation plus the skin-texture clothing region, which is used whenever
/// the person is flagged as having one or has no simulated cloth at all.
inline std::array<Mask, 4> compose_part_masks(const PartMaskSet& set, const ImageU8& seg,
                                              const PersonGT& person) {
  std::array<Mask, 4> out;
  out[static_cast<int>(Part::head)] = set.part(BodyPart::face);
  out[static_cast<int>(Part::hair)] = set.part(BodyPart::scalp);
  Mask cloth = seg_mask(seg, person.person_id, SegKind::cloth);
  if (person.cloth_skin_mask_present || !any(cloth)) {
    cloth = mask_union(cloth, set.part(BodyPart::body));
  }
  out[static_cast<int>(Part::body)] = std::move(cloth);
  out[static_cast<int>(Part::feet)] = set.part(BodyPart::feet);
  return out;
}

struct Eligibility {
  std::vector<Part> parts;  // in processing order
  bool person_skipped = false;
  std::string reason;
  double visibility = 0.0;
  long face_pixels = 0;
};

/// A person needs more than 80% visibility; head and hair need at least 100 visible face
/// pixels; parts with empty masks are dropped.
inline Eligibility part_eligibility(const PartMaskSet& set, const std::array<Mask, 4>& part_masks) {
  Eligibility e;
  e.face_pixels = set.face_pixel_count;
  try {
    e.visibility = visibility_ratio(set);
  } catch (const Error&) {
    e.person_skipped = true;
    e.reason = "not rendered in frame";
    return e;
  }
  if (!(e.visibility > kVisibilityThreshold)) {
    e.person_skipped = true;
    e.reason = "visibility " + std::to_string(e.visibility) + " <= 0.8";
    return e;
  }
  const bool face_ok = set.face_pixel_count >= openpose::kMinFacePixels;
  for (Part p : kPartOrder) {
    if ((p == Part::head || p == Part::hair) && !face_ok) continue;
    if (!any(part_masks[static_cast<int>(p)])) continue;
    e.parts.push_back(p);
  }
  if (e.parts.empty()) e.reason = "no eligible parts";
  return e;
}

// ---------------------------------------------------------------------------
// Latent-space compositing

/// Dilates the pixel mask by `dilation` px, then marks a latent cell if any pixel of its
/// factor x factor block is set.
inline LatentMask downsample_mask(const Mask& pixel_mask, int factor = 8, int dilation = kMaskDilation) {
  if (pixel_mask.width() % factor != 0 || pixel_mask.height() % factor != 0) {
    throw Error(Errc::ShapeMismatch, "mask size must be divisible by the latent factor");
  }
  const Mask grown = dilate(pixel_mask, dilation);
  LatentMask m{pixel_mask.height() / factor, pixel_mask.width() / factor, {}};
  m.cells.assign(static_cast<std::size_t>(m.height) * m.width, 0);
  for (int y = 0; y < grown.height(); ++y) {
    for (int x = 0; x < grown.width(); ++x) {
      if (grown.at(x, y)) m.cells[static_cast<std::size_t>(y / factor) * m.width + x / factor] = 1;
    }
  }
  return m;
}

/// m * inpainted + (1 - m) * known, cell-wise over all channels.
inline LatentTensor composite(const LatentMask& m, const LatentTensor& inpainted,
                              const LatentTensor& known) {
  if (!inpainted.same_shape(known) || m.height != known.height || m.width != known.width) {
    throw Error(Errc::ShapeMismatch, "composite: latent/mask shapes differ");
  }
  LatentTensor out = known;
  const std::size_t plane = known.plane();
  for (int c = 0; c < known.channels; ++c) {
    const std::size_t base = c * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      if (m.cells[i]) out.data[base + i] = inpainted.data[base + i];
    }
  }
  return out;
}

struct StepContext {
  Backend& backend;
  const NoiseSchedule& schedule;
  DenoiseRequest request;  // embeddings, controls and guidance; latent/step/seed filled per step
  std::uint64_t seed = 0;
};

inline std::uint64_t denoise_seed(std::uint64_t seed, int step) {
  return derive_seed(seed, (static_cast<std::uint64_t>(step) << 1) | 0u);
}
inline std::uint64_t known_region_seed(std::uint64_t seed, int step) {
  return derive_seed(seed, (static_cast<std::uint64_t>(step) << 1) | 1u);
}
inline std::uint64_t initial_noise_seed(std::uint64_t seed) { return derive_seed(seed, ~0ULL); }

/// One reverse step from schedule position `step_index`: the backend's prediction inside the
/// mask, the original latent re-noised to the next timestep (fresh noise) outside it. After
/// the final step the outside region is the original latent exactly.
inline LatentTensor composited_step(const LatentTensor& x_t, const LatentTensor& x0_latent,
                                    const LatentMask& m, int step_index, StepContext& ctx) {
  ctx.request.latent = x_t;
  ctx.request.step_index = step_index;
  ctx.request.seed = denoise_seed(ctx.seed, step_index);
  LatentTensor inpainted;
  try {
    inpainted = ctx.backend.denoise(ctx.request);
  } catch (const Error& e) {
    throw Error(e.code() == Errc::UnsupportedControl ? e.code() : Errc::BackendError,
                "denoise at step " + std::to_string(step_index) + ": " + e.what());
  }
  if (!inpainted.same_shape(x0_latent)) {
    throw Error(Errc::BackendError, "denoise returned a latent of the wrong shape");
  }
  if (step_index + 1 >= ctx.schedule.num_steps()) return composite(m, inpainted, x0_latent);
  const LatentTensor known =
      forward_noise(x0_latent, ctx.schedule.alpha_bars[static_cast<std::size_t>(step_index + 1)],
                    standard_normal_like(x0_latent, known_region_seed(ctx.seed, step_index)));
  return composite(m, inpainted, known);
}

// ---------------------------------------------------------------------------
// Part inpainting

struct PartPlan {
  Part part = Part::body;
  double strength = kDefaultBodyStrength;
  std::string prompt;
  std::string negative_prompt;
  std::array<std::optional<double>, 4> control_weights = {1.0, 1.0, 1.0, 1.0};
  double guidance = 7.5;
};

struct InpaintResult {
  ImageU8 image;          // crop after the pixel composite
  Mask pixel_mask;        // dilated crop-space mask used for the composite
  LatentMask latent_mask;
  LatentTensor x0_latent;
  LatentTensor final_latent;
  int steps_run = 0;
};

inline std::vector<ControlInput> control_inputs(const ConditioningSet& cond,
                                                const std::array<std::optional<double>, 4>& weights) {
  std::vector<ControlInput> out;
  for (ControlType t : kAllControls) {
    const auto w = weights[static_cast<int>(t)];
    if (!w) continue;
    std::shared_ptr<const ImageF> image;
    switch (t) {
      case ControlType::depth: image = to_control_image(cond.depth_norm); break;
      case ControlType::normals: image = to_control_image(cond.normals); break;
      case ControlType::edges: {
        auto edges = std::make_shared<ImageF>(cond.edges.width(), cond.edges.height());
        for (std::size_t i = 0; i < edges->size(); ++i) {
          edges->storage()[i] = cond.edges.storage()[i] ? 1.0f : 0.0f;
        }
        image = edges;
        break;
      }
      case ControlType::pose: image = to_control_image(cond.pose); break;
    }
    out.push_back({t, std::move(image), *w});
  }
  return out;
}

inline InpaintResult inpaint_part(const ImageU8& crop_rgb, const PartPlan& plan,
                                  const ConditioningSet& cond, const Mask& pixel_mask,
                                  Backend& backend, const NoiseSchedule& schedule,
                                  std::uint64_t seed) {
  const StartPoint start = strength_to_start(plan.strength, schedule.num_steps());
  if (plan.prompt.empty()) throw Error(Errc::InvalidConfig, "empty prompt");
  if (!pixel_mask.same_resolution(crop_rgb)) {
    throw Error(Errc::ShapeMismatch, "pixel mask and crop sizes differ");
  }
  if (!any(pixel_mask)) throw Error(Errc::EmptyMask, "part mask is empty");

  InpaintResult r;
  const int factor = backend.info().spatial_factor;
  r.pixel_mask = dilate(pixel_mask, kMaskDilation);
  r.latent_mask = downsample_mask(r.pixel_mask, factor, 0);
  r.x0_latent = backend.encode(crop_rgb);
  if (r.x0_latent.height != r.latent_mask.height || r.x0_latent.width != r.latent_mask.width) {
    throw Error(Errc::BackendError, "latent geometry does not match the mask");
  }

  StepContext ctx{backend, schedule, {}, seed};
  ctx.request.schedule_id = schedule.id;
  ctx.request.prompt_embed = backend.text_embed(plan.prompt, plan.negative_prompt);
  ctx.request.negative_embed = backend.text_embed(plan.negative_prompt, "");
  ctx.request.controls = control_inputs(cond, plan.control_weights);
  ctx.request.guidance_scale = plan.guidance;

  LatentTensor x = forward_noise(r.x0_latent, schedule, start.start_index,
                                 standard_normal_like(r.x0_latent, initial_noise_seed(seed)));
  for (int i = start.start_index; i < schedule.num_steps(); ++i) {
    x = composited_step(x, r.x0_latent, r.latent_mask, i, ctx);
  }
  r.final_latent = x;
  r.steps_run = start.steps;

  const ImageU8 decoded = backend.decode(x);
  if (!decoded.same_shape(crop_rgb)) throw Error(Errc::BackendError, "decoded crop has wrong shape");
  r.image = crop_rgb;
  for (int y = 0; y < crop_rgb.height(); ++y) {
    for (int px = 0; px < crop_rgb.width(); ++px) {
      if (!r.pixel_mask.at(px, y)) continue;
      for (int c = 0; c < crop_rgb.channels(); ++c) r.image.at(px, y, c) = decoded.at(px, y, c);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Frames

struct PartEvent {
  const FrameRecord& frame;
  int person_id;
  std::string part;
  const ImageU8& before;   // frame before this part
  const ImageU8& after;    // frame after this part
  const Mask& frame_mask;  // frame-space dilated mask; pixels outside are untouched
  const CropSpec& crop;
  const ConditioningSet& conditioning;
  bool failed;
};

struct FrameOptions {
  std::function<void(const PartEvent&)> on_part;
};

struct FrameResult {
  ImageU8 rgb;
  GenerationProvenance provenance;
};

inline FrameResult process_frame(const FrameRecord& frame, const GenerationConfig& config,
                                 Backend& backend, const FrameOptions& options = {}) {
  validate(config);
  if (!frame.topology) throw Error(Errc::CorruptHeader, frame.frame_id + ": no mesh topology");
  const BackendInfo info = backend.info();
  const NoiseSchedule schedule = backend.schedule(config.steps);
  validate(schedule);
  if (schedule.num_steps() != config.steps) {
    throw Error(Errc::BackendError, "backend schedule length differs from requested steps");
  }

  FrameResult result;
  result.rgb = frame.rgb;
  GenerationProvenance& prov = result.provenance;
  prov.global_seed = config.global_seed;
  for (Part p : kPartOrder) prov.strengths[to_string(p)] = config.strength(p);
  for (ControlType t : kAllControls) prov.control_weights[to_string(t)] = config.control(t);
  prov.backend = info.name + "/" + info.version;
  prov.schedule = info.schedule + "; id=" + schedule.id + "; steps=" + std::to_string(config.steps);
  prov.preset = config.preset;
  prov.config_hash = config_hash(config);
  prov.steps = config.steps;
  prov.guidance = config.guidance;

  const Resolution res{frame.rgb.width(), frame.rgb.height()};
  std::vector<const PersonGT*> persons;
  for (const auto& p : frame.persons) persons.push_back(&p);
  std::sort(persons.begin(), persons.end(),
            [](auto* a, auto* b) { return a->person_id < b->person_id; });

  for (const PersonGT* person : persons) {
    const PartMaskSet masks =
        rasterize_person(*person, *frame.topology, frame.camera, res, &frame.depth);
    std::array<Mask, 4> part_masks = compose_part_masks(masks, frame.seg, *person);
    const Eligibility elig = part_eligibility(masks, part_masks);
    if (elig.person_skipped) {
      prov.skipped.push_back({person->person_id, elig.reason, elig.visibility, elig.face_pixels});
      continue;
    }

    // Work items: (provenance name, prompt part, strength, frame-space mask).
    struct Item {
      std::string name;
      Part prompt_part;
      double strength;
      Mask mask;
    };
    std::vector<Item> items;
    if (config.debug_mode == "none") {
      for (Part p : elig.parts) {
        items.push_back({to_string(p), p, config.strength(p), part_masks[static_cast<int>(p)]});
      }
    } else {
      Mask whole = mask_union(masks.silhouette, seg_person_mask(frame.seg, person->person_id));
      if (config.debug_mode == "img2img") {
        const CropSpec c = compute_crop(whole, res.width, res.height);
        whole = Mask(res.width, res.height);
        for (int y = c.y0; y < c.y0 + c.side; ++y) {
          for (int x = c.x0; x < c.x0 + c.side; ++x) whole.at(x, y) = 1;
        }
      }
      items.push_back({config.debug_mode, Part::body, config.strength(Part::body), std::move(whole)});
    }

    Joints2D joints = project_points(person->joints3d, frame.camera);
    for (const Item& item : items) {
      const std::uint64_t seed =
          part_seed(config.global_seed, frame.frame_id, person->person_id, item.name);
      std::mt19937_64 rng(seed);
      PartPlan plan;
      plan.part = item.prompt_part;
      plan.strength = item.strength;
      plan.prompt = build_prompt(item.prompt_part, meta_of(*person), rng);
      plan.negative_prompt = config.negative_prompt;
      plan.control_weights = config.controls;
      plan.guidance = config.guidance;
      prov.prompts[prompt_key(person->person_id, item.name)] = plan.prompt;

      PartRecord record{person->person_id, item.name, plan.prompt, plan.strength, 0, seed, "done", {}};
      const CropSpec crop = compute_crop(item.mask, res.width, res.height);
      const ConditioningSet cond = build_conditioning(frame.depth, frame.camera, crop, joints,
                                                      masks.face_pixel_count, config.canny);
      const ImageU8 before = result.rgb;
      Mask frame_mask(res.width, res.height);
      try {
        const ImageU8 crop_rgb = extract_crop(result.rgb, crop);
        const Mask crop_mask = crop_mask_any(item.mask, crop);
        const InpaintResult r = inpaint_part(crop_rgb, plan, cond, crop_mask, backend, schedule, seed);
        frame_mask = crop_mask_to_frame(r.pixel_mask, crop, res.width, res.height);
        paste_crop(result.rgb, r.image, crop, frame_mask);
        record.steps_run = r.steps_run;
      } catch (const Error& e) {
        result.rgb = before;
        frame_mask = Mask(res.width, res.height);
        record.status = "failed";
        record.error = e.what();
      }
      if (options.on_part) {
        options.on_part({frame, person->person_id, item.name, before, result.rgb, frame_mask, crop,
                         cond, record.status == "failed"});
      }
      prov.parts.push_back(std::move(record));
    }
  }
  return result;
}

}  // namespace genb
