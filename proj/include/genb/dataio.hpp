#pragma once

// Reading and writing of frame archives.
//
// Layout of a dataset root:
//
//   <root>/faces.i32, faces.json            shared mesh topology (F x 3 int32)
//   <root>/<frame_id>/rgb.png               8-bit RGB
//   <root>/<frame_id>/depth.f32, depth.json raw little-endian float32 depth in meters
//   <root>/<frame_id>/seg.png               8-bit label raster, see seg_value_*()
//   <root>/<frame_id>/camera.json           {fx, fy, cx, cy}
//   <root>/<frame_id>/persons/<id>/{verts.f32, joints.f32, labels.u8, meta.json}
//
// Generated output adds gen_rgb.png and provenance.json next to the copied inputs.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "genb/digest.hpp"
#include "genb/error.hpp"
#include "genb/image.hpp"
#include "genb/png.hpp"

namespace genb {

static_assert(std::endian::native == std::endian::little,
              "raw array files are little-endian; big-endian hosts need byte swapping");

namespace fs = std::filesystem;
using json = nlohmann::json;

using Vec3f = std::array<float, 3>;
using Face = std::array<std::int32_t, 3>;

enum class Gender { female, male, neutral };

inline std::string to_string(Gender g) {
  switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::neutral: return "neutral";
  }
  return "neutral";
}

inline Gender parse_gender(const std::string& text) {
  if (text == "female") return Gender::female;
  if (text == "male") return Gender::male;
  if (text == "neutral") return Gender::neutral;
  throw Error(Errc::CorruptHeader, "unknown gender '" + text + "'");
}

/// Per-vertex body region label. Order doubles as the tie-break order.
enum class BodyPart : std::uint8_t { scalp = 0, face = 1, hands = 2, body = 3, feet = 4 };
inline constexpr int kBodyPartCount = 5;

inline const char* to_string(BodyPart p) {
  static constexpr const char* kNames[] = {"scalp", "face", "hands", "body", "feet"};
  return kNames[static_cast<int>(p)];
}

struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  bool operator==(const CameraModel&) const = default;
};

struct MeshTopology {
  std::vector<Face> faces;
  bool operator==(const MeshTopology&) const = default;
};

struct PersonGT {
  int person_id = 0;
  Gender gender = Gender::neutral;
  std::string race;
  std::optional<std::string> hair_color;
  std::vector<Vec3f> vertices;  // camera space, meters
  std::vector<Vec3f> joints3d;  // camera space, meters
  std::vector<BodyPart> part_labels;
  bool cloth_skin_mask_present = false;

  bool operator==(const PersonGT&) const = default;
};

struct FrameRecord {
  std::string frame_id;
  fs::path source_dir;  // empty for in-memory frames
  ImageU8 rgb;
  ImageF depth;
  ImageU8 seg;
  CameraModel camera;
  std::vector<PersonGT> persons;
  std::shared_ptr<const MeshTopology> topology;

  const PersonGT* find_person(int id) const {
    for (const auto& p : persons) {
      if (p.person_id == id) return &p;
    }
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Segmentation palette: 0 = environment, 1 + 2*id = body of person id,
// 2 + 2*id = simulated cloth of person id. Person ids are limited to [0, 126].

inline constexpr int kMaxPersonId = 126;

enum class SegKind { environment, body, cloth };

struct SegLabel {
  SegKind kind = SegKind::environment;
  int person_id = -1;
};

constexpr std::uint8_t seg_value_body(int person_id) {
  return static_cast<std::uint8_t>(1 + 2 * person_id);
}
constexpr std::uint8_t seg_value_cloth(int person_id) {
  return static_cast<std::uint8_t>(2 + 2 * person_id);
}
constexpr SegLabel decode_seg(std::uint8_t v) {
  if (v == 0 || v == 255) return {};
  const int id = (v - 1) / 2;
  return {(v % 2 == 1) ? SegKind::body : SegKind::cloth, id};
}

/// Pixels of `seg` belonging to `person_id` with the given kind.
inline Mask seg_mask(const ImageU8& seg, int person_id, SegKind kind) {
  const std::uint8_t want = kind == SegKind::cloth ? seg_value_cloth(person_id)
                                                   : seg_value_body(person_id);
  Mask out(seg.width(), seg.height());
  for (std::size_t i = 0; i < out.size(); ++i) out.storage()[i] = seg.storage()[i] == want;
  return out;
}

inline Mask seg_person_mask(const ImageU8& seg, int person_id) {
  Mask out(seg.width(), seg.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto v = seg.storage()[i];
    out.storage()[i] = v == seg_value_body(person_id) || v == seg_value_cloth(person_id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Provenance

struct PartRecord {
  int person_id = 0;
  std::string part;
  std::string prompt;
  double strength = 0.0;
  int steps_run = 0;
  std::uint64_t seed = 0;
  std::string status;  // "done" or "failed"
  std::string error;

  bool operator==(const PartRecord&) const = default;
};

struct SkippedPerson {
  int person_id = 0;
  std::string reason;
  double visibility = 0.0;
  long face_pixels = 0;

  bool operator==(const SkippedPerson&) const = default;
};

struct GenerationProvenance {
  std::uint64_t global_seed = 0;
  std::map<std::string, double> strengths;
  std::map<std::string, std::optional<double>> control_weights;
  std::map<std::string, std::string> prompts;  // "<person_id>/<part>" -> prompt
  std::string backend;
  std::string schedule;
  std::string preset = "none";
  std::string config_hash;
  int steps = 0;
  double guidance = 0.0;
  std::vector<PartRecord> parts;
  std::vector<SkippedPerson> skipped;

  bool operator==(const GenerationProvenance&) const = default;
};

inline std::string prompt_key(int person_id, const std::string& part) {
  return std::to_string(person_id) + "/" + part;
}

/// A provenance record is complete when every part strength and control weight is present
/// and every part record has its prompt. Backend, schedule and config hash must be named.
inline void validate(const GenerationProvenance& p) {
  for (const char* part : {"head", "hair", "body", "feet"}) {
    if (!p.strengths.contains(part)) {
      throw Error(Errc::InvalidProvenance, std::string("missing strength for ") + part);
    }
  }
  for (const char* control : {"depth", "normals", "edges", "pose"}) {
    if (!p.control_weights.contains(control)) {
      throw Error(Errc::InvalidProvenance, std::string("missing control weight for ") + control);
    }
  }
  if (p.backend.empty() || p.schedule.empty() || p.config_hash.empty() || p.preset.empty()) {
    throw Error(Errc::InvalidProvenance, "backend, schedule, preset and config hash are required");
  }
  if (p.steps <= 0 || !(p.guidance >= 0.0)) {
    throw Error(Errc::InvalidProvenance, "steps must be positive and guidance non-negative");
  }
  for (const auto& [part, s] : p.strengths) {
    if (!(s > 0.0 && s <= 1.0)) {
      throw Error(Errc::InvalidProvenance,
                  "strength for " + part + " outside (0,1]: " + std::to_string(s));
    }
  }
  for (const auto& rec : p.parts) {
    if (!(rec.strength > 0.0 && rec.strength <= 1.0)) {
      throw Error(Errc::InvalidProvenance, "part record strength outside (0,1]");
    }
    if (rec.status != "done" && rec.status != "failed") {
      throw Error(Errc::InvalidProvenance, "part status must be done or failed");
    }
    if (!p.prompts.contains(prompt_key(rec.person_id, rec.part))) {
      throw Error(Errc::InvalidProvenance,
                  "missing prompt for " + prompt_key(rec.person_id, rec.part));
    }
  }
}

inline json to_json(const GenerationProvenance& p) {
  json controls = json::object();
  for (const auto& [k, v] : p.control_weights) controls[k] = v ? json(*v) : json(nullptr);
  json parts = json::array();
  for (const auto& r : p.parts) {
    json j = {{"person_id", r.person_id}, {"part", r.part},   {"prompt", r.prompt},
              {"strength", r.strength},   {"steps_run", r.steps_run},
              {"seed", r.seed},           {"status", r.status}};
    if (!r.error.empty()) j["error"] = r.error;
    parts.push_back(std::move(j));
  }
  json skipped = json::array();
  for (const auto& s : p.skipped) {
    skipped.push_back({{"person_id", s.person_id},
                       {"reason", s.reason},
                       {"visibility", s.visibility},
                       {"face_pixels", s.face_pixels}});
  }
  return {{"global_seed", p.global_seed}, {"strengths", p.strengths},
          {"controls", controls},         {"prompts", p.prompts},
          {"backend", p.backend},         {"schedule", p.schedule},
          {"preset", p.preset},           {"config_hash", p.config_hash},
          {"steps", p.steps},             {"guidance", p.guidance},
          {"parts", parts},               {"skipped", skipped}};
}

inline GenerationProvenance provenance_from_json(const json& j) {
  GenerationProvenance p;
  try {
    p.global_seed = j.at("global_seed").get<std::uint64_t>();
    p.strengths = j.at("strengths").get<std::map<std::string, double>>();
    for (const auto& [k, v] : j.at("controls").items()) {
      p.control_weights[k] = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    }
    p.prompts = j.at("prompts").get<std::map<std::string, std::string>>();
    p.backend = j.at("backend").get<std::string>();
    p.schedule = j.at("schedule").get<std::string>();
    p.preset = j.at("preset").get<std::string>();
    p.config_hash = j.at("config_hash").get<std::string>();
    p.steps = j.at("steps").get<int>();
    p.guidance = j.at("guidance").get<double>();
    for (const auto& r : j.at("parts")) {
      p.parts.push_back({r.at("person_id").get<int>(), r.at("part").get<std::string>(),
                         r.at("prompt").get<std::string>(), r.at("strength").get<double>(),
                         r.at("steps_run").get<int>(), r.at("seed").get<std::uint64_t>(),
                         r.at("status").get<std::string>(), r.value("error", std::string{})});
    }
    for (const auto& s : j.at("skipped")) {
      p.skipped.push_back({s.at("person_id").get<int>(), s.at("reason").get<std::string>(),
                           s.at("visibility").get<double>(), s.at("face_pixels").get<long>()});
    }
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptHeader, std::string("provenance: ") + e.what());
  }
  return p;
}

// ---------------------------------------------------------------------------
// Low-level file helpers

namespace detail {

inline std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingAsset, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingAsset, path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptHeader, path.string() + ": " + e.what());
  }
}

inline fs::path temp_sibling(const fs::path& target) {
  thread_local std::mt19937_64 gen{std::random_device{}()};
  return target.parent_path() /
         ("." + target.filename().string() + ".tmp" + std::to_string(gen() % 1000000007ULL));
}

/// Writes via a temporary sibling and rename, so readers never observe a partial file.
template <typename Writer>
void write_atomic(const fs::path& target, Writer&& write) {
  const fs::path tmp = temp_sibling(target);
  try {
    write(tmp);
    fs::rename(tmp, target);
  } catch (const fs::filesystem_error& e) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(Errc::IoError, e.what());
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
}

inline void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  write_atomic(path, [&](const fs::path& tmp) {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::IoError, "write failed: " + tmp.string());
  });
}

inline void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline void write_png_atomic(const fs::path& path, const ImageU8& img) {
  write_atomic(path, [&](const fs::path& tmp) { write_png(tmp, img); });
}

inline json array_header(std::vector<std::size_t> shape, const std::string& dtype) {
  return {{"shape", shape}, {"dtype", dtype}, {"order", "C"}};
}

/// Validates a {shape, dtype, order} header against a payload and returns the shape.
inline std::vector<std::size_t> check_header(const json& header, const std::string& dtype,
                                             std::size_t elem_size, std::size_t payload_bytes,
                                             const std::string& what) {
  std::vector<std::size_t> shape;
  try {
    shape = header.at("shape").get<std::vector<std::size_t>>();
    if (header.at("dtype").get<std::string>() != dtype ||
        header.at("order").get<std::string>() != "C") {
      throw Error(Errc::CorruptHeader, what + ": expected dtype " + dtype + ", order C");
    }
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptHeader, what + ": " + e.what());
  }
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  if (count * elem_size != payload_bytes) {
    throw Error(Errc::CorruptHeader, what + ": header shape does not match payload size");
  }
  return shape;
}

template <typename T>
std::vector<T> reinterpret_payload(const std::vector<std::uint8_t>& bytes) {
  std::vector<T> out(bytes.size() / sizeof(T));
  std::memcpy(out.data(), bytes.data(), out.size() * sizeof(T));
  return out;
}

template <typename T>
std::span<const std::uint8_t> as_bytes_of(const std::vector<T>& v) {
  return {reinterpret_cast<const std::uint8_t*>(v.data()), v.size() * sizeof(T)};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Topology

inline std::shared_ptr<const MeshTopology> read_topology(const fs::path& root) {
  const auto bytes = detail::read_bytes(root / "faces.i32");
  const auto header = detail::read_json(root / "faces.json");
  const auto shape = detail::check_header(header, "i32", 4, bytes.size(), "faces.json");
  if (shape.size() != 2 || shape[1] != 3) throw Error(Errc::CorruptHeader, "faces must be Fx3");
  auto topo = std::make_shared<MeshTopology>();
  topo->faces = detail::reinterpret_payload<Face>(bytes);
  return topo;
}

inline void write_topology(const fs::path& root, const MeshTopology& topo) {
  fs::create_directories(root);
  detail::write_bytes(root / "faces.i32", detail::as_bytes_of(topo.faces));
  detail::write_json(root / "faces.json", detail::array_header({topo.faces.size(), 3}, "i32"));
}

// ---------------------------------------------------------------------------
// Frames

inline PersonGT read_person(const fs::path& dir, int person_id) {
  PersonGT p;
  p.person_id = person_id;
  const json meta = detail::read_json(dir / "meta.json");
  const auto verts = detail::read_bytes(dir / "verts.f32");
  const auto joints = detail::read_bytes(dir / "joints.f32");
  const auto labels = detail::read_bytes(dir / "labels.u8");
  try {
    p.gender = parse_gender(meta.at("gender").get<std::string>());
    p.race = meta.at("race").get<std::string>();
    if (meta.contains("hair_color") && !meta["hair_color"].is_null()) {
      p.hair_color = meta["hair_color"].get<std::string>();
    }
    p.cloth_skin_mask_present = meta.value("cloth_skin_mask_present", false);
    const auto& arrays = meta.at("arrays");
    auto vs = detail::check_header(arrays.at("verts"), "f32", 4, verts.size(), "verts");
    auto js = detail::check_header(arrays.at("joints"), "f32", 4, joints.size(), "joints");
    auto ls = detail::check_header(arrays.at("labels"), "u8", 1, labels.size(), "labels");
    if (vs.size() != 2 || vs[1] != 3 || js.size() != 2 || js[1] != 3 || ls.size() != 1 ||
        ls[0] != vs[0]) {
      throw Error(Errc::CorruptHeader, dir.string() + ": inconsistent array shapes");
    }
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptHeader, (dir / "meta.json").string() + ": " + e.what());
  }
  p.vertices = detail::reinterpret_payload<Vec3f>(verts);
  p.joints3d = detail::reinterpret_payload<Vec3f>(joints);
  p.part_labels.reserve(labels.size());
  for (auto v : labels) {
    if (v >= kBodyPartCount) throw Error(Errc::CorruptHeader, dir.string() + ": bad part label");
    p.part_labels.push_back(static_cast<BodyPart>(v));
  }
  for (const auto& j : p.joints3d) {
    for (float c : j) {
      if (!std::isfinite(c)) throw Error(Errc::CorruptHeader, dir.string() + ": non-finite joint");
    }
  }
  return p;
}

/// Checks the cross-field invariants of a frame.
inline void check_frame(const FrameRecord& f) {
  if (!f.depth.same_resolution(f.rgb) || !f.seg.same_resolution(f.rgb)) {
    throw Error(Errc::ResolutionMismatch, f.frame_id + ": rgb/depth/seg resolutions differ");
  }
  if (f.rgb.channels() != 3 || f.seg.channels() != 1 || f.depth.channels() != 1) {
    throw Error(Errc::CorruptHeader, f.frame_id + ": unexpected channel count");
  }
  if (!(f.camera.fx > 0 && f.camera.fy > 0) || f.camera.cx < 0 || f.camera.cy < 0 ||
      f.camera.cx >= f.rgb.width() || f.camera.cy >= f.rgb.height()) {
    throw Error(Errc::CorruptHeader, f.frame_id + ": invalid camera intrinsics");
  }
  std::array<bool, 256> seen{};
  for (auto v : f.seg.data()) seen[v] = true;
  for (int v = 1; v < 255; ++v) {
    if (!seen[v]) continue;
    const SegLabel label = decode_seg(static_cast<std::uint8_t>(v));
    if (!f.find_person(label.person_id)) {
      throw Error(Errc::CorruptHeader, f.frame_id + ": segmentation references unknown person " +
                                           std::to_string(label.person_id));
    }
  }
  for (const auto& p : f.persons) {
    if (p.part_labels.size() != p.vertices.size()) {
      throw Error(Errc::CorruptHeader, f.frame_id + ": label count != vertex count");
    }
    if (f.topology) {
      for (const auto& face : f.topology->faces) {
        for (auto idx : face) {
          if (idx < 0 || static_cast<std::size_t>(idx) >= p.vertices.size()) {
            throw Error(Errc::CorruptHeader, f.frame_id + ": face index out of range");
          }
        }
      }
    }
  }
}

inline FrameRecord read_frame(const fs::path& root, const std::string& frame_id) {
  const fs::path dir = root / frame_id;
  if (!fs::is_directory(dir)) throw Error(Errc::MissingAsset, dir.string());
  FrameRecord f;
  f.frame_id = frame_id;
  f.source_dir = dir;
  f.topology = read_topology(root);
  f.rgb = read_png(dir / "rgb.png");
  f.seg = read_png(dir / "seg.png");
  if (f.rgb.channels() != 3) throw Error(Errc::CorruptHeader, frame_id + ": rgb.png must be RGB");
  if (f.seg.channels() != 1) throw Error(Errc::CorruptHeader, frame_id + ": seg.png must be gray");

  const auto depth_bytes = detail::read_bytes(dir / "depth.f32");
  const auto shape = detail::check_header(detail::read_json(dir / "depth.json"), "f32", 4,
                                          depth_bytes.size(), "depth.json");
  if (shape.size() != 2) throw Error(Errc::CorruptHeader, "depth.json: shape must be [H, W]");
  f.depth = ImageF(static_cast<int>(shape[1]), static_cast<int>(shape[0]));
  std::memcpy(f.depth.data().data(), depth_bytes.data(), depth_bytes.size());

  const json cam = detail::read_json(dir / "camera.json");
  try {
    f.camera = {cam.at("fx").get<double>(), cam.at("fy").get<double>(),
                cam.at("cx").get<double>(), cam.at("cy").get<double>()};
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptHeader, "camera.json: " + std::string(e.what()));
  }

  const fs::path persons_dir = dir / "persons";
  if (fs::is_directory(persons_dir)) {
    std::vector<int> ids;
    for (const auto& entry : fs::directory_iterator(persons_dir)) {
      if (!entry.is_directory()) continue;
      try {
        std::size_t pos = 0;
        const std::string name = entry.path().filename().string();
        const int id = std::stoi(name, &pos);
        if (pos != name.size() || id < 0 || id > kMaxPersonId) throw std::invalid_argument(name);
        ids.push_back(id);
      } catch (const std::exception&) {
        throw Error(Errc::CorruptHeader, "bad person directory " + entry.path().string());
      }
    }
    std::sort(ids.begin(), ids.end());
    for (int id : ids) f.persons.push_back(read_person(persons_dir / std::to_string(id), id));
  }
  check_frame(f);
  return f;
}

/// Frame ids under a dataset root, sorted.
inline std::vector<std::string> list_frames(const fs::path& root) {
  std::vector<std::string> ids;
  if (!fs::is_directory(root)) throw Error(Errc::MissingAsset, root.string());
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "rgb.png")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline void write_person(const fs::path& dir, const PersonGT& p) {
  fs::create_directories(dir);
  std::vector<std::uint8_t> labels;
  labels.reserve(p.part_labels.size());
  for (auto l : p.part_labels) labels.push_back(static_cast<std::uint8_t>(l));
  detail::write_bytes(dir / "verts.f32", detail::as_bytes_of(p.vertices));
  detail::write_bytes(dir / "joints.f32", detail::as_bytes_of(p.joints3d));
  detail::write_bytes(dir / "labels.u8", labels);
  json meta = {{"gender", to_string(p.gender)},
               {"race", p.race},
               {"cloth_skin_mask_present", p.cloth_skin_mask_present},
               {"arrays",
                {{"verts", detail::array_header({p.vertices.size(), 3}, "f32")},
                 {"joints", detail::array_header({p.joints3d.size(), 3}, "f32")},
                 {"labels", detail::array_header({labels.size()}, "u8")}}}};
  if (p.hair_color) meta["hair_color"] = *p.hair_color;
  detail::write_json(dir / "meta.json", meta);
}

/// Serializes a frame's inputs (rgb + ground truth) from its in-memory fields.
inline void write_frame_inputs(const fs::path& root, const FrameRecord& f) {
  check_frame(f);
  const fs::path dir = root / f.frame_id;
  fs::create_directories(dir);
  detail::write_png_atomic(dir / "rgb.png", f.rgb);
  detail::write_png_atomic(dir / "seg.png", f.seg);
  detail::write_bytes(dir / "depth.f32", detail::as_bytes_of(f.depth.storage()));
  detail::write_json(dir / "depth.json",
                     detail::array_header({static_cast<std::size_t>(f.depth.height()),
                                           static_cast<std::size_t>(f.depth.width())},
                                          "f32"));
  detail::write_json(dir / "camera.json", {{"fx", f.camera.fx},
                                           {"fy", f.camera.fy},
                                           {"cx", f.camera.cx},
                                           {"cy", f.camera.cy}});
  for (const auto& p : f.persons) {
    write_person(dir / "persons" / std::to_string(p.person_id), p);
  }
  if (f.topology && !fs::exists(root / "faces.i32")) write_topology(root, *f.topology);
}

inline bool is_generated_output(const fs::path& relative) {
  const std::string first = relative.begin()->string();
  return first == "gen_rgb.png" || first == "provenance.json" || first == "cond" ||
         (!first.empty() && first[0] == '.');
}

/// Relative paths of the ground-truth sidecars (everything except generated outputs).
inline std::vector<fs::path> ground_truth_files(const fs::path& frame_dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(frame_dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), frame_dir);
    if (rel == "rgb.png" || is_generated_output(rel)) continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  return files;
}

namespace detail {

inline void copy_verified(const fs::path& from, const fs::path& to) {
  fs::create_directories(to.parent_path());
  write_atomic(to, [&](const fs::path& tmp) { fs::copy_file(from, tmp); });
  if (sha256_file(from) != sha256_file(to)) {
    throw Error(Errc::IoError, "digest mismatch after copying " + from.string());
  }
}

}  // namespace detail

/// Writes the generated image and provenance for one frame. Ground truth (and the original
/// rgb.png) is copied byte-for-byte from the source frame when one exists, otherwise serialized
/// from the record. provenance.json is written last and marks the frame complete.
inline void write_frame(const fs::path& out_root, const FrameRecord& frame, const ImageU8& new_rgb,
                        const GenerationProvenance& provenance) {
  if (!new_rgb.same_shape(frame.rgb)) {
    throw Error(Errc::ResolutionMismatch, frame.frame_id + ": generated rgb shape differs");
  }
  validate(provenance);
  const fs::path dir = out_root / frame.frame_id;
  try {
    fs::create_directories(dir);
    if (!frame.source_dir.empty()) {
      const fs::path src_root = frame.source_dir.parent_path();
      for (const char* name : {"faces.i32", "faces.json"}) {
        if (!fs::exists(out_root / name) && fs::exists(src_root / name)) {
          detail::copy_verified(src_root / name, out_root / name);
        }
      }
      detail::copy_verified(frame.source_dir / "rgb.png", dir / "rgb.png");
      for (const auto& rel : ground_truth_files(frame.source_dir)) {
        detail::copy_verified(frame.source_dir / rel, dir / rel);
      }
    } else {
      write_frame_inputs(out_root, frame);
    }
    detail::write_png_atomic(dir / "gen_rgb.png", new_rgb);
    detail::write_json(dir / "provenance.json", to_json(provenance));
  } catch (const fs::filesystem_error& e) {
    throw Error(Errc::IoError, e.what());
  }
}

inline GenerationProvenance read_provenance(const fs::path& frame_dir) {
  return provenance_from_json(detail::read_json(frame_dir / "provenance.json"));
}

}  // namespace genb
