#pragma once

// Command implementations behind the genb executable. Each returns a process exit code:
// 0 success, 1 data or frame failures, 2 invalid invocation.

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "genb/dataio.hpp"
#include "genb/evaluation.hpp"
#include "genb/mock_backend.hpp"
#include "genb/png.hpp"
#include "genb/remote_backend.hpp"
#include "genb/synthesis.hpp"

namespace genb::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Serialized JSON-lines writer shared by worker threads.
class EventLog {
 public:
  explicit EventLog(std::ostream& out) : out_(out) {}
  void emit(const json& event) {
    std::lock_guard lock(mutex_);
    out_ << event.dump() << '\n';
    out_.flush();
  }

 private:
  std::ostream& out_;
  std::mutex mutex_;
};

struct BackendChoice {
  bool mock = false;
  std::string url;  // falls back to GENB_BACKEND_URL
};

inline std::unique_ptr<Backend> make_backend(const BackendChoice& choice) {
  if (choice.mock) return std::make_unique<MockBackend>();
  std::string url = choice.url;
  if (url.empty()) {
    if (const char* env = std::getenv("GENB_BACKEND_URL")) url = env;
  }
  if (url.empty()) {
    throw Error(Errc::InvalidConfig, "no backend: pass --mock, --backend URL or set GENB_BACKEND_URL");
  }
  return std::make_unique<RemoteBackend>(url);
}

inline bool matches_glob(const std::string& pattern, const std::string& name) {
  return pattern.empty() || ::fnmatch(pattern.c_str(), name.c_str(), 0) == 0;
}

inline std::vector<std::string> select_frames(const fs::path& root, const std::string& glob) {
  std::vector<std::string> out;
  for (auto& id : list_frames(root)) {
    if (matches_glob(glob, id)) out.push_back(id);
  }
  return out;
}

inline GenerationConfig load_config(const std::optional<fs::path>& path,
                                    const std::optional<std::string>& preset) {
  json j = json::object();
  if (path) j = detail::read_json(*path);
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "config must be a JSON object");
  GenerationConfig c = config_from_json(j);
  if (preset) c = apply_preset(c, *preset);
  validate(c);
  return c;
}

// ---------------------------------------------------------------------------
// validate

inline int run_validate(const fs::path& root, std::ostream& out) {
  json report = {{"root", root.string()}, {"frames", 0}, {"persons", 0}, {"errors", json::array()}};
  auto fail = [&](const std::string& path, const Error& e) {
    report["errors"].push_back({{"path", path}, {"code", to_string(e.code())}, {"message", e.what()}});
  };
  std::vector<std::string> frames;
  try {
    frames = list_frames(root);
    if (frames.empty()) throw Error(Errc::EmptyDataset, root.string() + ": no frames");
  } catch (const Error& e) {
    fail(root.string(), e);
    out << report.dump(2) << '\n';
    return kExitFailure;
  }
  for (const auto& id : frames) {
    try {
      const FrameRecord f = read_frame(root, id);
      report["frames"] = report["frames"].get<int>() + 1;
      report["persons"] = report["persons"].get<int>() + static_cast<int>(f.persons.size());
    } catch (const Error& e) {
      fail((root / id).string(), e);
    }
  }
  out << report.dump(2) << '\n';
  return report["errors"].empty() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
  fs::path input;
  fs::path output;
  GenerationConfig config;
  int workers = 1;
  bool resume = false;
  bool dump_conditions = false;
  std::string frames_glob;
};

struct FrameStatus {
  std::string frame_id;
  std::string status;  // done | failed | skipped
  std::string detail;
  double seconds = 0.0;
  int parts_done = 0;
  int parts_failed = 0;
  int persons_skipped = 0;
};

struct RunManifest {
  json config;
  json backend;
  std::vector<FrameStatus> frames;
  double seconds = 0.0;

  bool any_failed() const {
    return std::any_of(frames.begin(), frames.end(),
                       [](const FrameStatus& f) { return f.status == "failed"; });
  }
};

inline json to_json(const FrameStatus& s) {
  return {{"frame_id", s.frame_id},         {"status", s.status},
          {"detail", s.detail},             {"seconds", s.seconds},
          {"parts_done", s.parts_done},     {"parts_failed", s.parts_failed},
          {"persons_skipped", s.persons_skipped}};
}

inline json to_json(const RunManifest& m) {
  json frames = json::array();
  for (const auto& f : m.frames) frames.push_back(to_json(f));
  return {{"config", m.config}, {"backend", m.backend}, {"frames", frames}, {"seconds", m.seconds}};
}

/// A frame is complete when both outputs exist, the provenance parses, carries the same
/// config hash and records no failed part.
inline bool frame_complete(const fs::path& dir, const std::string& hash) {
  if (!fs::exists(dir / "gen_rgb.png") || !fs::exists(dir / "provenance.json")) return false;
  try {
    const GenerationProvenance p = read_provenance(dir);
    if (p.config_hash != hash) return false;
    return std::none_of(p.parts.begin(), p.parts.end(),
                        [](const PartRecord& r) { return r.status == "failed"; });
  } catch (const Error&) {
    return false;
  }
}

inline void dump_conditions(const fs::path& frame_out, const PartEvent& ev) {
  const fs::path dir = frame_out / "cond" / std::to_string(ev.person_id) / ev.part;
  fs::create_directories(dir);
  const auto& c = ev.conditioning;
  ImageU8 depth(c.depth_norm.width(), c.depth_norm.height());
  for (std::size_t i = 0; i < depth.size(); ++i) {
    depth.storage()[i] = static_cast<std::uint8_t>(std::lround(c.depth_norm.storage()[i] * 255.0f));
  }
  ImageU8 edges = c.edges;
  for (auto& v : edges.storage()) v = v ? 255 : 0;
  ImageU8 mask = ev.frame_mask;
  for (auto& v : mask.storage()) v = v ? 255 : 0;
  detail::write_png_atomic(dir / "depth.png", depth);
  detail::write_png_atomic(dir / "normals.png", c.normals);
  detail::write_png_atomic(dir / "edges.png", edges);
  detail::write_png_atomic(dir / "pose.png", c.pose);
  detail::write_png_atomic(dir / "mask.png", mask);
}

/// Drops what an interrupted run may have left behind: the completion marker, dumped
/// conditions and temporary files.
inline void remove_partial_outputs(const fs::path& dir) {
  if (!fs::exists(dir)) return;
  fs::remove(dir / "provenance.json");
  fs::remove_all(dir / "cond");
  std::vector<fs::path> temps;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().filename().string().rfind('.', 0) == 0) temps.push_back(e.path());
  }
  for (const auto& t : temps) fs::remove_all(t);
}

inline FrameStatus generate_frame(const GenerateOptions& opt, const std::string& id, Backend& backend,
                                  const std::string& hash) {
  FrameStatus st{id, "done", {}, 0.0, 0, 0, 0};
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out_dir = opt.output / id;
  try {
    if (opt.resume && frame_complete(out_dir, hash)) {
      st.status = "skipped";
      st.detail = "complete output present";
    } else {
      remove_partial_outputs(out_dir);
      const FrameRecord frame = read_frame(opt.input, id);
      FrameOptions fo;
      if (opt.dump_conditions) {
        fo.on_part = [&](const PartEvent& ev) { dump_conditions(out_dir, ev); };
      }
      const FrameResult r = process_frame(frame, opt.config, backend, fo);
      write_frame(opt.output, frame, r.rgb, r.provenance);
      for (const auto& p : r.provenance.parts) {
        if (p.status == "failed") {
          ++st.parts_failed;
          if (st.detail.empty()) st.detail = std::to_string(p.person_id) + "/" + p.part + ": " + p.error;
        } else {
          ++st.parts_done;
        }
      }
      st.persons_skipped = static_cast<int>(r.provenance.skipped.size());
      if (st.parts_failed > 0) st.status = "failed";
    }
  } catch (const std::exception& e) {
    st.status = "failed";
    st.detail = e.what();
  }
  st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return st;
}

/// Processes every selected frame with a pool of `workers` threads. Frames are independent,
/// so the output bytes do not depend on the worker count.
inline RunManifest run_generate(const GenerateOptions& opt, Backend& backend, EventLog& log) {
  validate(opt.config);
  if (opt.workers < 1) throw Error(Errc::InvalidConfig, "--workers must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> ids = select_frames(opt.input, opt.frames_glob);
  if (ids.empty()) throw Error(Errc::EmptyDataset, opt.input.string() + ": no frames selected");
  fs::create_directories(opt.output);
  const std::string hash = config_hash(opt.config);
  const BackendInfo info = backend.info();

  RunManifest manifest;
  manifest.config = to_json(opt.config);
  manifest.config["config_hash"] = hash;
  std::vector<std::string> controls;
  for (auto c : info.controls) controls.emplace_back(to_string(c));
  manifest.backend = {{"name", info.name}, {"version", info.version}, {"schedule", info.schedule},
                      {"controls", controls}};
  manifest.frames.resize(ids.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < ids.size(); i = next++) {
      manifest.frames[i] = generate_frame(opt, ids[i], backend, hash);
      json event = to_json(manifest.frames[i]);
      event["event"] = "frame";
      log.emit(event);
    }
  };
  const int n = std::min<int>(opt.workers, static_cast<int>(ids.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  manifest.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail::write_json(opt.output / "run_manifest.json", to_json(manifest));
  return manifest;
}

// ---------------------------------------------------------------------------
// fid

struct FidOptions {
  fs::path set_a;
  fs::path set_b;
  CropOptions crops;
  std::optional<fs::path> cache_dir;
  std::optional<fs::path> out;
};

inline FidResult run_fid(const FidOptions& opt, Backend& backend, std::ostream& out) {
  const FidResult r = compute_fid(opt.set_a, opt.set_b, backend, opt.crops, opt.cache_dir);
  const json j = to_json(r);
  if (opt.out) detail::write_json(*opt.out, j);
  out << j.dump() << '\n';
  return r;
}

// ---------------------------------------------------------------------------
// contact-sheet

/// One row per common frame: original on the left, generated on the right.
inline ImageU8 contact_sheet(const fs::path& before_root, const fs::path& after_root,
                             const std::string& glob = {}, int cell_width = 320, int gap = 4) {
  const auto before = select_frames(before_root, glob);
  const auto after = select_frames(after_root, glob);
  std::vector<std::string> common;
  std::set_intersection(before.begin(), before.end(), after.begin(), after.end(),
                        std::back_inserter(common));
  if (common.empty()) throw Error(Errc::EmptyDataset, "no frame ids in common");
  if (common.size() != before.size() || common.size() != after.size()) {
    throw Error(Errc::InvalidConfig, "frame ids differ between the two trees");
  }
  auto load = [](const fs::path& dir) {
    return read_png(fs::exists(dir / "gen_rgb.png") ? dir / "gen_rgb.png" : dir / "rgb.png");
  };
  std::vector<std::pair<ImageU8, ImageU8>> rows;
  int height = gap;
  for (const auto& id : common) {
    ImageU8 a = read_png(before_root / id / "rgb.png");
    ImageU8 b = load(after_root / id);
    if (!a.same_resolution(b)) throw Error(Errc::ResolutionMismatch, id + ": image sizes differ");
    const int h = std::max(1, static_cast<int>(std::lround(static_cast<double>(a.height()) *
                                                           cell_width / a.width())));
    rows.emplace_back(resize_bilinear(a, cell_width, h), resize_bilinear(b, cell_width, h));
    height += h + gap;
  }
  ImageU8 sheet(2 * cell_width + 3 * gap, height, 3, 255);
  int y0 = gap;
  for (const auto& [a, b] : rows) {
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < cell_width; ++x) {
        for (int c = 0; c < 3; ++c) {
          sheet.at(gap + x, y0 + y, c) = a.at(x, y, a.channels() == 3 ? c : 0);
          sheet.at(2 * gap + cell_width + x, y0 + y, c) = b.at(x, y, b.channels() == 3 ? c : 0);
        }
      }
    }
    y0 += a.height() + gap;
  }
  return sheet;
}

}  // namespace genb::cli
