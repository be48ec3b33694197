#pragma once

// Frechet distance between Gaussian fits of feature embeddings of person-centered crops.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "genb/backend.hpp"
#include "genb/dataio.hpp"
#include "genb/digest.hpp"
#include "genb/error.hpp"
#include "genb/image.hpp"
#include "genb/png.hpp"

namespace genb {

struct FidStats {
  std::size_t n = 0;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

/// Sample mean and unbiased covariance of the rows of `features`.
inline FidStats gaussian_stats(const FeatureMatrix& features) {
  if (features.rows < 2) {
    throw Error(Errc::TooFewSamples, "need at least 2 feature vectors, got " +
                                         std::to_string(features.rows));
  }
  using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> x(features.data.data(), static_cast<Eigen::Index>(features.rows),
                                     static_cast<Eigen::Index>(features.cols));
  const Eigen::MatrixXd xd = x.cast<double>();
  FidStats s;
  s.n = features.rows;
  s.mu = xd.colwise().mean().transpose();
  const Eigen::MatrixXd centered = xd.rowwise() - s.mu.transpose();
  s.sigma = (centered.transpose() * centered) / static_cast<double>(features.rows - 1);
  return s;
}

inline FidStats gaussian_stats(const Eigen::MatrixXd& rows) {
  FeatureMatrix m{static_cast<std::size_t>(rows.rows()), static_cast<std::size_t>(rows.cols()), {}};
  m.data.resize(m.rows * m.cols);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      m.data[static_cast<std::size_t>(r) * m.cols + static_cast<std::size_t>(c)] =
          static_cast<float>(rows(r, c));
    }
  }
  return gaussian_stats(m);
}

inline constexpr double kEigenClampTolerance = 1e-10;
inline constexpr double kRidgeEpsilon = 1e-6;

namespace detail {

/// Clamps eigenvalues in [-tol * lambda_max, 0) to zero. Returns true if any was negative.
inline bool clamp_eigenvalues(Eigen::VectorXd& values, const char* what) {
  const double lambda_max = std::max(0.0, values.maxCoeff());
  bool clamped = false;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] >= 0.0) continue;
    if (values[i] < -kEigenClampTolerance * lambda_max || lambda_max == 0.0) {
      throw Error(Errc::IndefiniteCovariance, std::string(what) + " has eigenvalue " +
                                                  std::to_string(values[i]));
    }
    values[i] = 0.0;
    clamped = true;
  }
  return clamped;
}

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace detail

struct FrechetResult {
  double distance = 0.0;
  bool ridge_applied = false;
};

/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2), square roots by symmetric
/// eigendecomposition. If either covariance needs negative eigenvalues clamped, eps * I is
/// added to both and the distance is recomputed.
inline FrechetResult frechet_distance_ex(const FidStats& a, const FidStats& b) {
  const Eigen::Index d = a.mu.size();
  if (b.mu.size() != d || a.sigma.rows() != d || a.sigma.cols() != d || b.sigma.rows() != d ||
      b.sigma.cols() != d) {
    throw Error(Errc::DimensionMismatch, "feature dimensions differ: " + std::to_string(a.mu.size()) +
                                             " vs " + std::to_string(b.mu.size()));
  }
  const double mean_term = (a.mu - b.mu).squaredNorm();

  auto trace_term = [&](const Eigen::MatrixXd& sa, const Eigen::MatrixXd& sb, bool& clamped) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(sa);
    if (ea.info() != Eigen::Success) throw Error(Errc::IndefiniteCovariance, "eigensolver failed");
    Eigen::VectorXd va = ea.eigenvalues();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(sb, Eigen::EigenvaluesOnly);
    if (eb.info() != Eigen::Success) throw Error(Errc::IndefiniteCovariance, "eigensolver failed");
    Eigen::VectorXd vb = eb.eigenvalues();
    clamped = detail::clamp_eigenvalues(va, "sigma_a");
    clamped = detail::clamp_eigenvalues(vb, "sigma_b") || clamped;

    const Eigen::MatrixXd& q = ea.eigenvectors();
    const Eigen::MatrixXd sqrt_a = q * va.cwiseSqrt().asDiagonal() * q.transpose();
    const Eigen::MatrixXd inner = detail::symmetrized(sqrt_a * sb * sqrt_a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ei(inner, Eigen::EigenvaluesOnly);
    if (ei.info() != Eigen::Success) throw Error(Errc::IndefiniteCovariance, "eigensolver failed");
    Eigen::VectorXd vi = ei.eigenvalues();
    detail::clamp_eigenvalues(vi, "sqrt(sigma_a) sigma_b sqrt(sigma_a)");
    return sa.trace() + sb.trace() - 2.0 * vi.cwiseSqrt().sum();
  };

  const Eigen::MatrixXd sa = detail::symmetrized(a.sigma);
  const Eigen::MatrixXd sb = detail::symmetrized(b.sigma);
  FrechetResult r;
  bool clamped = false;
  double trace = trace_term(sa, sb, clamped);
  if (clamped) {
    const Eigen::MatrixXd ridge = kRidgeEpsilon * Eigen::MatrixXd::Identity(d, d);
    bool again = false;
    trace = trace_term(sa + ridge, sb + ridge, again);
    r.ridge_applied = true;
  }
  r.distance = std::max(0.0, mean_term + trace);
  return r;
}

inline double frechet_distance(const FidStats& a, const FidStats& b) {
  return frechet_distance_ex(a, b).distance;
}

// ---------------------------------------------------------------------------
// Person crops

inline constexpr int kDefaultFidCropSize = 299;

/// Square window of side round(1.2 * longest edge) centered on (cx, cy), clamped to the frame.
inline ImageU8 square_crop(const ImageU8& image, double cx, double cy, double extent, int crop_size) {
  int side = std::max(1, static_cast<int>(std::lround(1.2 * extent)));
  side = std::min({side, image.width(), image.height()});
  const int x0 = std::clamp(static_cast<int>(std::lround(cx - side / 2.0)), 0, image.width() - side);
  const int y0 = std::clamp(static_cast<int>(std::lround(cy - side / 2.0)), 0, image.height() - side);
  ImageU8 window(side, side, image.channels());
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      for (int c = 0; c < image.channels(); ++c) window.at(x, y, c) = image.at(x0 + x, y0 + y, c);
    }
  }
  return resize_bilinear(window, crop_size, crop_size);
}

enum class CropImage { automatic, generated, original };

struct CropOptions {
  int crop_size = kDefaultFidCropSize;
  CropImage image = CropImage::automatic;
};

/// One crop per person. A directory with boxes.json is a real-image set
/// ([{"image": path, "boxes": [[x, y, w, h], ...]}]); otherwise it is a frame tree and persons
/// are centered on their segmentation-mask centroid.
inline std::vector<ImageU8> person_crops(const std::filesystem::path& root, const CropOptions& opt = {}) {
  namespace fs = std::filesystem;
  if (opt.crop_size <= 0) throw Error(Errc::InvalidConfig, "crop size must be positive");
  std::vector<ImageU8> crops;
  if (fs::exists(root / "boxes.json")) {
    const auto manifest = detail::read_json(root / "boxes.json");
    try {
      for (const auto& entry : manifest) {
        const ImageU8 image = read_png(root / entry.at("image").get<std::string>());
        for (const auto& box : entry.at("boxes")) {
          const double x = box.at(0), y = box.at(1), w = box.at(2), h = box.at(3);
          if (!(w > 0 && h > 0)) throw Error(Errc::CorruptHeader, "box with non-positive size");
          crops.push_back(square_crop(image, x + w / 2.0 - 0.5, y + h / 2.0 - 0.5, std::max(w, h),
                                      opt.crop_size));
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::CorruptHeader, (root / "boxes.json").string() + ": " + e.what());
    }
  } else if (fs::is_directory(root)) {
    for (const auto& id : list_frames(root)) {
      const fs::path dir = root / id;
      const bool has_gen = fs::exists(dir / "gen_rgb.png");
      if (opt.image == CropImage::generated && !has_gen) continue;
      const bool use_gen = opt.image == CropImage::generated ||
                           (opt.image == CropImage::automatic && has_gen);
      const ImageU8 image = read_png(dir / (use_gen ? "gen_rgb.png" : "rgb.png"));
      const ImageU8 seg = read_png(dir / "seg.png");
      if (!seg.same_resolution(image)) {
        throw Error(Errc::ResolutionMismatch, dir.string() + ": seg and image sizes differ");
      }
      std::vector<int> ids;
      for (const auto& p : fs::directory_iterator(dir / "persons")) {
        if (p.is_directory()) ids.push_back(std::stoi(p.path().filename().string()));
      }
      std::sort(ids.begin(), ids.end());
      for (int pid : ids) {
        const Mask m = seg_person_mask(seg, pid);
        const BoundingBox box = bounding_box(m);
        if (box.empty()) continue;
        double sx = 0.0, sy = 0.0;
        std::size_t n = 0;
        for (int y = box.y0; y <= box.y1; ++y) {
          for (int x = box.x0; x <= box.x1; ++x) {
            if (!m.at(x, y)) continue;
            sx += x;
            sy += y;
            ++n;
          }
        }
        crops.push_back(square_crop(image, sx / n, sy / n, std::max(box.width(), box.height()),
                                    opt.crop_size));
      }
    }
  }
  if (crops.empty()) throw Error(Errc::EmptyDataset, root.string() + ": no person crops");
  return crops;
}

// ---------------------------------------------------------------------------
// Feature extraction with an optional on-disk cache (raw f32 + JSON header per crop)

class FeatureCache {
 public:
  explicit FeatureCache(std::filesystem::path dir, std::string identity)
      : dir_(std::move(dir)), identity_(std::move(identity)) {
    std::filesystem::create_directories(dir_);
  }

  std::string key(const ImageU8& crop) const {
    Sha256 h;
    h.update(identity_).update("|" + std::to_string(crop.width()) + "x" +
                               std::to_string(crop.height()) + "x" + std::to_string(crop.channels()) + "|");
    h.update(crop.data());
    return to_hex(h.finish());
  }

  std::optional<std::vector<float>> load(const std::string& key, std::size_t dim) const {
    const auto bin = dir_ / (key + ".f32");
    const auto header = dir_ / (key + ".json");
    if (!std::filesystem::exists(bin) || !std::filesystem::exists(header)) return std::nullopt;
    try {
      const auto bytes = detail::read_bytes(bin);
      const auto shape = detail::check_header(detail::read_json(header), "f32", 4, bytes.size(), header.string());
      if (shape.size() != 1 || shape[0] != dim) return std::nullopt;
      return detail::reinterpret_payload<float>(bytes);
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  void store(const std::string& key, std::span<const float> values) const {
    detail::write_bytes(dir_ / (key + ".f32"),
                        {reinterpret_cast<const std::uint8_t*>(values.data()), values.size_bytes()});
    detail::write_json(dir_ / (key + ".json"), detail::array_header({values.size()}, "f32"));
  }

 private:
  std::filesystem::path dir_;
  std::string identity_;
};

struct FeatureStats {
  long cache_hits = 0;
  long computed = 0;
};

inline FeatureMatrix extract_features(Backend& backend, const std::vector<ImageU8>& crops,
                                      const FeatureCache* cache = nullptr,
                                      FeatureStats* stats = nullptr, std::size_t batch = 16) {
  FeatureMatrix out{crops.size(), kFeatureDim, std::vector<float>(crops.size() * kFeatureDim)};
  std::vector<std::size_t> missing;
  std::vector<std::string> keys(crops.size());
  for (std::size_t i = 0; i < crops.size(); ++i) {
    if (cache) {
      keys[i] = cache->key(crops[i]);
      if (auto hit = cache->load(keys[i], kFeatureDim)) {
        std::copy(hit->begin(), hit->end(), out.data.begin() + static_cast<long>(i * kFeatureDim));
        if (stats) ++stats->cache_hits;
        continue;
      }
    }
    missing.push_back(i);
  }
  for (std::size_t start = 0; start < missing.size(); start += batch) {
    const std::size_t end = std::min(missing.size(), start + batch);
    std::vector<ImageU8> group;
    for (std::size_t k = start; k < end; ++k) group.push_back(crops[missing[k]]);
    const FeatureMatrix f = backend.features(group);
    if (f.rows != group.size() || f.cols != kFeatureDim) {
      throw Error(Errc::BackendError, "features: expected " + std::to_string(group.size()) + "x2048");
    }
    for (std::size_t k = start; k < end; ++k) {
      const auto row = f.row(k - start);
      const std::size_t i = missing[k];
      std::copy(row.begin(), row.end(), out.data.begin() + static_cast<long>(i * kFeatureDim));
      if (cache) cache->store(keys[i], row);
      if (stats) ++stats->computed;
    }
  }
  return out;
}

struct FidResult {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double fid = 0.0;
  bool ridge_applied = false;
  FeatureStats features;
};

inline nlohmann::json to_json(const FidResult& r) {
  return {{"n_a", r.n_a}, {"n_b", r.n_b}, {"fid", r.fid}, {"ridge_applied", r.ridge_applied}};
}

inline FidResult compute_fid(const std::filesystem::path& set_a, const std::filesystem::path& set_b,
                             Backend& backend, const CropOptions& crop_options = {},
                             const std::optional<std::filesystem::path>& cache_dir = std::nullopt) {
  std::optional<FeatureCache> cache;
  if (cache_dir) {
    const BackendInfo info = backend.info();
    cache.emplace(*cache_dir, info.name + "/" + info.version);
  }
  FidResult r;
  const auto crops_a = person_crops(set_a, crop_options);
  const auto crops_b = person_crops(set_b, crop_options);
  const FidStats a =
      gaussian_stats(extract_features(backend, crops_a, cache ? &*cache : nullptr, &r.features));
  const FidStats b =
      gaussian_stats(extract_features(backend, crops_b, cache ? &*cache : nullptr, &r.features));
  const FrechetResult fr = frechet_distance_ex(a, b);
  r.n_a = a.n;
  r.n_b = b.n;
  r.fid = fr.distance;
  r.ridge_applied = fr.ridge_applied;
  return r;
}

}  // namespace genb
