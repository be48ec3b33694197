#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

namespace genb {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a parent seed and a tag.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) {
  return splitmix64(parent ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
}

namespace detail {

// Ziggurat tables, 128 layers.
struct ZigguratTables {
  std::array<std::uint32_t, 128> kn{};
  std::array<double, 128> wn{};
  std::array<double, 128> fn{};

  ZigguratTables() {
    constexpr double m1 = 2147483648.0;
    constexpr double vn = 9.91256303526217e-3;
    double dn = 3.442619855899, tn = dn;
    const double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
    kn[1] = 0;
    wn[0] = q / m1;
    wn[127] = dn / m1;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m1;
    }
  }
};

inline const ZigguratTables& ziggurat_tables() {
  static const ZigguratTables tables;
  return tables;
}

inline double unit_open(std::uint64_t h) {
  return ((h >> 11) + 1) * (1.0 / 9007199254740992.0);  // (0, 1]
}

inline double ziggurat_slow(std::uint64_t h, const ZigguratTables& t) {
  constexpr double r = 3.442620;
  for (;;) {
    const auto hz = static_cast<std::int32_t>(h >> 32);
    const auto iz = static_cast<int>(h & 127);
    if (static_cast<std::uint32_t>(hz < 0 ? -static_cast<std::int64_t>(hz) : hz) < t.kn[iz]) {
      return hz * t.wn[iz];
    }
    const double x = hz * t.wn[iz];
    if (iz == 0) {
      double tail = 0.0, y = 0.0;
      do {
        h = splitmix64(h);
        tail = -std::log(unit_open(h)) / r;
        h = splitmix64(h);
        y = -std::log(unit_open(h));
      } while (y + y < tail * tail);
      return hz > 0 ? r + tail : -r - tail;
    }
    h = splitmix64(h);
    if (t.fn[iz] + unit_open(h) * (t.fn[iz - 1] - t.fn[iz]) < std::exp(-0.5 * x * x)) return x;
    h = splitmix64(h);
  }
}

}  // namespace detail

/// Standard normal for position `index` of stream `seed` (ziggurat over a counter-based hash).
inline double standard_normal_at(std::uint64_t seed, std::uint64_t index) {
  const auto& t = detail::ziggurat_tables();
  const std::uint64_t h = splitmix64(seed + index * 0x9e3779b97f4a7c15ULL);
  const auto hz = static_cast<std::int32_t>(h >> 32);
  const auto iz = static_cast<int>(h & 127);
  if (static_cast<std::uint32_t>(hz < 0 ? -static_cast<std::int64_t>(hz) : hz) < t.kn[iz]) {
    return hz * t.wn[iz];
  }
  return detail::ziggurat_slow(h, t);
}

/// Fills `out` with i.i.d. standard normals. Value i depends only on (seed, i), so the
/// stream is portable across standard libraries and independent of buffer size.
inline void fill_standard_normal(std::uint64_t seed, std::span<float> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(standard_normal_at(seed, i));
  }
}

}  // namespace genb
