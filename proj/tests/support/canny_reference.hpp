#pragma once

// Reference Canny for exact-match tests. Blur and Sobel use the same arithmetic as the
// library (a one-ulp difference would flip ties in suppression); direction binning is done
// with atan2 angles and hysteresis by connected-component labeling.

#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

#include "genb/image.hpp"

namespace genb::testing {

inline Mask reference_canny(const ImageF& img, double sigma, int ksize, double low, double high) {
  const int w = img.width(), h = img.height(), r = ksize / 2;
  std::vector<double> k(static_cast<std::size_t>(ksize));
  double ksum = 0.0;
  for (int i = 0; i < ksize; ++i) {
    k[i] = std::exp(-((i - r) * (i - r)) / (2.0 * sigma * sigma));
    ksum += k[i];
  }
  for (auto& v : k) v /= ksum;
  auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };

  std::vector<std::vector<double>> rows(h, std::vector<double>(w)), blur(h, std::vector<double>(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < ksize; ++i) acc += k[i] * img.at(clampi(x + i - r, 0, w - 1), y);
      rows[y][x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < ksize; ++i) acc += k[i] * rows[clampi(y + i - r, 0, h - 1)][x];
      blur[y][x] = acc;
    }
  }
  auto b = [&](int x, int y) { return blur[clampi(y, 0, h - 1)][clampi(x, 0, w - 1)]; };

  std::vector<std::vector<double>> mag(h, std::vector<double>(w)), ang(h, std::vector<double>(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = ((b(x + 1, y - 1) + 2.0 * b(x + 1, y) + b(x + 1, y + 1)) -
                         (b(x - 1, y - 1) + 2.0 * b(x - 1, y) + b(x - 1, y + 1))) / 8.0;
      const double gy = ((b(x - 1, y + 1) + 2.0 * b(x, y + 1) + b(x + 1, y + 1)) -
                         (b(x - 1, y - 1) + 2.0 * b(x, y - 1) + b(x + 1, y - 1))) / 8.0;
      mag[y][x] = std::hypot(gx, gy);
      double deg = std::atan2(gy, gx) * 180.0 / M_PI;
      if (deg < 0) deg += 180.0;
      if (deg >= 180.0) deg -= 180.0;
      ang[y][x] = deg;
    }
  }
  auto m = [&](int x, int y) { return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : mag[y][x]; };

  // Candidate classes: 0 none, 1 weak, 2 strong.
  std::vector<std::vector<int>> cls(h, std::vector<int>(w, 0));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = mag[y][x], a = ang[y][x];
      if (v <= low) continue;
      bool peak;
      if (a <= 22.5 || a >= 157.5) {
        peak = v > m(x - 1, y) && v >= m(x + 1, y);
      } else if (a >= 67.5 && a <= 112.5) {
        peak = v > m(x, y - 1) && v >= m(x, y + 1);
      } else if (a < 67.5) {
        peak = v > m(x - 1, y - 1) && v > m(x + 1, y + 1);
      } else {
        peak = v > m(x + 1, y - 1) && v > m(x - 1, y + 1);
      }
      if (peak) cls[y][x] = v > high ? 2 : 1;
    }
  }

  Mask out(w, h);
  std::vector<std::vector<int>> comp(h, std::vector<int>(w, -1));
  int next = 0;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      if (cls[y0][x0] == 0 || comp[y0][x0] >= 0) continue;
      std::vector<std::pair<int, int>> members;
      std::deque<std::pair<int, int>> queue{{x0, y0}};
      comp[y0][x0] = next;
      bool strong = false;
      while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        members.emplace_back(x, y);
        strong = strong || cls[y][x] == 2;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (cls[ny][nx] == 0 || comp[ny][nx] >= 0) continue;
            comp[ny][nx] = next;
            queue.emplace_back(nx, ny);
          }
        }
      }
      if (strong) {
        for (auto [x, y] : members) out.at(x, y) = 1;
      }
      ++next;
    }
  }
  return out;
}

}  // namespace genb::testing
