#pragma once

// Shared fixtures and test-only reference implementations. Everything here
// is independent of the library code paths it is used to check.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tvqm/core.hpp"

namespace fixtures {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint8_t random_byte(std::mt19937_64& rng) {
  return static_cast<std::uint8_t>(rng() % 256);
}

/// Two-pass Welford standard deviation (population), the STD oracle.
inline double welford_std(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  return std::sqrt(m2 / static_cast<double>(n));
}

/// High-frequency deterministic texture.
inline tvqm::Frame textured_frame(int w, int h, int phase = 0) {
  tvqm::Frame f(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = 127.5 + 60.0 * std::sin(0.9 * x + 0.25 * phase) +
                       50.0 * std::cos(1.3 * y - 0.15 * phase) +
                       17.0 * std::sin(0.5 * (x + 2 * y));
      f.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  return f;
}

/// Smooth diagonal depth ramp, codes kept in a narrow band so warping
/// disparities stay small.
inline tvqm::DepthFrame smooth_depth(int w, int h, int lo = 100, int hi = 140) {
  tvqm::DepthFrame d(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double t = static_cast<double>(x + y) / (w + h - 2);
      d.at(x, y) = static_cast<std::uint8_t>(std::lround(lo + t * (hi - lo)));
    }
  return d;
}

inline tvqm::Frame random_frame(int w, int h, std::mt19937_64& rng) {
  tvqm::Frame f(w, h, 1);
  for (auto& s : f.samples) s = random_byte(rng);
  return f;
}

inline tvqm::DepthFrame random_depth(int w, int h, std::mt19937_64& rng) {
  tvqm::DepthFrame d(w, h);
  for (auto& v : d.values) v = random_byte(rng);
  return d;
}

/// Camera tuned so the full code range maps to a handful of pixels of
/// disparity on small fixtures.
inline tvqm::CameraParams test_camera() {
  tvqm::CameraParams cam;
  cam.focal_length = 60.0;
  cam.baseline = 0.05;  // Fv*B = 3.0 -> disparity 0.3..10 px over [0.3,10] m
  cam.side_s = +1;
  cam.alpha = 120.0;
  cam.z_near = 0.3;
  cam.z_far = 10.0;
  return cam;
}

}  // namespace fixtures
