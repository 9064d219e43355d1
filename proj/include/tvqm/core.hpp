#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvqm {

/// Planar 8-bit image. Channel planes are stored back to back, row-major;
/// plane 0 is luma for 3-channel frames.
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> samples;

  Frame() = default;
  Frame(int w, int h, int c = 1, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        samples(static_cast<std::size_t>(w) * h * c, fill) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3))
      throw std::invalid_argument("Frame: bad dimensions");
  }

  std::size_t plane_size() const { return static_cast<std::size_t>(width) * height; }

  std::uint8_t at(int x, int y, int c = 0) const {
    return samples[static_cast<std::size_t>(c) * plane_size() +
                   static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return samples[static_cast<std::size_t>(c) * plane_size() +
                   static_cast<std::size_t>(y) * width + x];
  }

  bool same_shape(const Frame& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

/// Quantized inverse-depth map, one byte per pixel. Code 255 is nearest,
/// code 0 is farthest.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  DepthFrame() = default;
  DepthFrame(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("DepthFrame: bad dimensions");
  }

  std::uint8_t at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return values[static_cast<std::size_t>(y) * width + x];
  }

  bool same_shape(const DepthFrame& o) const {
    return width == o.width && height == o.height;
  }
};

/// Rectified horizontal-baseline camera pair.  side_s is +1 when the virtual
/// view sits to the right of the reference, -1 for left.
struct CameraParams {
  double focal_length = 500.0;   // pixels
  double baseline = 0.05;        // meters
  int side_s = +1;
  double alpha = 120.0;
  double z_near = 0.3;           // meters
  double z_far = 10.0;           // meters

  void validate() const {
    if (side_s != 1 && side_s != -1)
      throw std::invalid_argument("CameraParams: side_s must be +1 or -1");
    if (!(z_near > 0.0 && z_near < z_far))
      throw std::invalid_argument("CameraParams: need 0 < z_near < z_far");
    if (!(focal_length > 0.0 && baseline > 0.0 && alpha > 0.0))
      throw std::invalid_argument("CameraParams: focal_length, baseline, alpha must be > 0");
  }
};

struct VqmConstants {
  double scale_k = 5.0;
  int exp_a = 8;
  int exp_b = 8;
  int exp_c = 6;

  void validate() const {
    if (!(scale_k > 0.0) || exp_a <= 0 || exp_b <= 0 || exp_c <= 0)
      throw std::invalid_argument("VqmConstants: K > 0 and positive exponents required");
  }
};

/// Per-frame scores of one metric over a sequence plus the mean aggregate.
struct ScoreSeries {
  std::string metric_name;
  std::vector<double> per_frame;
  double aggregate = 0.0;

  static ScoreSeries from_frames(std::string name, std::vector<double> scores) {
    if (scores.empty())
      throw std::invalid_argument("ScoreSeries: per_frame must be nonempty");
    ScoreSeries s;
    s.metric_name = std::move(name);
    s.aggregate = std::accumulate(scores.begin(), scores.end(), 0.0) /
                  static_cast<double>(scores.size());
    s.per_frame = std::move(scores);
    return s;
  }
};

/// Dequantize an 8-bit depth code to metric depth.
/// 1/Z = (v/255)(1/z_near - 1/z_far) + 1/z_far, so v=255 -> z_near, v=0 -> z_far.
inline double metric_depth(std::uint8_t code, const CameraParams& cam) {
  const double t = static_cast<double>(code) / 255.0;
  const double inv_z = t * (1.0 / cam.z_near - 1.0 / cam.z_far) + 1.0 / cam.z_far;
  return 1.0 / inv_z;
}

/// Map depth codes to [0,1] (code/255).
inline std::vector<double> normalize_depth(const DepthFrame& z) {
  std::vector<double> out(z.values.size());
  std::transform(z.values.begin(), z.values.end(), out.begin(),
                 [](std::uint8_t v) { return static_cast<double>(v) / 255.0; });
  return out;
}

/// Population standard deviation (divide by N), 64-bit throughout.
inline double population_std(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double acc = 0.0;
  for (double x : v) {
    const double d = x - mean;
    acc += d * d;
  }
  return std::sqrt(acc / n);
}

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace tvqm
