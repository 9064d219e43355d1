#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "tvqm/core.hpp"

namespace tvqm {

struct BlurSpec {
  int kernel_size = 7;  // odd
  double sigma = 2.0;

  void validate() const {
    if (kernel_size < 1 || kernel_size % 2 == 0)
      throw std::invalid_argument("BlurSpec: kernel_size must be odd and >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("BlurSpec: sigma must be > 0");
  }
};

struct CompressSpec {
  int qp = 28;

  void validate() const {
    if (qp < 0 || qp > 51) throw std::invalid_argument("CompressSpec: qp must be in [0,51]");
  }
};

/// Two-state Gilbert-Elliott channel. Stationary loss rate is
/// p_gb / (p_gb + p_bg) when the sum is positive.
struct ChannelSpec {
  double p_good_to_bad = 0.0;
  double p_bad_to_good = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(p_good_to_bad >= 0.0 && p_good_to_bad <= 1.0) ||
        !(p_bad_to_good >= 0.0 && p_bad_to_good <= 1.0))
      throw std::invalid_argument("ChannelSpec: probabilities must lie in [0,1]");
  }

  double stationary_loss_rate() const {
    const double sum = p_good_to_bad + p_bad_to_good;
    return sum > 0.0 ? p_good_to_bad / sum : 0.0;
  }
};

enum class LossPolicy { ZeroFrame, FreezePrevious };

namespace detail {

inline std::vector<double> gaussian_kernel(const BlurSpec& spec) {
  spec.validate();
  const int r = spec.kernel_size / 2;
  std::vector<double> k(spec.kernel_size);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * (i * i) / (spec.sigma * spec.sigma));
    sum += k[i + r];
  }
  for (double& v : k) v /= sum;
  return k;
}

/// Uniform double in [0,1) from the top 53 bits; keeps the channel
/// reproducible across standard library implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Separable Gaussian blur, clamp-to-edge, applied per plane.
inline Frame gaussian_blur(const Frame& frame, const BlurSpec& spec) {
  spec.validate();
  const auto kernel = detail::gaussian_kernel(spec);
  const int r = spec.kernel_size / 2;
  const int w = frame.width, h = frame.height;
  Frame out = frame;
  std::vector<double> tmp(frame.plane_size());
  for (int c = 0; c < frame.channels; ++c) {
    const std::size_t base = static_cast<std::size_t>(c) * frame.plane_size();
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) {
          const int sx = std::clamp(x + i, 0, w - 1);
          acc += kernel[i + r] * frame.samples[base + static_cast<std::size_t>(y) * w + sx];
        }
        tmp[static_cast<std::size_t>(y) * w + x] = acc;
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) {
          const int sy = std::clamp(y + i, 0, h - 1);
          acc += kernel[i + r] * tmp[static_cast<std::size_t>(sy) * w + x];
        }
        out.samples[base + static_cast<std::size_t>(y) * w + x] =
            static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
      }
  }
  return out;
}

inline std::vector<DepthFrame> blur_depth_sequence(const std::vector<DepthFrame>& seq,
                                                   const BlurSpec& spec) {
  std::vector<DepthFrame> out;
  out.reserve(seq.size());
  for (const DepthFrame& d : seq) {
    Frame f(d.width, d.height, 1);
    f.samples = d.values;
    f = gaussian_blur(f, spec);
    DepthFrame b(d.width, d.height);
    b.values = std::move(f.samples);
    out.push_back(std::move(b));
  }
  return out;
}

namespace detail {

// Orthonormal 8x8 DCT-II basis.
struct DctBasis8 {
  std::array<std::array<double, 8>, 8> c{};
  DctBasis8() {
    for (int k = 0; k < 8; ++k)
      for (int n = 0; n < 8; ++n)
        c[k][n] = (k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0)) *
                  std::cos(std::numbers::pi * (2 * n + 1) * k / 16.0);
  }
};

inline const DctBasis8& dct_basis() {
  static const DctBasis8 basis;
  return basis;
}

}  // namespace detail

/// Intra-only compression proxy: 8x8 block DCT, uniform quantization of the
/// AC coefficients with step q = 2^((qp-4)/6), dequantize, inverse DCT. The
/// DC coefficient passes through so flat regions survive any qp. Edge blocks
/// are padded by replication.
inline Frame compress_proxy(const Frame& frame, const CompressSpec& spec) {
  spec.validate();
  const double q = std::exp2((spec.qp - 4) / 6.0);
  const auto& basis = detail::dct_basis().c;
  const int w = frame.width, h = frame.height;
  Frame out = frame;
  for (int c = 0; c < frame.channels; ++c) {
    const std::size_t base = static_cast<std::size_t>(c) * frame.plane_size();
    for (int by = 0; by < h; by += 8)
      for (int bx = 0; bx < w; bx += 8) {
        double blk[8][8], coef[8][8];
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            const int sx = std::min(bx + x, w - 1), sy = std::min(by + y, h - 1);
            blk[y][x] = frame.samples[base + static_cast<std::size_t>(sy) * w + sx] - 128.0;
          }
        for (int u = 0; u < 8; ++u)
          for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y)
              for (int x = 0; x < 8; ++x) acc += basis[u][y] * basis[v][x] * blk[y][x];
            coef[u][v] = (u == 0 && v == 0) ? acc : std::round(acc / q) * q;
          }
        for (int y = 0; y < 8 && by + y < h; ++y)
          for (int x = 0; x < 8 && bx + x < w; ++x) {
            double acc = 0.0;
            for (int u = 0; u < 8; ++u)
              for (int v = 0; v < 8; ++v) acc += basis[u][y] * basis[v][x] * coef[u][v];
            out.samples[base + static_cast<std::size_t>(by + y) * w + bx + x] =
                static_cast<std::uint8_t>(std::clamp(std::lround(acc + 128.0), 0L, 255L));
          }
      }
  }
  return out;
}

/// One Markov step per frame, starting from Good; a frame is lost when the
/// chain sits in Bad after its step.
inline std::vector<std::uint8_t> simulate_loss_mask(std::size_t frame_count,
                                                    const ChannelSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<std::uint8_t> mask(frame_count, 0);
  bool bad = false;
  for (std::size_t k = 0; k < frame_count; ++k) {
    const double u = detail::uniform01(rng);
    bad = bad ? !(u < spec.p_bad_to_good) : (u < spec.p_good_to_bad);
    mask[k] = bad ? 1 : 0;
  }
  return mask;
}

struct LossResult {
  std::vector<Frame> frames;
  std::vector<std::uint8_t> loss_mask;
};

/// Frame-per-packet Gilbert-Elliott loss. Lost frames are replaced per
/// policy (zero frame or freeze previous), no concealment beyond that.
inline LossResult gilbert_elliot_loss(const std::vector<Frame>& seq, const ChannelSpec& spec,
                                      LossPolicy policy = LossPolicy::ZeroFrame) {
  if (seq.empty()) throw std::invalid_argument("gilbert_elliot_loss: empty sequence");
  LossResult out;
  out.loss_mask = simulate_loss_mask(seq.size(), spec);
  out.frames.reserve(seq.size());
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (!out.loss_mask[k]) {
      out.frames.push_back(seq[k]);
    } else if (policy == LossPolicy::FreezePrevious && k > 0) {
      out.frames.push_back(out.frames[k - 1]);
    } else {
      out.frames.emplace_back(seq[k].width, seq[k].height, seq[k].channels, 0);
    }
  }
  return out;
}

/// Invert the stationary-rate formula for a target loss rate and mean burst
/// length: p_bg = 1/burst, p_gb = rate * p_bg / (1 - rate).
inline ChannelSpec make_channel_for_rate(double target_rate, double mean_burst_length,
                                         std::uint64_t seed) {
  if (!(target_rate > 0.0 && target_rate < 1.0))
    throw std::invalid_argument("make_channel_for_rate: rate must lie in (0,1)");
  if (!(mean_burst_length >= 1.0))
    throw std::invalid_argument("make_channel_for_rate: mean burst length must be >= 1");
  ChannelSpec spec;
  spec.p_bad_to_good = 1.0 / mean_burst_length;
  spec.p_good_to_bad = target_rate * spec.p_bad_to_good / (1.0 - target_rate);
  spec.seed = seed;
  spec.validate();
  return spec;
}

}  // namespace tvqm
