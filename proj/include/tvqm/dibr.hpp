#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "tvqm/core.hpp"

namespace tvqm {

/// Warped view plus the disocclusion mask. Masked pixels hold sentinel 0.
struct WarpResult {
  Frame virtual_view;
  std::vector<std::uint8_t> hole_mask;  // 1 = hole, per luma pixel

  bool has_holes() const {
    for (auto m : hole_mask)
      if (m) return true;
    return false;
  }
};

namespace detail {

inline int round_half_away(double x) {
  return static_cast<int>(x >= 0.0 ? std::floor(x + 0.5) : std::ceil(x - 0.5));
}

}  // namespace detail

/// Horizontal 3D warp: source pixel (x,y) lands at (x + s*d, y) with
/// d = round(F_v * B / Z).  Collisions keep the nearer pixel; equal depths
/// keep the larger source x.
inline WarpResult warp_view(const Frame& reference, const DepthFrame& depth,
                            const CameraParams& cam) {
  cam.validate();
  if (reference.width != depth.width || reference.height != depth.height)
    throw std::invalid_argument("warp_view: frame/depth dimension mismatch");

  const int w = reference.width, h = reference.height;
  WarpResult out;
  out.virtual_view = Frame(w, h, reference.channels, 0);
  out.hole_mask.assign(static_cast<std::size_t>(w) * h, 1);
  std::vector<double> zbuf(static_cast<std::size_t>(w) * h,
                           std::numeric_limits<double>::infinity());

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double z = metric_depth(depth.at(x, y), cam);
      const int d = detail::round_half_away(cam.focal_length * cam.baseline / z);
      const int tx = x + cam.side_s * d;
      if (tx < 0 || tx >= w) continue;
      const std::size_t idx = static_cast<std::size_t>(y) * w + tx;
      if (z <= zbuf[idx]) {  // x ascends, so ties go to the larger source x
        zbuf[idx] = z;
        for (int c = 0; c < reference.channels; ++c)
          out.virtual_view.at(tx, y, c) = reference.at(x, y, c);
        out.hole_mask[idx] = 0;
      }
    }
  }
  return out;
}

/// Hierarchical hole filling. Downsample-by-2 pyramid with hole-aware
/// averaging (a coarse pixel is a hole only when all children are holes),
/// then fill each hole from its parent, coarse to fine. Non-hole pixels
/// pass through bit-identical.
inline Frame hhf_fill(const WarpResult& warped, bool* all_holes_flag = nullptr) {
  const Frame& in = warped.virtual_view;
  const int w = in.width, h = in.height;
  if (warped.hole_mask.size() != static_cast<std::size_t>(w) * h)
    throw std::invalid_argument("hhf_fill: mask/frame dimension mismatch");
  if (all_holes_flag) *all_holes_flag = false;

  Frame out = in;
  bool any_hole = false;
  for (auto m : warped.hole_mask)
    if (m) { any_hole = true; break; }
  if (!any_hole) return out;

  struct Level {
    int w, h;
    std::vector<double> val;
    std::vector<std::uint8_t> hole;
  };

  for (int c = 0; c < in.channels; ++c) {
    std::vector<Level> pyr;
    Level base{w, h, std::vector<double>(static_cast<std::size_t>(w) * h),
               warped.hole_mask};
    for (std::size_t i = 0; i < base.val.size(); ++i)
      base.val[i] = in.samples[static_cast<std::size_t>(c) * in.plane_size() + i];
    pyr.push_back(std::move(base));

    while (true) {
      const Level& cur = pyr.back();
      bool holes = false;
      for (auto m : cur.hole)
        if (m) { holes = true; break; }
      if (!holes || (cur.w == 1 && cur.h == 1)) break;

      Level next;
      next.w = (cur.w + 1) / 2;
      next.h = (cur.h + 1) / 2;
      next.val.assign(static_cast<std::size_t>(next.w) * next.h, 0.0);
      next.hole.assign(next.val.size(), 0);
      for (int y = 0; y < next.h; ++y) {
        for (int x = 0; x < next.w; ++x) {
          double sum = 0.0;
          int n = 0;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const int sx = 2 * x + dx, sy = 2 * y + dy;
              if (sx >= cur.w || sy >= cur.h) continue;
              const std::size_t si = static_cast<std::size_t>(sy) * cur.w + sx;
              if (!cur.hole[si]) { sum += cur.val[si]; ++n; }
            }
          const std::size_t ni = static_cast<std::size_t>(y) * next.w + x;
          if (n > 0) next.val[ni] = sum / n;
          else next.hole[ni] = 1;
        }
      }
      pyr.push_back(std::move(next));
    }

    // Coarsest level may still carry holes (degenerate all-hole input).
    {
      Level& top = pyr.back();
      double sum = 0.0;
      int n = 0;
      for (std::size_t i = 0; i < top.val.size(); ++i)
        if (!top.hole[i]) { sum += top.val[i]; ++n; }
      const double fill = n > 0 ? sum / n : 0.0;
      if (n == 0 && all_holes_flag) *all_holes_flag = true;
      for (std::size_t i = 0; i < top.val.size(); ++i)
        if (top.hole[i]) { top.val[i] = fill; top.hole[i] = 0; }
    }

    for (int L = static_cast<int>(pyr.size()) - 2; L >= 0; --L) {
      Level& fine = pyr[L];
      const Level& coarse = pyr[L + 1];
      for (int y = 0; y < fine.h; ++y)
        for (int x = 0; x < fine.w; ++x) {
          const std::size_t fi = static_cast<std::size_t>(y) * fine.w + x;
          if (fine.hole[fi]) {
            fine.val[fi] = coarse.val[static_cast<std::size_t>(y / 2) * coarse.w + x / 2];
            fine.hole[fi] = 0;
          }
        }
    }

    const Level& filled = pyr.front();
    for (std::size_t i = 0; i < filled.val.size(); ++i)
      if (warped.hole_mask[i])
        out.samples[static_cast<std::size_t>(c) * out.plane_size() + i] =
            static_cast<std::uint8_t>(std::clamp(std::lround(filled.val[i]), 0L, 255L));
  }
  return out;
}

/// Warp + fill, frame by frame.
inline std::vector<Frame> render_sequence(const std::vector<Frame>& reference_seq,
                                          const std::vector<DepthFrame>& depth_seq,
                                          const CameraParams& cam) {
  if (reference_seq.size() != depth_seq.size())
    throw std::invalid_argument("render_sequence: sequence length mismatch");
  std::vector<Frame> out;
  out.reserve(reference_seq.size());
  for (std::size_t k = 0; k < reference_seq.size(); ++k)
    out.push_back(hhf_fill(warp_view(reference_seq[k], depth_seq[k], cam)));
  return out;
}

}  // namespace tvqm
