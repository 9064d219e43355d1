#pragma once

#include <cmath>
#include <vector>

#include "tvqm/core.hpp"

namespace tvqm {

/// Per-pixel normalized depth error, same layout as the depth frame.
struct DeltaZField {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  bool same_shape(const DeltaZField& o) const {
    return width == o.width && height == o.height;
  }
};

struct FrameDistortions {
  double so = 0.0;
  double to = 0.0;
  double ti = 0.0;
  double so_cap_to = 0.0;
  double vqm = 0.0;
};

/// How to read the score formula's joint spatial-temporal outlier factor.
/// MaskedStd is the asserted behavior; the others are exploratory.
enum class JointOutlierMode { MaskedStd, Product, Min };

/// Ideal depth map recovered from the intensity mismatch between the
/// distortion-free view and the rendered view:
///   Z_ideal = s*Fv*B / (alpha*(I_o - I_v) + s*Fv*B/Z)
/// Intensities are plane-0 luma in [0,255]; depths are metric. The result
/// is clamped to [z_near, z_far].
inline std::vector<double> ideal_depth(const Frame& view_reference,
                                       const Frame& view_rendered,
                                       const DepthFrame& depth,
                                       const CameraParams& cam) {
  cam.validate();
  if (view_reference.width != view_rendered.width ||
      view_reference.height != view_rendered.height ||
      view_reference.width != depth.width || view_reference.height != depth.height)
    throw std::invalid_argument("ideal_depth: dimension mismatch");

  const double fvb = cam.focal_length * cam.baseline;
  const double s = static_cast<double>(cam.side_s);
  const double eps = 1e-9 * fvb;  // guards the pole where the alpha term cancels
  const std::size_t n = depth.values.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double di = static_cast<double>(view_reference.samples[i]) -
                      static_cast<double>(view_rendered.samples[i]);
    const double zm = metric_depth(depth.values[i], cam);
    double den = cam.alpha * di + s * fvb / zm;
    if (std::abs(den) < eps) den = (den != 0.0 ? (den > 0 ? 1.0 : -1.0) : s) * eps;
    out[i] = std::clamp(s * fvb / den, cam.z_near, cam.z_far);
  }
  return out;
}

/// (Z_ideal - Z) / (z_far - z_near), per pixel.
inline DeltaZField delta_z(const std::vector<double>& z_ideal, const DepthFrame& depth,
                           const CameraParams& cam) {
  if (z_ideal.size() != depth.values.size())
    throw std::invalid_argument("delta_z: dimension mismatch");
  DeltaZField out;
  out.width = depth.width;
  out.height = depth.height;
  out.values.resize(z_ideal.size());
  const double range = cam.z_far - cam.z_near;
  for (std::size_t i = 0; i < z_ideal.size(); ++i)
    out.values[i] = (z_ideal[i] - metric_depth(depth.values[i], cam)) / range;
  return out;
}

/// SO: standard deviation of the depth error field, clamped to [0,1].
inline double spatial_outliers(const DeltaZField& dz) {
  if (dz.values.empty()) throw std::invalid_argument("spatial_outliers: empty field");
  return clamp01(population_std(dz.values));
}

/// TO: standard deviation of the frame-to-frame change of the error field.
inline double temporal_outliers(const DeltaZField& dz_k, const DeltaZField& dz_prev) {
  if (!dz_k.same_shape(dz_prev))
    throw std::invalid_argument("temporal_outliers: dimension mismatch");
  std::vector<double> diff(dz_k.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff[i] = dz_k.values[i] - dz_prev.values[i];
  return clamp01(population_std(diff));
}

/// TI: standard deviation of the frame-to-frame change of the depth itself
/// (normalized codes).
inline double temporal_inconsistency(const DepthFrame& z_k, const DepthFrame& z_prev) {
  if (!z_k.same_shape(z_prev))
    throw std::invalid_argument("temporal_inconsistency: dimension mismatch");
  std::vector<double> diff(z_k.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff[i] = (static_cast<double>(z_k.values[i]) -
               static_cast<double>(z_prev.values[i])) / 255.0;
  return clamp01(population_std(diff));
}

/// Joint spatial-temporal outlier factor: STD of dz_k restricted to pixels
/// that are outliers both spatially (|dz_k| > t) and temporally
/// (|dz_k - dz_prev| > t). Fewer than 2 joint outliers -> 0.
inline double so_intersection_term(const DeltaZField& dz_k, const DeltaZField& dz_prev,
                                   double outlier_threshold,
                                   JointOutlierMode mode = JointOutlierMode::MaskedStd) {
  if (!dz_k.same_shape(dz_prev))
    throw std::invalid_argument("so_intersection_term: dimension mismatch");
  if (mode == JointOutlierMode::Product)
    return clamp01(spatial_outliers(dz_k) * temporal_outliers(dz_k, dz_prev));
  if (mode == JointOutlierMode::Min)
    return clamp01(std::min(spatial_outliers(dz_k), temporal_outliers(dz_k, dz_prev)));

  std::vector<double> joint;
  for (std::size_t i = 0; i < dz_k.values.size(); ++i) {
    const bool spatial = std::abs(dz_k.values[i]) > outlier_threshold;
    const bool temporal = std::abs(dz_k.values[i] - dz_prev.values[i]) > outlier_threshold;
    if (spatial && temporal) joint.push_back(dz_k.values[i]);
  }
  if (joint.size() < 2) return 0.0;
  return clamp01(population_std(joint));
}

/// 3VQM = K (1 - SO*(SO cap TO))^a (1 - TI)^b (1 - TO)^c.
inline double combine(double so, double so_cap_to, double ti, double to,
                      const VqmConstants& consts = {}) {
  consts.validate();
  for (double v : {so, so_cap_to, ti, to})
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("combine: inputs must lie in [0,1]");
  const double f1 = 1.0 - so * so_cap_to;
  return consts.scale_k * std::pow(f1, consts.exp_a) *
         std::pow(1.0 - ti, consts.exp_b) * std::pow(1.0 - to, consts.exp_c);
}

struct VqmOptions {
  VqmConstants constants;
  double outlier_threshold = 0.05;  // fraction of the depth range
  JointOutlierMode joint_mode = JointOutlierMode::MaskedStd;
};

inline FrameDistortions score_frame(const DeltaZField& dz_k, const DeltaZField* dz_prev,
                                    const DepthFrame& z_k, const DepthFrame* z_prev,
                                    const VqmOptions& opt) {
  FrameDistortions d;
  d.so = spatial_outliers(dz_k);
  if (dz_prev && z_prev) {
    d.to = temporal_outliers(dz_k, *dz_prev);
    d.ti = temporal_inconsistency(z_k, *z_prev);
    d.so_cap_to = so_intersection_term(dz_k, *dz_prev, opt.outlier_threshold, opt.joint_mode);
  }
  d.vqm = combine(d.so, d.so_cap_to, d.ti, d.to, opt.constants);
  return d;
}

/// Score a full sequence. Frame 0 has no predecessor; its temporal terms
/// are zero. Needs at least 2 frames.
inline ScoreSeries score_sequence(const std::vector<Frame>& reference_seq,
                                  const std::vector<Frame>& rendered_seq,
                                  const std::vector<DepthFrame>& depth_seq,
                                  const CameraParams& cam, const VqmOptions& opt = {}) {
  if (reference_seq.size() != rendered_seq.size() ||
      reference_seq.size() != depth_seq.size())
    throw std::invalid_argument("score_sequence: sequence length mismatch");
  if (reference_seq.size() < 2)
    throw std::invalid_argument("score_sequence: need at least 2 frames");

  std::vector<double> scores;
  scores.reserve(reference_seq.size());
  DeltaZField dz_prev;
  for (std::size_t k = 0; k < reference_seq.size(); ++k) {
    const auto zi = ideal_depth(reference_seq[k], rendered_seq[k], depth_seq[k], cam);
    DeltaZField dz = delta_z(zi, depth_seq[k], cam);
    const FrameDistortions d =
        k == 0 ? score_frame(dz, nullptr, depth_seq[k], nullptr, opt)
               : score_frame(dz, &dz_prev, depth_seq[k], &depth_seq[k - 1], opt);
    scores.push_back(d.vqm);
    dz_prev = std::move(dz);
  }
  return ScoreSeries::from_frames("3VQM", std::move(scores));
}

}  // namespace tvqm
