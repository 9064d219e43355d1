#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "tvqm/core.hpp"

namespace tvqm {

inline constexpr double kPsnrCapDb = 100.0;  // reported for zero MSE

/// Luma-plane PSNR in dB, capped at 100 dB for identical frames.
inline double psnr(const Frame& a, const Frame& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("psnr: dimension mismatch");
  double acc = 0.0;
  const std::size_t n = a.plane_size();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a.samples[i]) - static_cast<double>(b.samples[i]);
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(n);
  if (mse == 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(255.0 * 255.0 / mse));
}

/// Weighted mean of per-view PSNR scores.
inline double weighted_psnr(const std::vector<std::pair<double, double>>& view_scores) {
  double num = 0.0, den = 0.0;
  for (const auto& [score, weight] : view_scores) {
    if (weight < 0.0) throw std::invalid_argument("weighted_psnr: negative weight");
    num += score * weight;
    den += weight;
  }
  if (den <= 0.0) throw std::invalid_argument("weighted_psnr: weights sum to zero");
  return num / den;
}

struct SsimSpec {
  int window = 8;
  bool gaussian_window = false;   // 11-tap sigma-1.5 weighting when set
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }

  void validate() const {
    if (window < 2) throw std::invalid_argument("SsimSpec: window must be >= 2");
    if (!(c1() > 0.0 && c2() > 0.0))
      throw std::invalid_argument("SsimSpec: stabilization constants must be positive");
  }
};

/// Mean SSIM over sliding windows (stride 1) of the luma plane.
inline double ssim(const Frame& a, const Frame& b, const SsimSpec& spec = {}) {
  spec.validate();
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("ssim: dimension mismatch");
  if (a.width < spec.window || a.height < spec.window)
    throw std::invalid_argument("ssim: frame smaller than window");

  const int n = spec.window;
  std::vector<double> weight(static_cast<std::size_t>(n) * n, 1.0 / (n * n));
  if (spec.gaussian_window) {
    const double sigma = 1.5;
    double sum = 0.0;
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const double dx = x - (n - 1) / 2.0, dy = y - (n - 1) / 2.0;
        const double wv = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        weight[static_cast<std::size_t>(y) * n + x] = wv;
        sum += wv;
      }
    for (double& wv : weight) wv /= sum;
  }

  const double c1 = spec.c1(), c2 = spec.c2();
  double total = 0.0;
  std::size_t windows = 0;
  for (int wy = 0; wy + n <= a.height; ++wy)
    for (int wx = 0; wx + n <= a.width; ++wx) {
      double mu_a = 0.0, mu_b = 0.0;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          const double wv = weight[static_cast<std::size_t>(y) * n + x];
          mu_a += wv * a.at(wx + x, wy + y);
          mu_b += wv * b.at(wx + x, wy + y);
        }
      double var_a = 0.0, var_b = 0.0, cov = 0.0;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          const double wv = weight[static_cast<std::size_t>(y) * n + x];
          const double da = a.at(wx + x, wy + y) - mu_a;
          const double db = b.at(wx + x, wy + y) - mu_b;
          var_a += wv * da * da;
          var_b += wv * db * db;
          cov += wv * da * db;
        }
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++windows;
    }
  return total / static_cast<double>(windows);
}

/// Apply a per-frame metric across two sequences and aggregate by mean.
inline ScoreSeries sequence_metric(const std::vector<Frame>& seq_a,
                                   const std::vector<Frame>& seq_b,
                                   const std::string& name,
                                   const std::function<double(const Frame&, const Frame&)>& metric) {
  if (seq_a.size() != seq_b.size())
    throw std::invalid_argument("sequence_metric: sequence length mismatch");
  std::vector<double> scores;
  scores.reserve(seq_a.size());
  for (std::size_t k = 0; k < seq_a.size(); ++k)
    scores.push_back(metric(seq_a[k], seq_b[k]));
  return ScoreSeries::from_frames(name, std::move(scores));
}

}  // namespace tvqm
