#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tvqm/core.hpp"
#include "tvqm/dibr.hpp"
#include "tvqm/distortion.hpp"
#include "tvqm/metrics.hpp"
#include "tvqm/validation.hpp"
#include "tvqm/video_io.hpp"
#include "tvqm/vqm.hpp"

namespace tvqm {

// Exit-code carriers for the CLI: 2 config, 3 data, 4 numeric degeneracy.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Distortion spec strings: blur:K:SIGMA | qp:QP | loss:RATE[:burstB][:seedS] | none

struct DistortionSpec {
  enum class Kind { None, Blur, Compress, Loss } kind = Kind::None;
  BlurSpec blur;
  CompressSpec compress;
  double loss_rate = 0.0;
  double burst_length = 1.0;
  std::uint64_t seed = 0;
  std::string text;  // the original spec string

  std::string kind_name() const {
    switch (kind) {
      case Kind::Blur: return "blur";
      case Kind::Compress: return "qp";
      case Kind::Loss: return "loss";
      default: return "none";
    }
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) { out.push_back(cur); cur.clear(); }
    else cur += c;
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_num(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty())
    throw ConfigError("invalid number '" + s + "' in " + what);
  return v;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

inline DistortionSpec parse_distortion_spec(const std::string& text) {
  DistortionSpec spec;
  spec.text = text;
  const auto parts = detail::split(text, ':');
  const std::string& head = parts[0];
  if (head == "none") {
    if (parts.size() != 1) throw ConfigError("'none' takes no parameters: " + text);
    return spec;
  }
  if (head == "blur") {
    if (parts.size() != 3) throw ConfigError("expected blur:KERNEL:SIGMA, got " + text);
    spec.kind = DistortionSpec::Kind::Blur;
    spec.blur.kernel_size = static_cast<int>(detail::parse_num(parts[1], text));
    spec.blur.sigma = detail::parse_num(parts[2], text);
    try { spec.blur.validate(); } catch (const std::exception& e) { throw ConfigError(e.what()); }
    return spec;
  }
  if (head == "qp") {
    if (parts.size() != 2) throw ConfigError("expected qp:QP, got " + text);
    spec.kind = DistortionSpec::Kind::Compress;
    spec.compress.qp = static_cast<int>(detail::parse_num(parts[1], text));
    try { spec.compress.validate(); } catch (const std::exception& e) { throw ConfigError(e.what()); }
    return spec;
  }
  if (head == "loss") {
    if (parts.size() < 2 || parts.size() > 4)
      throw ConfigError("expected loss:RATE[:burstB][:seedS], got " + text);
    spec.kind = DistortionSpec::Kind::Loss;
    spec.loss_rate = detail::parse_num(parts[1], text);
    if (!(spec.loss_rate > 0.0 && spec.loss_rate < 1.0))
      throw ConfigError("loss rate must lie in (0,1): " + text);
    for (std::size_t i = 2; i < parts.size(); ++i) {
      const std::string& p = parts[i];
      if (p.rfind("burst", 0) == 0)
        spec.burst_length = detail::parse_num(p.substr(5), text);
      else if (p.rfind("seed", 0) == 0)
        spec.seed = static_cast<std::uint64_t>(detail::parse_num(p.substr(4), text));
      else
        throw ConfigError("unknown loss parameter '" + p + "' in " + text);
    }
    if (!(spec.burst_length >= 1.0))
      throw ConfigError("burst length must be >= 1: " + text);
    return spec;
  }
  throw ConfigError("unknown distortion kind '" + head + "' in " + text);
}

// ---------------------------------------------------------------------------
// Experiment configuration (flat key = value text file)

enum class DegradedChannel { Depth, Color };

struct ExperimentConfig {
  std::string sequence_id = "sequence";
  SequenceDescriptor ref_video;
  SequenceDescriptor depth;
  CameraParams cam;
  VqmOptions vqm;
  std::vector<DistortionSpec> distortions;
  std::vector<std::string> metrics{"3vqm", "psnr"};
  DegradedChannel channel = DegradedChannel::Depth;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
};

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    kv[detail::trim(t.substr(0, eq))] = detail::trim(t.substr(eq + 1));
  }

  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    return it == kv.end() ? std::nullopt : std::optional<std::string>(it->second);
  };
  auto require = [&](const std::string& key) {
    const auto v = get(key);
    if (!v) throw ConfigError(path + ": missing required key '" + key + "'");
    return *v;
  };
  auto num = [&](const std::string& key, double fallback) {
    const auto v = get(key);
    return v ? detail::parse_num(*v, key) : fallback;
  };

  ExperimentConfig cfg;
  if (const auto v = get("sequence_id")) cfg.sequence_id = *v;

  cfg.ref_video.path = require("ref_video");
  cfg.depth.path = require("depth");
  cfg.ref_video.width = cfg.depth.width = static_cast<int>(detail::parse_num(require("width"), "width"));
  cfg.ref_video.height = cfg.depth.height = static_cast<int>(detail::parse_num(require("height"), "height"));
  cfg.ref_video.frame_count = cfg.depth.frame_count =
      static_cast<int>(detail::parse_num(require("frames"), "frames"));
  const std::string fmt = get("pixel_format").value_or("luma");
  if (fmt == "luma") cfg.ref_video.pixel_format = PixelFormat::Luma;
  else if (fmt == "yuv420") cfg.ref_video.pixel_format = PixelFormat::Yuv420;
  else throw ConfigError("pixel_format must be luma or yuv420, got " + fmt);
  cfg.ref_video.fps = cfg.depth.fps = num("fps", 0.0);

  cfg.cam.focal_length = num("cam.focal_length", cfg.cam.focal_length);
  cfg.cam.baseline = num("cam.baseline", cfg.cam.baseline);
  cfg.cam.side_s = static_cast<int>(num("cam.side", cfg.cam.side_s));
  cfg.cam.alpha = num("cam.alpha", cfg.cam.alpha);
  cfg.cam.z_near = num("cam.z_near", cfg.cam.z_near);
  cfg.cam.z_far = num("cam.z_far", cfg.cam.z_far);
  try { cfg.cam.validate(); } catch (const std::exception& e) { throw ConfigError(e.what()); }

  cfg.vqm.constants.scale_k = num("vqm.k", cfg.vqm.constants.scale_k);
  cfg.vqm.constants.exp_a = static_cast<int>(num("vqm.a", cfg.vqm.constants.exp_a));
  cfg.vqm.constants.exp_b = static_cast<int>(num("vqm.b", cfg.vqm.constants.exp_b));
  cfg.vqm.constants.exp_c = static_cast<int>(num("vqm.c", cfg.vqm.constants.exp_c));
  cfg.vqm.outlier_threshold = num("vqm.threshold", cfg.vqm.outlier_threshold);
  const std::string joint = get("vqm.joint_mode").value_or("masked_std");
  if (joint == "masked_std") cfg.vqm.joint_mode = JointOutlierMode::MaskedStd;
  else if (joint == "product") cfg.vqm.joint_mode = JointOutlierMode::Product;
  else if (joint == "min") cfg.vqm.joint_mode = JointOutlierMode::Min;
  else throw ConfigError("vqm.joint_mode must be masked_std, product or min");

  if (const auto v = get("distortions"); v && !detail::trim(*v).empty())
    for (const auto& s : detail::split(*v, ','))
      cfg.distortions.push_back(parse_distortion_spec(detail::trim(s)));

  if (const auto v = get("metrics")) {
    cfg.metrics.clear();
    for (const auto& s : detail::split(*v, ','))
      cfg.metrics.push_back(detail::trim(s));
  }
  if (cfg.metrics.empty()) throw ConfigError("metric list must be nonempty");

  const std::string ch = get("channel").value_or("depth");
  if (ch == "depth") cfg.channel = DegradedChannel::Depth;
  else if (ch == "color") cfg.channel = DegradedChannel::Color;
  else throw ConfigError("channel must be depth or color, got " + ch);

  if (const auto v = get("out_dir")) cfg.out_dir = *v;
  cfg.seed = static_cast<std::uint64_t>(num("seed", 0.0));
  return cfg;
}

// ---------------------------------------------------------------------------
// Degradation jobs

/// Per-job seed derived from the config seed, the job index, and any
/// explicit spec seed; stable under job reordering of unrelated jobs.
inline std::uint64_t job_seed(const ExperimentConfig& cfg, std::size_t job_index,
                              const DistortionSpec& spec) {
  return detail::splitmix64(cfg.seed ^ detail::splitmix64(job_index) ^
                            detail::splitmix64(spec.seed));
}

struct DegradedData {
  std::vector<Frame> color;
  std::vector<DepthFrame> depth;
};

inline DegradedData apply_distortion(const std::vector<Frame>& color,
                                     const std::vector<DepthFrame>& depth,
                                     const DistortionSpec& spec, DegradedChannel channel,
                                     std::uint64_t seed) {
  DegradedData out{color, depth};
  switch (spec.kind) {
    case DistortionSpec::Kind::None:
      break;
    case DistortionSpec::Kind::Blur:
      if (channel == DegradedChannel::Depth)
        out.depth = blur_depth_sequence(depth, spec.blur);
      else
        for (Frame& f : out.color) f = gaussian_blur(f, spec.blur);
      break;
    case DistortionSpec::Kind::Compress:
      if (channel == DegradedChannel::Depth) {
        for (DepthFrame& d : out.depth) {
          Frame f(d.width, d.height, 1);
          f.samples = d.values;
          d.values = compress_proxy(f, spec.compress).samples;
        }
      } else {
        for (Frame& f : out.color) f = compress_proxy(f, spec.compress);
      }
      break;
    case DistortionSpec::Kind::Loss: {
      const ChannelSpec ch = make_channel_for_rate(spec.loss_rate, spec.burst_length, seed);
      if (channel == DegradedChannel::Depth) {
        const auto mask = simulate_loss_mask(depth.size(), ch);
        for (std::size_t k = 0; k < depth.size(); ++k)
          if (mask[k]) out.depth[k] = DepthFrame(depth[k].width, depth[k].height, 0);
      } else {
        out.color = gilbert_elliot_loss(color, ch).frames;
      }
      break;
    }
  }
  return out;
}

namespace detail {

inline std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

inline std::vector<Frame> load_color_checked(const ExperimentConfig& cfg) {
  try {
    return load_video(cfg.ref_video);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

inline std::vector<DepthFrame> load_depth_checked(const ExperimentConfig& cfg) {
  try {
    return load_depth(cfg.depth);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

}  // namespace detail

/// degrade: write one degraded video or depth file per spec plus a manifest.
inline std::filesystem::path cmd_degrade(const ExperimentConfig& cfg) {
  const auto color = detail::load_color_checked(cfg);
  const auto depth = detail::load_depth_checked(cfg);
  std::filesystem::create_directories(cfg.out_dir);

  CsvTable manifest;
  manifest.header = {"output", "channel", "distortion", "level", "seed"};
  for (std::size_t i = 0; i < cfg.distortions.size(); ++i) {
    const DistortionSpec& spec = cfg.distortions[i];
    const std::uint64_t seed = job_seed(cfg, i, spec);
    const DegradedData deg = apply_distortion(color, depth, spec, cfg.channel, seed);
    const bool is_depth = cfg.channel == DegradedChannel::Depth;
    const std::string name = cfg.sequence_id + "_" + detail::sanitize(spec.text) +
                             (is_depth ? ".depth" : ".yuv");
    const std::filesystem::path path = std::filesystem::path(cfg.out_dir) / name;
    if (is_depth) {
      write_depth(deg.depth, path.string());
    } else {
      SequenceDescriptor d = cfg.ref_video;
      d.path = path.string();
      write_video(deg.color, d);
    }
    manifest.add_row({path.string(), std::string(is_depth ? "depth" : "color"),
                      spec.kind_name(), spec.text, static_cast<double>(seed)});
  }
  const auto manifest_path = std::filesystem::path(cfg.out_dir) / (cfg.sequence_id + "_manifest.csv");
  write_csv(manifest, manifest_path.string());
  return manifest_path;
}

/// render: synthesize the virtual view from the configured color + depth.
inline std::filesystem::path cmd_render(const ExperimentConfig& cfg) {
  const auto color = detail::load_color_checked(cfg);
  const auto depth = detail::load_depth_checked(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  const auto rendered = render_sequence(color, depth, cfg.cam);
  const auto path = std::filesystem::path(cfg.out_dir) / (cfg.sequence_id + "_rendered.yuv");
  SequenceDescriptor d = cfg.ref_video;
  d.path = path.string();
  write_video(rendered, d);
  return path;
}

/// score: for each distortion spec, degrade in memory, re-render, and score
/// the degraded rendering against the ground-truth baseline rendering.
inline std::filesystem::path cmd_score(const ExperimentConfig& cfg) {
  const auto color = detail::load_color_checked(cfg);
  const auto depth = detail::load_depth_checked(cfg);
  if (color.size() < 2) throw DataError("scoring needs at least 2 frames");
  std::filesystem::create_directories(cfg.out_dir);

  const auto baseline = render_sequence(color, depth, cfg.cam);

  CsvTable scores;
  scores.header = {"sequence", "channel", "distortion", "level", "metric", "value"};
  const std::string channel_name = cfg.channel == DegradedChannel::Depth ? "depth" : "color";

  std::vector<DistortionSpec> specs = cfg.distortions;
  if (specs.empty()) specs.push_back(parse_distortion_spec("none"));

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const DistortionSpec& spec = specs[i];
    const DegradedData deg =
        apply_distortion(color, depth, spec, cfg.channel, job_seed(cfg, i, spec));
    const auto rendered = render_sequence(deg.color, deg.depth, cfg.cam);

    for (const std::string& metric : cfg.metrics) {
      double value = 0.0;
      if (metric == "3vqm") {
        value = score_sequence(baseline, rendered, deg.depth, cfg.cam, cfg.vqm).aggregate;
      } else if (metric == "psnr") {
        value = sequence_metric(baseline, rendered, "psnr",
                                [](const Frame& a, const Frame& b) { return psnr(a, b); })
                    .aggregate;
      } else if (metric == "ssim") {
        value = sequence_metric(baseline, rendered, "ssim",
                                [](const Frame& a, const Frame& b) { return ssim(a, b); })
                    .aggregate;
      } else {
        throw ConfigError("unknown metric '" + metric + "'");
      }
      scores.add_row({cfg.sequence_id, channel_name, spec.kind_name(), spec.text,
                      metric, value});
    }
  }
  const auto path = std::filesystem::path(cfg.out_dir) / (cfg.sequence_id + "_scores.csv");
  write_csv(scores, path.string());
  return path;
}

/// validate: join a DMOS table with a long-format scores table on
/// sequence_id and emit one Table-1-style report row per metric.
inline CsvTable cmd_validate(const std::string& dmos_csv, const std::string& scores_csv,
                             bool use_logistic_mapping = false) {
  std::vector<SubjectiveRecord> records;
  try {
    records = load_dmos_csv(dmos_csv);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }

  // Pivot the long-format scores into per-sequence metric means.
  const auto rows = read_csv(scores_csv);
  if (rows.empty() || rows[0].size() < 6 || rows[0][0] != "sequence")
    throw DataError(scores_csv + ": expected header sequence,channel,distortion,level,metric,value");
  std::map<std::string, std::map<std::string, std::pair<double, int>>> by_seq;
  std::set<std::string> metrics;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto& cell = by_seq[row[0]][row[4]];
    cell.first += detail::parse_num(row[5], "score value");
    cell.second += 1;
    metrics.insert(row[4]);
  }

  std::vector<std::string> missing;
  for (auto& rec : records) {
    const auto it = by_seq.find(rec.sequence_id);
    if (it == by_seq.end()) {
      missing.push_back(rec.sequence_id);
      continue;
    }
    for (const auto& [metric, acc] : it->second)
      rec.objective_scores[metric] = acc.first / acc.second;
  }
  for (const auto& [seq, _] : by_seq)
    if (std::none_of(records.begin(), records.end(),
                     [&](const SubjectiveRecord& r) { return r.sequence_id == seq; }))
      missing.push_back(seq);
  if (!missing.empty()) {
    std::string msg = "sequence_id mismatch between DMOS and scores:";
    for (const auto& s : missing) msg += " " + s;
    throw DataError(msg);
  }

  std::vector<std::pair<std::string, ValidationReport>> reports;
  for (const std::string& metric : metrics) {
    ValidationReport rep;
    try {
      rep = validate(records, metric, use_logistic_mapping);
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
    if (!rep.cc_defined)
      throw DegeneracyError("correlation undefined for metric '" + metric +
                            "': " + rep.degeneracy_reason);
    reports.emplace_back(metric, rep);
  }
  return reports_to_csv(reports);
}

/// report: aggregate a scores table over sequences, one mean per
/// (channel, distortion, level, metric) cell.
inline CsvTable cmd_report(const std::string& scores_csv) {
  const auto rows = read_csv(scores_csv);
  if (rows.empty() || rows[0].size() < 6 || rows[0][0] != "sequence")
    throw DataError(scores_csv + ": expected header sequence,channel,distortion,level,metric,value");
  std::map<std::tuple<std::string, std::string, std::string, std::string>,
           std::pair<double, int>> cells;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto& cell = cells[{row[1], row[2], row[3], row[4]}];
    cell.first += detail::parse_num(row[5], "score value");
    cell.second += 1;
  }
  CsvTable out;
  out.header = {"channel", "distortion", "level", "metric", "mean_value", "n"};
  for (const auto& [key, acc] : cells)
    out.add_row({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key),
                 acc.first / acc.second, static_cast<double>(acc.second)});
  return out;
}

}  // namespace tvqm
