#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tvqm/core.hpp"

namespace tvqm {

enum class PixelFormat { Luma, Yuv420 };

/// Raw frame-sequential planar file plus the geometry needed to slice it.
struct SequenceDescriptor {
  std::string path;
  int width = 0;
  int height = 0;
  int frame_count = 0;
  PixelFormat pixel_format = PixelFormat::Luma;
  double fps = 0.0;  // metadata only

  std::size_t frame_byte_size() const {
    const std::size_t luma = static_cast<std::size_t>(width) * height;
    return pixel_format == PixelFormat::Luma ? luma : luma + luma / 2;
  }
  std::size_t total_byte_size() const {
    return frame_byte_size() * static_cast<std::size_t>(frame_count);
  }
};

namespace detail {

inline std::vector<std::uint8_t> read_exact(const SequenceDescriptor& desc) {
  std::error_code ec;
  const auto actual = std::filesystem::file_size(desc.path, ec);
  if (ec) throw std::runtime_error("cannot read " + desc.path + ": " + ec.message());
  if (desc.frame_count < 1)
    throw std::runtime_error(desc.path + ": descriptor needs frame_count >= 1");
  const auto expected = desc.total_byte_size();
  if (actual != expected)
    throw std::runtime_error(desc.path + ": expected " + std::to_string(expected) +
                             " bytes (" + std::to_string(desc.frame_count) +
                             " frames), file has " + std::to_string(actual));
  std::ifstream in(desc.path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + desc.path);
  std::vector<std::uint8_t> buf(expected);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(expected));
  if (!in) throw std::runtime_error("short read on " + desc.path);
  return buf;
}

}  // namespace detail

/// Load a raw video. 4:2:0 chroma is upsampled 2x nearest so every Frame
/// carries full-resolution planes; metrics read plane 0 (luma) only.
inline std::vector<Frame> load_video(const SequenceDescriptor& desc) {
  const auto buf = detail::read_exact(desc);
  const std::size_t fsz = desc.frame_byte_size();
  const std::size_t luma = static_cast<std::size_t>(desc.width) * desc.height;
  std::vector<Frame> frames;
  frames.reserve(desc.frame_count);
  for (int k = 0; k < desc.frame_count; ++k) {
    const std::uint8_t* p = buf.data() + fsz * k;
    if (desc.pixel_format == PixelFormat::Luma) {
      Frame f(desc.width, desc.height, 1);
      std::copy(p, p + luma, f.samples.begin());
      frames.push_back(std::move(f));
    } else {
      Frame f(desc.width, desc.height, 3);
      std::copy(p, p + luma, f.samples.begin());
      const int cw = desc.width / 2, ch = desc.height / 2;
      for (int c = 0; c < 2; ++c) {
        const std::uint8_t* cp = p + luma + static_cast<std::size_t>(cw) * ch * c;
        for (int y = 0; y < desc.height; ++y)
          for (int x = 0; x < desc.width; ++x)
            f.at(x, y, c + 1) = cp[static_cast<std::size_t>(std::min(y / 2, ch - 1)) * cw +
                                   std::min(x / 2, cw - 1)];
      }
      frames.push_back(std::move(f));
    }
  }
  return frames;
}

inline std::vector<DepthFrame> load_depth(const SequenceDescriptor& desc) {
  if (desc.pixel_format != PixelFormat::Luma)
    throw std::runtime_error(desc.path + ": depth sequences are single-plane");
  const auto buf = detail::read_exact(desc);
  const std::size_t fsz = desc.frame_byte_size();
  std::vector<DepthFrame> frames;
  frames.reserve(desc.frame_count);
  for (int k = 0; k < desc.frame_count; ++k) {
    DepthFrame d(desc.width, desc.height);
    std::copy(buf.data() + fsz * k, buf.data() + fsz * (k + 1), d.values.begin());
    frames.push_back(std::move(d));
  }
  return frames;
}

/// Write frames back out in the descriptor's layout (4:2:0 chroma is
/// re-subsampled by taking the top-left sample of each 2x2 block, which
/// round-trips losslessly against the nearest upsampling in load_video).
inline void write_video(const std::vector<Frame>& frames, const SequenceDescriptor& desc) {
  std::ofstream out(desc.path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + desc.path);
  for (const Frame& f : frames) {
    out.write(reinterpret_cast<const char*>(f.samples.data()),
              static_cast<std::streamsize>(f.plane_size()));
    if (desc.pixel_format == PixelFormat::Yuv420) {
      for (int c = 1; c <= 2; ++c)
        for (int y = 0; y < f.height; y += 2)
          for (int x = 0; x < f.width; x += 2)
            out.put(static_cast<char>(f.at(x, y, c)));
    }
  }
  if (!out) throw std::runtime_error("write failed: " + desc.path);
}

inline void write_depth(const std::vector<DepthFrame>& frames, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (const DepthFrame& d : frames)
    out.write(reinterpret_cast<const char*>(d.values.data()),
              static_cast<std::streamsize>(d.values.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// CSV

using CsvCell = std::variant<std::string, double>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;

  void add_row(std::vector<CsvCell> row) {
    if (row.size() != header.size())
      throw std::invalid_argument("CsvTable: row width != header width");
    rows.push_back(std::move(row));
  }
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace detail

inline std::string csv_to_string(const CsvTable& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << detail::csv_escape(table.header[i]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      if (std::holds_alternative<double>(row[i]))
        out << detail::format_number(std::get<double>(row[i]));
      else
        out << detail::csv_escape(std::get<std::string>(row[i]));
    }
    out << '\n';
  }
  return out.str();
}

/// Atomic write: temp file in the same directory, then rename.
inline void write_csv(const CsvTable& table, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for write: " + tmp);
    out << csv_to_string(table);
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

/// Minimal RFC-4180 reader: quoted fields, embedded commas and quotes.
inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') { in.get(); field += '"'; }
        else quoted = false;
      } else field += c;
      continue;
    }
    switch (c) {
      case '"': quoted = true; any = true; break;
      case ',': row.push_back(std::move(field)); field.clear(); any = true; break;
      case '\r': break;
      case '\n':
        if (any || !field.empty() || !row.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        field.clear(); row.clear(); any = false;
        break;
      default: field += c; any = true; break;
    }
  }
  if (any || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace tvqm
