// Copyright (c) 2026 The bofscan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bofscan/core.hpp"

namespace bofscan {

/// Row-major grayscale raster with intensities in [0, 1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w <= 0 || h <= 0) throw DataError("image dimensions must be positive");
  }

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  bool valid() const {
    if (width <= 0 || height <= 0) return false;
    if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) return false;
    return std::all_of(pixels.begin(), pixels.end(), [](double p) { return p >= 0.0 && p <= 1.0; });
  }

  double total() const {
    double s = 0.0;
    for (double p : pixels) s += p;
    return s;
  }

  bool operator==(const GrayImage&) const = default;
};

/// Inclusive-rectangle cumulative sums: at(x, y) = sum of pixels in (0,0)..(x,y).
struct IntegralImage {
  int width = 0;
  int height = 0;
  std::vector<double> sums;

  double at(int x, int y) const {
    if (x < 0 || y < 0) return 0.0;
    return sums[static_cast<std::size_t>(y) * width + x];
  }
  double total() const { return sums.empty() ? 0.0 : sums.back(); }
};

inline IntegralImage integral_image(const GrayImage& img) {
  IntegralImage ii{img.width, img.height, std::vector<double>(img.pixels.size())};
  for (int y = 0; y < img.height; ++y) {
    double row = 0.0;
    for (int x = 0; x < img.width; ++x) {
      row += img.at(x, y);
      const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      ii.sums[i] = row + (y > 0 ? ii.sums[i - img.width] : 0.0);
    }
  }
  return ii;
}

/// Sum over the inclusive rectangle (x0, y0)..(x1, y1) from four lookups.
inline double box_sum(const IntegralImage& ii, int x0, int y0, int x1, int y1) {
  if (x0 < 0 || y0 < 0 || x0 > x1 || y0 > y1 || x1 >= ii.width || y1 >= ii.height) {
    throw DataError("box_sum rectangle out of bounds");
  }
  return ii.at(x1, y1) - ii.at(x0 - 1, y1) - ii.at(x1, y0 - 1) + ii.at(x0 - 1, y0 - 1);
}

// ---------------------------------------------------------------------------
// PGM (P5) I/O

class PgmError : public DataError {
 public:
  enum class Kind { MissingFile, MalformedHeader, TruncatedData, Unwritable };

  PgmError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

// Reads one header token, skipping whitespace and '#' comments.
inline bool read_pgm_token(std::istream& in, std::string& token) {
  token.clear();
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) break;
  }
  if (c == EOF) return false;
  do {
    token.push_back(static_cast<char>(c));
    c = in.get();
  } while (c != EOF && !std::isspace(c) && c != '#');
  if (c == '#') in.unget();
  // A single whitespace byte (already consumed) separates maxval from the raster.
  return true;
}

inline long parse_pgm_int(const std::string& token, const std::filesystem::path& path) {
  if (token.empty() || !std::all_of(token.begin(), token.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
    throw PgmError(PgmError::Kind::MalformedHeader, "malformed PGM header in " + path.string());
  }
  try {
    return std::stol(token);
  } catch (const std::exception&) {
    throw PgmError(PgmError::Kind::MalformedHeader, "malformed PGM header in " + path.string());
  }
}

}  // namespace detail

inline GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PgmError(PgmError::Kind::MissingFile, "cannot open PGM file " + path.string());

  std::string token;
  if (!detail::read_pgm_token(in, token) || token != "P5") {
    throw PgmError(PgmError::Kind::MalformedHeader, "not a binary PGM (P5) file: " + path.string());
  }
  long fields[3];
  for (long& f : fields) {
    if (!detail::read_pgm_token(in, token)) {
      throw PgmError(PgmError::Kind::MalformedHeader, "incomplete PGM header in " + path.string());
    }
    f = detail::parse_pgm_int(token, path);
  }
  const long w = fields[0], h = fields[1], maxval = fields[2];
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw PgmError(PgmError::Kind::MalformedHeader, "invalid PGM dimensions or maxval in " + path.string());
  }

  const std::size_t bytes_per_px = maxval > 255 ? 2 : 1;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<unsigned char> raw(n * bytes_per_px);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw PgmError(PgmError::Kind::TruncatedData, "truncated PGM pixel data in " + path.string());
  }

  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  const double denom = static_cast<double>(maxval);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = bytes_per_px == 1 ? raw[i] : (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1];
    img.pixels[i] = std::min(1.0, v / denom);
  }
  return img;
}

/// 8-bit quantization used by save_pgm: round-half-up of p * 255.
inline std::uint8_t quantize8(double p) {
  return static_cast<std::uint8_t>(std::clamp(round_half_up(p * 255.0), 0.0, 255.0));
}

inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PgmError(PgmError::Kind::Unwritable, "cannot write PGM file " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<std::uint8_t> raw(img.pixels.size());
  std::transform(img.pixels.begin(), img.pixels.end(), raw.begin(), quantize8);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw PgmError(PgmError::Kind::Unwritable, "failed writing PGM file " + path.string());
}

// ---------------------------------------------------------------------------
// ROI extraction

/// Full-height vertical strip of `width` columns centered on `center_x`
/// (left-biased for even widths).
inline GrayImage extract_strip(const GrayImage& bscan, int center_x, int width) {
  if (width < 1) throw DataError("strip width must be at least 1");
  const int left = center_x - width / 2;
  if (left < 0 || left + width > bscan.width) {
    throw DataError("strip centered at column " + std::to_string(center_x) + " with width " +
                    std::to_string(width) + " exceeds the image bounds");
  }
  GrayImage strip(width, bscan.height);
  for (int y = 0; y < bscan.height; ++y) {
    for (int x = 0; x < width; ++x) strip.at(x, y) = bscan.at(left + x, y);
  }
  return strip;
}

/// Keeps `band_height` rows centered on the intensity-weighted row centroid.
inline GrayImage crop_to_band(const GrayImage& strip, int band_height = 170) {
  if (band_height < 1 || strip.height < band_height) {
    throw DataError("strip of height " + std::to_string(strip.height) + " is shorter than band height " +
                    std::to_string(band_height));
  }
  if (strip.height == band_height) return strip;

  double mass = 0.0, moment = 0.0;
  for (int y = 0; y < strip.height; ++y) {
    double row = 0.0;
    for (int x = 0; x < strip.width; ++x) row += strip.at(x, y);
    mass += row;
    moment += row * y;
  }
  // A black strip has no centroid; fall back to the geometric middle.
  const double centroid = mass > 0.0 ? moment / mass : (strip.height - 1) / 2.0;
  const long top = std::clamp<long>(round_half_up_to_long(centroid) - band_height / 2, 0,
                                    strip.height - band_height);

  GrayImage band(strip.width, band_height);
  for (int y = 0; y < band_height; ++y) {
    for (int x = 0; x < strip.width; ++x) band.at(x, y) = strip.at(x, static_cast<int>(top) + y);
  }
  return band;
}

/// Edge-replicating pad by `pad` pixels on every side.
inline GrayImage pad_replicate(const GrayImage& img, int pad) {
  GrayImage out(img.width + 2 * pad, img.height + 2 * pad);
  for (int y = 0; y < out.height; ++y) {
    const int sy = std::clamp(y - pad, 0, img.height - 1);
    for (int x = 0; x < out.width; ++x) {
      out.at(x, y) = img.at(std::clamp(x - pad, 0, img.width - 1), sy);
    }
  }
  return out;
}

}  // namespace bofscan
