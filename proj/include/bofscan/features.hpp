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

#include <array>
#include <cmath>
#include <vector>

#include "bofscan/core.hpp"
#include "bofscan/imaging.hpp"

namespace bofscan {

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double scale = 1.0;
};

inline constexpr std::size_t kDescriptorSize = 64;

/// Upright SURF descriptor. Subregion (r, c) of the 4x4 layout occupies
/// entries 4*(4r + c) .. 4*(4r + c) + 3 as (sum dx, sum dy, sum |dx|, sum |dy|).
using Descriptor64 = std::array<double, kDescriptorSize>;

/// Horizontal Haar response: right half minus left half of the L x L
/// footprint whose left/top edge is at (cx - L/2, cy - L/2).
inline double haar_x(const IntegralImage& ii, int cx, int cy, int side) {
  if (side < 2 || side % 2 != 0) throw DataError("Haar filter side must be even and at least 2");
  const int h = side / 2;
  const int x0 = cx - h, y0 = cy - h, x1 = cx + h - 1, y1 = cy + h - 1;
  if (x0 < 0 || y0 < 0 || x1 >= ii.width || y1 >= ii.height) throw DataError("Haar footprint out of bounds");
  return box_sum(ii, cx, y0, x1, y1) - box_sum(ii, x0, y0, cx - 1, y1);
}

/// Vertical Haar response: bottom half minus top half.
inline double haar_y(const IntegralImage& ii, int cx, int cy, int side) {
  if (side < 2 || side % 2 != 0) throw DataError("Haar filter side must be even and at least 2");
  const int h = side / 2;
  const int x0 = cx - h, y0 = cy - h, x1 = cx + h - 1, y1 = cy + h - 1;
  if (x0 < 0 || y0 < 0 || x1 >= ii.width || y1 >= ii.height) throw DataError("Haar footprint out of bounds");
  return box_sum(ii, x0, cy, x1, y1) - box_sum(ii, x0, y0, x1, cy - 1);
}

/// nx x ny evenly spaced keypoints in row-major order, inset by `margin`.
inline std::vector<Keypoint> dense_grid(int width, int height, int nx, int ny, int margin, double scale = 1.0) {
  if (nx < 1 || ny < 1) throw DataError("grid counts must be at least 1");
  const int extent_x = width - 1 - 2 * margin, extent_y = height - 1 - 2 * margin;
  if (margin < 0 || extent_x < 0 || extent_y < 0) throw DataError("grid margin leaves a negative usable extent");
  auto coord = [](int count, int extent, int m, int i) {
    if (count == 1) return m + extent / 2.0;
    return m + i * static_cast<double>(extent) / (count - 1);
  };
  std::vector<Keypoint> kps;
  kps.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) kps.push_back({coord(nx, extent_x, margin, i), coord(ny, extent_y, margin, j), scale});
  }
  return kps;
}

struct SurfParams {
  int grid_x = 8;
  int grid_y = 8;
  double scale = 1.0;
  int samples_per_subregion = 5;  // 5 gives the standard 20s support window
};

namespace detail {

inline int haar_side(double scale) { return 2 * std::max(1L, round_half_up_to_long(scale)); }

/// Half-width (in pixels) of the region a descriptor touches around its
/// keypoint: outermost sample offset, rounding, then half a wavelet.
inline int descriptor_reach(double scale, int samples) {
  return static_cast<int>(std::ceil(2.0 * samples * scale)) + 1 + haar_side(scale) / 2;
}

}  // namespace detail

/// Descriptors whose pre-normalization norm falls below this fraction of the
/// integral image's total are treated as numerically zero.
inline constexpr double kZeroDescriptorTolerance = 1e-12;

inline Descriptor64 surf_descriptor(const IntegralImage& ii, const Keypoint& kp, int samples_per_subregion = 5) {
  const int n = samples_per_subregion;
  if (n < 1) throw DataError("samples per subregion must be at least 1");
  const double s = kp.scale;
  const int side = detail::haar_side(s);
  const double sigma = 0.66 * n * s;  // 3.3s for the standard 5x5 sampling
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);

  Descriptor64 d{};
  for (int sr_row = 0; sr_row < 4; ++sr_row) {
    for (int sr_col = 0; sr_col < 4; ++sr_col) {
      double sdx = 0.0, sdy = 0.0, sadx = 0.0, sady = 0.0;
      for (int a = 0; a < n; ++a) {
        const double uy = (sr_row * n + a - 2 * n + 0.5) * s;
        const int sy = static_cast<int>(round_half_up_to_long(kp.y + uy));
        for (int b = 0; b < n; ++b) {
          const double ux = (sr_col * n + b - 2 * n + 0.5) * s;
          const int sx = static_cast<int>(round_half_up_to_long(kp.x + ux));
          const double w = std::exp(-(ux * ux + uy * uy) * inv_two_sigma2);
          const double dx = w * haar_x(ii, sx, sy, side);
          const double dy = w * haar_y(ii, sx, sy, side);
          sdx += dx;
          sdy += dy;
          sadx += std::abs(dx);
          sady += std::abs(dy);
        }
      }
      const std::size_t base = 4 * static_cast<std::size_t>(4 * sr_row + sr_col);
      d[base] = sdx;
      d[base + 1] = sdy;
      d[base + 2] = sadx;
      d[base + 3] = sady;
    }
  }

  double norm = 0.0;
  for (double v : d) norm += v * v;
  norm = std::sqrt(norm);
  if (norm <= kZeroDescriptorTolerance * std::abs(ii.total())) {
    d.fill(0.0);
  } else {
    for (double& v : d) v /= norm;
  }
  return d;
}

/// Dense SURF over an nx x ny grid spanning the whole patch. The patch is
/// edge-replicated so every keypoint's support fits.
inline std::vector<Descriptor64> describe_patch(const GrayImage& patch, const SurfParams& params = {}) {
  const int pad = detail::descriptor_reach(params.scale, params.samples_per_subregion);
  const IntegralImage ii = integral_image(pad_replicate(patch, pad));
  std::vector<Descriptor64> out;
  out.reserve(static_cast<std::size_t>(params.grid_x) * params.grid_y);
  for (Keypoint kp : dense_grid(patch.width, patch.height, params.grid_x, params.grid_y, 0, params.scale)) {
    kp.x += pad;
    kp.y += pad;
    out.push_back(surf_descriptor(ii, kp, params.samples_per_subregion));
  }
  return out;
}

}  // namespace bofscan
