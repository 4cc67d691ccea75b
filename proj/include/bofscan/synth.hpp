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
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "bofscan/core.hpp"
#include "bofscan/imaging.hpp"

namespace bofscan {

struct PixelPoint {
  int x = 0;
  int y = 0;
  bool operator==(const PixelPoint&) const = default;
};

struct SynthAnnotation {
  std::vector<PixelPoint> lesion_centers;
  std::vector<double> lesion_radii;  // parallel to lesion_centers
  std::uint64_t rng_seed = 0;
  std::vector<std::pair<int, int>> layer_rows;  // (top, bottom) extents per retinal band
};

/// Knobs of the synthetic B-scan model. Defaults produce a 496x768-style
/// scan with a ~0.26H thick retina whose inner layers host the lesions.
struct SynthOptions {
  double retina_top = 0.32;        // fraction of height
  double retina_thickness = 0.26;  // fraction of height
  double noise_sigma = 0.03;
  double lesion_amplitude = 0.5;
  double min_radius = 3.0;
  double max_radius = 8.0;
  int lesion_margin_x = 32;  // lesions keep this many columns from the left/right edge
  int vessel_shadows = 4;
  int max_placement_attempts = 2000;
};

namespace detail {

struct RetinalLayer {
  double thickness;  // fraction of the retina
  double intensity;
};

// Inner (top) to outer: NFL, GCL+IPL, INL, OPL, ONL, photoreceptors/RPE, choroid.
inline constexpr RetinalLayer kLayers[] = {
    {0.12, 0.55}, {0.20, 0.35}, {0.14, 0.18}, {0.08, 0.40}, {0.24, 0.12}, {0.10, 0.75}, {0.12, 0.30},
};

}  // namespace detail

/// Seeded synthetic OCT B-scan: layered bright bands over a dark background,
/// vessel shadows, speckle-like noise and `n_lesions` hyperreflective blobs in
/// the upper half of the retina. Pure function of its arguments.
inline std::pair<GrayImage, SynthAnnotation> synth_bscan(std::uint64_t seed, int n_lesions, int width, int height,
                                                         const SynthOptions& opt = {}) {
  if (n_lesions < 0) throw DataError("n_lesions must be non-negative");
  if (width < 64 || height < 64) throw DataError("synthetic B-scans must be at least 64x64");
  if (2 * opt.lesion_margin_x >= width) throw DataError("lesion margin leaves no room for lesions");

  Rng rng(seed);
  const double thickness = opt.retina_thickness * height;
  const double base_top = (opt.retina_top + rng.uniform(-0.03, 0.03)) * height;
  const double tilt = rng.uniform(-0.02, 0.02) * height;
  const double pit_x = rng.uniform(0.3, 0.7) * width;
  const double pit_depth = rng.uniform(0.02, 0.05) * height;
  const double pit_width = rng.uniform(0.06, 0.12) * width;

  std::vector<double> top(width);
  for (int x = 0; x < width; ++x) {
    const double t = static_cast<double>(x) / (width - 1) - 0.5;
    const double dx = (x - pit_x) / pit_width;
    top[x] = base_top + tilt * t + pit_depth * std::exp(-0.5 * dx * dx);
  }

  std::vector<double> shadow(width, 1.0);
  for (int v = 0; v < opt.vessel_shadows; ++v) {
    const double cx = rng.uniform(0.0, width);
    const double half = rng.uniform(1.5, 3.0);
    const double depth = rng.uniform(0.35, 0.6);
    for (int x = 0; x < width; ++x) {
      if (std::abs(x - cx) <= half) shadow[x] = std::min(shadow[x], 1.0 - depth);
    }
  }

  SynthAnnotation ann;
  ann.rng_seed = seed;

  // Lesion placement: inside the upper half of the retina, pairwise distance
  // of at least twice the larger radius.
  for (int i = 0; i < n_lesions; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < opt.max_placement_attempts && !placed; ++attempt) {
      const int x = opt.lesion_margin_x + static_cast<int>(rng.below(width - 2 * opt.lesion_margin_x));
      const double r = rng.uniform(opt.min_radius, opt.max_radius);
      const double y_lo = top[x] + 0.25 * thickness;
      const double y_hi = top[x] + 0.5 * thickness;
      const int y = std::clamp(static_cast<int>(round_half_up(rng.uniform(y_lo, y_hi))), 0, height - 1);
      bool clear = true;
      for (std::size_t j = 0; j < ann.lesion_centers.size() && clear; ++j) {
        const double ddx = x - ann.lesion_centers[j].x, ddy = y - ann.lesion_centers[j].y;
        clear = std::sqrt(ddx * ddx + ddy * ddy) >= 2.0 * std::max(r, ann.lesion_radii[j]);
      }
      if (clear) {
        ann.lesion_centers.push_back({x, y});
        ann.lesion_radii.push_back(r);
        placed = true;
      }
    }
    if (!placed) {
      throw DataError("could not place " + std::to_string(n_lesions) + " non-overlapping lesions in a " +
                      std::to_string(width) + "x" + std::to_string(height) + " scan");
    }
  }

  GrayImage img(width, height);
  constexpr std::size_t n_layers = std::size(detail::kLayers);
  std::vector<std::pair<int, int>> extents(n_layers, {height, -1});
  for (int x = 0; x < width; ++x) {
    double y0 = top[x];
    for (std::size_t l = 0; l < n_layers; ++l) {
      const double y1 = y0 + detail::kLayers[l].thickness * thickness;
      const int row_lo = std::max(0, static_cast<int>(std::ceil(y0)));
      const int row_hi = std::min(height - 1, static_cast<int>(std::ceil(y1)) - 1);
      // Layers below the NFL sit in the vessel shadow.
      const double attenuation = l == 0 ? 1.0 : shadow[x];
      for (int y = row_lo; y <= row_hi; ++y) img.at(x, y) = detail::kLayers[l].intensity * attenuation;
      if (row_lo <= row_hi) {
        extents[l].first = std::min(extents[l].first, row_lo);
        extents[l].second = std::max(extents[l].second, row_hi);
      }
      y0 = y1;
    }
  }
  ann.layer_rows = std::move(extents);

  for (std::size_t i = 0; i < ann.lesion_centers.size(); ++i) {
    const auto [cx, cy] = ann.lesion_centers[i];
    const double r = ann.lesion_radii[i];
    const double sigma = r / 1.5;
    const int reach = static_cast<int>(std::ceil(2.0 * r));
    for (int y = std::max(0, cy - reach); y <= std::min(height - 1, cy + reach); ++y) {
      for (int x = std::max(0, cx - reach); x <= std::min(width - 1, cx + reach); ++x) {
        const double d2 = static_cast<double>((x - cx) * (x - cx) + (y - cy) * (y - cy));
        if (d2 > 4.0 * r * r) continue;
        img.at(x, y) += opt.lesion_amplitude * std::exp(-d2 / (2.0 * sigma * sigma));
      }
    }
  }

  for (double& p : img.pixels) {
    p = std::clamp(p + opt.noise_sigma * (0.25 + p) * rng.normal(), 0.0, 1.0);
  }
  return {std::move(img), std::move(ann)};
}

}  // namespace bofscan
