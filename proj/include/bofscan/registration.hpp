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
#include <tuple>
#include <vector>

#include "bofscan/core.hpp"
#include "bofscan/imaging.hpp"

namespace bofscan {

/// Similarity transform about the image center: rotate by `angle` degrees,
/// scale uniformly, then translate by (tx, ty).
struct RigidParams {
  double angle = 0.0;
  double scale = 1.0;
  double tx = 0.0;
  double ty = 0.0;

  bool operator==(const RigidParams&) const = default;
};

inline double normalize_angle(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

inline constexpr double kPi = 3.14159265358979323846;

inline RigidParams inverse(const RigidParams& p) {
  if (!(p.scale > 0.0)) throw DataError("rigid scale must be positive");
  const double rad = p.angle * kPi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  // t' = -(1/s) R(-angle) t
  return {normalize_angle(-p.angle), 1.0 / p.scale, -(c * p.tx + s * p.ty) / p.scale,
          -(-s * p.tx + c * p.ty) / p.scale};
}

/// Discrete search grid. Steps are the finest-level steps; the coarsest
/// pyramid level searches with steps multiplied by 2^(levels-1).
struct SearchSpace {
  double angle_min = -10.0, angle_max = 10.0, angle_step = 1.0;
  double scale_min = 0.9, scale_max = 1.1, scale_step = 0.02;
  double translation_radius = 20.0;
  double translation_step = 1.0;
  int pyramid_levels = 3;

  void validate() const {
    if (!(angle_step > 0 && scale_step > 0 && translation_step > 0)) throw DataError("search steps must be positive");
    if (angle_min > angle_max || scale_min > scale_max) throw DataError("search range has min > max");
    if (translation_radius < 0) throw DataError("translation radius must be non-negative");
    if (pyramid_levels < 1) throw DataError("pyramid_levels must be at least 1");
    if (!(scale_min > 0)) throw DataError("scale range must be positive");
    if (angle_min > 0 || angle_max < 0 || scale_min > 1 || scale_max < 1) {
      throw DataError("search space is empty: it must contain the identity transform");
    }
  }
};

/// Pearson correlation of the two pixel vectors.
inline double ncc(const GrayImage& a, const GrayImage& b) {
  if (a.width != b.width || a.height != b.height) throw DataError("ncc: image dimensions differ");
  const std::size_t n = a.pixels.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a.pixels[i];
    mb += b.pixels[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a.pixels[i] - ma, db = b.pixels[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  // Summation error leaves constant images with a residue far below any real contrast.
  const double floor = 1e-20 * static_cast<double>(n);
  if (saa <= floor || sbb <= floor) throw DataError("ncc: zero intensity variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace detail {

inline double bilinear(const GrayImage& img, double sx, double sy) {
  if (!(sx >= 0.0 && sy >= 0.0 && sx <= img.width - 1 && sy <= img.height - 1)) return 0.0;
  const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
  const int x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
  const double fx = sx - x0, fy = sy - y0;
  return (1.0 - fx) * (1.0 - fy) * img.at(x0, y0) + fx * (1.0 - fy) * img.at(x1, y0) +
         (1.0 - fx) * fy * img.at(x0, y1) + fx * fy * img.at(x1, y1);
}

inline void warp_into(const GrayImage& img, const RigidParams& p, GrayImage& out) {
  const double rad = p.angle * kPi / 180.0;
  const double c = std::cos(rad) / p.scale, s = std::sin(rad) / p.scale;
  const double cx = (img.width - 1) / 2.0, cy = (img.height - 1) / 2.0;
  for (int y = 0; y < img.height; ++y) {
    const double dy = y - cy - p.ty;
    for (int x = 0; x < img.width; ++x) {
      const double dx = x - cx - p.tx;
      out.at(x, y) = bilinear(img, c * dx + s * dy + cx, -s * dx + c * dy + cy);
    }
  }
}

}  // namespace detail

/// Inverse-mapped bilinear resampling; samples falling outside the source are 0.
inline GrayImage warp(const GrayImage& img, const RigidParams& p) {
  if (!(p.scale > 0.0)) throw DataError("rigid scale must be positive");
  GrayImage out(img.width, img.height);
  detail::warp_into(img, p, out);
  return out;
}

/// 2x box-filter reduction (odd trailing row/column dropped).
inline GrayImage downsample2(const GrayImage& img) {
  GrayImage out(std::max(1, img.width / 2), std::max(1, img.height / 2));
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const int x0 = std::min(2 * x, img.width - 1), x1 = std::min(2 * x + 1, img.width - 1);
      const int y0 = std::min(2 * y, img.height - 1), y1 = std::min(2 * y + 1, img.height - 1);
      out.at(x, y) = 0.25 * (img.at(x0, y0) + img.at(x1, y0) + img.at(x0, y1) + img.at(x1, y1));
    }
  }
  return out;
}

struct RegistrationLevel {
  int level = 0;  // 0 = full resolution
  RigidParams level_best;
  RigidParams incumbent;
  double incumbent_score = 0.0;  // at full resolution
};

struct RegistrationResult {
  RigidParams params;
  double score = 0.0;
  std::vector<RegistrationLevel> trace;
};

namespace detail {

// Grid values of one axis: anchor + k*step inside [lo, hi].
inline std::vector<double> axis_values(double anchor, double step, int span, double lo, double hi) {
  const double eps = 1e-9 * step;
  std::vector<double> v;
  for (int k = -span; k <= span; ++k) {
    const double x = anchor + k * step;
    if (x >= lo - eps && x <= hi + eps) v.push_back(x);
  }
  return v;
}

inline int full_span(double anchor, double step, double lo, double hi) {
  return static_cast<int>(std::ceil(std::max(std::abs(lo - anchor), std::abs(hi - anchor)) / step)) + 1;
}

class Scorer {
 public:
  Scorer(const GrayImage& fixed, const GrayImage& moving) : fixed_(fixed), moving_(moving), buf_(fixed.width, fixed.height) {
    if (fixed.width != moving.width || fixed.height != moving.height) {
      throw DataError("registration images must have identical dimensions");
    }
  }

  double operator()(const RigidParams& p) {
    warp_into(moving_, p, buf_);
    return ncc(fixed_, buf_);
  }

 private:
  const GrayImage& fixed_;
  const GrayImage& moving_;
  GrayImage buf_;
};

inline bool lex_less(const RigidParams& a, const RigidParams& b) {
  return std::tie(a.angle, a.scale, a.tx, a.ty) < std::tie(b.angle, b.scale, b.tx, b.ty);
}

}  // namespace detail

/// Coarse-to-fine exhaustive NCC search for the similarity transform that
/// best aligns `moving` onto `fixed`.
inline RegistrationResult rigid_register(const GrayImage& fixed, const GrayImage& moving,
                                         const SearchSpace& space = {}) {
  space.validate();
  const int levels = space.pyramid_levels;

  std::vector<GrayImage> fixed_pyr{fixed}, moving_pyr{moving};
  for (int l = 1; l < levels; ++l) {
    fixed_pyr.push_back(downsample2(fixed_pyr.back()));
    moving_pyr.push_back(downsample2(moving_pyr.back()));
  }

  detail::Scorer full_scorer(fixed, moving);
  RegistrationResult result;
  result.params = RigidParams{};
  result.score = full_scorer(result.params);

  RigidParams center{};
  for (int l = levels - 1; l >= 0; --l) {
    const double mult = std::ldexp(1.0, l);
    const double a_step = space.angle_step * mult, s_step = space.scale_step * mult,
                 t_step = space.translation_step * mult;
    const bool coarsest = l == levels - 1;

    std::vector<double> angles, scales, txs, tys;
    if (coarsest) {
      angles = detail::axis_values(0.0, a_step, detail::full_span(0.0, a_step, space.angle_min, space.angle_max),
                                   space.angle_min, space.angle_max);
      scales = detail::axis_values(1.0, s_step, detail::full_span(1.0, s_step, space.scale_min, space.scale_max),
                                   space.scale_min, space.scale_max);
      const int ts = detail::full_span(0.0, t_step, -space.translation_radius, space.translation_radius);
      txs = detail::axis_values(0.0, t_step, ts, -space.translation_radius, space.translation_radius);
      tys = txs;
    } else {
      // +/- one step of the previous (coarser) level, at this level's step.
      angles = detail::axis_values(center.angle, a_step, 2, space.angle_min, space.angle_max);
      scales = detail::axis_values(center.scale, s_step, 2, space.scale_min, space.scale_max);
      txs = detail::axis_values(center.tx, t_step, 2, -space.translation_radius, space.translation_radius);
      tys = detail::axis_values(center.ty, t_step, 2, -space.translation_radius, space.translation_radius);
    }

    detail::Scorer scorer(fixed_pyr[l], moving_pyr[l]);
    RigidParams best{};
    double best_score = -2.0;
    bool have = false;
    for (double a : angles) {
      for (double s : scales) {
        for (double tx : txs) {
          for (double ty : tys) {
            const RigidParams p{a, s, tx, ty};
            const double score = scorer({a, s, tx / mult, ty / mult});
            if (!have || score > best_score || (score == best_score && detail::lex_less(p, best))) {
              best = p;
              best_score = score;
              have = true;
            }
          }
        }
      }
    }
    if (!have) throw DataError("registration search space is empty");

    center = best;
    const double full = l == 0 ? best_score : full_scorer(best);
    if (full > result.score || (full == result.score && detail::lex_less(best, result.params))) {
      result.params = best;
      result.score = full;
    }
    result.trace.push_back({l, best, result.params, result.score});
  }
  return result;
}

}  // namespace bofscan
