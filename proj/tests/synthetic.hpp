#pragma once

// Synthetic scenes with known reflectance, shading and illumination. They
// double as oracles: the generator's parameters are the ground truth.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "lsplit/decomposition.hpp"
#include "lsplit/image.hpp"
#include "lsplit/imagestack.hpp"

namespace testutil {

/// Sum of a few low-frequency sinusoids, scaled to [-1, 1].
class SmoothField {
 public:
  SmoothField(std::mt19937_64& rng, int terms = 4) {
    std::uniform_real_distribution<double> f(-1.5, 1.5), ph(0.0, 2.0 * std::numbers::pi),
        a(0.3, 1.0);
    double total = 0.0;
    for (int k = 0; k < terms; ++k) {
      waves_.push_back({f(rng), f(rng), ph(rng), a(rng)});
      total += waves_.back().amp;
    }
    for (auto& w : waves_) w.amp /= total;
  }

  double operator()(double u, double v) const {  // u, v in [0,1]
    double s = 0.0;
    for (const auto& w : waves_)
      s += w.amp * std::cos(2.0 * std::numbers::pi * (w.fx * u + w.fy * v) + w.phase);
    return s;
  }

 private:
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves_;
};

struct SyntheticScene {
  lsplit::ImageSequence seq;
  lsplit::Decomposition truth;  // log_r identical across frames
  lsplit::Image reflectance;    // linear RGB
};

/// Lambertian sequence: smooth random log reflectance, smooth per-frame log
/// shading and a random per-frame illumination colour. Every pixel stays in
/// (0.09, 0.75), so no clamping happens.
inline SyntheticScene lambertian_scene(int frames, int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> base(-1.0, -0.5), tint(-0.15, 0.0);
  SyntheticScene s;
  s.truth = lsplit::Decomposition::zeros(frames, w, h);
  lsplit::Image log_r(w, h, 3);
  for (int c = 0; c < 3; ++c) {
    const SmoothField field(rng);
    const double b = base(rng);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        log_r.at(x, y, c) = b + 0.3 * field((x + 0.5) / w, (y + 0.5) / h);
  }
  s.reflectance = log_r;
  for (double& v : s.reflectance.data) v = std::exp(v);

  std::vector<lsplit::Image> imgs;
  for (int i = 0; i < frames; ++i) {
    const SmoothField field(rng);
    lsplit::Image& ls = s.truth.log_s[i];
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) ls.at(x, y) = -0.5 + 0.4 * field((x + 0.5) / w, (y + 0.5) / h);
    for (double& c : s.truth.illum[i]) c = tint(rng);
    s.truth.log_r[i] = log_r;
    lsplit::Image im(w, h, 3);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c)
          im.at(x, y, c) = std::exp(log_r.at(x, y, c) + ls.at(x, y) + s.truth.illum[i][c]);
    imgs.push_back(std::move(im));
  }
  s.seq = lsplit::make_sequence(std::move(imgs), "lambertian");
  return s;
}

/// Constant grey reflectance under uniform light of varying strength; frame
/// `shadow_frame` additionally has its left half darkened by `shadow`.
inline lsplit::ImageSequence step_shadow_sequence(int frames, int w, int h, int shadow_frame,
                                                  double shadow = 0.3) {
  std::vector<lsplit::Image> imgs;
  for (int i = 0; i < frames; ++i) {
    const double light = 0.6 + 0.3 * i / std::max(1, frames - 1);
    lsplit::Image im(w, h, 3, 0.8 * light);
    if (i == shadow_frame)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w / 2; ++x)
          for (int c = 0; c < 3; ++c) im.at(x, y, c) *= shadow;
    imgs.push_back(std::move(im));
  }
  return lsplit::make_sequence(std::move(imgs), "step_shadow");
}

/// Single-channel step: `lo` left of column w/2, `hi` from it on.
inline lsplit::Image step_shading(int w, int h, double lo, double hi) {
  lsplit::Image s(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) s.at(x, y) = x < w / 2 ? lo : hi;
  return s;
}

/// SAW labels for step_shading: non-smooth on the two columns meeting at
/// the step, smooth farther than `margin` columns away, unlabeled between.
inline lsplit::Image step_labels(int w, int h, int margin) {
  lsplit::Image lab(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int dist = x < w / 2 ? w / 2 - 1 - x : x - w / 2;
      lab.at(x, y) = dist == 0 ? 2.0 : (dist > margin ? 1.0 : 0.0);
    }
  return lab;
}

}  // namespace testutil
