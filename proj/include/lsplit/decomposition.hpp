#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "lsplit/image.hpp"

namespace lsplit {

using Rgb = std::array<double, 3>;

/// Optimization variables for one sequence: per-frame log reflectance (RGB),
/// per-frame grayscale log shading and a per-frame log-domain illumination
/// colour added to every pixel.
struct Decomposition {
  std::vector<Image> log_r;
  std::vector<Image> log_s;
  std::vector<Rgb> illum;

  static Decomposition zeros(int frames, int width, int height);

  int frame_count() const noexcept { return static_cast<int>(log_r.size()); }
  int width() const noexcept { return log_r.empty() ? 0 : log_r.front().width; }
  int height() const noexcept { return log_r.empty() ? 0 : log_r.front().height; }

  bool same_shape(const Decomposition& o) const noexcept;
  bool all_finite() const;
  /// Frame-mean log reflectance (the shared reflectance estimate).
  Image mean_log_r() const;
};

/// y += a * x
void axpy(double a, const Decomposition& x, Decomposition& y);
void scale(double a, Decomposition& x);
double dot(const Decomposition& a, const Decomposition& b);
inline double norm(const Decomposition& a) { return std::sqrt(dot(a, a)); }

/// Loss value with its gradient in the decomposition's own layout.
struct TermResult {
  double value = 0.0;
  Decomposition grad;
};

}  // namespace lsplit
