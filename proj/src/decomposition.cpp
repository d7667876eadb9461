#include "lsplit/decomposition.hpp"

#include <algorithm>

namespace lsplit {

Decomposition Decomposition::zeros(int frames, int width, int height) {
  Decomposition d;
  d.log_r.assign(static_cast<std::size_t>(frames), Image(width, height, 3));
  d.log_s.assign(static_cast<std::size_t>(frames), Image(width, height, 1));
  d.illum.assign(static_cast<std::size_t>(frames), Rgb{0.0, 0.0, 0.0});
  return d;
}

bool Decomposition::same_shape(const Decomposition& o) const noexcept {
  if (log_r.size() != o.log_r.size() || log_s.size() != o.log_s.size() ||
      illum.size() != o.illum.size())
    return false;
  for (std::size_t i = 0; i < log_r.size(); ++i)
    if (!log_r[i].same_shape(o.log_r[i]) || !log_s[i].same_shape(o.log_s[i])) return false;
  return true;
}

bool Decomposition::all_finite() const {
  for (const Image& im : log_r)
    if (!lsplit::all_finite(im)) return false;
  for (const Image& im : log_s)
    if (!lsplit::all_finite(im)) return false;
  for (const Rgb& c : illum)
    for (double v : c)
      if (!std::isfinite(v)) return false;
  return true;
}

Image Decomposition::mean_log_r() const {
  Image out(width(), height(), 3);
  for (const Image& im : log_r)
    for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] += im.data[k];
  const double inv = 1.0 / std::max(1, frame_count());
  for (double& v : out.data) v *= inv;
  return out;
}

void axpy(double a, const Decomposition& x, Decomposition& y) {
  for (std::size_t i = 0; i < x.log_r.size(); ++i) {
    auto& yr = y.log_r[i].data;
    const auto& xr = x.log_r[i].data;
    for (std::size_t k = 0; k < xr.size(); ++k) yr[k] += a * xr[k];
    auto& ys = y.log_s[i].data;
    const auto& xs = x.log_s[i].data;
    for (std::size_t k = 0; k < xs.size(); ++k) ys[k] += a * xs[k];
    for (int c = 0; c < 3; ++c) y.illum[i][c] += a * x.illum[i][c];
  }
}

void scale(double a, Decomposition& x) {
  for (Image& im : x.log_r)
    for (double& v : im.data) v *= a;
  for (Image& im : x.log_s)
    for (double& v : im.data) v *= a;
  for (Rgb& c : x.illum)
    for (double& v : c) v *= a;
}

double dot(const Decomposition& a, const Decomposition& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.log_r.size(); ++i) {
    const auto& ar = a.log_r[i].data;
    const auto& br = b.log_r[i].data;
    for (std::size_t k = 0; k < ar.size(); ++k) s += ar[k] * br[k];
    const auto& as = a.log_s[i].data;
    const auto& bs = b.log_s[i].data;
    for (std::size_t k = 0; k < as.size(); ++k) s += as[k] * bs[k];
    for (int c = 0; c < 3; ++c) s += a.illum[i][c] * b.illum[i][c];
  }
  return s;
}

}  // namespace lsplit
