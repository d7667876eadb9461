#include "lsplit/image.hpp"

#include <algorithm>
#include <cmath>

#include "lsplit/error.hpp"

namespace lsplit {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::EmptyInput: return "empty input";
    case ErrorCode::Format: return "format error";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
    case ErrorCode::SolverFailure: return "solver failure";
    case ErrorCode::Internal: return "internal error";
  }
  return "unknown";
}

Image::Image(int w, int h, int c, double fill)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(w) * h * c, fill) {}

Image channel_mean(const Image& img) {
  Image out(img.width, img.height, 1);
  const std::size_t n = img.pixel_count();
  const int c = img.channels;
  for (std::size_t p = 0; p < n; ++p) {
    double s = 0.0;
    for (int k = 0; k < c; ++k) s += img.data[p * c + k];
    out.data[p] = s / c;
  }
  return out;
}

bool all_finite(const Image& img) {
  return std::all_of(img.data.begin(), img.data.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace lsplit
