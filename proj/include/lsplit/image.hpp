#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lsplit {

/// Dense interleaved image of doubles, row-major. Masks are single-channel
/// images holding exactly 0 or 1.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0);

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  double& at(int x, int y, int c = 0) noexcept { return data[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const noexcept { return data[index(x, y, c)]; }

  std::span<double> pixel(int x, int y) noexcept {
    return {data.data() + index(x, y), static_cast<std::size_t>(channels)};
  }
  std::span<const double> pixel(int x, int y) const noexcept {
    return {data.data() + index(x, y), static_cast<std::size_t>(channels)};
  }

  bool empty() const noexcept { return data.empty(); }
  bool same_size(const Image& o) const noexcept {
    return width == o.width && height == o.height;
  }
  bool same_shape(const Image& o) const noexcept {
    return same_size(o) && channels == o.channels;
  }
};

/// Mean over channels, producing a single-channel image.
Image channel_mean(const Image& img);

bool all_finite(const Image& img);

}  // namespace lsplit
