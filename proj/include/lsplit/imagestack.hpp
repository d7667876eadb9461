#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lsplit/image.hpp"

namespace lsplit {

inline constexpr int kPyramidLevels = 4;
inline constexpr double kDefaultEpsImg = 1e-4;

/// Fixed-viewpoint frames (RGB, linear, in [0,1]) plus per-frame validity
/// masks.
struct ImageSequence {
  std::vector<Image> frames;
  std::vector<Image> masks;
  std::string sequence_id;

  int frame_count() const noexcept { return static_cast<int>(frames.size()); }
  int width() const noexcept { return frames.empty() ? 0 : frames.front().width; }
  int height() const noexcept { return frames.empty() ? 0 : frames.front().height; }

  /// Throws if dimensions disagree, values leave [0,1], or masks are not
  /// binary. `min_frames` is 2 for solving, 1 for metric-only paths.
  void validate(int min_frames = 1) const;
};

/// Sequence with all-valid masks.
ImageSequence make_sequence(std::vector<Image> frames, std::string id = {});

/// Frames are every decodable image in frame_dir, sorted by filename. A mask
/// is looked up in mask_dir by the frame's filename stem; frames without one
/// are all-valid.
ImageSequence load_sequence(const std::filesystem::path& frame_dir,
                            const std::optional<std::filesystem::path>& mask_dir = std::nullopt);

/// One pyramid scale. Level 1 is full resolution; positions in `features`
/// are kept in full-resolution pixel units so spatial bandwidths mean the
/// same thing at every scale.
struct PyramidLevel {
  int level = 1;
  int width = 0;
  int height = 0;
  std::vector<Image> frames;    // linear RGB
  std::vector<Image> masks;
  std::vector<Image> log_gray;  // log(max(mean RGB, eps_img))
  std::vector<Image> features;  // (x, y, intensity, c1, c2)
};

struct LogStack {
  int frames = 0;
  int width = 0;
  int height = 0;
  double eps_img = kDefaultEpsImg;
  std::vector<Image> log_frames;   // log(max(I, eps_img)), RGB
  std::vector<Image> lum_weights;  // lum(I)^(1/8)
  std::vector<Image> masks;
  std::vector<PyramidLevel> pyramid;

  const std::vector<Image>& features() const { return pyramid.front().features; }
  const PyramidLevel& level(int l) const;
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * height;
  }
};

/// Per-pixel (x, y, intensity, c1, c2) where intensity is the mean of the
/// linear RGB values and (c1, c2) the first two L1 chromaticity components.
std::array<double, 5> pixel_features(std::span<const double> rgb, double x, double y);

/// lum(I)^(1/8) with lum = (R+G+B)/3, floored at eps_img so the weight stays
/// strictly positive.
double luminance_weight(std::span<const double> rgb, double eps_img);

LogStack to_log_stack(const ImageSequence& seq, double eps_img = kDefaultEpsImg);

/// 2x2 pooling of `fine` in the linear domain over valid children. Odd sizes
/// are padded by edge replication. A coarse pixel is valid iff all of its
/// children are valid; its value averages the valid children (all children
/// when none is valid).
struct PooledImage {
  Image image;
  Image mask;
};
PooledImage pool_2x2(const Image& fine, const Image& fine_mask);

/// Next coarser level of `finer`.
PyramidLevel downsample(const PyramidLevel& finer, double eps_img);

/// Size of pyramid level l (1-based): ceil(n / 2^(l-1)).
int level_extent(int full, int level) noexcept;

}  // namespace lsplit
