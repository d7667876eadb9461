#pragma once

#include <filesystem>

#include "lsplit/image.hpp"

namespace lsplit {

struct DecodedImage {
  Image image;     // RGB or single channel, values in [0,1]
  int bit_depth;   // 8 or 16
};

/// Decodes a PNG/JPEG file. Integer samples are mapped linearly onto [0,1]
/// (8-bit by 255, 16-bit by 65535). Colour files come back as RGB, alpha
/// dropped; grayscale files stay single-channel.
DecodedImage read_image(const std::filesystem::path& path);

/// Reads an image and replicates grayscale into three channels.
Image read_rgb(const std::filesystem::path& path);

/// Reads a single-channel image; colour input is averaged.
Image read_gray(const std::filesystem::path& path);

/// Binary mask from a single-channel PNG; a pixel is valid when its value
/// exceeds 127 (8-bit) or 32767 (16-bit).
Image read_mask(const std::filesystem::path& path);

/// Raw integer codes of a single-channel label map (0..255 / 0..65535).
Image read_label_map(const std::filesystem::path& path);

/// Values are clamped to [0,1] and rounded to the nearest code.
void write_png16(const std::filesystem::path& path, const Image& img);
void write_png8(const std::filesystem::path& path, const Image& img);

}  // namespace lsplit
