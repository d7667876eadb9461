#pragma once

#include <filesystem>
#include <vector>

#include "lsplit/image.hpp"

namespace lsplit {

/// Raw float stack layout, all little-endian:
///   8 bytes  magic "LSPLIT01"
///   4 x u32  m, h, w, channels
///   m*h*w*channels float32, row-major interleaved, images in frame order.
inline constexpr char kRawMagic[8] = {'L', 'S', 'P', 'L', 'I', 'T', '0', '1'};

void write_raw(const std::filesystem::path& path, const std::vector<Image>& images);
std::vector<Image> read_raw(const std::filesystem::path& path);

}  // namespace lsplit
