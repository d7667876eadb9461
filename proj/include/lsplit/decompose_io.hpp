#pragma once

#include <filesystem>

#include "lsplit/decomposition.hpp"

namespace lsplit {

/// Files making up a decomposition directory.
namespace files {
inline constexpr const char* kLogReflectance = "log_reflectance.lsr";
inline constexpr const char* kLogShading = "log_shading.lsr";
inline constexpr const char* kIllumination = "illum.lsr";
inline constexpr const char* kIlluminationTable = "illum.txt";
inline constexpr const char* kReflectancePng = "reflectance.png";
inline constexpr const char* kReport = "report.txt";
inline constexpr const char* kConfig = "config.txt";
}  // namespace files

/// "shading_0001.png" for frame index 0.
std::string shading_png_name(int frame);

/// Linear display image: exp of the log image divided by its 99th
/// percentile, clamped to [0,1].
Image display_from_log(const Image& log_img);

/// Writes raw log-domain floats (the source of truth), the display PNGs and
/// the illumination table into `dir`, creating it if needed.
void write_decomposition(const std::filesystem::path& dir, const Decomposition& d);

/// Reads back the raw float files written by write_decomposition.
Decomposition read_decomposition(const std::filesystem::path& dir);

}  // namespace lsplit
