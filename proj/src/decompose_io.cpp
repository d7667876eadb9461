#include "lsplit/decompose_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lsplit/error.hpp"
#include "lsplit/image_io.hpp"
#include "lsplit/rawio.hpp"

namespace fs = std::filesystem;

namespace lsplit {

std::string shading_png_name(int frame) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "shading_%04d.png", frame + 1);
  return buf;
}

Image display_from_log(const Image& log_img) {
  Image out = log_img;
  for (double& v : out.data) v = std::exp(v);
  std::vector<double> sorted = out.data;
  if (sorted.empty()) return out;
  const auto k = static_cast<std::ptrdiff_t>(
      std::min(sorted.size() - 1, static_cast<std::size_t>(0.99 * (sorted.size() - 1) + 0.5)));
  std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
  const double ref = sorted[static_cast<std::size_t>(k)];
  const double inv = ref > 0.0 && std::isfinite(ref) ? 1.0 / ref : 1.0;
  for (double& v : out.data) v = std::clamp(v * inv, 0.0, 1.0);
  return out;
}

void write_decomposition(const fs::path& dir, const Decomposition& d) {
  if (d.frame_count() == 0) fail(ErrorCode::InvalidArgument, "empty decomposition");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message(), dir.string());

  write_raw(dir / files::kLogReflectance, d.log_r);
  write_raw(dir / files::kLogShading, d.log_s);
  std::vector<Image> illum;
  for (const Rgb& c : d.illum) {
    Image im(1, 1, 3);
    for (int k = 0; k < 3; ++k) im.data[k] = c[k];
    illum.push_back(std::move(im));
  }
  write_raw(dir / files::kIllumination, illum);

  write_png16(dir / files::kReflectancePng, display_from_log(d.mean_log_r()));
  for (int i = 0; i < d.frame_count(); ++i)
    write_png16(dir / shading_png_name(i), display_from_log(d.log_s[i]));

  std::ofstream table(dir / files::kIlluminationTable);
  if (!table) fail(ErrorCode::Io, "cannot write illumination table", dir.string());
  table << "# frame r g b (log domain)\n";
  char buf[160];
  for (int i = 0; i < d.frame_count(); ++i) {
    std::snprintf(buf, sizeof buf, "%d %.9g %.9g %.9g\n", i + 1, d.illum[i][0], d.illum[i][1],
                  d.illum[i][2]);
    table << buf;
  }
}

Decomposition read_decomposition(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::Io, "not a directory: " + dir.string(), dir.string());
  Decomposition d;
  d.log_r = read_raw(dir / files::kLogReflectance);
  d.log_s = read_raw(dir / files::kLogShading);
  const std::vector<Image> illum = read_raw(dir / files::kIllumination);
  if (d.log_r.size() != d.log_s.size() || d.log_r.size() != illum.size())
    fail(ErrorCode::Format, "decomposition files disagree on frame count", dir.string());
  for (std::size_t i = 0; i < d.log_r.size(); ++i) {
    if (d.log_r[i].channels != 3 || d.log_s[i].channels != 1 || !d.log_r[i].same_size(d.log_s[i]))
      fail(ErrorCode::Format, "decomposition images have unexpected shape", dir.string());
    if (illum[i].data.size() != 3)
      fail(ErrorCode::Format, "illumination file has unexpected shape", dir.string());
    d.illum.push_back({illum[i].data[0], illum[i].data[1], illum[i].data[2]});
  }
  return d;
}

}  // namespace lsplit
