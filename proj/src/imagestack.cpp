#include "lsplit/imagestack.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "lsplit/error.hpp"
#include "lsplit/image_io.hpp"
#include "lsplit/parallel.hpp"

namespace fs = std::filesystem;

namespace lsplit {
namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir))
    fail(ErrorCode::Io, "not a directory: " + dir.string(), dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });
  return files;
}

std::optional<fs::path> find_mask(const fs::path& mask_dir, const fs::path& frame) {
  for (const char* ext : {".png", ".PNG"}) {
    fs::path candidate = mask_dir / (frame.stem().string() + ext);
    if (fs::exists(candidate)) return candidate;
  }
  return std::nullopt;
}

}  // namespace

void ImageSequence::validate(int min_frames) const {
  if (frame_count() < min_frames)
    fail(ErrorCode::InvalidArgument,
         "sequence has " + std::to_string(frame_count()) + " frames, need at least " +
             std::to_string(min_frames));
  if (masks.size() != frames.size())
    fail(ErrorCode::ShapeMismatch, "mask count does not match frame count");
  const int w = width(), h = height();
  if (w <= 0 || h <= 0) fail(ErrorCode::EmptyInput, "sequence frames are empty");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Image& f = frames[i];
    const Image& m = masks[i];
    if (f.width != w || f.height != h || f.channels != 3)
      fail(ErrorCode::DimensionMismatch, "frame " + std::to_string(i) + " has mismatched shape");
    if (m.width != w || m.height != h || m.channels != 1)
      fail(ErrorCode::DimensionMismatch, "mask " + std::to_string(i) + " has mismatched shape");
    for (double v : f.data)
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        fail(ErrorCode::InvalidArgument,
             "frame " + std::to_string(i) + " has a value outside [0,1]");
    for (double v : m.data)
      if (v != 0.0 && v != 1.0)
        fail(ErrorCode::InvalidArgument, "mask " + std::to_string(i) + " is not binary");
  }
}

ImageSequence make_sequence(std::vector<Image> frames, std::string id) {
  ImageSequence seq;
  seq.sequence_id = std::move(id);
  for (const Image& f : frames) seq.masks.emplace_back(f.width, f.height, 1, 1.0);
  seq.frames = std::move(frames);
  return seq;
}

ImageSequence load_sequence(const fs::path& frame_dir, const std::optional<fs::path>& mask_dir) {
  const std::vector<fs::path> files = list_images(frame_dir);
  if (files.empty())
    fail(ErrorCode::EmptyInput, "no images in " + frame_dir.string(), frame_dir.string());
  if (mask_dir && !fs::is_directory(*mask_dir))
    fail(ErrorCode::Io, "not a directory: " + mask_dir->string(), mask_dir->string());

  ImageSequence seq;
  seq.sequence_id = frame_dir.filename().string();
  if (seq.sequence_id.empty()) seq.sequence_id = frame_dir.parent_path().filename().string();
  seq.frames.resize(files.size());
  seq.masks.resize(files.size());
  parallel_for(files.size(), [&](std::size_t i) { seq.frames[i] = read_rgb(files[i]); });

  const Image& first = seq.frames.front();
  for (std::size_t i = 0; i < files.size(); ++i) {
    const Image& f = seq.frames[i];
    if (!f.same_size(first))
      fail(ErrorCode::DimensionMismatch,
           files[i].filename().string() + " is " + std::to_string(f.width) + "x" +
               std::to_string(f.height) + ", expected " + std::to_string(first.width) + "x" +
               std::to_string(first.height),
           files[i].string());
    std::optional<fs::path> mpath = mask_dir ? find_mask(*mask_dir, files[i]) : std::nullopt;
    if (mpath) {
      seq.masks[i] = read_mask(*mpath);
      if (!seq.masks[i].same_size(first))
        fail(ErrorCode::DimensionMismatch,
             mpath->filename().string() + " does not match the frame size", mpath->string());
    } else {
      seq.masks[i] = Image(first.width, first.height, 1, 1.0);
    }
  }
  return seq;
}

std::array<double, 5> pixel_features(std::span<const double> rgb, double x, double y) {
  const double sum = rgb[0] + rgb[1] + rgb[2];
  double c1 = 1.0 / 3.0, c2 = 1.0 / 3.0;
  if (sum > 0.0) {
    c1 = rgb[0] / sum;
    c2 = rgb[1] / sum;
  }
  return {x, y, sum / 3.0, c1, c2};
}

double luminance_weight(std::span<const double> rgb, double eps_img) {
  const double lum = (rgb[0] + rgb[1] + rgb[2]) / 3.0;
  return std::pow(std::max(lum, eps_img), 1.0 / 8.0);
}

int level_extent(int full, int level) noexcept {
  const int div = 1 << (level - 1);
  return (full + div - 1) / div;
}

const PyramidLevel& LogStack::level(int l) const {
  if (l < 1 || l > static_cast<int>(pyramid.size()))
    fail(ErrorCode::InvalidArgument, "pyramid level out of range: " + std::to_string(l));
  return pyramid[static_cast<std::size_t>(l - 1)];
}

PooledImage pool_2x2(const Image& fine, const Image& fine_mask) {
  const int cw = (fine.width + 1) / 2, ch = (fine.height + 1) / 2;
  const int nc = fine.channels;
  PooledImage out{Image(cw, ch, nc), Image(cw, ch, 1)};
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      const int xs[2] = {2 * x, std::min(2 * x + 1, fine.width - 1)};
      const int ys[2] = {2 * y, std::min(2 * y + 1, fine.height - 1)};
      int valid = 0;
      for (int yy : ys)
        for (int xx : xs) valid += fine_mask.at(xx, yy) != 0.0;
      const bool use_all = valid == 0;
      for (int c = 0; c < nc; ++c) {
        double s = 0.0;
        for (int yy : ys)
          for (int xx : xs)
            if (use_all || fine_mask.at(xx, yy) != 0.0) s += fine.at(xx, yy, c);
        out.image.at(x, y, c) = s / (use_all ? 4 : valid);
      }
      out.mask.at(x, y) = valid == 4 ? 1.0 : 0.0;
    }
  }
  return out;
}

namespace {

void fill_derived(PyramidLevel& lvl, double eps_img) {
  const double stride = static_cast<double>(1 << (lvl.level - 1));
  const std::size_t m = lvl.frames.size();
  lvl.log_gray.resize(m);
  lvl.features.resize(m);
  parallel_for(m, [&](std::size_t i) {
    const Image& f = lvl.frames[i];
    Image lg(f.width, f.height, 1);
    Image feat(f.width, f.height, 5);
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        auto px = f.pixel(x, y);
        const auto fv = pixel_features(px, x * stride, y * stride);
        for (int k = 0; k < 5; ++k) feat.at(x, y, k) = fv[k];
        lg.at(x, y) = std::log(std::max(fv[2], eps_img));
      }
    }
    lvl.log_gray[i] = std::move(lg);
    lvl.features[i] = std::move(feat);
  });
}

}  // namespace

PyramidLevel downsample(const PyramidLevel& finer, double eps_img) {
  PyramidLevel out;
  out.level = finer.level + 1;
  out.width = (finer.width + 1) / 2;
  out.height = (finer.height + 1) / 2;
  const std::size_t m = finer.frames.size();
  out.frames.resize(m);
  out.masks.resize(m);
  parallel_for(m, [&](std::size_t i) {
    PooledImage p = pool_2x2(finer.frames[i], finer.masks[i]);
    out.frames[i] = std::move(p.image);
    out.masks[i] = std::move(p.mask);
  });
  fill_derived(out, eps_img);
  return out;
}

LogStack to_log_stack(const ImageSequence& seq, double eps_img) {
  if (!(eps_img > 0.0 && eps_img <= 0.1))
    fail(ErrorCode::InvalidArgument, "eps_img must lie in (0, 0.1]");
  seq.validate(1);

  LogStack st;
  st.frames = seq.frame_count();
  st.width = seq.width();
  st.height = seq.height();
  st.eps_img = eps_img;
  st.masks = seq.masks;
  st.log_frames.resize(seq.frames.size());
  st.lum_weights.resize(seq.frames.size());
  parallel_for(seq.frames.size(), [&](std::size_t i) {
    const Image& f = seq.frames[i];
    Image lf(f.width, f.height, 3);
    Image lw(f.width, f.height, 1);
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        auto px = f.pixel(x, y);
        for (int c = 0; c < 3; ++c) lf.at(x, y, c) = std::log(std::max(px[c], eps_img));
        lw.at(x, y) = luminance_weight(px, eps_img);
      }
    }
    st.log_frames[i] = std::move(lf);
    st.lum_weights[i] = std::move(lw);
  });

  PyramidLevel base;
  base.level = 1;
  base.width = st.width;
  base.height = st.height;
  base.frames = seq.frames;
  base.masks = seq.masks;
  fill_derived(base, eps_img);
  st.pyramid.push_back(std::move(base));
  for (int l = 2; l <= kPyramidLevels; ++l)
    st.pyramid.push_back(downsample(st.pyramid.back(), eps_img));
  return st;
}

}  // namespace lsplit
