#include "lsplit/image_io.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "lsplit/error.hpp"

namespace lsplit {
namespace {

cv::Mat load_raw(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    fail(ErrorCode::Io, "file not found: " + path.string(), path.string());
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (m.empty())
    fail(ErrorCode::Format, "cannot decode image: " + path.string(), path.string());
  if (m.depth() != CV_8U && m.depth() != CV_16U)
    fail(ErrorCode::Format, "unsupported sample type (need 8 or 16 bit): " + path.string(),
         path.string());
  return m;
}

template <typename T>
Image to_image(const cv::Mat& m, double scale) {
  const int src_c = m.channels();
  const int dst_c = src_c == 1 ? 1 : 3;
  Image out(m.cols, m.rows, dst_c);
  for (int y = 0; y < m.rows; ++y) {
    const T* row = m.ptr<T>(y);
    for (int x = 0; x < m.cols; ++x) {
      const T* px = row + static_cast<std::ptrdiff_t>(x) * src_c;
      if (dst_c == 1) {
        out.at(x, y) = px[0] * scale;
      } else if (src_c == 2) {
        // gray + alpha
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = px[0] * scale;
      } else {
        // OpenCV stores BGR(A)
        out.at(x, y, 0) = px[2] * scale;
        out.at(x, y, 1) = px[1] * scale;
        out.at(x, y, 2) = px[0] * scale;
      }
    }
  }
  return out;
}

template <typename T>
cv::Mat to_mat(const Image& img, double maxval, int type1, int type3) {
  if (img.channels != 1 && img.channels != 3)
    fail(ErrorCode::InvalidArgument, "can only encode 1 or 3 channel images");
  cv::Mat m(img.height, img.width, img.channels == 1 ? type1 : type3);
  for (int y = 0; y < img.height; ++y) {
    T* row = m.ptr<T>(y);
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        const int dst = img.channels == 1 ? 0 : 2 - c;
        const double v = std::clamp(img.at(x, y, c), 0.0, 1.0);
        row[static_cast<std::ptrdiff_t>(x) * img.channels + dst] =
            static_cast<T>(std::lround(v * maxval));
      }
    }
  }
  return m;
}

void write_mat(const std::filesystem::path& path, const cv::Mat& m) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), m);
  } catch (const cv::Exception& e) {
    fail(ErrorCode::Io, "cannot write " + path.string() + ": " + e.what(), path.string());
  }
  if (!ok) fail(ErrorCode::Io, "cannot write " + path.string(), path.string());
}

}  // namespace

DecodedImage read_image(const std::filesystem::path& path) {
  cv::Mat m = load_raw(path);
  if (m.depth() == CV_16U) return {to_image<std::uint16_t>(m, 1.0 / 65535.0), 16};
  return {to_image<std::uint8_t>(m, 1.0 / 255.0), 8};
}

Image read_rgb(const std::filesystem::path& path) {
  Image img = read_image(path).image;
  if (img.channels == 3) return img;
  Image rgb(img.width, img.height, 3);
  for (std::size_t p = 0; p < img.pixel_count(); ++p)
    for (int c = 0; c < 3; ++c) rgb.data[p * 3 + c] = img.data[p];
  return rgb;
}

Image read_gray(const std::filesystem::path& path) {
  Image img = read_image(path).image;
  return img.channels == 1 ? img : channel_mean(img);
}

Image read_mask(const std::filesystem::path& path) {
  cv::Mat m = load_raw(path);
  if (m.channels() != 1)
    fail(ErrorCode::Format, "mask must be single-channel: " + path.string(), path.string());
  Image out(m.cols, m.rows, 1);
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      const bool valid = m.depth() == CV_16U ? m.at<std::uint16_t>(y, x) > 32767
                                             : m.at<std::uint8_t>(y, x) > 127;
      out.at(x, y) = valid ? 1.0 : 0.0;
    }
  }
  return out;
}

Image read_label_map(const std::filesystem::path& path) {
  cv::Mat m = load_raw(path);
  if (m.channels() != 1)
    fail(ErrorCode::Format, "label map must be single-channel: " + path.string(),
         path.string());
  Image out(m.cols, m.rows, 1);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x)
      out.at(x, y) = m.depth() == CV_16U ? m.at<std::uint16_t>(y, x) : m.at<std::uint8_t>(y, x);
  return out;
}

void write_png16(const std::filesystem::path& path, const Image& img) {
  write_mat(path, to_mat<std::uint16_t>(img, 65535.0, CV_16UC1, CV_16UC3));
}

void write_png8(const std::filesystem::path& path, const Image& img) {
  write_mat(path, to_mat<std::uint8_t>(img, 255.0, CV_8UC1, CV_8UC3));
}

}  // namespace lsplit
