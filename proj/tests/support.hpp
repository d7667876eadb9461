#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "lsplit/decomposition.hpp"
#include "lsplit/image.hpp"
#include "lsplit/image_io.hpp"
#include "lsplit/imagestack.hpp"

namespace testutil {

using lsplit::Decomposition;
using lsplit::Image;

inline Image random_image(int w, int h, int c, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Image im(w, h, c);
  for (double& v : im.data) v = u(rng);
  return im;
}

inline Image random_mask(int w, int h, std::mt19937_64& rng, double valid_fraction) {
  std::bernoulli_distribution b(valid_fraction);
  Image m(w, h, 1);
  for (double& v : m.data) v = b(rng) ? 1.0 : 0.0;
  return m;
}

/// Random RGB frames in [lo, 1] with optional random masks.
inline lsplit::ImageSequence random_sequence(int frames, int w, int h, std::uint64_t seed,
                                             double valid_fraction = 1.0, double lo = 0.05) {
  std::mt19937_64 rng(seed);
  std::vector<Image> imgs;
  for (int i = 0; i < frames; ++i) imgs.push_back(random_image(w, h, 3, rng, lo, 1.0));
  auto seq = lsplit::make_sequence(std::move(imgs), "random");
  if (valid_fraction < 1.0)
    for (auto& m : seq.masks) m = random_mask(w, h, rng, valid_fraction);
  return seq;
}

inline Decomposition random_decomposition(int frames, int w, int h, std::uint64_t seed,
                                          double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  auto d = Decomposition::zeros(frames, w, h);
  for (auto& im : d.log_r)
    for (double& v : im.data) v = u(rng);
  for (auto& im : d.log_s)
    for (double& v : im.data) v = u(rng);
  for (auto& c : d.illum)
    for (double& v : c) v = u(rng);
  return d;
}

/// Pointers to every scalar of a decomposition, in a fixed order.
inline std::vector<double*> coordinates(Decomposition& d) {
  std::vector<double*> out;
  for (auto& im : d.log_r)
    for (double& v : im.data) out.push_back(&v);
  for (auto& im : d.log_s)
    for (double& v : im.data) out.push_back(&v);
  for (auto& c : d.illum)
    for (double& v : c) out.push_back(&v);
  return out;
}

/// Central-difference gradient of f at d.
inline std::vector<double> fd_gradient(const std::function<double(const Decomposition&)>& f,
                                       Decomposition d, double h = 1e-6) {
  std::vector<double> g;
  for (double* x : coordinates(d)) {
    const double x0 = *x;
    *x = x0 + h;
    const double fp = f(d);
    *x = x0 - h;
    const double fm = f(d);
    *x = x0;
    g.push_back((fp - fm) / (2.0 * h));
  }
  return g;
}

inline std::vector<double> flatten(Decomposition d) {
  std::vector<double> out;
  for (double* x : coordinates(d)) out.push_back(*x);
  return out;
}

/// ||a - b|| / max(||b||, tiny)
inline double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("lsplit_test_" + name + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Frames as 16-bit PNGs named frame_000.png, frame_001.png, ...
inline void write_sequence(const std::filesystem::path& dir, const lsplit::ImageSequence& seq,
                           const std::filesystem::path& mask_dir = {}) {
  std::filesystem::create_directories(dir);
  if (!mask_dir.empty()) std::filesystem::create_directories(mask_dir);
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.png", i);
    lsplit::write_png16(dir / name, seq.frames[i]);
    if (!mask_dir.empty()) lsplit::write_png8(mask_dir / name, seq.masks[i]);
  }
}

}  // namespace testutil
