#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lsplit/image.hpp"

namespace lsplit {

// ---------------------------------------------------------------------------
// IIW: weighted human disagreement rate

enum class Darker { First, Second, Equal };

struct Judgment {
  double x1 = 0.0, y1 = 0.0;  // normalised image coordinates in [0,1]
  double x2 = 0.0, y2 = 0.0;
  Darker darker = Darker::Equal;
  double weight = 1.0;
};

struct IIWJudgments {
  std::vector<Judgment> items;
};

/// Parses the public IIW annotation JSON ("intrinsic_points" with ids and
/// normalised x/y, "intrinsic_comparisons" with point1/point2/darker/
/// darker_score). Comparisons with a non-positive score, an unknown
/// "darker" value or a non-opaque point are dropped.
IIWJudgments parse_iiw_json(const std::string& text);
IIWJudgments load_iiw_judgments(const std::filesystem::path& path);

/// Relation implied by a luminance ratio rho = lum1 / lum2: Equal when
/// 1/(1+delta) <= rho <= 1+delta, otherwise the darker side.
Darker predict_relation(double lum1, double lum2, double delta);

struct WhdrResult {
  double whdr = 0.0;          // weighted disagreement fraction, 0 if nothing scored
  double weight_total = 0.0;  // weight of scored judgments
  std::size_t evaluated = 0;
  std::size_t skipped = 0;    // points outside the image or mask
};

/// Luminance of a reflectance pixel is its channel mean, floored at 1e-10.
/// Normalised coordinates map to pixel floor(x * w), clamped to w - 1.
WhdrResult whdr(const Image& pred_r, const IIWJudgments& judgments, double delta = 0.1,
                const Image* mask = nullptr);

// ---------------------------------------------------------------------------
// SAW: smooth / non-smooth shading average precision

enum SawLabel : int { kSawUnlabeled = 0, kSawSmooth = 1, kSawNonSmooth = 2 };

enum class SawMode {
  /// Gradient of log shading; max filter only for non-smooth annotations.
  LogAsymmetric,
  /// Compatibility: gradient of shading normalised to [0,1]; max filter for
  /// every annotation.
  Original,
};

struct SawOptions {
  SawMode mode = SawMode::LogAsymmetric;
  int filter_size = 10;
  /// Fraction of smooth annotations kept; sampling is seeded.
  double smooth_sample_rate = 1.0;
  std::uint64_t seed = 0;
};

struct PrPoint {
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct SawResult {
  double ap = 0.0;
  std::vector<PrPoint> curve;  // by decreasing threshold
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// ||grad log S||_2 from forward differences (zero difference at the last
/// row/column). Throws on a non-positive shading value, naming the pixel.
Image log_gradient_magnitude(const Image& shading);

/// size x size maximum filter; the window of pixel x spans
/// [x - size/2, x + size - 1 - size/2], truncated at the border.
Image max_filter(const Image& img, int size);

/// Precision/recall for the non-smooth class over every distinct score
/// (predicted positive when score >= threshold). AP is the trapezoid area
/// over recall, starting from recall 0 at the first point's precision.
SawResult precision_recall(std::vector<std::pair<double, bool>> scored);

SawResult saw_ap(std::span<const Image> shading, std::span<const Image> labels,
                 const SawOptions& opts = {});

// ---------------------------------------------------------------------------
// MIT intrinsic images: MSE / LMSE / DSSIM

struct MitGroundTruth {
  Image reflectance;
  Image shading;
  Image mask;
};

struct MitScores {
  double mse = 0.0;
  double lmse = 0.0;
  double dssim = 0.0;
};

struct MitResult {
  MitScores reflectance;
  MitScores shading;
};

struct MitOptions {
  int lmse_window = 20;
  int lmse_step = 10;
};

/// Least-squares scale alpha minimising ||mask (gt - alpha pred)||^2; zero
/// when the masked prediction energy is below 1e-5.
double fit_scale(const Image& pred, const Image& gt, const Image& mask);

/// Mean squared error over valid pixels and channels after the scale fit.
double scale_invariant_mse(const Image& pred, const Image& gt, const Image& mask);

/// Windowed scale-invariant squared error, normalised by the windowed
/// ground-truth energy. Images smaller than a window use one window
/// spanning that dimension.
double local_mse(const Image& pred, const Image& gt, const Image& mask, int window = 20,
                 int step = 10);

/// Mean SSIM over valid pixels (11x11 Gaussian window, sigma 1.5,
/// K1 = 0.01, K2 = 0.03, dynamic range 1), window truncated at the border.
double ssim(const Image& a, const Image& b, const Image& mask);

/// (1 - SSIM) / 2 of the scale-fitted prediction.
double dssim(const Image& pred, const Image& gt, const Image& mask);

MitScores mit_scores_single(const Image& pred, const Image& gt, const Image& mask,
                            const MitOptions& opts = {});
MitResult mit_scores(const Image& pred_r, const Image& pred_s, const MitGroundTruth& gt,
                     const MitOptions& opts = {});

}  // namespace lsplit
