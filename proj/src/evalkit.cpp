#include "lsplit/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"

#include "lsplit/error.hpp"

namespace lsplit {

// ---------------------------------------------------------------------------
// IIW

IIWJudgments parse_iiw_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("invalid IIW json: ") + e.what());
  }
  if (!doc.contains("intrinsic_points") || !doc.contains("intrinsic_comparisons"))
    fail(ErrorCode::Format, "IIW json lacks intrinsic_points or intrinsic_comparisons");

  struct Point {
    double x, y;
    bool opaque;
  };
  std::map<long long, Point> points;
  for (const auto& p : doc["intrinsic_points"]) {
    if (!p.contains("id") || !p.contains("x") || !p.contains("y"))
      fail(ErrorCode::Format, "IIW point lacks id/x/y");
    const bool opaque = !p.contains("opaque") || p["opaque"].is_null() || p["opaque"].get<bool>();
    points[p["id"].get<long long>()] = {p["x"].get<double>(), p["y"].get<double>(), opaque};
  }

  IIWJudgments out;
  for (const auto& c : doc["intrinsic_comparisons"]) {
    if (!c.contains("point1") || !c.contains("point2") || !c.contains("darker")) continue;
    if (c["darker"].is_null()) continue;
    const std::string darker = c["darker"].get<std::string>();
    Judgment j;
    if (darker == "1") j.darker = Darker::First;
    else if (darker == "2") j.darker = Darker::Second;
    else if (darker == "E") j.darker = Darker::Equal;
    else continue;
    if (!c.contains("darker_score") || c["darker_score"].is_null()) continue;
    j.weight = c["darker_score"].get<double>();
    if (!(j.weight > 0.0)) continue;
    const auto a = points.find(c["point1"].get<long long>());
    const auto b = points.find(c["point2"].get<long long>());
    if (a == points.end() || b == points.end())
      fail(ErrorCode::Format, "IIW comparison references an unknown point");
    if (!a->second.opaque || !b->second.opaque) continue;
    j.x1 = a->second.x;
    j.y1 = a->second.y;
    j.x2 = b->second.x;
    j.y2 = b->second.y;
    out.items.push_back(j);
  }
  return out;
}

IIWJudgments load_iiw_judgments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string(), path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_iiw_json(ss.str());
}

Darker predict_relation(double lum1, double lum2, double delta) {
  const double rho = lum1 / lum2;
  if (rho >= 1.0 / (1.0 + delta) && rho <= 1.0 + delta) return Darker::Equal;
  return rho < 1.0 ? Darker::First : Darker::Second;
}

namespace {

bool to_pixel(double nx, double ny, int w, int h, int& px, int& py) {
  if (!(nx >= 0.0 && nx <= 1.0 && ny >= 0.0 && ny <= 1.0)) return false;
  px = std::min(static_cast<int>(nx * w), w - 1);
  py = std::min(static_cast<int>(ny * h), h - 1);
  return true;
}

double pixel_lum(const Image& img, int x, int y) {
  double s = 0.0;
  for (int c = 0; c < img.channels; ++c) s += img.at(x, y, c);
  return std::max(1e-10, s / img.channels);
}

}  // namespace

WhdrResult whdr(const Image& pred_r, const IIWJudgments& judgments, double delta,
                const Image* mask) {
  if (!(delta > 0.0)) fail(ErrorCode::InvalidArgument, "whdr delta must be positive");
  if (pred_r.empty()) fail(ErrorCode::EmptyInput, "empty reflectance image");
  if (mask && !mask->same_size(pred_r))
    fail(ErrorCode::ShapeMismatch, "whdr mask does not match the reflectance");
  WhdrResult r;
  double wrong = 0.0;
  for (const Judgment& j : judgments.items) {
    int ax, ay, bx, by;
    if (!to_pixel(j.x1, j.y1, pred_r.width, pred_r.height, ax, ay) ||
        !to_pixel(j.x2, j.y2, pred_r.width, pred_r.height, bx, by) ||
        (mask && (mask->at(ax, ay) == 0.0 || mask->at(bx, by) == 0.0))) {
      ++r.skipped;
      continue;
    }
    const Darker pred = predict_relation(pixel_lum(pred_r, ax, ay), pixel_lum(pred_r, bx, by), delta);
    if (pred != j.darker) wrong += j.weight;
    r.weight_total += j.weight;
    ++r.evaluated;
  }
  r.whdr = r.weight_total > 0.0 ? wrong / r.weight_total : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// SAW

Image log_gradient_magnitude(const Image& shading) {
  if (shading.channels != 1) fail(ErrorCode::ShapeMismatch, "shading must be single-channel");
  const int w = shading.width, h = shading.height;
  Image logs(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = shading.at(x, y);
      if (!(v > 0.0))
        fail(ErrorCode::InvalidArgument,
             "non-positive shading at pixel (" + std::to_string(x) + ", " + std::to_string(y) + ")",
             std::to_string(x) + "," + std::to_string(y));
      logs.at(x, y) = std::log(v);
    }
  Image g(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = x + 1 < w ? logs.at(x + 1, y) - logs.at(x, y) : 0.0;
      const double gy = y + 1 < h ? logs.at(x, y + 1) - logs.at(x, y) : 0.0;
      g.at(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  return g;
}

namespace {

Image normalized_gradient_magnitude(const Image& shading) {
  const int w = shading.width, h = shading.height;
  double hi = 0.0;
  for (double v : shading.data) hi = std::max(hi, v);
  const double inv = hi > 0.0 ? 1.0 / hi : 0.0;
  Image g(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = x + 1 < w ? (shading.at(x + 1, y) - shading.at(x, y)) * inv : 0.0;
      const double gy = y + 1 < h ? (shading.at(x, y + 1) - shading.at(x, y)) * inv : 0.0;
      g.at(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  return g;
}

}  // namespace

Image max_filter(const Image& img, int size) {
  if (size < 1) fail(ErrorCode::InvalidArgument, "filter size must be positive");
  const int lo = size / 2, hi = size - 1 - size / 2;
  const int w = img.width, h = img.height;
  // Separable: rows then columns.
  Image tmp(w, h, 1), out(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double m = -std::numeric_limits<double>::infinity();
      for (int k = std::max(0, x - lo); k <= std::min(w - 1, x + hi); ++k) m = std::max(m, img.at(k, y));
      tmp.at(x, y) = m;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double m = -std::numeric_limits<double>::infinity();
      for (int k = std::max(0, y - lo); k <= std::min(h - 1, y + hi); ++k) m = std::max(m, tmp.at(x, k));
      out.at(x, y) = m;
    }
  return out;
}

SawResult precision_recall(std::vector<std::pair<double, bool>> scored) {
  SawResult r;
  for (const auto& s : scored) (s.second ? r.positives : r.negatives) += 1;
  if (r.positives == 0)
    fail(ErrorCode::InvalidArgument, "no non-smooth annotations to score");
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < scored.size();) {
    const double tau = scored[k].first;
    while (k < scored.size() && scored[k].first == tau) {
      (scored[k].second ? tp : fp) += 1;
      ++k;
    }
    r.curve.push_back({tau, static_cast<double>(tp) / r.positives,
                       static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  double prev_recall = 0.0, prev_precision = r.curve.front().precision;
  for (const PrPoint& p : r.curve) {
    r.ap += (p.recall - prev_recall) * 0.5 * (p.precision + prev_precision);
    prev_recall = p.recall;
    prev_precision = p.precision;
  }
  return r;
}

SawResult saw_ap(std::span<const Image> shading, std::span<const Image> labels,
                 const SawOptions& opts) {
  if (shading.size() != labels.size())
    fail(ErrorCode::ShapeMismatch, "shading and label counts differ");
  if (!(opts.smooth_sample_rate > 0.0 && opts.smooth_sample_rate <= 1.0))
    fail(ErrorCode::InvalidArgument, "smooth_sample_rate must lie in (0,1]");
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, bool>> scored;
  for (std::size_t i = 0; i < shading.size(); ++i) {
    const Image& s = shading[i];
    const Image& lab = labels[i];
    if (!lab.same_size(s) || lab.channels != 1)
      fail(ErrorCode::ShapeMismatch, "label map does not match the shading image");
    const Image g = opts.mode == SawMode::LogAsymmetric ? log_gradient_magnitude(s)
                                                        : normalized_gradient_magnitude(s);
    const Image gmax = max_filter(g, opts.filter_size);
    const Image& smooth_src = opts.mode == SawMode::LogAsymmetric ? g : gmax;
    for (std::size_t p = 0; p < lab.data.size(); ++p) {
      const int code = static_cast<int>(lab.data[p]);
      if (code == kSawNonSmooth) {
        scored.emplace_back(gmax.data[p], true);
      } else if (code == kSawSmooth) {
        if (opts.smooth_sample_rate < 1.0 && unit(rng) >= opts.smooth_sample_rate) continue;
        scored.emplace_back(smooth_src.data[p], false);
      }
    }
  }
  return precision_recall(std::move(scored));
}

// ---------------------------------------------------------------------------
// MIT

namespace {

void check_mit_shapes(const Image& pred, const Image& gt, const Image& mask) {
  if (!pred.same_shape(gt))
    fail(ErrorCode::ShapeMismatch, "prediction and ground truth differ in shape");
  if (!mask.same_size(gt) || mask.channels != 1)
    fail(ErrorCode::ShapeMismatch, "mask does not match the ground truth");
}

struct Window {
  int x0, y0, x1, y1;  // half-open
};

// Sum of mask * (gt - alpha pred)^2 over the window with alpha fitted there.
double window_ssq_error(const Image& pred, const Image& gt, const Image& mask, const Window& w,
                        bool zero_prediction) {
  double pp = 0.0, pg = 0.0;
  for (int y = w.y0; y < w.y1; ++y)
    for (int x = w.x0; x < w.x1; ++x) {
      const double m = mask.at(x, y);
      for (int c = 0; c < gt.channels; ++c) {
        const double p = zero_prediction ? 0.0 : pred.at(x, y, c);
        pp += m * p * p;
        pg += m * p * gt.at(x, y, c);
      }
    }
  const double alpha = pp > 1e-5 ? pg / pp : 0.0;
  double e = 0.0;
  for (int y = w.y0; y < w.y1; ++y)
    for (int x = w.x0; x < w.x1; ++x) {
      const double m = mask.at(x, y);
      for (int c = 0; c < gt.channels; ++c) {
        const double p = zero_prediction ? 0.0 : pred.at(x, y, c);
        const double d = gt.at(x, y, c) - alpha * p;
        e += m * d * d;
      }
    }
  return e;
}

std::vector<int> window_starts(int extent, int window, int step) {
  std::vector<int> starts;
  if (extent <= window) return {0};
  for (int s = 0; s + window <= extent; s += step) starts.push_back(s);
  return starts;
}

double valid_count(const Image& mask) {
  double n = 0.0;
  for (double v : mask.data) n += v != 0.0;
  return n;
}

}  // namespace

double fit_scale(const Image& pred, const Image& gt, const Image& mask) {
  check_mit_shapes(pred, gt, mask);
  double pp = 0.0, pg = 0.0;
  for (std::size_t p = 0; p < gt.pixel_count(); ++p) {
    const double m = mask.data[p];
    for (int c = 0; c < gt.channels; ++c) {
      const std::size_t k = p * gt.channels + c;
      pp += m * pred.data[k] * pred.data[k];
      pg += m * pred.data[k] * gt.data[k];
    }
  }
  return pp > 1e-5 ? pg / pp : 0.0;
}

double scale_invariant_mse(const Image& pred, const Image& gt, const Image& mask) {
  check_mit_shapes(pred, gt, mask);
  const double n = valid_count(mask);
  if (n == 0.0) fail(ErrorCode::EmptyInput, "empty valid mask");
  const double alpha = fit_scale(pred, gt, mask);
  double e = 0.0;
  for (std::size_t p = 0; p < gt.pixel_count(); ++p) {
    if (mask.data[p] == 0.0) continue;
    for (int c = 0; c < gt.channels; ++c) {
      const std::size_t k = p * gt.channels + c;
      const double d = gt.data[k] - alpha * pred.data[k];
      e += d * d;
    }
  }
  return e / (n * gt.channels);
}

double local_mse(const Image& pred, const Image& gt, const Image& mask, int window, int step) {
  check_mit_shapes(pred, gt, mask);
  if (window < 1 || step < 1) fail(ErrorCode::InvalidArgument, "LMSE window and step must be positive");
  if (valid_count(mask) == 0.0) fail(ErrorCode::EmptyInput, "empty valid mask");
  double ssq = 0.0, total = 0.0;
  for (int y0 : window_starts(gt.height, window, step))
    for (int x0 : window_starts(gt.width, window, step)) {
      const Window w{x0, y0, std::min(gt.width, x0 + window), std::min(gt.height, y0 + window)};
      ssq += window_ssq_error(pred, gt, mask, w, false);
      total += window_ssq_error(pred, gt, mask, w, true);
    }
  return total > 0.0 ? ssq / total : 0.0;
}

double ssim(const Image& a, const Image& b, const Image& mask) {
  check_mit_shapes(a, b, mask);
  constexpr int radius = 5;
  constexpr double sigma = 1.5, c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double kernel[2 * radius + 1];
  for (int k = -radius; k <= radius; ++k) kernel[k + radius] = std::exp(-(k * k) / (2.0 * sigma * sigma));

  const int w = a.width, h = a.height;
  double total = 0.0, count = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y) == 0.0) continue;
      for (int c = 0; c < a.channels; ++c) {
        double sw = 0.0, ma = 0.0, mb = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
        for (int dy = -radius; dy <= radius; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= h) continue;
          for (int dx = -radius; dx <= radius; ++dx) {
            const int xx = x + dx;
            if (xx < 0 || xx >= w) continue;
            const double kw = kernel[dx + radius] * kernel[dy + radius];
            const double va = a.at(xx, yy, c), vb = b.at(xx, yy, c);
            sw += kw;
            ma += kw * va;
            mb += kw * vb;
            aa += kw * va * va;
            bb += kw * vb * vb;
            ab += kw * va * vb;
          }
        }
        ma /= sw;
        mb /= sw;
        const double va = std::max(0.0, aa / sw - ma * ma);
        const double vb = std::max(0.0, bb / sw - mb * mb);
        const double cov = ab / sw - ma * mb;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        count += 1.0;
      }
    }
  if (count == 0.0) fail(ErrorCode::EmptyInput, "empty valid mask");
  return total / count;
}

double dssim(const Image& pred, const Image& gt, const Image& mask) {
  const double alpha = fit_scale(pred, gt, mask);
  Image scaled = pred;
  for (double& v : scaled.data) v *= alpha;
  return (1.0 - ssim(scaled, gt, mask)) / 2.0;
}

MitScores mit_scores_single(const Image& pred, const Image& gt, const Image& mask,
                            const MitOptions& opts) {
  return {scale_invariant_mse(pred, gt, mask), local_mse(pred, gt, mask, opts.lmse_window, opts.lmse_step),
          dssim(pred, gt, mask)};
}

MitResult mit_scores(const Image& pred_r, const Image& pred_s, const MitGroundTruth& gt,
                     const MitOptions& opts) {
  return {mit_scores_single(pred_r, gt.reflectance, gt.mask, opts),
          mit_scores_single(pred_s, gt.shading, gt.mask, opts)};
}

}  // namespace lsplit
