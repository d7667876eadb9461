#include "lsplit/shadsmooth.hpp"

#include <algorithm>
#include <cmath>

#include "lsplit/error.hpp"
#include "lsplit/imagestack.hpp"
#include "lsplit/parallel.hpp"

namespace lsplit {
namespace {

inline bool in_bounds(int x, int y, int w, int h) { return x >= 0 && y >= 0 && x < w && y < h; }

FeatureVec feature_at(const Image& f, int x, int y) {
  FeatureVec v;
  for (int k = 0; k < kFeatureDims; ++k) v[k] = f.at(x, y, k);
  return v;
}

EdgeScale build_scale(const PyramidLevel& lvl, const ShadingWeightParams& params) {
  const int w = lvl.width, h = lvl.height;
  const std::size_t m = lvl.frames.size();
  EdgeScale s;
  s.level = lvl.level;
  s.width = w;
  s.height = h;
  s.median_j = Image(w, h, 4);
  s.median_w = Image(w, h, 4);
  s.valid_frames = Image(w, h, 4);
  s.weights.assign(m, Image(w, h, 4));

  std::vector<double> js, ws;
  std::vector<double> frame_j(m);
  js.reserve(m);
  ws.reserve(m);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int d = 0; d < 4; ++d) {
        const int qx = x + kEdgeDirections[d][0], qy = y + kEdgeDirections[d][1];
        if (!in_bounds(qx, qy, w, h)) continue;
        js.clear();
        ws.clear();
        for (std::size_t i = 0; i < m; ++i) {
          if (lvl.masks[i].at(x, y) == 0.0 || lvl.masks[i].at(qx, qy) == 0.0) continue;
          frame_j[i] = lvl.log_gray[i].at(x, y) - lvl.log_gray[i].at(qx, qy);
          js.push_back(frame_j[i]);
          ws.push_back(gaussian_affinity(feature_at(lvl.features[i], x, y),
                                         feature_at(lvl.features[i], qx, qy), params.bandwidths));
        }
        const double count = static_cast<double>(js.size());
        s.valid_frames.at(x, y, d) = count;
        if (js.empty()) continue;
        const double med_j = median_inplace(js);
        const double med_w = median_inplace(ws);
        s.median_j.at(x, y, d) = med_j;
        s.median_w.at(x, y, d) = med_w;
        for (std::size_t i = 0; i < m; ++i) {
          if (lvl.masks[i].at(x, y) == 0.0 || lvl.masks[i].at(qx, qy) == 0.0) continue;
          const double a = weight_vmed(frame_j[i], med_j, params.lambda_med);
          const double b =
              weight_vmed_bar(frame_j[i], med_j, params.lambda_med_bar, params.eps_med);
          s.weights[i].at(x, y, d) = combine_weights(a, b, med_w);
        }
      }
    }
  }
  return s;
}

}  // namespace

void ShadingWeightParams::validate() const {
  if (!(lambda_med > 0.0) || !(lambda_med_bar > 0.0))
    fail(ErrorCode::InvalidArgument, "lambda_med and lambda_med_bar must be positive");
  if (!(eps_med > 0.0)) fail(ErrorCode::InvalidArgument, "eps_med must be positive");
  bandwidths.validate();
}

double median_inplace(std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

double weight_vmed(double j, double median_j, double lambda_med) {
  const double d = j - median_j;
  return std::exp(-lambda_med * d * d);
}

double weight_vmed_bar(double j, double median_j, double lambda_med_bar, double eps_med) {
  const double d = (j - median_j) / std::max(std::abs(median_j), eps_med);
  return std::exp(-lambda_med_bar * d * d);
}

double combine_weights(double vmed, double vmed_bar, double median_w) {
  return std::max(vmed, vmed_bar) * (1.0 - median_w);
}

MedianDiffs median_log_diffs(const LogStack& stack, int level) {
  const PyramidLevel& lvl = stack.level(level);
  const int w = lvl.width, h = lvl.height;
  MedianDiffs out{Image(w, h, 4), Image(w, h, 4)};
  std::vector<double> js;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int d = 0; d < 4; ++d) {
        const int qx = x + kEdgeDirections[d][0], qy = y + kEdgeDirections[d][1];
        if (!in_bounds(qx, qy, w, h)) continue;
        js.clear();
        for (std::size_t i = 0; i < lvl.frames.size(); ++i)
          if (lvl.masks[i].at(x, y) != 0.0 && lvl.masks[i].at(qx, qy) != 0.0)
            js.push_back(lvl.log_gray[i].at(x, y) - lvl.log_gray[i].at(qx, qy));
        out.valid_frames.at(x, y, d) = static_cast<double>(js.size());
        out.median_j.at(x, y, d) = median_inplace(js);
      }
  return out;
}

EdgeWeights build_edge_weights(const LogStack& stack, const ShadingWeightParams& params) {
  params.validate();
  EdgeWeights ew;
  ew.scales.resize(stack.pyramid.size());
  parallel_for(stack.pyramid.size(),
               [&](std::size_t l) { ew.scales[l] = build_scale(stack.pyramid[l], params); });
  return ew;
}

Image pool_mean_2x2(const Image& fine) {
  const int cw = (fine.width + 1) / 2, ch = (fine.height + 1) / 2;
  Image out(cw, ch, fine.channels);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x) {
      const int x1 = std::min(2 * x + 1, fine.width - 1);
      const int y1 = std::min(2 * y + 1, fine.height - 1);
      for (int c = 0; c < fine.channels; ++c)
        out.at(x, y, c) = 0.25 * (fine.at(2 * x, 2 * y, c) + fine.at(x1, 2 * y, c) +
                                  fine.at(2 * x, y1, c) + fine.at(x1, y1, c));
    }
  return out;
}

namespace {

// Adjoint of pool_mean_2x2: spreads each coarse gradient over its children.
void unpool_add(const Image& coarse_grad, Image& fine_grad) {
  for (int y = 0; y < coarse_grad.height; ++y)
    for (int x = 0; x < coarse_grad.width; ++x) {
      const double g = 0.25 * coarse_grad.at(x, y);
      const int x1 = std::min(2 * x + 1, fine_grad.width - 1);
      const int y1 = std::min(2 * y + 1, fine_grad.height - 1);
      fine_grad.at(2 * x, 2 * y) += g;
      fine_grad.at(x1, 2 * y) += g;
      fine_grad.at(2 * x, y1) += g;
      fine_grad.at(x1, y1) += g;
    }
}

}  // namespace

TermResult ssmooth_loss(const Decomposition& d, const EdgeWeights& weights) {
  const std::size_t m = d.log_s.size();
  const std::size_t levels = weights.scales.size();
  if (levels == 0 || weights.scales.front().width != d.width() ||
      weights.scales.front().height != d.height() || weights.scales.front().weights.size() != m)
    fail(ErrorCode::ShapeMismatch, "edge weights do not match the decomposition");

  TermResult out{0.0, Decomposition::zeros(d.frame_count(), d.width(), d.height())};
  std::vector<double> frame_value(m, 0.0);
  parallel_for(m, [&](std::size_t i) {
    std::vector<Image> pyr{d.log_s[i]};
    for (std::size_t l = 1; l < levels; ++l) pyr.push_back(pool_mean_2x2(pyr.back()));
    std::vector<Image> grads;
    for (const Image& im : pyr) grads.emplace_back(im.width, im.height, 1);

    double value = 0.0;
    for (std::size_t l = 0; l < levels; ++l) {
      const EdgeScale& sc = weights.scales[l];
      const Image& s = pyr[l];
      Image& g = grads[l];
      const Image& v = sc.weights[i];
      const double lw = 1.0 / static_cast<double>(l + 1);
      for (int y = 0; y < sc.height; ++y)
        for (int x = 0; x < sc.width; ++x)
          for (int e = 0; e < 4; ++e) {
            const double wv = v.at(x, y, e);
            if (wv == 0.0) continue;
            const int qx = x + kEdgeDirections[e][0], qy = y + kEdgeDirections[e][1];
            const double diff = s.at(x, y) - s.at(qx, qy);
            value += lw * wv * diff * diff;
            const double gd = 2.0 * lw * wv * diff;
            g.at(x, y) += gd;
            g.at(qx, qy) -= gd;
          }
    }
    for (std::size_t l = levels - 1; l > 0; --l) unpool_add(grads[l], grads[l - 1]);
    frame_value[i] = value;
    out.grad.log_s[i] = std::move(grads[0]);
  });
  for (double v : frame_value) out.value += v;
  return out;
}

}  // namespace lsplit
