#pragma once

#include <array>
#include <vector>

#include "lsplit/bilateral.hpp"
#include "lsplit/decomposition.hpp"
#include "lsplit/image.hpp"

namespace lsplit {

struct LogStack;

/// The four unique 8-neighbourhood directions (E, S, SE, SW). Edge d of
/// pixel p joins p and p + kEdgeDirections[d].
inline constexpr std::array<std::array<int, 2>, 4> kEdgeDirections{{{1, 0}, {0, 1}, {1, 1}, {-1, 1}}};

struct ShadingWeightParams {
  double lambda_med = 8.0;
  double lambda_med_bar = 8.0;
  double eps_med = 0.05;
  Bandwidths bandwidths;

  void validate() const;
};

/// Edge weights for one pyramid scale. Every image has one channel per
/// edge direction, indexed at the edge's first pixel.
struct EdgeScale {
  int level = 1;
  int width = 0;
  int height = 0;
  Image median_j;      // median over valid frames of log-gray differences
  Image median_w;      // median over valid frames of the Gaussian affinity
  Image valid_frames;  // frames where both endpoints are valid; 0 = flagged
  std::vector<Image> weights;  // per frame, v_pq in [0,1]
};

struct EdgeWeights {
  std::vector<EdgeScale> scales;  // levels 1..4
};

/// Median with the even-count convention (mean of the two central values).
/// Reorders `values`. Empty input yields 0.
double median_inplace(std::vector<double>& values);

/// exp(-lambda (J - medianJ)^2)
double weight_vmed(double j, double median_j, double lambda_med);
/// exp(-lambda ((J - medianJ) / max(|medianJ|, eps))^2)
double weight_vmed_bar(double j, double median_j, double lambda_med_bar, double eps_med);
/// max(vmed, vmed_bar) * (1 - medianW)
double combine_weights(double vmed, double vmed_bar, double median_w);

struct MedianDiffs {
  Image median_j;
  Image valid_frames;
};
/// Per-edge median of J_pq = log I_p - log I_q (grayscale) over frames where
/// both endpoints are valid, at pyramid level `level`.
MedianDiffs median_log_diffs(const LogStack& stack, int level);

/// Weights for all four scales. Depends only on the input sequence.
EdgeWeights build_edge_weights(const LogStack& stack, const ShadingWeightParams& params);

/// 2x2 mean with edge replication, the pooling used for the shading pyramid.
Image pool_mean_2x2(const Image& fine);

/// sum_i sum_l (1/l) sum_edges v_pq (s_p - s_q)^2 with s the pooled log
/// shading at scale l; the gradient is chained back to full resolution.
TermResult ssmooth_loss(const Decomposition& d, const EdgeWeights& weights);

}  // namespace lsplit
