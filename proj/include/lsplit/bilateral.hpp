#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lsplit/decomposition.hpp"
#include "lsplit/image.hpp"

namespace lsplit {

struct LogStack;

inline constexpr int kFeatureDims = 5;
using FeatureVec = std::array<double, kFeatureDims>;

/// Per-feature standard deviations (x, y, intensity, c1, c2), i.e. the
/// diagonal of Sigma^(1/2).
struct Bandwidths {
  double x = 12.0;
  double y = 12.0;
  double intensity = 0.2;
  double c1 = 0.05;
  double c2 = 0.05;

  FeatureVec as_array() const { return {x, y, intensity, c1, c2}; }
  void validate() const;
};

/// Gaussian affinity exp(-(f_p - f_q)^T Sigma^-1 (f_p - f_q)).
double gaussian_affinity(const FeatureVec& fp, const FeatureVec& fq, const Bandwidths& bw);

/// Sparse bilateral-space factorisation W ~= S^T Bbar S of the Gaussian
/// affinity over every pixel of every frame, with the bistochasticising
/// diagonal N.
///
/// S hard-assigns each valid pixel to its nearest lattice vertex, so it is
/// stored as one vertex index per pixel (-1 for invalid pixels). Each blur
/// B_k is the [1,2,1]/4 kernel along lattice axis k between occupied
/// vertices; a missing neighbour's weight folds into the centre, which
/// keeps B_k symmetric and constant preserving.
struct BilateralGrid {
  Bandwidths bandwidths;
  std::vector<std::int32_t> pixel_vertex;                 // per sequence pixel
  std::vector<std::array<std::int32_t, kFeatureDims>> coords;  // per vertex
  std::array<std::vector<std::int32_t>, kFeatureDims> prev;    // -1 if absent
  std::array<std::vector<std::int32_t>, kFeatureDims> next;
  std::vector<double> bisto_diag;  // n_p, 0 on invalid pixels
  std::vector<double> row_sums;    // row sums of N S^T Bbar S N

  std::size_t vertex_count() const noexcept { return coords.size(); }
  std::size_t pixel_count() const noexcept { return pixel_vertex.size(); }
  bool is_valid(std::size_t p) const noexcept { return pixel_vertex[p] >= 0; }
};

/// Builds the lattice from explicit per-pixel features. Pixels whose
/// `valid` flag is 0 are left out of the grid. Vertices are numbered in
/// order of first occupancy, so construction is deterministic.
BilateralGrid build_grid(std::span<const FeatureVec> features, std::span<const std::uint8_t> valid,
                         const Bandwidths& bw);

/// Grid over all frames of a stack; pixel index is frame * (w*h) + y*w + x.
/// Spatial features are measured from the image centre.
BilateralGrid build_grid(const LogStack& stack, const Bandwidths& bw);

/// Sum of pixel values per vertex (S v).
std::vector<double> splat(const BilateralGrid& g, std::span<const double> pixel_values);
/// Vertex value per pixel, 0 on invalid pixels (S^T v).
std::vector<double> slice(const BilateralGrid& g, std::span<const double> vertex_values);

/// Applies one axis blur B_k.
std::vector<double> blur_axis(const BilateralGrid& g, int axis, std::span<const double> v);

/// Bbar v = B_0 B_1 ... B_4 v + B_4 ... B_0 v.
std::vector<double> bbar_apply(const BilateralGrid& g, std::span<const double> v);

/// S^T Bbar S v over pixels.
std::vector<double> apply_affinity(const BilateralGrid& g, std::span<const double> v);
/// N S^T Bbar S N v over pixels.
std::vector<double> apply_normalized_affinity(const BilateralGrid& g, std::span<const double> v);

struct BistoStatus {
  int iterations = 0;
  double residual = 0.0;  // max |row sum - 1| over valid pixels
  bool converged = false;
};

/// Fixed-point iteration n <- sqrt(n / (W n)) over valid pixels, stopping
/// once every row sum of N W N is within tol of 1 or after max_iters
/// updates. Non-convergence is reported in the status, not thrown. Also
/// fills row_sums for the final n.
BistoStatus bistochasticize(BilateralGrid& g, int max_iters = 30, double tol = 1e-3);

/// Dense spatio-temporal reflectance smoothness
///
///   sum_c  r_c^T (D - What) r_c,   What = N S^T Bbar S N,  D = diag(What 1)
///
/// summed over the three channels of the valid-pixel log reflectance. D is
/// the identity up to bistochasticisation tolerance, and using it keeps the
/// loss an exact graph Laplacian form: zero on constants and never negative.
/// Gradient 2 (D - What) r_c.
TermResult rsmooth_loss(const BilateralGrid& g, const Decomposition& d);

/// Dense Gaussian affinity matrix (row-major n x n). Test oracle only, so
/// limited to 4096 points.
std::vector<double> exact_affinity_reference(std::span<const FeatureVec> features,
                                             const Bandwidths& bw);

}  // namespace lsplit
