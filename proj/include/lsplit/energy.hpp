#pragma once

#include <span>

#include "lsplit/bilateral.hpp"
#include "lsplit/decomposition.hpp"
#include "lsplit/shadsmooth.hpp"

namespace lsplit {

struct LogStack;

struct EnergyConfig {
  double w_rc = 1.0;
  double w_rsm = 2.0;
  double w_ssm = 2.0;
  Bandwidths bandwidths;
  double lambda_med = 8.0;
  double lambda_med_bar = 8.0;
  double eps_med = 0.05;
  double eps_img = 1e-4;
  int bisto_max_iters = 30;
  double bisto_tol = 1e-3;
  /// Forces the illumination colour to zero (grayscale shading output).
  bool grayscale_shading = false;

  void validate() const;
  ShadingWeightParams shading_params() const;
};

/// Everything the energy needs that depends only on the input sequence.
struct Precomputed {
  int frames = 0;
  int width = 0;
  int height = 0;
  BilateralGrid grid;
  BistoStatus bisto;
  EdgeWeights edges;
};

Precomputed precompute(const LogStack& stack, const EnergyConfig& cfg);

struct EnergyTerms {
  double reconstruct = 0.0;
  double consistency = 0.0;
  double rsmooth = 0.0;
  double ssmooth = 0.0;
  double total = 0.0;
};

/// reconstruct + w_rc consistency + w_rsm rsmooth + w_ssm ssmooth, summed in
/// that order.
double weighted_total(const EnergyTerms& t, const EnergyConfig& cfg);

EnergyTerms total_energy(const LogStack& stack, const Decomposition& d, const EnergyConfig& cfg,
                         const Precomputed& pre);

struct EnergyEval {
  EnergyTerms terms;
  Decomposition gradient;
};

/// Energy and its exact gradient. In grayscale mode the illumination
/// gradient is zero.
EnergyEval total_gradient(const LogStack& stack, const Decomposition& d, const EnergyConfig& cfg,
                          const Precomputed& pre);

/// Moves the decomposition along the energy's null directions to the
/// canonical gauge: each frame's log shading has zero mean over valid pixels
/// (offset moved into that frame's illumination), then the frame-mean
/// illumination is moved into the reflectance so it is zero per channel.
/// In grayscale mode the illumination stays zero; the mean of the per-frame
/// shading means is moved into the reflectance instead.
Decomposition fix_gauge(const Decomposition& d, std::span<const Image> masks,
                        bool grayscale_shading = false);

}  // namespace lsplit
