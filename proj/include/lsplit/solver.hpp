#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lsplit/decomposition.hpp"
#include "lsplit/energy.hpp"

namespace lsplit {

struct LogStack;

enum class StepRule {
  SteepestDescent,
  /// Polak-Ribiere conjugate directions, restarted whenever the direction
  /// stops being a descent direction.
  ConjugateGradient,
};

struct SolveOptions {
  int max_iters = 500;
  /// Stop once the gradient norm drops below this. Non-positive selects
  /// 1e-6 * sqrt(frames * pixels).
  double grad_tol = 0.0;
  double armijo_c = 1e-4;
  int max_halvings = 40;
  int report_every = 1;
  StepRule step_rule = StepRule::ConjugateGradient;

  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  std::vector<std::pair<int, double>> energy_trace;  // (iteration, energy)
  double final_grad_norm = 0.0;
  double grad_tol = 0.0;
  EnergyTerms final_terms;
  BistoStatus bisto;
  bool converged = false;
  bool aborted = false;
  std::string message;

  std::string to_text() const;
};

/// Weiss-style start: reflectance is the per-pixel, per-channel median of
/// log I over valid frames (global mean where no frame is valid), shading is
/// the channel mean of log I - log R, illumination zero, then gauge fixed.
Decomposition init_decomposition(const LogStack& stack, bool grayscale_shading = false);

struct SolveResult {
  Decomposition decomposition;
  SolveReport report;
};

/// Gradient descent with Armijo backtracking (halving) from the median
/// initialisation. The trial step is the exact minimiser along the search
/// direction, which is available because the energy is quadratic; the
/// curvature is probed with one extra gradient evaluation. Accepted steps
/// never increase the energy and the gauge is re-fixed after every step.
SolveResult minimize(const LogStack& stack, const EnergyConfig& cfg, const SolveOptions& opts);
SolveResult minimize(const LogStack& stack, const EnergyConfig& cfg, const SolveOptions& opts,
                     const Precomputed& pre, Decomposition start);

}  // namespace lsplit
