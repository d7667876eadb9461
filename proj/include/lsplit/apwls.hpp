#pragma once

#include <span>
#include <vector>

#include "lsplit/decomposition.hpp"
#include "lsplit/image.hpp"

namespace lsplit {

struct LogStack;

/// Inputs to the all-pairs weighted least squares sum
///
///   sum_i sum_j || P^i (.) Q^j (.) (X^i - Y^j) ||_F^2
///
/// Weight images P, Q have either one channel (broadcast) or as many as the
/// prediction images X, Y.
struct PairLossInputs {
  std::span<const Image> p;
  std::span<const Image> q;
  std::span<const Image> x;
  std::span<const Image> y;

  void validate() const;
};

struct PairGradient {
  std::vector<Image> dx;
  std::vector<Image> dy;
};

/// O(m^2 n) direct double loop, diagonal pairs included.
double apwls_bruteforce(const PairLossInputs& in);

/// O(m n) closed form from six per-pixel accumulators:
///   sum_p  SQ2 * SP2X2 + SP2 * SQ2Y2 - 2 * SP2X * SQ2Y
/// where S* sums the subscripted product over all frames. Accumulation is
/// in double and in frame order. Each pixel's share is clamped at 0, which
/// it is analytically.
double apwls_closed(const PairLossInputs& in);

/// dX^i = 2 P_i^2 (X^i SQ2 - SQ2Y),  dY^j = 2 Q_j^2 (Y^j SP2 - SP2X).
PairGradient apwls_closed_grad(const PairLossInputs& in);

struct PairLossResult {
  double value = 0.0;
  PairGradient grad;
};
PairLossResult apwls_closed_with_grad(const PairLossInputs& in);

/// All-pairs reconstruction of every frame from every frame's reflectance,
/// weighted by luminance and both masks.
TermResult reconstruction_loss(const LogStack& stack, const Decomposition& d);

/// All-pairs agreement of per-frame reflectances on jointly valid pixels.
TermResult consistency_loss(const Decomposition& d, std::span<const Image> masks);

}  // namespace lsplit
