#include "lsplit/energy.hpp"

#include "lsplit/apwls.hpp"
#include "lsplit/error.hpp"
#include "lsplit/imagestack.hpp"

namespace lsplit {

void EnergyConfig::validate() const {
  for (double w : {w_rc, w_rsm, w_ssm})
    if (!(w >= 0.0) || !std::isfinite(w))
      fail(ErrorCode::InvalidArgument, "energy weights must be finite and non-negative");
  if (!(eps_img > 0.0 && eps_img <= 0.1))
    fail(ErrorCode::InvalidArgument, "eps_img must lie in (0, 0.1]");
  if (bisto_max_iters < 1) fail(ErrorCode::InvalidArgument, "bisto_max_iters must be >= 1");
  if (!(bisto_tol > 0.0)) fail(ErrorCode::InvalidArgument, "bisto_tol must be positive");
  shading_params().validate();
}

ShadingWeightParams EnergyConfig::shading_params() const {
  return {lambda_med, lambda_med_bar, eps_med, bandwidths};
}

Precomputed precompute(const LogStack& stack, const EnergyConfig& cfg) {
  cfg.validate();
  Precomputed pre;
  pre.frames = stack.frames;
  pre.width = stack.width;
  pre.height = stack.height;
  pre.grid = build_grid(stack, cfg.bandwidths);
  pre.bisto = bistochasticize(pre.grid, cfg.bisto_max_iters, cfg.bisto_tol);
  pre.edges = build_edge_weights(stack, cfg.shading_params());
  return pre;
}

double weighted_total(const EnergyTerms& t, const EnergyConfig& cfg) {
  return t.reconstruct + cfg.w_rc * t.consistency + cfg.w_rsm * t.rsmooth + cfg.w_ssm * t.ssmooth;
}

namespace {

void check_match(const LogStack& stack, const Decomposition& d, const Precomputed& pre) {
  if (pre.frames != stack.frames || pre.width != stack.width || pre.height != stack.height)
    fail(ErrorCode::ShapeMismatch, "precomputed data was built for a different stack");
  if (d.frame_count() != stack.frames || d.width() != stack.width || d.height() != stack.height)
    fail(ErrorCode::ShapeMismatch, "decomposition does not match the stack");
}

}  // namespace

EnergyEval total_gradient(const LogStack& stack, const Decomposition& d, const EnergyConfig& cfg,
                          const Precomputed& pre) {
  check_match(stack, d, pre);
  TermResult rec = reconstruction_loss(stack, d);
  TermResult con = consistency_loss(d, stack.masks);
  TermResult rsm = rsmooth_loss(pre.grid, d);
  TermResult ssm = ssmooth_loss(d, pre.edges);

  EnergyEval out;
  out.terms = {rec.value, con.value, rsm.value, ssm.value, 0.0};
  out.terms.total = weighted_total(out.terms, cfg);
  out.gradient = std::move(rec.grad);
  axpy(cfg.w_rc, con.grad, out.gradient);
  axpy(cfg.w_rsm, rsm.grad, out.gradient);
  axpy(cfg.w_ssm, ssm.grad, out.gradient);
  if (cfg.grayscale_shading)
    for (Rgb& c : out.gradient.illum) c = {0.0, 0.0, 0.0};
  return out;
}

EnergyTerms total_energy(const LogStack& stack, const Decomposition& d, const EnergyConfig& cfg,
                         const Precomputed& pre) {
  return total_gradient(stack, d, cfg, pre).terms;
}

Decomposition fix_gauge(const Decomposition& d, std::span<const Image> masks,
                        bool grayscale_shading) {
  Decomposition out = d;
  const std::size_t m = out.log_s.size();
  std::vector<double> means(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const Image& s = out.log_s[i];
    const Image* mask = i < masks.size() ? &masks[i] : nullptr;
    double sum = 0.0, count = 0.0;
    for (std::size_t p = 0; p < s.data.size(); ++p)
      if (!mask || mask->data[p] != 0.0) {
        sum += s.data[p];
        count += 1.0;
      }
    if (count == 0.0) {
      for (double v : s.data) sum += v;
      count = static_cast<double>(s.data.size());
    }
    means[i] = count > 0.0 ? sum / count : 0.0;
  }

  Rgb shift{0.0, 0.0, 0.0};
  if (grayscale_shading) {
    double mean_of_means = 0.0;
    for (double v : means) mean_of_means += v;
    mean_of_means /= static_cast<double>(std::max<std::size_t>(m, 1));
    for (std::size_t i = 0; i < m; ++i) {
      for (double& v : out.log_s[i].data) v -= mean_of_means;
      out.illum[i] = {0.0, 0.0, 0.0};
    }
    shift = {mean_of_means, mean_of_means, mean_of_means};
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (double& v : out.log_s[i].data) v -= means[i];
      for (int c = 0; c < 3; ++c) out.illum[i][c] += means[i];
    }
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (const Rgb& col : out.illum) s += col[c];
      shift[c] = s / static_cast<double>(std::max<std::size_t>(m, 1));
    }
    for (Rgb& col : out.illum)
      for (int c = 0; c < 3; ++c) col[c] -= shift[c];
  }
  for (Image& r : out.log_r)
    for (std::size_t p = 0; p < r.pixel_count(); ++p)
      for (int c = 0; c < 3; ++c) r.data[p * 3 + c] += shift[c];
  return out;
}

}  // namespace lsplit
