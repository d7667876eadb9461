#include "lsplit/solver.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "lsplit/error.hpp"
#include "lsplit/imagestack.hpp"
#include "lsplit/shadsmooth.hpp"

namespace lsplit {

void SolveOptions::validate() const {
  if (max_iters < 1) fail(ErrorCode::InvalidArgument, "max_iters must be at least 1");
  if (!(armijo_c > 0.0 && armijo_c < 1.0))
    fail(ErrorCode::InvalidArgument, "armijo_c must lie in (0,1)");
  if (max_halvings < 1) fail(ErrorCode::InvalidArgument, "max_halvings must be at least 1");
  if (report_every < 1) fail(ErrorCode::InvalidArgument, "report_every must be at least 1");
  if (!std::isfinite(grad_tol)) fail(ErrorCode::InvalidArgument, "grad_tol must be finite");
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string SolveReport::to_text() const {
  std::ostringstream os;
  os << "iterations " << iterations << '\n'
     << "converged " << (converged ? 1 : 0) << '\n'
     << "aborted " << (aborted ? 1 : 0) << '\n'
     << "final_grad_norm " << fmt_double(final_grad_norm) << '\n'
     << "grad_tol " << fmt_double(grad_tol) << '\n'
     << "bisto_iterations " << bisto.iterations << '\n'
     << "bisto_residual " << fmt_double(bisto.residual) << '\n'
     << "bisto_converged " << (bisto.converged ? 1 : 0) << '\n'
     << "term_reconstruct " << fmt_double(final_terms.reconstruct) << '\n'
     << "term_consistency " << fmt_double(final_terms.consistency) << '\n'
     << "term_rsmooth " << fmt_double(final_terms.rsmooth) << '\n'
     << "term_ssmooth " << fmt_double(final_terms.ssmooth) << '\n'
     << "total " << fmt_double(final_terms.total) << '\n';
  if (!message.empty()) os << "message " << message << '\n';
  os << "# iteration energy\n";
  for (const auto& [it, e] : energy_trace) os << it << ' ' << fmt_double(e) << '\n';
  return os.str();
}

Decomposition init_decomposition(const LogStack& stack, bool grayscale_shading) {
  const int m = stack.frames;
  if (m < 2) fail(ErrorCode::InvalidArgument, "solving needs at least two frames");
  const std::size_t n = stack.pixel_count();
  Decomposition d = Decomposition::zeros(m, stack.width, stack.height);

  Rgb global{0.0, 0.0, 0.0};
  double global_count = 0.0;
  for (int i = 0; i < m; ++i)
    for (std::size_t p = 0; p < n; ++p)
      if (stack.masks[i].data[p] != 0.0) {
        for (int c = 0; c < 3; ++c) global[c] += stack.log_frames[i].data[p * 3 + c];
        global_count += 1.0;
      }
  if (global_count > 0.0)
    for (double& v : global) v /= global_count;

  Image log_r(stack.width, stack.height, 3);
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(m));
  for (std::size_t p = 0; p < n; ++p) {
    for (int c = 0; c < 3; ++c) {
      vals.clear();
      for (int i = 0; i < m; ++i)
        if (stack.masks[i].data[p] != 0.0) vals.push_back(stack.log_frames[i].data[p * 3 + c]);
      log_r.data[p * 3 + c] = vals.empty() ? global[c] : median_inplace(vals);
    }
  }
  for (int i = 0; i < m; ++i) {
    d.log_r[i] = log_r;
    Image& s = d.log_s[i];
    for (std::size_t p = 0; p < n; ++p) {
      double acc = 0.0;
      for (int c = 0; c < 3; ++c) acc += stack.log_frames[i].data[p * 3 + c] - log_r.data[p * 3 + c];
      s.data[p] = acc / 3.0;
    }
  }
  return fix_gauge(d, stack.masks, grayscale_shading);
}

SolveResult minimize(const LogStack& stack, const EnergyConfig& cfg, const SolveOptions& opts) {
  const Precomputed pre = precompute(stack, cfg);
  return minimize(stack, cfg, opts, pre, init_decomposition(stack, cfg.grayscale_shading));
}

SolveResult minimize(const LogStack& stack, const EnergyConfig& cfg, const SolveOptions& opts,
                     const Precomputed& pre, Decomposition start) {
  opts.validate();
  cfg.validate();
  SolveResult res;
  SolveReport& rep = res.report;
  rep.bisto = pre.bisto;
  rep.grad_tol = opts.grad_tol > 0.0
                     ? opts.grad_tol
                     : 1e-6 * std::sqrt(static_cast<double>(stack.frames) *
                                        static_cast<double>(stack.pixel_count()));

  Decomposition x = fix_gauge(start, stack.masks, cfg.grayscale_shading);
  EnergyEval cur = total_gradient(stack, x, cfg, pre);
  rep.energy_trace.emplace_back(0, cur.terms.total);

  Decomposition dir, prev_grad;
  bool have_prev = false;
  for (int it = 1; it <= opts.max_iters; ++it) {
    const double gnorm = norm(cur.gradient);
    rep.final_grad_norm = gnorm;
    if (gnorm < rep.grad_tol) {
      rep.converged = true;
      rep.message = "gradient norm below tolerance";
      break;
    }

    if (opts.step_rule == StepRule::ConjugateGradient && have_prev) {
      Decomposition diff = cur.gradient;
      axpy(-1.0, prev_grad, diff);
      const double beta = std::max(0.0, dot(cur.gradient, diff) / dot(prev_grad, prev_grad));
      scale(beta, dir);
      axpy(-1.0, cur.gradient, dir);
      if (dot(dir, cur.gradient) >= 0.0) {
        dir = cur.gradient;
        scale(-1.0, dir);
      }
    } else {
      dir = cur.gradient;
      scale(-1.0, dir);
    }
    const double slope = dot(cur.gradient, dir);

    // Exact curvature along dir: the gradient is affine in the variables.
    Decomposition probe = x;
    axpy(1.0, dir, probe);
    Decomposition hd = total_gradient(stack, probe, cfg, pre).gradient;
    axpy(-1.0, cur.gradient, hd);
    const double curvature = dot(dir, hd);
    double t = curvature > 0.0 ? -slope / curvature : 1.0;

    bool accepted = false;
    bool stalled = false;
    EnergyEval next;
    Decomposition xn;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      xn = x;
      axpy(t, dir, xn);
      xn = fix_gauge(xn, stack.masks, cfg.grayscale_shading);
      next = total_gradient(stack, xn, cfg, pre);
      const double e = next.terms.total;
      if (std::isfinite(e) && e <= cur.terms.total + opts.armijo_c * t * slope &&
          e <= cur.terms.total) {
        accepted = true;
        break;
      }
      // Predicted decrease below rounding of the energy itself.
      if (-t * slope <= 1e-15 * std::abs(cur.terms.total)) {
        stalled = true;
        break;
      }
      t *= 0.5;
    }
    if (stalled) {
      rep.converged = true;
      rep.message = "stalled at rounding level";
      break;
    }
    if (!accepted) {
      rep.aborted = true;
      rep.message = "line search failed after " + std::to_string(opts.max_halvings) +
                    " halvings at iteration " + std::to_string(it);
      break;
    }

    prev_grad = std::move(cur.gradient);
    have_prev = true;
    x = std::move(xn);
    cur = std::move(next);
    rep.iterations = it;
    if (it % opts.report_every == 0 || it == opts.max_iters)
      rep.energy_trace.emplace_back(it, cur.terms.total);
  }
  rep.final_grad_norm = norm(cur.gradient);
  if (!rep.converged && rep.final_grad_norm < rep.grad_tol) {
    rep.converged = true;
    rep.message = "gradient norm below tolerance";
  }
  rep.final_terms = cur.terms;
  res.decomposition = std::move(x);
  return res;
}

}  // namespace lsplit
