#include "lsplit/apwls.hpp"

#include <algorithm>

#include "lsplit/error.hpp"
#include "lsplit/imagestack.hpp"

namespace lsplit {
namespace {

// Weight value for channel c of pixel p; single-channel weights broadcast.
inline double weight_at(const Image& w, std::size_t p, int c) {
  return w.channels == 1 ? w.data[p] : w.data[p * w.channels + c];
}

struct Accumulators {
  std::size_t pixels = 0;
  int channels = 0;
  std::vector<double> p2, q2, p2x, p2x2, q2y, q2y2;  // per (pixel, channel)
};

Accumulators accumulate(const PairLossInputs& in) {
  const Image& ref = in.x.front();
  Accumulators a;
  a.pixels = ref.pixel_count();
  a.channels = ref.channels;
  const std::size_t len = a.pixels * a.channels;
  for (auto* v : {&a.p2, &a.q2, &a.p2x, &a.p2x2, &a.q2y, &a.q2y2}) v->assign(len, 0.0);

  const int nc = a.channels;
  for (std::size_t i = 0; i < in.x.size(); ++i) {
    const Image& P = in.p[i];
    const Image& Q = in.q[i];
    const double* X = in.x[i].data.data();
    const double* Y = in.y[i].data.data();
    for (std::size_t p = 0; p < a.pixels; ++p) {
      for (int c = 0; c < nc; ++c) {
        const std::size_t k = p * nc + c;
        const double pw = weight_at(P, p, c);
        const double qw = weight_at(Q, p, c);
        const double pp = pw * pw, qq = qw * qw;
        a.p2[k] += pp;
        a.q2[k] += qq;
        a.p2x[k] += pp * X[k];
        a.p2x2[k] += pp * X[k] * X[k];
        a.q2y[k] += qq * Y[k];
        a.q2y2[k] += qq * Y[k] * Y[k];
      }
    }
  }
  return a;
}

double closed_value(const Accumulators& a) {
  double total = 0.0;
  for (std::size_t k = 0; k < a.p2.size(); ++k) {
    const double v = a.q2[k] * a.p2x2[k] + a.p2[k] * a.q2y2[k] - 2.0 * a.p2x[k] * a.q2y[k];
    total += std::max(v, 0.0);
  }
  return total;
}

PairGradient closed_grad(const PairLossInputs& in, const Accumulators& a) {
  PairGradient g;
  const int nc = a.channels;
  g.dx.reserve(in.x.size());
  g.dy.reserve(in.y.size());
  for (std::size_t i = 0; i < in.x.size(); ++i) {
    const Image& X = in.x[i];
    const Image& Y = in.y[i];
    Image dx(X.width, X.height, nc);
    Image dy(Y.width, Y.height, nc);
    for (std::size_t p = 0; p < a.pixels; ++p) {
      for (int c = 0; c < nc; ++c) {
        const std::size_t k = p * nc + c;
        const double pw = weight_at(in.p[i], p, c);
        const double qw = weight_at(in.q[i], p, c);
        dx.data[k] = 2.0 * pw * pw * (X.data[k] * a.q2[k] - a.q2y[k]);
        dy.data[k] = 2.0 * qw * qw * (Y.data[k] * a.p2[k] - a.p2x[k]);
      }
    }
    g.dx.push_back(std::move(dx));
    g.dy.push_back(std::move(dy));
  }
  return g;
}

}  // namespace

void PairLossInputs::validate() const {
  const std::size_t m = x.size();
  if (m == 0) fail(ErrorCode::InvalidArgument, "APWLS needs at least one frame");
  if (p.size() != m || q.size() != m || y.size() != m)
    fail(ErrorCode::ShapeMismatch, "APWLS inputs have differing frame counts");
  const Image& ref = x.front();
  for (std::size_t i = 0; i < m; ++i) {
    if (!x[i].same_shape(ref) || !y[i].same_shape(ref))
      fail(ErrorCode::ShapeMismatch, "APWLS prediction images differ in shape");
    for (const Image* w : {&p[i], &q[i]}) {
      if (!w->same_size(ref) || (w->channels != 1 && w->channels != ref.channels))
        fail(ErrorCode::ShapeMismatch, "APWLS weight image has incompatible shape");
      for (double v : w->data)
        if (!(v >= 0.0)) fail(ErrorCode::InvalidArgument, "APWLS weights must be nonnegative");
    }
  }
}

double apwls_bruteforce(const PairLossInputs& in) {
  in.validate();
  const std::size_t m = in.x.size();
  const std::size_t n = in.x.front().pixel_count();
  const int nc = in.x.front().channels;
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < nc; ++c) {
          const std::size_t k = p * nc + c;
          const double w = weight_at(in.p[i], p, c) * weight_at(in.q[j], p, c);
          const double r = w * (in.x[i].data[k] - in.y[j].data[k]);
          total += r * r;
        }
      }
    }
  }
  return total;
}

double apwls_closed(const PairLossInputs& in) {
  in.validate();
  return closed_value(accumulate(in));
}

PairGradient apwls_closed_grad(const PairLossInputs& in) {
  in.validate();
  return closed_grad(in, accumulate(in));
}

PairLossResult apwls_closed_with_grad(const PairLossInputs& in) {
  in.validate();
  const Accumulators a = accumulate(in);
  return {closed_value(a), closed_grad(in, a)};
}

TermResult reconstruction_loss(const LogStack& stack, const Decomposition& d) {
  const std::size_t m = static_cast<std::size_t>(stack.frames);
  if (d.log_r.size() != m || d.log_s.size() != m || d.illum.size() != m)
    fail(ErrorCode::ShapeMismatch, "decomposition frame count does not match the stack");
  for (std::size_t i = 0; i < m; ++i)
    if (d.log_r[i].width != stack.width || d.log_r[i].height != stack.height ||
        d.log_r[i].channels != 3 || !d.log_s[i].same_size(d.log_r[i]) ||
        d.log_s[i].channels != 1)
      fail(ErrorCode::ShapeMismatch, "decomposition image shape does not match the stack");

  std::vector<Image> P(m), X(m);
  for (std::size_t i = 0; i < m; ++i) {
    Image w = stack.lum_weights[i];
    for (std::size_t p = 0; p < w.data.size(); ++p) w.data[p] *= stack.masks[i].data[p];
    P[i] = std::move(w);

    Image x = stack.log_frames[i];
    const Image& ls = d.log_s[i];
    for (std::size_t p = 0; p < ls.data.size(); ++p)
      for (int c = 0; c < 3; ++c) x.data[p * 3 + c] -= ls.data[p] + d.illum[i][c];
    X[i] = std::move(x);
  }

  const PairLossInputs in{P, stack.masks, X, d.log_r};
  PairLossResult r = apwls_closed_with_grad(in);

  TermResult out{r.value, Decomposition::zeros(stack.frames, stack.width, stack.height)};
  for (std::size_t i = 0; i < m; ++i) {
    out.grad.log_r[i] = std::move(r.grad.dy[i]);
    const Image& dx = r.grad.dx[i];
    Image& gs = out.grad.log_s[i];
    Rgb gc{0.0, 0.0, 0.0};
    for (std::size_t p = 0; p < gs.data.size(); ++p) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) {
        s += dx.data[p * 3 + c];
        gc[c] -= dx.data[p * 3 + c];
      }
      gs.data[p] = -s;
    }
    out.grad.illum[i] = gc;
  }
  return out;
}

TermResult consistency_loss(const Decomposition& d, std::span<const Image> masks) {
  if (masks.size() != d.log_r.size())
    fail(ErrorCode::ShapeMismatch, "mask count does not match the decomposition");
  const PairLossInputs in{masks, masks, d.log_r, d.log_r};
  PairLossResult r = apwls_closed_with_grad(in);
  TermResult out{r.value, Decomposition::zeros(d.frame_count(), d.width(), d.height())};
  for (std::size_t i = 0; i < d.log_r.size(); ++i) {
    Image g = std::move(r.grad.dx[i]);
    for (std::size_t k = 0; k < g.data.size(); ++k) g.data[k] += r.grad.dy[i].data[k];
    out.grad.log_r[i] = std::move(g);
  }
  return out;
}

}  // namespace lsplit
