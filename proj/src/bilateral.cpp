#include "lsplit/bilateral.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "lsplit/error.hpp"
#include "lsplit/imagestack.hpp"

namespace lsplit {
namespace {

using Coord = std::array<std::int32_t, kFeatureDims>;

struct CoordHash {
  std::size_t operator()(const Coord& c) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int32_t v : c) {
      h ^= static_cast<std::uint32_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

void refresh_row_sums(BilateralGrid& g) {
  const std::vector<double> wn = apply_affinity(g, g.bisto_diag);
  g.row_sums.resize(wn.size());
  for (std::size_t p = 0; p < wn.size(); ++p) g.row_sums[p] = g.bisto_diag[p] * wn[p];
}

}  // namespace

void Bandwidths::validate() const {
  for (double b : as_array())
    if (!(b > 0.0) || !std::isfinite(b))
      fail(ErrorCode::InvalidArgument, "bilateral bandwidths must be positive and finite");
}

double gaussian_affinity(const FeatureVec& fp, const FeatureVec& fq, const Bandwidths& bw) {
  const FeatureVec s = bw.as_array();
  double d2 = 0.0;
  for (int k = 0; k < kFeatureDims; ++k) {
    const double t = (fp[k] - fq[k]) / s[k];
    d2 += t * t;
  }
  return std::exp(-d2);
}

BilateralGrid build_grid(std::span<const FeatureVec> features, std::span<const std::uint8_t> valid,
                         const Bandwidths& bw) {
  bw.validate();
  if (features.size() != valid.size())
    fail(ErrorCode::ShapeMismatch, "feature and validity counts differ");
  const FeatureVec scale = bw.as_array();

  BilateralGrid g;
  g.bandwidths = bw;
  g.pixel_vertex.assign(features.size(), -1);
  std::unordered_map<Coord, std::int32_t, CoordHash> index;
  for (std::size_t p = 0; p < features.size(); ++p) {
    if (!valid[p]) continue;
    Coord c{};
    for (int k = 0; k < kFeatureDims; ++k) {
      const double q = std::round(features[p][k] / scale[k]);
      if (!(std::abs(q) < 1e9))
        fail(ErrorCode::InvalidArgument, "feature lattice coordinate out of range");
      c[k] = static_cast<std::int32_t>(q);
    }
    auto [it, inserted] = index.try_emplace(c, static_cast<std::int32_t>(g.coords.size()));
    if (inserted) g.coords.push_back(c);
    g.pixel_vertex[p] = it->second;
  }

  const std::size_t nv = g.coords.size();
  for (int k = 0; k < kFeatureDims; ++k) {
    g.prev[k].assign(nv, -1);
    g.next[k].assign(nv, -1);
    for (std::size_t v = 0; v < nv; ++v) {
      Coord c = g.coords[v];
      c[k] -= 1;
      if (auto it = index.find(c); it != index.end()) g.prev[k][v] = it->second;
      c[k] += 2;
      if (auto it = index.find(c); it != index.end()) g.next[k][v] = it->second;
    }
  }

  g.bisto_diag.resize(features.size());
  for (std::size_t p = 0; p < features.size(); ++p) g.bisto_diag[p] = g.is_valid(p) ? 1.0 : 0.0;
  refresh_row_sums(g);
  return g;
}

BilateralGrid build_grid(const LogStack& stack, const Bandwidths& bw) {
  const std::size_t n = stack.pixel_count();
  const std::vector<Image>& feats = stack.features();
  std::vector<FeatureVec> f(n * stack.frames);
  std::vector<std::uint8_t> valid(n * stack.frames);
  const double cx = 0.5 * (stack.width - 1), cy = 0.5 * (stack.height - 1);
  for (int i = 0; i < stack.frames; ++i) {
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t k = i * n + p;
      for (int d = 0; d < kFeatureDims; ++d) f[k][d] = feats[i].data[p * kFeatureDims + d];
      f[k][0] -= cx;
      f[k][1] -= cy;
      valid[k] = stack.masks[i].data[p] != 0.0;
    }
  }
  return build_grid(f, valid, bw);
}

std::vector<double> splat(const BilateralGrid& g, std::span<const double> pixel_values) {
  std::vector<double> out(g.vertex_count(), 0.0);
  for (std::size_t p = 0; p < g.pixel_vertex.size(); ++p)
    if (g.pixel_vertex[p] >= 0) out[g.pixel_vertex[p]] += pixel_values[p];
  return out;
}

std::vector<double> slice(const BilateralGrid& g, std::span<const double> vertex_values) {
  std::vector<double> out(g.pixel_vertex.size(), 0.0);
  for (std::size_t p = 0; p < g.pixel_vertex.size(); ++p)
    if (g.pixel_vertex[p] >= 0) out[p] = vertex_values[g.pixel_vertex[p]];
  return out;
}

std::vector<double> blur_axis(const BilateralGrid& g, int axis, std::span<const double> v) {
  const auto& prev = g.prev[axis];
  const auto& next = g.next[axis];
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double centre = 1.0;
    double side = 0.0;
    if (prev[i] >= 0) {
      centre -= 0.25;
      side += v[prev[i]];
    }
    if (next[i] >= 0) {
      centre -= 0.25;
      side += v[next[i]];
    }
    out[i] = centre * v[i] + 0.25 * side;
  }
  return out;
}

std::vector<double> bbar_apply(const BilateralGrid& g, std::span<const double> v) {
  if (v.size() != g.vertex_count())
    fail(ErrorCode::ShapeMismatch, "vector length does not match the vertex count");
  std::vector<double> fwd(v.begin(), v.end());
  std::vector<double> bwd(v.begin(), v.end());
  // B_0 B_1 ... B_4 v applies B_4 first.
  for (int k = kFeatureDims - 1; k >= 0; --k) fwd = blur_axis(g, k, fwd);
  for (int k = 0; k < kFeatureDims; ++k) bwd = blur_axis(g, k, bwd);
  for (std::size_t i = 0; i < fwd.size(); ++i) fwd[i] += bwd[i];
  return fwd;
}

std::vector<double> apply_affinity(const BilateralGrid& g, std::span<const double> v) {
  return slice(g, bbar_apply(g, splat(g, v)));
}

std::vector<double> apply_normalized_affinity(const BilateralGrid& g, std::span<const double> v) {
  std::vector<double> scaled(v.size());
  for (std::size_t p = 0; p < v.size(); ++p) scaled[p] = g.bisto_diag[p] * v[p];
  std::vector<double> out = apply_affinity(g, scaled);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] *= g.bisto_diag[p];
  return out;
}

BistoStatus bistochasticize(BilateralGrid& g, int max_iters, double tol) {
  if (max_iters < 1) fail(ErrorCode::InvalidArgument, "max_iters must be at least 1");
  std::vector<double>& n = g.bisto_diag;
  BistoStatus st;
  std::vector<double> wn;
  while (true) {
    wn = apply_affinity(g, n);
    st.residual = 0.0;
    for (std::size_t p = 0; p < n.size(); ++p)
      if (g.is_valid(p)) st.residual = std::max(st.residual, std::abs(n[p] * wn[p] - 1.0));
    st.converged = st.residual < tol;
    if (st.converged || st.iterations >= max_iters) break;
    for (std::size_t p = 0; p < n.size(); ++p)
      if (g.is_valid(p)) n[p] = std::sqrt(n[p] / wn[p]);
    ++st.iterations;
  }
  g.row_sums.resize(n.size());
  for (std::size_t p = 0; p < n.size(); ++p) g.row_sums[p] = n[p] * wn[p];
  return st;
}

TermResult rsmooth_loss(const BilateralGrid& g, const Decomposition& d) {
  const std::size_t m = d.log_r.size();
  const std::size_t n = static_cast<std::size_t>(d.width()) * d.height();
  if (m * n != g.pixel_count())
    fail(ErrorCode::ShapeMismatch, "decomposition does not match the bilateral grid");

  TermResult out{0.0, Decomposition::zeros(d.frame_count(), d.width(), d.height())};
  std::vector<double> r(m * n);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < n; ++p) {
        const std::size_t k = i * n + p;
        r[k] = g.is_valid(k) ? d.log_r[i].data[p * 3 + c] : 0.0;
      }
    const std::vector<double> wr = apply_normalized_affinity(g, r);
    for (std::size_t i = 0; i < m; ++i) {
      double* grad = out.grad.log_r[i].data.data();
      for (std::size_t p = 0; p < n; ++p) {
        const std::size_t k = i * n + p;
        if (!g.is_valid(k)) continue;
        const double lr = g.row_sums[k] * r[k] - wr[k];
        out.value += r[k] * lr;
        grad[p * 3 + c] = 2.0 * lr;
      }
    }
  }
  return out;
}

std::vector<double> exact_affinity_reference(std::span<const FeatureVec> features,
                                             const Bandwidths& bw) {
  bw.validate();
  const std::size_t n = features.size();
  if (n > 4096)
    fail(ErrorCode::InvalidArgument, "exact affinity reference limited to 4096 points");
  std::vector<double> w(n * n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) w[p * n + q] = gaussian_affinity(features[p], features[q], bw);
  return w;
}

}  // namespace lsplit
