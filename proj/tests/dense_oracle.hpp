#pragma once

// Dense reference for the bilateral-grid affinity, small problems only.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "lsplit/bilateral.hpp"
#include "lsplit/imagestack.hpp"
#include "support.hpp"

namespace testutil {

using lsplit::Bandwidths;
using lsplit::FeatureVec;

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t n) { return Dense(n, std::vector<double>(n, 0.0)); }

inline Dense matmul(const Dense& a, const Dense& b) {
  const std::size_t n = a.size();
  Dense c = zeros(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Independent dense construction of the pixel affinity S^T Bbar S: lattice
// coordinates by rounding, axis blurs as explicit matrices.
struct DenseModel {
  std::vector<int> vertex_of;  // per pixel
  Dense w;                     // pixels x pixels
};

inline DenseModel dense_model(const std::vector<FeatureVec>& f, const Bandwidths& bw) {
  const FeatureVec s = bw.as_array();
  std::map<std::array<long, 5>, int> ids;
  std::vector<std::array<long, 5>> coords;
  DenseModel m;
  for (const auto& fp : f) {
    std::array<long, 5> c{};
    for (int k = 0; k < 5; ++k) c[k] = std::lround(fp[k] / s[k]);
    auto [it, ins] = ids.emplace(c, static_cast<int>(coords.size()));
    if (ins) coords.push_back(c);
    m.vertex_of.push_back(it->second);
  }
  const std::size_t nv = coords.size();
  std::vector<Dense> blur;
  for (int k = 0; k < 5; ++k) {
    Dense b = zeros(nv);
    for (std::size_t v = 0; v < nv; ++v) {
      b[v][v] = 0.5;
      for (int step : {-1, 1}) {
        auto c = coords[v];
        c[k] += step;
        if (auto it = ids.find(c); it != ids.end()) b[v][it->second] += 0.25;
        else b[v][v] += 0.25;
      }
    }
    blur.push_back(b);
  }
  Dense fwd = blur[0], bwd = blur[4];
  for (int k = 1; k < 5; ++k) fwd = matmul(fwd, blur[k]);
  for (int k = 3; k >= 0; --k) bwd = matmul(bwd, blur[k]);
  const std::size_t n = f.size();
  m.w = zeros(n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      m.w[p][q] = fwd[m.vertex_of[p]][m.vertex_of[q]] + bwd[m.vertex_of[p]][m.vertex_of[q]];
  return m;
}

// Dense n <- sqrt(n / (W n)) run to a tight tolerance.
inline std::vector<double> dense_bisto(const Dense& w) {
  const std::size_t n = w.size();
  std::vector<double> d(n, 1.0);
  for (int it = 0; it < 100000; ++it) {
    double worst = 0.0;
    std::vector<double> wd(n, 0.0);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q) wd[p] += w[p][q] * d[q];
    for (std::size_t p = 0; p < n; ++p) worst = std::max(worst, std::abs(d[p] * wd[p] - 1.0));
    if (worst < 1e-14) break;
    for (std::size_t p = 0; p < n; ++p) d[p] = std::sqrt(d[p] / wd[p]);
  }
  return d;
}

// 12-pixel case: one 4x3 frame, unit spatial and 0.25 colour bandwidths.
// Returns (grid rsmooth, dense r^T (I - N W N) r) for `trials` random r.
inline std::vector<std::pair<double, double>> twelve_pixel_rsmooth(std::uint64_t seed, int trials) {
  using namespace lsplit;
  std::mt19937_64 rng(seed);
  Bandwidths bw;
  bw.x = bw.y = 1.0;
  bw.intensity = bw.c1 = bw.c2 = 0.25;
  const int w = 4, h = 3;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image frame(w, h, 3);
  for (double& v : frame.data) v = 0.3 + 0.2 * u(rng);
  const LogStack st = to_log_stack(make_sequence({frame}));
  BilateralGrid g = build_grid(st, bw);
  bistochasticize(g, 100000, 1e-13);

  std::vector<FeatureVec> f(12);
  for (int p = 0; p < 12; ++p) {
    for (int k = 0; k < 5; ++k) f[p][k] = st.features()[0].data[p * 5 + k];
    f[p][0] -= 0.5 * (w - 1);
    f[p][1] -= 0.5 * (h - 1);
  }
  const DenseModel dm = dense_model(f, bw);
  const auto n = dense_bisto(dm.w);

  std::vector<std::pair<double, double>> out;
  for (int trial = 0; trial < trials; ++trial) {
    const Decomposition d = random_decomposition(1, w, h, seed * 1000 + trial);
    double oracle = 0.0;
    for (int c = 0; c < 3; ++c) {
      for (int p = 0; p < 12; ++p) {
        const double rp = d.log_r[0].data[p * 3 + c];
        oracle += rp * rp;
        for (int s = 0; s < 12; ++s)
          oracle -= rp * n[p] * dm.w[p][s] * n[s] * d.log_r[0].data[s * 3 + c];
      }
    }
    out.emplace_back(rsmooth_loss(g, d).value, oracle);
  }
  return out;
}

}  // namespace testutil
