#include <cmath>

#include "doctest.h"
#include "lsplit/apwls.hpp"
#include "lsplit/energy.hpp"
#include "lsplit/error.hpp"
#include "lsplit/imagestack.hpp"
#include "support.hpp"
#include "synthetic.hpp"

using namespace lsplit;

namespace {

EnergyConfig small_config() {
  EnergyConfig cfg;
  cfg.bandwidths.x = cfg.bandwidths.y = 3.0;
  cfg.bandwidths.intensity = 0.3;
  cfg.bandwidths.c1 = cfg.bandwidths.c2 = 0.15;
  return cfg;
}

Decomposition shift_reflectance(Decomposition d, const Rgb& alpha) {
  for (auto& im : d.log_r)
    for (std::size_t p = 0; p < im.pixel_count(); ++p)
      for (int c = 0; c < 3; ++c) im.data[p * 3 + c] += alpha[c];
  for (auto& c : d.illum)
    for (int k = 0; k < 3; ++k) c[k] -= alpha[k];
  return d;
}

Decomposition shift_shading(Decomposition d, int frame, double beta) {
  for (double& v : d.log_s[frame].data) v += beta;
  for (double& v : d.illum[frame]) v -= beta;
  return d;
}

}  // namespace

TEST_CASE("total_energy: exact decomposition with reconstruction only is zero") {
  const auto scene = testutil::lambertian_scene(3, 10, 8, 1);
  const LogStack st = to_log_stack(scene.seq);
  EnergyConfig cfg = small_config();
  cfg.w_rc = cfg.w_rsm = cfg.w_ssm = 0.0;
  const Precomputed pre = precompute(st, cfg);
  CHECK(std::abs(total_energy(st, scene.truth, cfg, pre).total) < 1e-12);
}

TEST_CASE("total_energy: weighted sum of nonnegative terms") {
  const LogStack st = to_log_stack(testutil::random_sequence(3, 9, 7, 2, 0.9));
  const EnergyConfig cfg = small_config();
  const Precomputed pre = precompute(st, cfg);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto d = testutil::random_decomposition(3, 9, 7, seed);
    const EnergyTerms t = total_energy(st, d, cfg, pre);
    CHECK(t.reconstruct >= 0.0);
    CHECK(t.consistency >= 0.0);
    CHECK(t.rsmooth >= -1e-8);
    CHECK(t.ssmooth >= 0.0);
    CHECK(t.total == t.reconstruct + cfg.w_rc * t.consistency + cfg.w_rsm * t.rsmooth +
                         cfg.w_ssm * t.ssmooth);
    CHECK(t.total == weighted_total(t, cfg));
  }
}

TEST_CASE("total_gradient: matches central differences with every term active") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const LogStack st = to_log_stack(testutil::random_sequence(2, 8, 8, 50 + seed, 0.85));
    const EnergyConfig cfg = small_config();
    const Precomputed pre = precompute(st, cfg);
    const auto d = testutil::random_decomposition(2, 8, 8, 60 + seed);
    const EnergyEval ev = total_gradient(st, d, cfg, pre);
    CHECK(ev.terms.consistency > 0.0);
    CHECK(ev.terms.rsmooth > 0.0);
    CHECK(ev.terms.ssmooth > 0.0);
    const auto f = [&](const Decomposition& x) { return total_energy(st, x, cfg, pre).total; };
    CHECK(testutil::rel_error(testutil::flatten(ev.gradient), testutil::fd_gradient(f, d)) < 1e-5);
  }
}

TEST_CASE("total_gradient: zero smoothness weights leave the reconstruction gradient") {
  const LogStack st = to_log_stack(testutil::random_sequence(2, 6, 5, 3));
  EnergyConfig cfg = small_config();
  cfg.w_rc = cfg.w_rsm = cfg.w_ssm = 0.0;
  const Precomputed pre = precompute(st, cfg);
  const auto d = testutil::random_decomposition(2, 6, 5, 4);
  const auto a = testutil::flatten(total_gradient(st, d, cfg, pre).gradient);
  const auto b = testutil::flatten(reconstruction_loss(st, d).grad);
  CHECK(a == b);
}

TEST_CASE("gauge directions are invariant and null") {
  const LogStack st = to_log_stack(testutil::random_sequence(3, 8, 6, 9, 0.8));
  const EnergyConfig cfg = small_config();
  const Precomputed pre = precompute(st, cfg);
  const auto d = testutil::random_decomposition(3, 8, 6, 10);
  const EnergyEval ev = total_gradient(st, d, cfg, pre);
  const double e0 = ev.terms.total;
  CHECK(testutil::rel_diff(total_energy(st, shift_reflectance(d, {0.4, -0.9, 0.1}), cfg, pre).total,
                           e0) < 1e-9);
  CHECK(testutil::rel_diff(total_energy(st, shift_shading(d, 2, 0.8), cfg, pre).total, e0) < 1e-9);

  // Directional derivatives along the gauge generators.
  const double gnorm = norm(ev.gradient);
  auto dir = Decomposition::zeros(3, 8, 6);
  dir = shift_reflectance(dir, {1.0, 0.0, 0.0});
  CHECK(std::abs(dot(ev.gradient, dir)) < 1e-8 * gnorm * norm(dir));
  dir = shift_shading(Decomposition::zeros(3, 8, 6), 1, 1.0);
  CHECK(std::abs(dot(ev.gradient, dir)) < 1e-8 * gnorm * norm(dir));
}

TEST_CASE("energy is invariant under frame permutation") {
  auto seq = testutil::random_sequence(3, 7, 6, 12, 0.8);
  const EnergyConfig cfg = small_config();
  const auto d = testutil::random_decomposition(3, 7, 6, 13);
  const LogStack st = to_log_stack(seq);
  const double e0 = total_energy(st, d, cfg, precompute(st, cfg)).total;
  std::swap(seq.frames[0], seq.frames[2]);
  std::swap(seq.masks[0], seq.masks[2]);
  auto dp = d;
  std::swap(dp.log_r[0], dp.log_r[2]);
  std::swap(dp.log_s[0], dp.log_s[2]);
  std::swap(dp.illum[0], dp.illum[2]);
  const LogStack sp = to_log_stack(seq);
  // The bistochastic scaling is an iterative fit, so permuted inputs agree to its rounding.
  CHECK(testutil::rel_diff(total_energy(sp, dp, cfg, precompute(sp, cfg)).total, e0) < 1e-9);
}

TEST_CASE("fix_gauge: zero-mean shading, zero-mean illumination, idempotent") {
  std::mt19937_64 rng(1);
  const auto seq = testutil::random_sequence(3, 6, 5, 14, 0.7);
  const auto d = testutil::random_decomposition(3, 6, 5, 15);
  const Decomposition f = fix_gauge(d, seq.masks);
  for (int i = 0; i < 3; ++i) {
    double sum = 0.0, cnt = 0.0;
    for (std::size_t p = 0; p < 30; ++p)
      if (seq.masks[i].data[p] != 0.0) {
        sum += f.log_s[i].data[p];
        cnt += 1.0;
      }
    CHECK(std::abs(sum / cnt) < 1e-12);
  }
  for (int c = 0; c < 3; ++c)
    CHECK(std::abs(f.illum[0][c] + f.illum[1][c] + f.illum[2][c]) < 1e-12);

  const Decomposition ff = fix_gauge(f, seq.masks);
  CHECK(testutil::rel_error(testutil::flatten(ff), testutil::flatten(f)) < 1e-14);

  const Decomposition g = fix_gauge(shift_shading(d, 0, 0.7), seq.masks);
  CHECK(testutil::rel_error(testutil::flatten(g), testutil::flatten(f)) < 1e-12);

  const LogStack st = to_log_stack(seq);
  const EnergyConfig cfg = small_config();
  const Precomputed pre = precompute(st, cfg);
  CHECK(testutil::rel_diff(total_energy(st, f, cfg, pre).total,
                           total_energy(st, d, cfg, pre).total) < 1e-9);
}

TEST_CASE("grayscale mode keeps the illumination at zero") {
  const auto seq = testutil::random_sequence(2, 6, 5, 16);
  auto d = testutil::random_decomposition(2, 6, 5, 17);
  for (auto& c : d.illum) c = {0.0, 0.0, 0.0};
  const LogStack st = to_log_stack(seq);
  EnergyConfig cfg = small_config();
  cfg.grayscale_shading = true;
  const Precomputed pre = precompute(st, cfg);
  const EnergyEval ev = total_gradient(st, d, cfg, pre);
  for (const auto& c : ev.gradient.illum)
    for (double v : c) CHECK(v == 0.0);
  axpy(-1e-3, ev.gradient, d);
  const Decomposition f = fix_gauge(d, seq.masks, true);
  for (const auto& c : f.illum)
    for (double v : c) CHECK(v == 0.0);
  CHECK(testutil::rel_diff(total_energy(st, f, cfg, pre).total,
                           total_energy(st, d, cfg, pre).total) < 1e-9);
}

TEST_CASE("energy decreases along the negative gradient for small steps") {
  const LogStack st = to_log_stack(testutil::random_sequence(2, 8, 7, 18, 0.9));
  const EnergyConfig cfg = small_config();
  const Precomputed pre = precompute(st, cfg);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto d = testutil::random_decomposition(2, 8, 7, 70 + seed);
    const EnergyEval ev = total_gradient(st, d, cfg, pre);
    axpy(-1e-4 / norm(ev.gradient), ev.gradient, d);
    CHECK(total_energy(st, d, cfg, pre).total < ev.terms.total);
  }
}

TEST_CASE("config validation and mismatched precomputation") {
  EnergyConfig bad;
  bad.w_rsm = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = EnergyConfig{};
  bad.bisto_max_iters = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  const LogStack a = to_log_stack(testutil::random_sequence(2, 5, 5, 1));
  const LogStack b = to_log_stack(testutil::random_sequence(2, 6, 5, 1));
  const EnergyConfig cfg = small_config();
  const Precomputed pre = precompute(a, cfg);
  CHECK_THROWS_AS(total_energy(b, Decomposition::zeros(2, 6, 5), cfg, pre), Error);
  CHECK_THROWS_AS(total_energy(a, Decomposition::zeros(2, 6, 5), cfg, pre), Error);
}
