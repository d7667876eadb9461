#include "lsplit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "lsplit/apwls.hpp"
#include "lsplit/error.hpp"

namespace lsplit {

RandomPairInstance random_pair_instance(int frames, int width, int height, int channels,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.0, 1.0), value(-1.0, 1.0);
  RandomPairInstance r;
  for (int i = 0; i < frames; ++i) {
    Image p(width, height, channels), q(width, height, channels), x(width, height, channels),
        y(width, height, channels);
    for (double& v : p.data) v = weight(rng);
    for (double& v : q.data) v = weight(rng);
    for (double& v : x.data) v = value(rng);
    for (double& v : y.data) v = value(rng);
    r.p.push_back(std::move(p));
    r.q.push_back(std::move(q));
    r.x.push_back(std::move(x));
    r.y.push_back(std::move(y));
  }
  return r;
}

namespace {

template <typename F>
double best_ms(int repeats, F&& f, double& result) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    result = f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

}  // namespace

std::vector<BenchRow> bench_apwls(const std::vector<int>& frame_counts, int size, int channels,
                                  std::uint64_t seed, int repeats) {
  if (size < 1 || channels < 1 || repeats < 1)
    fail(ErrorCode::InvalidArgument, "bench size, channels and repeats must be positive");
  std::vector<BenchRow> rows;
  for (int m : frame_counts) {
    if (m < 1) fail(ErrorCode::InvalidArgument, "bench frame counts must be positive");
    const RandomPairInstance inst = random_pair_instance(m, size, size, channels, seed + m);
    const PairLossInputs in{inst.p, inst.q, inst.x, inst.y};
    BenchRow row;
    row.frames = m;
    row.brute_ms = best_ms(repeats, [&] { return apwls_bruteforce(in); }, row.brute_value);
    row.closed_ms = best_ms(repeats, [&] { return apwls_closed(in); }, row.closed_value);
    row.rel_diff = std::abs(row.closed_value - row.brute_value) /
                   std::max(std::abs(row.brute_value), std::numeric_limits<double>::min());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lsplit
