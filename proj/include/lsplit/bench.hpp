#pragma once

#include <cstdint>
#include <vector>

#include "lsplit/image.hpp"

namespace lsplit {

struct BenchRow {
  int frames = 0;
  double brute_ms = 0.0;   // best of `repeats`
  double closed_ms = 0.0;  // best of `repeats`
  double brute_value = 0.0;
  double closed_value = 0.0;
  double rel_diff = 0.0;   // |closed - brute| / max(|brute|, tiny)
};

/// Random APWLS instance: non-negative weights in [0,1], predictions in
/// [-1,1], from a seeded generator.
struct RandomPairInstance {
  std::vector<Image> p, q, x, y;
};
RandomPairInstance random_pair_instance(int frames, int width, int height, int channels,
                                        std::uint64_t seed);

/// Times brute-force and closed-form APWLS on one random instance per m.
std::vector<BenchRow> bench_apwls(const std::vector<int>& frame_counts, int size, int channels,
                                  std::uint64_t seed, int repeats = 3);

}  // namespace lsplit
