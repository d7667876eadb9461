#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lsplit/energy.hpp"
#include "lsplit/evalkit.hpp"
#include "lsplit/solver.hpp"

namespace lsplit {

/// Every tunable of a run as `key = value` text. All keys have defaults,
/// unknown keys are rejected, '#' starts a comment. canonical() prints every
/// key in sorted order with shortest round-trip number formatting, so
/// parse(canonical()) reproduces the same text.
struct RunConfig {
  EnergyConfig energy;
  SolveOptions solve;
  std::string mask_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  double whdr_delta = 0.1;
  SawOptions saw;
  MitOptions mit;

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  std::string canonical() const;
  void validate() const;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  static std::vector<std::string> keys();
};

}  // namespace lsplit
