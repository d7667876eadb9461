#pragma once

#include <cstddef>
#include <functional>

namespace lsplit {

/// Worker count used by parallel_for. 1 (the default) runs inline.
void set_thread_count(int n);
int thread_count() noexcept;

/// Runs body(i) for i in [0, n). Every index writes only its own output
/// slot, so results never depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lsplit
