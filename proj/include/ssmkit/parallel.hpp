#pragma once

#include <cstddef>
#include <functional>

namespace ssm {

/// Global worker-thread budget. Resolution order: explicit set_num_threads()
/// (CLI --threads), else the SSMKIT_THREADS environment variable, else
/// hardware concurrency.
int num_threads();
void set_num_threads(int n);

/// Runs fn(i) for i in [begin, end) across the thread budget. Falls back to a
/// plain loop when the range is small or the budget is 1. Exceptions from
/// workers are captured and rethrown on the calling thread.
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end,
                  const std::function<void(std::ptrdiff_t)>& fn,
                  std::ptrdiff_t grain = 1);

}  // namespace ssm
