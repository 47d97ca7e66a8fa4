#include "ssmkit/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace ssm {

namespace {

int resolve_default_threads() {
#if defined(__GLIBC__)
  // Long-sequence simulations allocate multi-hundred-KiB buffers per call;
  // keep those on the main heap so repeated calls reuse warm pages instead of
  // paying a fresh mmap/fault/munmap cycle each time.
  static const bool heap_tuned = [] {
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
    mallopt(M_TRIM_THRESHOLD, 64 << 20);
    return true;
  }();
  (void)heap_tuned;
#endif
  if (const char* env = std::getenv("SSMKIT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

std::atomic<int> g_threads{0};  // 0 = not yet resolved

}  // namespace

int num_threads() {
  int n = g_threads.load(std::memory_order_relaxed);
  if (n <= 0) {
    n = resolve_default_threads();
    g_threads.store(n, std::memory_order_relaxed);
  }
  return n;
}

void set_num_threads(int n) { g_threads.store(n > 0 ? n : 1, std::memory_order_relaxed); }

void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end,
                  const std::function<void(std::ptrdiff_t)>& fn,
                  std::ptrdiff_t grain) {
  const std::ptrdiff_t count = end - begin;
  if (count <= 0) return;
  const int nt = num_threads();
  if (nt <= 1 || count <= grain) {
    for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
    return;
  }

  std::atomic<std::ptrdiff_t> next{begin};
  std::exception_ptr error;
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (;;) {
      const std::ptrdiff_t lo = next.fetch_add(grain, std::memory_order_relaxed);
      if (lo >= end || failed.load(std::memory_order_relaxed)) return;
      const std::ptrdiff_t hi = std::min(lo + grain, end);
      try {
        for (std::ptrdiff_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<std::ptrdiff_t>(nt, (count + grain - 1) / grain)) - 1;
  pool.reserve(static_cast<std::size_t>(spawn > 0 ? spawn : 0));
  for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failed.load()) std::rethrow_exception(error);
}

}  // namespace ssm
