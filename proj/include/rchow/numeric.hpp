#pragma once

#include <cstddef>
#include <cstdint>
#include <thread>
#include <utility>
#include <vector>

namespace rchow {

inline constexpr double kPi = 3.14159265358979323846;

/// Standard normal density G(t).
double normal_pdf(double t);
/// Standard normal CDF Phi(t).
double normal_cdf(double t);
/// Inverse of Phi; p must lie in (0, 1).
double normal_quantile(double p);

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);
/// Deterministic child seed for (master, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Worker cap for data-parallel loops. Defaults to ROBUST_CHOW_THREADS or the
/// hardware concurrency.
std::size_t worker_threads();
void set_worker_threads(std::size_t count);

/// True on threads owned by an outer pool; nested loops then run serially.
bool inside_worker();

class WorkerScope {
 public:
  WorkerScope();
  ~WorkerScope();
  WorkerScope(const WorkerScope&) = delete;
  WorkerScope& operator=(const WorkerScope&) = delete;

 private:
  bool previous_;
};

/// Runs fn(i) for i in [0, count) on up to worker_threads() threads. Work is
/// statically strided so the assignment of indices never depends on timing.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  std::size_t threads = inside_worker() ? 1 : worker_threads();
  if (threads > count) threads = count;
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      WorkerScope scope;
      for (std::size_t i = t; i < count; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// Sums per-block partial results with a fixed pairwise tree, so the result is
/// bit-identical regardless of how many threads computed the blocks.
template <class Partial, class BlockFn>
Partial block_reduce(std::size_t count, std::size_t block, BlockFn&& fn, Partial zero) {
  if (count == 0) return zero;
  const std::size_t blocks = (count + block - 1) / block;
  std::vector<Partial> partials(blocks, zero);
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t begin = b * block;
    const std::size_t end = begin + block < count ? begin + block : count;
    partials[b] = fn(begin, end);
  });
  std::size_t width = blocks;
  while (width > 1) {
    const std::size_t half = (width + 1) / 2;
    for (std::size_t i = 0; i + half < width; ++i) partials[i] += partials[i + half];
    width = half;
  }
  return std::move(partials[0]);
}

}  // namespace rchow
