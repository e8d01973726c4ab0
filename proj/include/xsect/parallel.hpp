#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <vector>

#include <omp.h>

namespace xsect {

enum class Execution { Serial, Parallel };

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Generator for sample `index` of a run seeded with `seed`. Independent of
/// the thread that draws it, so results do not depend on the thread count.
inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index)));
}

/// Thread count hint from XSECT_THREADS; 0 means the OpenMP default.
inline int thread_hint() {
  if (const char* env = std::getenv("XSECT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 0;
}

/// out[i] = f(i, rng_i) for i < n.
template <class T, class F>
std::vector<T> map_samples(std::size_t n, std::uint64_t seed, F&& f, Execution exec) {
  std::vector<T> out(n);
  if (exec == Execution::Serial) {
    for (std::size_t i = 0; i < n; ++i) {
      auto rng = sample_rng(seed, i);
      out[i] = f(i, rng);
    }
    return out;
  }
  const int threads = thread_hint() > 0 ? thread_hint() : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i) {
    auto rng = sample_rng(seed, static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i), rng);
  }
  return out;
}

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
  std::size_t n = 0;
};

/// Mean and standard error, accumulated in index order.
inline MeanEstimate summarize(const std::vector<double>& v) {
  MeanEstimate e;
  e.n = v.size();
  if (v.empty()) return e;
  double sum = 0.0;
  for (double x : v) sum += x;
  e.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - e.mean) * (x - e.mean);
    e.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return e;
}

}  // namespace xsect
