#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace liberata {

/* One formatter for every CSV/plain-text number so repeated runs are
   byte-identical. %.12g keeps short decimals short (0.1 -> "0.1"). */
inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline int thread_budget() {
  if (const char* env = std::getenv("LIBERATA_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/* Chunked parallel map over [0, n). Tasks write to disjoint slots only, so
   results are independent of scheduling. */
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  int workers = std::min<std::size_t>(thread_budget(), n == 0 ? 1 : n);
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/* Deterministic RNG helpers: the engine is std::mt19937_64, but all value
   mapping is done by hand so sequences never depend on the standard
   library's distribution implementations. */
struct Rng {
  explicit Rng(std::uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next() {
    // xorshift* keeps the dependency surface minimal and the stream portable.
    std::uint64_t x = state;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state = x;
    return x * 0x2545f4914f6cdd1dull;
  }

  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

  double normal() {
    // Marsaglia polar method with a cached spare.
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    double u, v, s;
    do {
      u = 2.0 * u01() - 1.0;
      v = 2.0 * u01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare = v * f;
    has_spare = true;
    return u * f;
  }

  double gamma(double alpha) {
    // Marsaglia-Tsang; alpha >= 1 fast path, boost trick below 1.
    if (alpha < 1.0) {
      double u = u01();
      while (u == 0.0) u = u01();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    double d = alpha - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = u01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  std::uint64_t state;
  bool has_spare = false;
  double spare = 0.0;
};

}  // namespace liberata
