#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace spmap {

// splitmix64: cheap stateless mixer used to derive independent per-pixel
// RNG seeds from (global seed, pixel index).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over raw bytes; used for content hashes in file headers and the
// sweep cache key. Not cryptographic, just stable and cheap.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a64(s.data(), s.size(), h);
}

// Shortest round-trippable decimal for doubles in CSV/JSON output.
// snprintf("%.17g") is locale-independent here because the C locale is never
// changed by this library.
inline std::string format_double(double v) {
  char buf[64];
  for (int prec = 9; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

// Runs fn(i) for i in [0, n). Work is split into a fixed number of blocks so
// that per-block reductions (when the caller accumulates per-block) do not
// depend on the worker count. workers <= 1 runs inline on this thread.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) /
                      static_cast<std::size_t>(workers);
  for (int w = 0; w < workers; ++w) {
    std::size_t lo = static_cast<std::size_t>(w) * chunk;
    std::size_t hi = lo + chunk < n ? lo + chunk : n;
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Deterministic parallel sum: values are accumulated into a fixed number of
// blocks (independent of worker count), then reduced left to right.
// fn(i) must return the i-th summand.
inline double parallel_sum(std::size_t n, int workers,
                           const std::function<double(std::size_t)>& fn) {
  constexpr std::size_t kBlocks = 256;
  if (n == 0) return 0.0;
  std::vector<double> block(kBlocks, 0.0);
  std::size_t per = (n + kBlocks - 1) / kBlocks;
  parallel_for(kBlocks, workers, [&](std::size_t b) {
    std::size_t lo = b * per;
    std::size_t hi = lo + per < n ? lo + per : n;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += fn(i);
    block[b] = s;
  });
  double total = 0.0;
  for (double s : block) total += s;
  return total;
}

int default_workers();  // SPMAP_WORKERS env var, else 1

}  // namespace spmap
