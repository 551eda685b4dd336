#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace dimsel {

// All randomness in the pipeline flows from one master seed. Sub-tasks
// (per pair, per percent, per fold, per trial) derive their own streams
// with derive_seed so that runs are reproducible regardless of execution
// order or the number of worker threads.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Folds a task path (e.g. {pair_tag, percent, fold}) into the master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t p : path) s = splitmix64(s ^ p);
  return s;
}

}  // namespace dimsel
