#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "dirmech/rng.hpp"

namespace dirmech {

inline constexpr std::uint64_t kDefaultChunk = 1u << 14;

/// Runs `trials` iterations split into fixed-size chunks. Chunk c draws from
/// base.substream(c) into its own copy of `init`; the copies are merged in
/// chunk order. The result therefore does not depend on `threads`.
///
/// body(RngState&, std::uint64_t count, Acc&) performs `count` trials.
/// Acc must be copyable and provide merge(const Acc&).
template <class Acc, class Body>
Acc run_chunked(std::uint64_t trials, const RngState& base, unsigned threads, const Acc& init, Body body,
                std::uint64_t chunk = kDefaultChunk) {
  const std::uint64_t n_chunks = (trials + chunk - 1) / chunk;
  std::vector<std::optional<Acc>> parts(n_chunks);
  auto run_one = [&](std::uint64_t c) {
    RngState rng = base.substream(c);
    Acc acc = init;
    const std::uint64_t count = std::min(chunk, trials - c * chunk);
    body(rng, count, acc);
    parts[c].emplace(std::move(acc));
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_chunks)));
  if (workers <= 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c) run_one(c);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::uint64_t c = next++; c < n_chunks; c = next++) run_one(c);
      });
    }
    for (auto& t : pool) t.join();
  }

  Acc out = init;
  for (auto& p : parts) out.merge(*p);
  return out;
}

/// Deterministic parallel map over indices [0, n).
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace dirmech
