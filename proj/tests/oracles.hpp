#pragma once

// Reference implementations used only by the tests. Each one takes a
// different route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <utility>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "dirmech/rounding.hpp"

namespace oracle {

/// Double-exponential quadrature on [a, b]; copes with endpoint singularities.
inline double integrate(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b, 1e-14);
}

/// Every tuple (k_1..k_j) with sum i k_i = j, found by scanning all vectors
/// with 0 <= k_i <= j / i.
inline std::size_t count_partitions_brute(int j) {
  if (j == 0) return 1;
  std::vector<int> k(static_cast<std::size_t>(j), 0);
  std::size_t count = 0;
  while (true) {
    int s = 0;
    for (int i = 0; i < j; ++i) s += (i + 1) * k[static_cast<std::size_t>(i)];
    if (s == j) ++count;
    int pos = 0;
    while (pos < j) {
      auto& d = k[static_cast<std::size_t>(pos)];
      if (d < j / (pos + 1)) {
        ++d;
        break;
      }
      d = 0;
      ++pos;
    }
    if (pos == j) break;
  }
  return count;
}

/// [z^j] f(z)^q by a discrete Cauchy integral on |z| = 1/2, with f the
/// Beta-series sum a_i z^i truncated far past double precision. `err` is the
/// rounding scale eps * max|f^q| / R^j of the quadrature sum.
struct CauchyCoefficient {
  double value;
  double err;
};

inline CauchyCoefficient g_by_cauchy(double rho, double q, int j) {
  constexpr int kPoints = 128;
  constexpr int kTerms = 200;
  const double R = 0.5;
  std::vector<double> a(kTerms);
  a[0] = 1.0;
  double b = 1.0;
  for (int i = 1; i < kTerms; ++i) {
    b *= (rho + i - 1) / i;
    a[static_cast<std::size_t>(i)] = rho / (rho + i) * b;
  }
  std::complex<double> acc = 0.0;
  double peak = 0.0;
  for (int k = 0; k < kPoints; ++k) {
    const std::complex<double> z = std::polar(R, 2.0 * std::numbers::pi * k / kPoints);
    std::complex<double> f = 0.0, zp = 1.0;
    for (int i = 0; i < kTerms; ++i) {
      f += a[static_cast<std::size_t>(i)] * zp;
      zp *= z;
    }
    const std::complex<double> fq = std::pow(f, q);
    peak = std::max(peak, std::abs(fq));
    acc += fq * std::pow(z, -j);
  }
  return {(acc / static_cast<double>(kPoints)).real(), 64.0 * std::numeric_limits<double>::epsilon() * peak * std::pow(R, -j)};
}

/// Distance between two edges in the line graph, by BFS.
inline int line_graph_distance(const dirmech::BipartiteInstance& inst, std::size_t e, std::size_t f) {
  const std::size_t m = inst.edges.size();
  std::vector<int> dist(m, -1);
  std::deque<std::size_t> queue{e};
  dist[e] = 0;
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (std::size_t g = 0; g < m; ++g) {
      if (dist[g] >= 0) continue;
      const auto& a = inst.edges[cur];
      const auto& b = inst.edges[g];
      if (a.u == b.u || a.v == b.v) {
        dist[g] = dist[cur] + 1;
        queue.push_back(g);
      }
    }
  }
  return dist[f];
}

/// Stable means no two members at line-graph distance exactly two.
inline bool is_stable_bfs(const dirmech::BipartiteInstance& inst, const std::vector<std::size_t>& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (line_graph_distance(inst, s[i], s[j]) == 2) return false;
    }
  }
  return true;
}

/// Smith-order objective of a fixed single-machine sequence, by brute force
/// over all permutations.
inline double best_single_machine(const std::vector<double>& p, const std::vector<double>& w) {
  std::vector<std::size_t> idx(p.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  double best = std::numeric_limits<double>::infinity();
  do {
    double t = 0.0, obj = 0.0;
    for (std::size_t j : idx) {
      t += p[j];
      obj += w[j] * t;
    }
    best = std::min(best, obj);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best;
}

}  // namespace oracle
