#pragma once

// Dependent rounding on a bipartite graph: each left node draws a Dirichlet
// copula over its edges, every edge gets an exponential clock
// Z_e = -ln(A_e) / x_e, and right node v keeps edge e iff
//   (1 - x_e) Z_e < (x(N(v)) - x_e) min_{f in N(v), f != e} Z_f.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dirmech/copula.hpp"
#include "dirmech/error.hpp"
#include "dirmech/parallel.hpp"
#include "dirmech/psi.hpp"
#include "dirmech/rng.hpp"
#include "dirmech/stats.hpp"

namespace dirmech {

inline constexpr double kInstanceSlack = 1e-12;
inline constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct BipartiteEdge {
  std::size_t u;
  std::size_t v;
  double x;
  double rho;
};

struct BipartiteInstance {
  std::vector<std::string> left;
  std::vector<std::string> right;
  std::vector<BipartiteEdge> edges;

  std::string edge_name(std::size_t e) const {
    const auto& ed = edges.at(e);
    return left.at(ed.u) + "-" + right.at(ed.v);
  }
};

/// Every problem with the instance, empty when it is a valid input.
inline std::vector<std::string> validate_instance(const BipartiteInstance& inst) {
  std::vector<std::string> out;
  {
    std::set<std::string> seen;
    for (const auto& s : inst.left) {
      if (!seen.insert(s).second) out.push_back("duplicate left node " + s);
    }
    seen.clear();
    for (const auto& s : inst.right) {
      if (!seen.insert(s).second) out.push_back("duplicate right node " + s);
    }
  }
  std::vector<double> xsum(inst.right.size(), 0.0);
  std::vector<double> rsum(inst.left.size(), 0.0);
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    const auto& ed = inst.edges[e];
    const std::string tag = "edge " + std::to_string(e);
    if (ed.u >= inst.left.size() || ed.v >= inst.right.size()) {
      out.push_back(tag + " references an undeclared node");
      continue;
    }
    if (!pairs.insert({ed.u, ed.v}).second) out.push_back(tag + " duplicates (" + inst.edge_name(e) + ")");
    if (!(ed.x >= 0.0 && ed.x <= 1.0)) out.push_back(tag + " has x outside [0, 1]");
    if (!(ed.rho >= 0.0 && ed.rho <= 1.0)) out.push_back(tag + " has rho outside [0, 1]");
    xsum[ed.v] += ed.x;
    rsum[ed.u] += ed.rho;
  }
  for (std::size_t v = 0; v < xsum.size(); ++v) {
    if (xsum[v] > 1.0 + kInstanceSlack) {
      out.push_back("right node " + inst.right[v] + " has x(N(v)) = " + std::to_string(xsum[v]) + " > 1");
    }
  }
  for (std::size_t u = 0; u < rsum.size(); ++u) {
    if (rsum[u] > 1.0 + kInstanceSlack) {
      out.push_back("left node " + inst.left[u] + " has rho(N(u)) = " + std::to_string(rsum[u]) + " > 1");
    }
  }
  return out;
}

struct RoundingOutcome {
  std::vector<std::uint8_t> X;
  std::vector<double> Z;
  std::vector<double> A;
};

namespace detail {

// Line-8 selection at one right node. `nv` lists the edges of v in
// increasing index order. Returns the selected edge or kNone.
//
// Conventions: x_e = 0 is never selected. When x(N(v)) is 1 up to the
// instance slack the rule is the plain argmin (ties to the lowest index).
// When e is the only edge with positive x, the term
// (x(N(v)) - x_e) min_f Z_f, which is Exp(1) whenever another edge exists,
// is replaced by a fresh Exp(1) draw from `phantom`, so Pr[X_e] = x_e still
// holds. Floating ties count as non-selection.
inline std::size_t select_at_right(const std::vector<std::size_t>& nv, const std::vector<double>& x,
                                   const std::vector<double>& z, double xsum, RngState& phantom) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double m1 = inf, m2 = inf;
  std::size_t arg = kNone;
  std::size_t positive = 0;
  for (std::size_t e : nv) {
    if (!(x[e] > 0.0)) continue;
    ++positive;
    if (z[e] < m1) {
      m2 = m1;
      m1 = z[e];
      arg = e;
    } else if (z[e] < m2) {
      m2 = z[e];
    }
  }
  if (positive == 0) return kNone;
  if (std::abs(xsum - 1.0) <= kInstanceSlack) return m1 < inf ? arg : kNone;

  if (positive == 1) {
    const double lhs = x[arg] >= 1.0 ? 0.0 : (1.0 - x[arg]) * z[arg];
    return lhs < phantom.exponential() ? arg : kNone;
  }
  std::size_t chosen = kNone;
  for (std::size_t e : nv) {
    if (!(x[e] > 0.0) || z[e] == inf) continue;
    const double other = (e == arg) ? m2 : m1;
    const double lhs = x[e] >= 1.0 ? 0.0 : (1.0 - x[e]) * z[e];
    const double mass = xsum - x[e];
    const double rhs = other == inf ? inf : mass * other;
    if (mass > 0.0 && lhs < rhs) {
      // At most one edge passes in exact arithmetic; keep the earliest clock
      // should rounding ever let two through.
      if (chosen == kNone || z[e] < z[chosen]) chosen = e;
    }
  }
  return chosen;
}

}  // namespace detail

/// DepRound prepared for repeated sampling on a fixed instance.
///
/// One 64-bit key is drawn from the caller's generator per round; left node
/// u then samples from RngState(key, u) and right node v's auxiliary clock
/// from RngState(key, |U| + v). Results do not depend on processing order.
class DepRounder {
 public:
  explicit DepRounder(BipartiteInstance inst) : inst_(std::move(inst)) {
    auto violations = validate_instance(inst_);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    const std::size_t m = inst_.edges.size();
    by_left_.resize(inst_.left.size());
    by_right_.resize(inst_.right.size());
    xsum_.assign(inst_.right.size(), 0.0);
    x_.resize(m);
    for (std::size_t e = 0; e < m; ++e) {
      const auto& ed = inst_.edges[e];
      by_left_[ed.u].push_back(e);
      by_right_[ed.v].push_back(e);
      xsum_[ed.v] += ed.x;
      x_[e] = ed.x;
    }
    copulas_.reserve(by_left_.size());
    for (const auto& es : by_left_) {
      DirichletParams p;
      for (std::size_t e : es) p.rho.push_back(inst_.edges[e].rho);
      copulas_.emplace_back(std::move(p));
    }
  }

  const BipartiteInstance& instance() const noexcept { return inst_; }
  const std::vector<std::vector<std::size_t>>& by_left() const noexcept { return by_left_; }
  const std::vector<std::vector<std::size_t>>& by_right() const noexcept { return by_right_; }

  void round_into(RngState& rng, RoundingOutcome& out) const {
    const std::size_t m = inst_.edges.size();
    out.X.assign(m, 0);
    out.Z.resize(m);
    out.A.resize(m);
    const std::uint64_t key = rng();
    std::vector<double> la;
    for (std::size_t u = 0; u < by_left_.size(); ++u) {
      if (by_left_[u].empty()) continue;
      RngState r(key, u);
      copulas_[u].draw_log(r, la);
      for (std::size_t i = 0; i < by_left_[u].size(); ++i) {
        const std::size_t e = by_left_[u][i];
        out.A[e] = std::exp(la[i]);
        out.Z[e] = x_[e] > 0.0 ? (0.0 - la[i]) / x_[e] : std::numeric_limits<double>::infinity();
      }
    }
    for (std::size_t v = 0; v < by_right_.size(); ++v) {
      RngState phantom(key, by_left_.size() + v);
      const std::size_t e = detail::select_at_right(by_right_[v], x_, out.Z, xsum_[v], phantom);
      if (e != kNone) out.X[e] = 1;
    }
  }

  RoundingOutcome round(RngState& rng) const {
    RoundingOutcome out;
    round_into(rng, out);
    return out;
  }

 private:
  BipartiteInstance inst_;
  std::vector<std::vector<std::size_t>> by_left_;
  std::vector<std::vector<std::size_t>> by_right_;
  std::vector<double> xsum_;
  std::vector<double> x_;
  std::vector<DirichletCopula> copulas_;
};

inline RoundingOutcome dep_round(const BipartiteInstance& inst, RngState& rng) { return DepRounder(inst).round(rng); }

/// True iff no two edges of S are at distance exactly two in the line graph
/// of the instance, i.e. no e = (u, v), f = (u', v') in S with u != u',
/// v != v' and (u, v') or (u', v) an edge.
inline bool stable_set_check(const BipartiteInstance& inst, const std::vector<std::size_t>& S) {
  for (std::size_t e : S) {
    if (e >= inst.edges.size()) throw DomainError("stable_set_check: unknown edge id " + std::to_string(e));
  }
  std::set<std::pair<std::size_t, std::size_t>> present;
  for (const auto& ed : inst.edges) present.insert({ed.u, ed.v});
  for (std::size_t i = 0; i < S.size(); ++i) {
    for (std::size_t j = i + 1; j < S.size(); ++j) {
      const auto& a = inst.edges[S[i]];
      const auto& b = inst.edges[S[j]];
      if (a.u == b.u || a.v == b.v) continue;
      if (present.count({a.u, b.v}) || present.count({b.u, a.v})) return false;
    }
  }
  return true;
}

struct StatsRow {
  std::string kind;  // marginal | same_left | cross_left | stable_set
  std::vector<std::size_t> edges;
  double empirical = 0.0;
  double bound = 0.0;
  double sigma = 0.0;
  double half_width = 0.0;  // 4 sigma
  bool pass = false;
};

struct StatsReport {
  std::uint64_t trials = 0;
  std::uint64_t right_violations = 0;  // trials where some v kept two edges
  std::vector<StatsRow> rows;

  bool all_pass() const {
    if (right_violations != 0) return false;
    return std::all_of(rows.begin(), rows.end(), [](const StatsRow& r) { return r.pass; });
  }
};

namespace detail {

struct RoundingCounts {
  std::vector<std::uint64_t> single;
  std::vector<std::uint64_t> pair;  // m x m, upper triangle used
  std::vector<std::uint64_t> sets;
  std::uint64_t violations = 0;

  void merge(const RoundingCounts& o) {
    for (std::size_t i = 0; i < single.size(); ++i) single[i] += o.single[i];
    for (std::size_t i = 0; i < pair.size(); ++i) pair[i] += o.pair[i];
    for (std::size_t i = 0; i < sets.size(); ++i) sets[i] += o.sets[i];
    violations += o.violations;
  }
};

}  // namespace detail

/// Monte Carlo report for DepRound on `inst`: per-edge marginals against x_e,
/// same-left pairs against x_e x_f Psi_upper(k, k), stable cross-left pairs
/// against x_e x_f, and each supplied stable set against prod x_e.
inline StatsReport estimate_stats(const BipartiteInstance& inst, std::uint64_t trials, const RngState& rng,
                                  const std::vector<std::vector<std::size_t>>& stable_sets = {}, unsigned threads = 1,
                                  int order = 3) {
  detail::require_domain(trials >= 1, "estimate_stats: trials must be positive");
  const DepRounder rounder(inst);
  const std::size_t m = inst.edges.size();
  for (const auto& s : stable_sets) {
    if (!stable_set_check(inst, s)) throw DomainError("estimate_stats: supplied edge set is not stable");
  }

  detail::RoundingCounts init;
  init.single.assign(m, 0);
  init.pair.assign(m * m, 0);
  init.sets.assign(stable_sets.size(), 0);

  auto counts = run_chunked(trials, rng, threads, init, [&](RngState& r, std::uint64_t n, detail::RoundingCounts& c) {
    RoundingOutcome out;
    std::vector<std::size_t> sel;
    for (std::uint64_t t = 0; t < n; ++t) {
      rounder.round_into(r, out);
      sel.clear();
      for (std::size_t e = 0; e < m; ++e) {
        if (out.X[e]) sel.push_back(e);
      }
      for (std::size_t i = 0; i < sel.size(); ++i) {
        ++c.single[sel[i]];
        for (std::size_t j = i + 1; j < sel.size(); ++j) ++c.pair[sel[i] * m + sel[j]];
      }
      for (const auto& nv : rounder.by_right()) {
        int k = 0;
        for (std::size_t e : nv) k += out.X[e];
        if (k > 1) {
          ++c.violations;
          break;
        }
      }
      for (std::size_t s = 0; s < stable_sets.size(); ++s) {
        bool all = true;
        for (std::size_t e : stable_sets[s]) all = all && out.X[e];
        if (all) ++c.sets[s];
      }
    }
  });

  StatsReport rep;
  rep.trials = trials;
  rep.right_violations = counts.violations;
  const double n = static_cast<double>(trials);
  for (std::size_t e = 0; e < m; ++e) {
    StatsRow row{"marginal", {e}, counts.single[e] / n, inst.edges[e].x, 0.0, 0.0, false};
    row.sigma = binomial_sigma(row.bound, trials);
    row.half_width = 4.0 * row.sigma;
    row.pass = std::abs(row.empirical - row.bound) <= row.half_width;
    rep.rows.push_back(row);
  }
  for (std::size_t e = 0; e < m; ++e) {
    for (std::size_t f = e + 1; f < m; ++f) {
      const auto& a = inst.edges[e];
      const auto& b = inst.edges[f];
      if (a.v == b.v) continue;
      StatsRow row;
      row.edges = {e, f};
      row.empirical = counts.pair[e * m + f] / n;
      if (a.u == b.u) {
        row.kind = "same_left";
        row.bound = a.x * b.x * psi_upper_bound(PsiQuery{a.x, b.x, a.rho, b.rho}, order, order);
      } else if (stable_set_check(inst, {e, f})) {
        row.kind = "cross_left";
        row.bound = a.x * b.x;
      } else {
        continue;
      }
      row.sigma = binomial_sigma(row.empirical, trials);
      row.half_width = 4.0 * row.sigma;
      row.pass = row.empirical <= row.bound + row.half_width;
      rep.rows.push_back(row);
    }
  }
  for (std::size_t s = 0; s < stable_sets.size(); ++s) {
    StatsRow row{"stable_set", stable_sets[s], counts.sets[s] / n, 1.0, 0.0, 0.0, false};
    for (std::size_t e : stable_sets[s]) row.bound *= inst.edges[e].x;
    row.sigma = binomial_sigma(row.empirical, trials);
    row.half_width = 4.0 * row.sigma;
    row.pass = row.empirical <= row.bound + row.half_width;
    rep.rows.push_back(row);
  }
  return rep;
}

/// Baseline: every edge independently with probability x_e (no per-right-node guarantee).
inline std::vector<std::uint8_t> independent_round(const BipartiteInstance& inst, RngState& rng) {
  std::vector<std::uint8_t> X(inst.edges.size());
  for (std::size_t e = 0; e < X.size(); ++e) X[e] = rng.uniform() < inst.edges[e].x;
  return X;
}

namespace gen {

/// Random instance: each right node gets 1..max_degree distinct left
/// neighbours with x from normalized exponentials, summing to 1 for about
/// half of the right nodes and to a uniform share of 1 otherwise; rho per
/// left node is a random split of a budget in [0.5, 1].
inline BipartiteInstance random_bipartite(RngState& rng, std::size_t n_left, std::size_t n_right,
                                          std::size_t max_degree = 4) {
  BipartiteInstance inst;
  for (std::size_t u = 0; u < n_left; ++u) inst.left.push_back("u" + std::to_string(u));
  for (std::size_t v = 0; v < n_right; ++v) inst.right.push_back("v" + std::to_string(v));
  max_degree = std::max<std::size_t>(1, std::min(max_degree, n_left));
  for (std::size_t v = 0; v < n_right; ++v) {
    const std::size_t deg = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_degree));
    std::vector<std::size_t> us(n_left);
    for (std::size_t u = 0; u < n_left; ++u) us[u] = u;
    for (std::size_t k = 0; k < deg; ++k) std::swap(us[k], us[k + static_cast<std::size_t>(rng.uniform() * (n_left - k))]);
    us.resize(deg);
    std::sort(us.begin(), us.end());
    std::vector<double> e(deg);
    double tot = 0.0;
    for (auto& w : e) tot += (w = rng.exponential());
    const double share = rng.uniform() < 0.5 ? 1.0 : 0.3 + 0.7 * rng.uniform();
    for (std::size_t k = 0; k < deg; ++k) inst.edges.push_back({us[k], v, share * e[k] / tot, 0.0});
  }
  std::vector<double> w(inst.edges.size()), tot(n_left, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) tot[inst.edges[i].u] += (w[i] = rng.uniform());
  std::vector<double> budget(n_left);
  for (auto& b : budget) b = 0.5 + 0.5 * rng.uniform();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::size_t u = inst.edges[i].u;
    inst.edges[i].rho = std::min(1.0, budget[u] * w[i] / tot[u]);
  }
  return inst;
}

}  // namespace gen

}  // namespace dirmech
