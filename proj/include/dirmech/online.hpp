#pragma once

// Oblivious online rounding of a fractional matching. Offline node u keeps a
// running load r_u; an arriving edge with demand g gets
//   y = Q(r_u, g),  rho = alpha y,  x = (1 - beta) F(r_u) g + beta y,
// a stick-breaking Dirichlet coordinate on u's side, and competes on the
// arriving node with the DepRound selection rule.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dirmech/error.hpp"
#include "dirmech/randomness.hpp"
#include "dirmech/rng.hpp"
#include "dirmech/rounding.hpp"
#include "dirmech/specialfn.hpp"

namespace dirmech {

struct OnlineParams {
  double alpha = 1.2337;
  double beta = 0.7;
  double F0 = 0.68145;
  double Fslope = 0.53562;
  double c = 0.3947;

  void validate() const {
    detail::require_domain(alpha > 0.0, "OnlineParams: alpha must be positive");
    detail::require_domain(beta >= 0.0 && beta <= 1.0, "OnlineParams: beta must lie in [0, 1]");
    detail::require_domain(F0 > 0.0, "OnlineParams: F0 must be positive");
    detail::require_domain(Fslope >= 0.0 && Fslope < 1.0, "OnlineParams: Fslope must lie in [0, 1)");
  }
};

inline constexpr double kOnlineSlack = 1e-12;

/// F(t) = F0 / sqrt(1 - Fslope t).
template <class Real = double>
Real attenuation_F(const Real& t, const OnlineParams& p = {}) {
  using std::sqrt;
  detail::require_domain(t >= 0 && t <= 1, "attenuation_F: t must lie in [0, 1]");
  return Real(p.F0) / sqrt(Real(1) - Real(p.Fslope) * t);
}

namespace detail {

// Closed-form integral of F over [t0, t0 + dt], written as
// 2 F0 dt / (sqrt(1 - s t0) + sqrt(1 - s (t0 + dt))) so that small dt does
// not cancel. Needs only t0 + dt < 1/s.
template <class Real>
Real cumulative_Q_unchecked(const Real& t0, const Real& dt, const OnlineParams& p) {
  using std::sqrt;
  const Real s(p.Fslope);
  return Real(2) * Real(p.F0) * dt / (sqrt(Real(1) - s * t0) + sqrt(Real(1) - s * (t0 + dt)));
}

}  // namespace detail

/// Q(t0, dt) = int_{t0}^{t0+dt} F(t) dt.
template <class Real = double>
Real cumulative_Q(const Real& t0, const Real& dt, const OnlineParams& p = {}) {
  detail::require_domain(t0 >= 0 && dt >= 0 && t0 + dt <= 1 + kOnlineSlack, "cumulative_Q: need 0 <= t0 <= t0 + dt <= 1");
  return detail::cumulative_Q_unchecked<Real>(t0, dt, p);
}

struct EdgeParams {
  double y = 0.0;
  double rho = 0.0;
  double x = 0.0;
};

inline EdgeParams edge_params(double r, double g, const OnlineParams& p = {}) {
  detail::require_domain(r >= 0.0 && g >= 0.0, "edge_params: r and g must be non-negative");
  detail::require_domain(r + g <= 1.0 + kOnlineSlack, "edge_params: r + g exceeds 1");
  const double rc = std::min(r, 1.0);
  const double gc = std::min(g, 1.0 - rc);
  EdgeParams e;
  e.y = cumulative_Q(rc, gc, p);
  e.rho = p.alpha * e.y;
  e.x = (1.0 - p.beta) * attenuation_F(rc, p) * gc + p.beta * e.y;
  return e;
}

/// F(r) (1 - c Q(0, r)).
inline double ratio_profile(double r, const OnlineParams& p = {}) {
  return attenuation_F(r, p) * (1.0 - p.c * cumulative_Q(0.0, r, p));
}

/// Solution of the attenuation ODE with Q(0) = 0 for parameter alpha:
///   Q(t) = (1 - sqrt(1 - t (2 c sqrt(c^2 + 1) - 2 c^2))) / c,  c = 1 / binom(2 alpha, alpha).
inline double derive_Q(double alpha, double t) {
  detail::require_domain(alpha > 0.0, "derive_Q: alpha must be positive");
  detail::require_domain(t >= 0.0 && t <= 1.0, "derive_Q: t must lie in [0, 1]");
  const double c = 1.0 / gen_binomial(2.0 * alpha, alpha);
  const double k = 2.0 * c * std::sqrt(c * c + 1.0) - 2.0 * c * c;
  // 1 - sqrt(1 - kt) = kt / (1 + sqrt(1 - kt))
  return k * t / (1.0 + std::sqrt(1.0 - k * t)) / c;
}

struct Arrival {
  std::string v;
  std::vector<std::pair<std::size_t, double>> demands;  // (offline index, g)
};

struct MatchingStream {
  std::vector<std::string> offline;
  std::vector<Arrival> arrivals;
};

inline std::vector<std::string> validate_stream(const MatchingStream& s) {
  std::vector<std::string> out;
  std::vector<double> load(s.offline.size(), 0.0);
  for (std::size_t a = 0; a < s.arrivals.size(); ++a) {
    const auto& arr = s.arrivals[a];
    const std::string tag = "arrival " + std::to_string(a) + " (" + arr.v + ")";
    double sum = 0.0;
    std::set<std::size_t> seen;
    for (const auto& [u, g] : arr.demands) {
      if (u >= s.offline.size()) {
        out.push_back(tag + " references an undeclared offline node");
        continue;
      }
      if (!seen.insert(u).second) out.push_back(tag + " repeats offline node " + s.offline[u]);
      if (!(g >= 0.0 && g <= 1.0)) out.push_back(tag + " has a demand outside [0, 1]");
      sum += g;
      load[u] += g;
    }
    if (sum > 1.0 + kOnlineSlack) out.push_back(tag + " has total demand " + std::to_string(sum) + " > 1");
  }
  for (std::size_t u = 0; u < load.size(); ++u) {
    if (load[u] > 1.0 + kOnlineSlack) {
      out.push_back("offline node " + s.offline[u] + " has total demand " + std::to_string(load[u]) + " > 1");
    }
  }
  return out;
}

struct OdrsTraceRow {
  std::size_t arrival = 0;
  std::size_t u = 0;
  double g = 0.0;
  double r = 0.0;
  EdgeParams params;
  double T = 0.0;
  double A = 0.0;
  double Z = 0.0;
  bool selected = false;
  bool committed = false;
};

struct OdrsResult {
  std::vector<std::optional<std::size_t>> match_of_offline;  // arrival index
  std::vector<OdrsTraceRow> trace;                           // one row per edge, in arrival order
};

/// The stream with its per-edge (y, rho, x) fixed in advance; since the
/// algorithm is oblivious these depend only on the demands, not on coins.
///
/// Randomness layout per run: key = rng(); offline node u stick-breaks from
/// RngState(key, u); arrival a's auxiliary clock is RngState(key, |U| + a).
class OdrsRunner {
 public:
  OdrsRunner(MatchingStream stream, OnlineParams params = {}) : stream_(std::move(stream)), params_(params) {
    params_.validate();
    auto violations = validate_stream(stream_);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    std::vector<double> load(stream_.offline.size(), 0.0);
    for (std::size_t a = 0; a < stream_.arrivals.size(); ++a) {
      std::vector<std::size_t> ids;
      double xsum = 0.0;
      for (const auto& [u, g] : stream_.arrivals[a].demands) {
        Edge e;
        e.arrival = a;
        e.u = u;
        e.g = g;
        e.r = load[u];
        e.params = edge_params(e.r, g, params_);
        if (e.params.rho > 0.0 && e.params.rho < 1.0) e.cdf.emplace(e.params.rho, 1.0 - e.params.rho);
        load[u] += g;
        xsum += e.params.x;
        ids.push_back(edges_.size());
        edges_.push_back(std::move(e));
      }
      by_arrival_.push_back(std::move(ids));
      xsum_.push_back(xsum);
    }
    x_.resize(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) x_[e] = edges_[e].params.x;
  }

  const MatchingStream& stream() const noexcept { return stream_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const EdgeParams& edge(std::size_t e) const { return edges_.at(e).params; }
  std::size_t edge_offline(std::size_t e) const { return edges_.at(e).u; }
  std::size_t edge_arrival(std::size_t e) const { return edges_.at(e).arrival; }
  double edge_g(std::size_t e) const { return edges_.at(e).g; }
  double edge_r(std::size_t e) const { return edges_.at(e).r; }

  /// The offline instance (left = offline nodes, right = arrivals) whose
  /// DepRound law the online run reproduces.
  BipartiteInstance induced_instance() const {
    BipartiteInstance inst;
    inst.left = stream_.offline;
    for (const auto& a : stream_.arrivals) inst.right.push_back(a.v);
    for (const auto& e : edges_) inst.edges.push_back({e.u, e.arrival, e.params.x, e.params.rho});
    return inst;
  }

  /// One run. selected[e] and committed[e] are indexed like the induced
  /// instance's edges.
  OdrsResult run(RngState& rng, std::vector<std::uint8_t>* selected = nullptr,
                 std::vector<std::uint8_t>* committed = nullptr, bool trace = false) const {
    const std::size_t n_off = stream_.offline.size();
    const std::uint64_t key = rng();
    std::vector<StickBreaker> sticks(n_off);
    std::vector<RngState> node_rng;
    node_rng.reserve(n_off);
    for (std::size_t u = 0; u < n_off; ++u) node_rng.emplace_back(key, u);

    OdrsResult res;
    res.match_of_offline.assign(n_off, std::nullopt);
    std::vector<double> z(edges_.size(), std::numeric_limits<double>::infinity());
    if (selected) selected->assign(edges_.size(), 0);
    if (committed) committed->assign(edges_.size(), 0);

    for (std::size_t a = 0; a < by_arrival_.size(); ++a) {
      std::vector<double> av(by_arrival_[a].size());
      std::vector<double> tv(by_arrival_[a].size());
      for (std::size_t i = 0; i < by_arrival_[a].size(); ++i) {
        const std::size_t e = by_arrival_[a][i];
        const Edge& ed = edges_[e];
        RngState& r = node_rng[ed.u];
        const auto piece = sticks[ed.u].next(ed.params.rho, r);
        double log_a;
        if (ed.cdf) {
          log_a = ed.cdf->log_cdf(piece.log_t, piece.log_1mt);
        } else {
          log_a = std::log(r.uniform_open());
        }
        tv[i] = piece.t;
        av[i] = std::exp(log_a);
        z[e] = ed.params.x > 0.0 ? (0.0 - log_a) / ed.params.x : std::numeric_limits<double>::infinity();
      }
      RngState phantom(key, n_off + a);
      const std::size_t sel = detail::select_at_right(by_arrival_[a], x_, z, xsum_[a], phantom);
      bool commit = false;
      if (sel != kNone) {
        const std::size_t u = edges_[sel].u;
        if (!res.match_of_offline[u]) {
          res.match_of_offline[u] = a;
          commit = true;
        }
        if (selected) (*selected)[sel] = 1;
        if (committed && commit) (*committed)[sel] = 1;
      }
      if (trace) {
        for (std::size_t i = 0; i < by_arrival_[a].size(); ++i) {
          const std::size_t e = by_arrival_[a][i];
          const Edge& ed = edges_[e];
          res.trace.push_back({a, ed.u, ed.g, ed.r, ed.params, tv[i], av[i], z[e], e == sel, e == sel && commit});
        }
      }
    }
    return res;
  }

 private:
  struct Edge {
    std::size_t arrival = 0;
    std::size_t u = 0;
    double g = 0.0;
    double r = 0.0;
    EdgeParams params;
    std::optional<RegularizedBeta> cdf;
  };

  MatchingStream stream_;
  OnlineParams params_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> by_arrival_;
  std::vector<double> xsum_;
  std::vector<double> x_;
};

inline OdrsResult run_odrs(const MatchingStream& stream, const OnlineParams& params, RngState& rng) {
  return OdrsRunner(stream, params).run(rng, nullptr, nullptr, true);
}

/// Per-edge Monte Carlo summary of repeated runs.
struct OdrsEdgeRow {
  std::size_t edge = 0;
  double g = 0.0;
  double x = 0.0;
  double selected = 0.0;   // empirical Pr(e selected at its arrival)
  double committed = 0.0;  // empirical Pr(e in M)
  double bound = 0.0;      // ratio * g
  double sigma = 0.0;
  bool pass = false;
};

struct OdrsBattery {
  std::uint64_t trials = 0;
  double ratio = 0.0;
  std::uint64_t matching_violations = 0;  // runs whose M is not a matching
  std::vector<OdrsEdgeRow> rows;

  bool all_pass() const {
    return matching_violations == 0 && std::all_of(rows.begin(), rows.end(), [](const OdrsEdgeRow& r) { return r.pass; });
  }
};

namespace detail {

struct OdrsCounts {
  std::vector<std::uint64_t> selected, committed;
  std::uint64_t violations = 0;

  void merge(const OdrsCounts& o) {
    for (std::size_t i = 0; i < selected.size(); ++i) selected[i] += o.selected[i];
    for (std::size_t i = 0; i < committed.size(); ++i) committed[i] += o.committed[i];
    violations += o.violations;
  }
};

}  // namespace detail

/// Repeats the online run and checks Pr(e in M) >= ratio g_e - 4 sigma per
/// edge, sigma the binomial standard error at the null value ratio g_e (the
/// empirical one is 0 for tiny g that never commits), and that every M is a
/// matching.
inline OdrsBattery odrs_battery(const OdrsRunner& runner, std::uint64_t trials, const RngState& rng,
                                unsigned threads = 1, double ratio = 0.68) {
  detail::require_domain(trials >= 1, "odrs_battery: trials must be positive");
  const std::size_t m = runner.edge_count();
  const std::size_t n_arr = runner.stream().arrivals.size();
  detail::OdrsCounts init;
  init.selected.assign(m, 0);
  init.committed.assign(m, 0);
  auto counts = run_chunked(trials, rng, threads, init, [&](RngState& r, std::uint64_t n, detail::OdrsCounts& c) {
    std::vector<std::uint8_t> sel, com;
    std::vector<int> per_off, per_arr;
    for (std::uint64_t t = 0; t < n; ++t) {
      runner.run(r, &sel, &com);
      per_off.assign(runner.stream().offline.size(), 0);
      per_arr.assign(n_arr, 0);
      bool bad = false;
      for (std::size_t e = 0; e < m; ++e) {
        c.selected[e] += sel[e];
        c.committed[e] += com[e];
        if (com[e]) {
          bad |= ++per_off[runner.edge_offline(e)] > 1;
          bad |= ++per_arr[runner.edge_arrival(e)] > 1;
        }
      }
      c.violations += bad;
    }
  });
  OdrsBattery out;
  out.trials = trials;
  out.ratio = ratio;
  out.matching_violations = counts.violations;
  const double n = static_cast<double>(trials);
  for (std::size_t e = 0; e < m; ++e) {
    OdrsEdgeRow row;
    row.edge = e;
    row.g = runner.edge_g(e);
    row.x = runner.edge(e).x;
    row.selected = counts.selected[e] / n;
    row.committed = counts.committed[e] / n;
    row.bound = ratio * row.g;
    row.sigma = std::sqrt(row.bound * (1.0 - row.bound) / n);
    row.pass = row.committed >= row.bound - 4.0 * row.sigma;
    out.rows.push_back(row);
  }
  return out;
}

/// Stream generators.
namespace gen {

/// Random sparse fractional matching: each arrival picks up to max_degree
/// distinct offline nodes and splits a random share of the remaining capacity.
inline MatchingStream random_stream(RngState& rng, std::size_t n_offline, std::size_t n_arrivals,
                                    std::size_t max_degree = 3) {
  MatchingStream s;
  for (std::size_t u = 0; u < n_offline; ++u) s.offline.push_back("u" + std::to_string(u));
  std::vector<double> cap(n_offline, 1.0);
  for (std::size_t a = 0; a < n_arrivals; ++a) {
    Arrival arr{"v" + std::to_string(a), {}};
    const std::size_t deg = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_degree));
    std::set<std::size_t> chosen;
    for (std::size_t k = 0; k < deg; ++k) chosen.insert(static_cast<std::size_t>(rng.uniform() * n_offline));
    double vcap = 1.0;
    for (std::size_t u : chosen) {
      const double g = rng.uniform() * std::min(cap[u], vcap);
      if (g <= 0.0) continue;
      cap[u] -= g;
      vcap -= g;
      arr.demands.push_back({u, g});
    }
    s.arrivals.push_back(std::move(arr));
  }
  return s;
}

/// One offline node receiving `n_arrivals` equal demands summing to 1, each
/// arrival also offering a private alternative with the remaining demand.
inline MatchingStream overloaded_node(std::size_t n_arrivals) {
  MatchingStream s;
  s.offline.push_back("hub");
  const double g = 1.0 / static_cast<double>(n_arrivals);
  for (std::size_t a = 0; a < n_arrivals; ++a) {
    s.offline.push_back("p" + std::to_string(a));
    s.arrivals.push_back({"v" + std::to_string(a), {{0, g}, {a + 1, 1.0 - g}}});
  }
  return s;
}

/// Demand g on one offline node split into m equal slivers.
inline MatchingStream infinitesimal_stream(double g, std::size_t m) {
  MatchingStream s;
  s.offline.push_back("u0");
  for (std::size_t a = 0; a < m; ++a) s.arrivals.push_back({"v" + std::to_string(a), {{0, g / static_cast<double>(m)}}});
  return s;
}

}  // namespace gen

}  // namespace dirmech
