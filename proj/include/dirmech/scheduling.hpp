#pragma once

// Weighted completion time on unrelated machines: randomly shifted
// processing-time classes, Smith-ordered clusters with correlation budgets
// rho, and DepRound from clusters (left) to jobs (right).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "dirmech/error.hpp"
#include "dirmech/parallel.hpp"
#include "dirmech/psi.hpp"
#include "dirmech/rng.hpp"
#include "dirmech/rounding.hpp"
#include "dirmech/specialfn.hpp"
#include "dirmech/stats.hpp"

namespace dirmech {

struct SchedulingInstance {
  std::size_t machines = 0;
  std::size_t jobs = 0;
  std::vector<std::vector<double>> p;  // [machine][job]
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> x;
};

struct SchedulingParams {
  double pi = 4.5;
  double theta = 0.56;
  double tau = 0.608;

  void validate() const {
    detail::require_domain(pi > 1.0, "SchedulingParams: pi must exceed 1");
    detail::require_domain(theta > 0.0 && theta < tau && tau < 1.0, "SchedulingParams: need 0 < theta < tau < 1");
  }
};

inline constexpr double kAssignmentSlack = 1e-9;

inline std::vector<std::string> validate_scheduling(const SchedulingInstance& inst) {
  std::vector<std::string> out;
  const auto shape_ok = [&](const std::vector<std::vector<double>>& m, const char* name) {
    if (m.size() != inst.machines) {
      out.push_back(std::string(name) + " must have one row per machine");
      return false;
    }
    for (const auto& row : m) {
      if (row.size() != inst.jobs) {
        out.push_back(std::string(name) + " must have one column per job");
        return false;
      }
    }
    return true;
  };
  if (!(shape_ok(inst.p, "p") & shape_ok(inst.w, "w") & shape_ok(inst.x, "x"))) return out;
  for (std::size_t j = 0; j < inst.jobs; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < inst.machines; ++i) {
      const std::string at = "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
      if (!(inst.p[i][j] > 0.0) || !std::isfinite(inst.p[i][j])) out.push_back("p" + at + " must be positive");
      if (!(inst.w[i][j] >= 0.0) || !std::isfinite(inst.w[i][j])) out.push_back("w" + at + " must be non-negative");
      if (!(inst.x[i][j] >= 0.0 && inst.x[i][j] <= 1.0)) out.push_back("x" + at + " must lie in [0, 1]");
      s += inst.x[i][j];
    }
    if (std::abs(s - 1.0) > kAssignmentSlack) {
      out.push_back("job " + std::to_string(j) + " has total assignment " + std::to_string(s) + " != 1");
    }
  }
  return out;
}

/// Smith order on machine i: decreasing w/p, ties by job index.
inline std::vector<std::size_t> smith_order(const SchedulingInstance& inst, std::size_t i,
                                            const std::vector<std::size_t>& subset) {
  std::vector<std::size_t> out = subset;
  std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    // w_a/p_a > w_b/p_b without division
    const double lhs = inst.w[i][a] * inst.p[i][b];
    const double rhs = inst.w[i][b] * inst.p[i][a];
    if (lhs != rhs) return lhs > rhs;
    return a < b;
  });
  return out;
}

inline std::vector<std::size_t> smith_order(const SchedulingInstance& inst, std::size_t i) {
  std::vector<std::size_t> all(inst.jobs);
  for (std::size_t j = 0; j < inst.jobs; ++j) all[j] = j;
  return smith_order(inst, i, all);
}

enum class ClusterKind { Truncated, ThetaClosed, Leftover };

struct Cluster {
  std::size_t machine = 0;
  long long k = 0;         // processing-time class
  std::size_t ell = 0;     // index within the class, from 1
  std::vector<std::size_t> jobs;  // Smith order
  std::vector<double> rho;        // parallel to jobs
  std::size_t truncated = kNone;  // job id of the truncated job, if any
  ClusterKind kind = ClusterKind::Leftover;
  double mass = 0.0;  // x(C)
};

struct ClusterLayout {
  double offset = 0.0;
  std::vector<Cluster> clusters;
  std::vector<std::vector<std::size_t>> cluster_of;  // [machine][job] -> cluster index or kNone
  std::vector<std::vector<long long>> class_of;      // [machine][job]
  std::vector<std::vector<double>> H;                // p / P_k in [1, pi)

  /// The DepRound graph: one left node per cluster, one right node per job,
  /// with x normalized per job so that x(N(j)) = 1 to rounding.
  BipartiteInstance to_instance(const SchedulingInstance& inst) const {
    BipartiteInstance g;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const auto& cl = clusters[c];
      g.left.push_back("m" + std::to_string(cl.machine) + ":k" + std::to_string(cl.k) + ":l" + std::to_string(cl.ell));
    }
    std::vector<double> total(inst.jobs, 0.0);
    for (std::size_t i = 0; i < inst.machines; ++i) {
      for (std::size_t j = 0; j < inst.jobs; ++j) total[j] += inst.x[i][j];
    }
    for (std::size_t j = 0; j < inst.jobs; ++j) g.right.push_back("j" + std::to_string(j));
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const auto& cl = clusters[c];
      for (std::size_t t = 0; t < cl.jobs.size(); ++t) {
        const std::size_t j = cl.jobs[t];
        g.edges.push_back({c, j, inst.x[cl.machine][j] / total[j], std::min(1.0, cl.rho[t])});
      }
    }
    return g;
  }
};

/// Clustering for a given class offset in [0, 1).
inline ClusterLayout cluster_jobs(const SchedulingInstance& inst, const SchedulingParams& params, double offset) {
  params.validate();
  auto violations = validate_scheduling(inst);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  detail::require_domain(offset >= 0.0 && offset < 1.0, "cluster_jobs: offset must lie in [0, 1)");

  ClusterLayout lay;
  lay.offset = offset;
  lay.cluster_of.assign(inst.machines, std::vector<std::size_t>(inst.jobs, kNone));
  lay.class_of.assign(inst.machines, std::vector<long long>(inst.jobs, 0));
  lay.H.assign(inst.machines, std::vector<double>(inst.jobs, 0.0));
  const double log_pi = std::log(params.pi);

  for (std::size_t i = 0; i < inst.machines; ++i) {
    std::map<long long, std::vector<std::size_t>> classes;
    for (std::size_t j = 0; j < inst.jobs; ++j) {
      const long long k = static_cast<long long>(std::floor(offset + std::log(inst.p[i][j]) / log_pi));
      lay.class_of[i][j] = k;
      lay.H[i][j] = inst.p[i][j] / std::pow(params.pi, static_cast<double>(k) - offset);
      if (inst.x[i][j] > 0.0) classes[k].push_back(j);
    }
    for (auto& [k, members] : classes) {
      const std::vector<std::size_t> order = smith_order(inst, i, members);
      Cluster cur;
      cur.machine = i;
      cur.k = k;
      cur.ell = 1;
      auto close = [&](ClusterKind kind) {
        cur.kind = kind;
        for (std::size_t j : cur.jobs) lay.cluster_of[i][j] = lay.clusters.size();
        const std::size_t next_ell = cur.ell + 1;
        lay.clusters.push_back(std::move(cur));
        cur = Cluster{};
        cur.machine = i;
        cur.k = k;
        cur.ell = next_ell;
      };
      // The trailing zero-mass dummy job can never trigger a close, so it is
      // left implicit; whatever remains open afterwards is the leftover.
      for (std::size_t j : order) {
        const double xj = inst.x[i][j];
        cur.jobs.push_back(j);
        cur.rho.push_back(0.0);
        cur.mass += xj;
        if (cur.mass > params.tau) {
          const double untruncated = cur.mass - xj;
          for (std::size_t t = 0; t + 1 < cur.jobs.size(); ++t) cur.rho[t] = inst.x[i][cur.jobs[t]] / params.tau;
          cur.rho.back() = 1.0 - untruncated / params.tau;
          cur.truncated = j;
          close(ClusterKind::Truncated);
        } else if (cur.mass >= params.theta) {
          for (std::size_t t = 0; t < cur.jobs.size(); ++t) cur.rho[t] = inst.x[i][cur.jobs[t]] / cur.mass;
          close(ClusterKind::ThetaClosed);
        }
      }
      if (!cur.jobs.empty()) {
        for (std::size_t t = 0; t < cur.jobs.size(); ++t) cur.rho[t] = inst.x[i][cur.jobs[t]] / cur.mass;
        close(ClusterKind::Leftover);
      }
    }
  }
  return lay;
}

struct ScheduleResult {
  double offset = 0.0;
  ClusterLayout layout;
  std::vector<std::size_t> machine_of_job;
  std::vector<std::vector<std::size_t>> order;  // per machine, Smith order of its assigned jobs
  double objective = 0.0;
};

/// sum_i sum_{j on i} w_ij C_j with C_j the completion time under Smith order.
inline double schedule_objective(const SchedulingInstance& inst, const std::vector<std::size_t>& machine_of_job,
                                 std::vector<std::vector<std::size_t>>* order_out = nullptr) {
  std::vector<std::vector<std::size_t>> on(inst.machines);
  for (std::size_t j = 0; j < machine_of_job.size(); ++j) {
    if (machine_of_job[j] < inst.machines) on[machine_of_job[j]].push_back(j);
  }
  double obj = 0.0;
  for (std::size_t i = 0; i < inst.machines; ++i) {
    on[i] = smith_order(inst, i, on[i]);
    double t = 0.0;
    for (std::size_t j : on[i]) {
      t += inst.p[i][j];
      obj += inst.w[i][j] * t;
    }
  }
  if (order_out) *order_out = std::move(on);
  return obj;
}

/// Rounding on a fixed layout; prepared once, sampled many times.
class LayoutRounder {
 public:
  LayoutRounder(const SchedulingInstance& inst, const ClusterLayout& layout)
      : rounder_(layout.to_instance(inst)), machine_of_cluster_(layout.clusters.size()) {
    for (std::size_t c = 0; c < layout.clusters.size(); ++c) machine_of_cluster_[c] = layout.clusters[c].machine;
  }

  /// machine per job; kNone would mean the job went unassigned.
  void assign(RngState& rng, std::vector<std::size_t>& machine_of_job) const {
    rounder_.round_into(rng, scratch_);
    const auto& inst = rounder_.instance();
    machine_of_job.assign(inst.right.size(), kNone);
    for (std::size_t e = 0; e < inst.edges.size(); ++e) {
      if (!scratch_.X[e]) continue;
      const std::size_t j = inst.edges[e].v;
      // Two selections for one job would break the right-node invariant; flag it.
      machine_of_job[j] = machine_of_job[j] == kNone ? machine_of_cluster_[inst.edges[e].u] : kNone - 1;
    }
  }

  const DepRounder& rounder() const noexcept { return rounder_; }

 private:
  DepRounder rounder_;
  std::vector<std::size_t> machine_of_cluster_;
  mutable RoundingOutcome scratch_;
};

/// Full pipeline: offset ~ U[0, 1), clustering, DepRound, Smith order.
inline ScheduleResult schedule(const SchedulingInstance& inst, const SchedulingParams& params, RngState& rng) {
  ScheduleResult res;
  res.offset = rng.uniform();
  res.layout = cluster_jobs(inst, params, res.offset);
  const LayoutRounder lr(inst, res.layout);
  lr.assign(rng, res.machine_of_job);
  res.objective = schedule_objective(inst, res.machine_of_job, &res.order);
  return res;
}

/// Target quantities for machine i* and job j* on i*'s Smith order.
/// LB takes x_{jj} = x_j and x_{jj'} = x_j x_j' (no relaxation available), so
///   LB = Q + (L^2 - sum x_j^2 p_j^2) / 2.
struct ZLbTarget {
  std::size_t machine = 0;
  std::size_t job = 0;
  double Q = 0.0;
  double L = 0.0;
  double LB = 0.0;
  MonteCarloEstimate EZ;
  double baseline() const { return std::max(Q, 0.5 * (Q + L * L)); }
  double ratio() const { return baseline() > 0.0 ? EZ.estimate / baseline() : 0.0; }
  bool within_ceiling(double eta, double sigmas = 4.0) const {
    return EZ.estimate <= eta * baseline() + sigmas * EZ.std_error;
  }
};

namespace detail {

struct ZAccumulator {
  std::vector<MeanAccumulator> acc;
  std::uint64_t unassigned = 0;  // trials in which some job was not assigned exactly once

  void merge(const ZAccumulator& o) {
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k].merge(o.acc[k]);
    unassigned += o.unassigned;
  }
};

}  // namespace detail

struct ZLbReport {
  std::vector<ZLbTarget> targets;
  std::uint64_t trials = 0;
  std::uint64_t assignment_failures = 0;
};

/// Monte Carlo E[Z^{(i*,j*)}] over the full pipeline (fresh offset per trial)
/// for every machine/job pair, next to Q, L and LB.
inline ZLbReport z_and_lb(const SchedulingInstance& inst, const SchedulingParams& params, std::uint64_t trials,
                          const RngState& rng, unsigned threads = 1) {
  params.validate();
  auto violations = validate_scheduling(inst);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  const std::size_t m = inst.machines, n = inst.jobs;
  std::vector<std::vector<std::size_t>> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = smith_order(inst, i);

  detail::ZAccumulator init;
  init.acc.resize(m * n);
  auto acc = run_chunked(trials, rng, threads, init, [&](RngState& r, std::uint64_t cnt, detail::ZAccumulator& a) {
    std::vector<std::size_t> mach;
    for (std::uint64_t t = 0; t < cnt; ++t) {
      const double offset = r.uniform();
      const ClusterLayout lay = cluster_jobs(inst, params, offset);
      const LayoutRounder lr(inst, lay);
      lr.assign(r, mach);
      if (std::any_of(mach.begin(), mach.end(), [&](std::size_t v) { return v >= m; })) ++a.unassigned;
      for (std::size_t i = 0; i < m; ++i) {
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t j : order[i]) {
          if (mach[j] == i) {
            s1 += inst.p[i][j] * inst.p[i][j];
            s2 += inst.p[i][j];
          }
          a.acc[i * n + j].add(0.5 * (s1 + s2 * s2));
        }
      }
    }
  });

  ZLbReport rep;
  rep.trials = trials;
  rep.assignment_failures = acc.unassigned;
  for (std::size_t i = 0; i < m; ++i) {
    double Q = 0.0, L = 0.0, D = 0.0;
    for (std::size_t j : order[i]) {
      const double xp = inst.x[i][j] * inst.p[i][j];
      Q += xp * inst.p[i][j];
      L += xp;
      D += xp * xp;
      ZLbTarget t;
      t.machine = i;
      t.job = j;
      t.Q = Q;
      t.L = L;
      t.LB = Q + 0.5 * (L * L - D);
      t.EZ = MonteCarloEstimate::from(acc.acc[i * n + j]);
      rep.targets.push_back(t);
    }
  }
  std::sort(rep.targets.begin(), rep.targets.end(),
            [](const ZLbTarget& a, const ZLbTarget& b) { return a.machine != b.machine ? a.machine < b.machine : a.job < b.job; });
  return rep;
}

/// Lower bound on a cluster's bonus term:
///   a s^2 / 2                                               (no truncated job)
///   a s^2 / 2 + d^2 / 2 + (s/2) inf_{x in (0, r]} [x (1-a) + 2 d (1 - Psi(x, y; x/tau, 1 - r/tau))]
/// with a = 1 - 1/binom(2/lambda, 1/lambda) and Psi replaced by its
/// third-order upper bound. The infimum is a grid scan refined by golden
/// section, so the value is numerical evidence rather than a proof.
inline double bonus_bound(double lambda, double r, double s, double y, double d, const SchedulingParams& params = {},
                          int order = 3) {
  detail::require_domain(lambda > 0.0 && lambda <= params.tau + 1e-15, "bonus_bound: lambda must lie in (0, tau]");
  detail::require_domain(s >= r && r >= 0.0, "bonus_bound: need s >= r >= 0");
  detail::require_domain(d >= y && y >= 0.0, "bonus_bound: need d >= y >= 0");
  const double a = 1.0 - 1.0 / gen_binomial(2.0 / lambda, 1.0 / lambda);
  double b = a * s * s / 2.0;
  if (y == 0.0 && d == 0.0) return b;
  b += d * d / 2.0;
  if (r <= 0.0) return b;
  detail::require_domain(r <= params.tau && y <= 1.0, "bonus_bound: need r <= tau and y <= 1");
  const double rho2 = std::max(0.0, 1.0 - r / params.tau);
  auto h = [&](double x) {
    const double psi = psi_upper_bound(PsiQuery{x, y, x / params.tau, rho2}, order, order);
    return x * (1.0 - a) + 2.0 * d * (1.0 - psi);
  };
  constexpr int kGrid = 200;
  double best_x = r, best = h(r);
  for (int k = 1; k < kGrid; ++k) {
    const double x = r * k / kGrid;
    const double v = h(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  double lo = std::max(r * 1e-9, best_x - r / kGrid), hi = std::min(r, best_x + r / kGrid);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = h(x1), f2 = h(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = h(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = h(x2);
    }
  }
  best = std::min({best, f1, f2});
  return b + s / 2.0 * best;
}

struct AnalysisConstants {
  double c1 = 0.684;
  double kappa = 0.778;
  double c2 = 0.374713;
  double c3 = 0.814462;
  double beta_E = 1.93;
  double gamma = 0.00594;
  double c5 = 0.0048324;
  double c6 = 0.069555;
  double target_ratio = 1.387;
};

struct AnalysisReport {
  AnalysisConstants constants;
  double c1_witness = 0.0;  // (1 - 1/binom(2/theta, 1/theta)) theta 2 kappa
  double c2_witness = 0.0;  // (1 - 1/binom(2/tau, 1/tau)) / 2
  double c3_formula = 0.0;  // 1 - c1 (kappa - 2 pi + 2 pi^2 - kappa pi^2) / (2 pi^2 ln pi)
  double gamma_c3 = 0.0;
  double c6_squared = 0.0;
  double ratio_max = 0.0;
  double ratio_argmax_q = 0.0;
  double ratio_argmax_L = 0.0;
  std::size_t grid_points = 0;

  bool c3_ok() const { return std::abs(c3_formula - constants.c3) <= 5e-7; }
  bool c1_ok() const { return c1_witness >= constants.c1; }
  bool c2_ok() const { return c2_witness >= constants.c2; }
  bool c6_bound_ok() const { return std::max(gamma_c3, constants.c5) <= c6_squared; }
  bool ratio_ok(double limit = 1.38695 + 1e-4) const { return ratio_max <= limit; }
};

/// The final ratio bound as a function of q and L:
///   (beta c3 + 1)(c3 q + L^2/2) / (beta c3 q + max{0, L - c6 sqrt q}^2).
inline double final_ratio(double q, double L, const AnalysisConstants& k = {}) {
  const double gap = std::max(0.0, L - k.c6 * std::sqrt(q));
  return (k.beta_E * k.c3 + 1.0) * (k.c3 * q + L * L / 2.0) / (k.beta_E * k.c3 * q + gap * gap);
}

/// Recomputes the derived constants and scans the final ratio over
/// q in [0, q_max], L in [0, L_max] with the given step ((0, 0) excluded).
inline AnalysisReport analysis_constants(const SchedulingParams& params = {}, const AnalysisConstants& k = {},
                                         double step = 1e-3, double q_max = 4.0, double L_max = 2.0) {
  params.validate();
  AnalysisReport rep;
  rep.constants = k;
  const double th = params.theta, tau = params.tau, pi = params.pi;
  rep.c1_witness = (1.0 - 1.0 / gen_binomial(2.0 / th, 1.0 / th)) * th * 2.0 * k.kappa;
  rep.c2_witness = (1.0 - 1.0 / gen_binomial(2.0 / tau, 1.0 / tau)) / 2.0;
  rep.c3_formula =
      1.0 - k.c1 * (k.kappa - 2.0 * pi + 2.0 * pi * pi - k.kappa * pi * pi) / (2.0 * pi * pi * std::log(pi));
  rep.gamma_c3 = k.gamma * k.c3;
  rep.c6_squared = k.c6 * k.c6;

  const auto nq = static_cast<std::size_t>(std::llround(q_max / step));
  const auto nl = static_cast<std::size_t>(std::llround(L_max / step));
  for (std::size_t a = 0; a <= nq; ++a) {
    const double q = a * step;
    for (std::size_t b = 0; b <= nl; ++b) {
      if (a == 0 && b == 0) continue;
      const double L = b * step;
      const double v = final_ratio(q, L, k);
      ++rep.grid_points;
      if (v > rep.ratio_max) {
        rep.ratio_max = v;
        rep.ratio_argmax_q = q;
        rep.ratio_argmax_L = L;
      }
    }
  }
  return rep;
}

/// Random instance generator: p log-uniform in [1, 100], w uniform in [0, 1],
/// x a random point of the simplex per job with some entries zeroed.
namespace gen {

inline SchedulingInstance random_scheduling(RngState& rng, std::size_t machines, std::size_t jobs) {
  SchedulingInstance s;
  s.machines = machines;
  s.jobs = jobs;
  s.p.assign(machines, std::vector<double>(jobs));
  s.w.assign(machines, std::vector<double>(jobs));
  s.x.assign(machines, std::vector<double>(jobs, 0.0));
  for (std::size_t i = 0; i < machines; ++i) {
    for (std::size_t j = 0; j < jobs; ++j) {
      s.p[i][j] = std::exp(rng.uniform() * std::log(100.0));
      s.w[i][j] = rng.uniform();
    }
  }
  for (std::size_t j = 0; j < jobs; ++j) {
    double tot = 0.0;
    std::vector<double> e(machines);
    for (std::size_t i = 0; i < machines; ++i) {
      e[i] = rng.uniform() < 0.25 && i > 0 ? 0.0 : rng.exponential();
      tot += e[i];
    }
    for (std::size_t i = 0; i < machines; ++i) s.x[i][j] = e[i] / tot;
  }
  return s;
}

}  // namespace gen

}  // namespace dirmech
