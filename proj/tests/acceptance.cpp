// Acceptance battery. `dirmech_acceptance N` runs criterion N and prints one
// line "AC N: PASS|FAIL ..."; the exit status is nonzero on FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <thread>

#include "dirmech/dirmech.hpp"

using namespace dirmech;

namespace {

constexpr std::uint64_t kSeed = 20240611;
constexpr std::uint64_t kTrials = 1000000;

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
};

// Shared by criteria 1, 2 and 12.
std::vector<BipartiteInstance> rounding_instances() {
  RngState g(kSeed, 1);
  std::vector<BipartiteInstance> out;
  for (int k = 0; k < 10; ++k) {
    const std::size_t nl = 2 + static_cast<std::size_t>(g.uniform() * 7);
    const std::size_t nr = 2 + static_cast<std::size_t>(g.uniform() * 7);
    out.push_back(gen::random_bipartite(g, nl, nr, 4));
  }
  return out;
}

void rounding_battery(Verdict& v, bool marginals) {
  std::size_t rows = 0, failed = 0;
  double worst = 0.0;  // largest deviation in sigmas
  const auto insts = rounding_instances();
  for (std::size_t k = 0; k < insts.size(); ++k) {
    const auto rep = estimate_stats(insts[k], kTrials, RngState(kSeed, 100 + k), {}, threads());
    for (const auto& row : rep.rows) {
      if ((row.kind == "marginal") != marginals || (!marginals && row.kind != "same_left")) continue;
      ++rows;
      if (!row.pass) ++failed;
      if (row.sigma > 0.0) {
        const double z = marginals ? std::abs(row.empirical - row.bound) / row.sigma : (row.empirical - row.bound) / row.sigma;
        worst = std::max(worst, z);
      }
    }
  }
  v.pass = failed == 0 && rows > 0;
  v.detail << rows << (marginals ? " marginal" : " same-left") << " rows over 10 instances x 1e6 trials, " << failed
           << " outside 4 sigma, worst " << worst << " sigma";
}

void ac1(Verdict& v) { rounding_battery(v, true); }
void ac2(Verdict& v) { rounding_battery(v, false); }

void ac3(Verdict& v) {
  RngState g(kSeed, 3);
  int failed = 0;
  double worst_lo = 1e9, worst_hi = 1e9;
  for (int k = 0; k < 100; ++k) {
    const double x1 = 0.05 + 0.95 * g.uniform(), x2 = 0.05 + 0.95 * g.uniform();
    const double rho1 = g.uniform(), rho2 = (1.0 - rho1) * g.uniform();
    const PsiQuery q{x1, x2, rho1, rho2};
    const auto mc = psi_mc_oracle(x1, x2, rho1, rho2, kTrials, RngState(kSeed, 300 + k), threads());
    const double lo = psi_partial_sum(q, 20), hi = psi_upper_bound(q, 3, 3);
    const double s = mc.mc.std_error;
    const bool ok = lo - 4.0 * s <= mc.mc.estimate && mc.mc.estimate <= hi + 4.0 * s;
    if (!ok) {
      ++failed;
      if (failed == 1) v.detail << "first failure at x=(" << x1 << "," << x2 << ") rho=(" << rho1 << "," << rho2 << "); ";
    }
    if (s > 0.0) {
      worst_lo = std::min(worst_lo, (mc.mc.estimate - lo) / s);
      worst_hi = std::min(worst_hi, (hi - mc.mc.estimate) / s);
    }
  }
  v.pass = failed == 0;
  v.detail << "100 queries, " << failed << " outside the sandwich; min slack " << worst_lo << " sigma below, "
           << worst_hi << " sigma above";
}

void ac4(Verdict& v) {
  const double x = 1e-3;
  const auto r = psi_mc_oracle(x, x, x, x, kTrials, RngState(kSeed, 4), threads());
  v.pass = std::abs(r.mc.estimate - 0.5) <= 0.02;
  v.detail << "estimate " << r.mc.estimate << " +- " << r.mc.std_error << " (importance sampling), limit 0.5";
}

void ac5(Verdict& v) {
  double lo = 1.0, at = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double r = i / 10000.0;
    const double f = ratio_profile(r);
    if (f < lo) {
      lo = f;
      at = r;
    }
  }
  const bool profile_ok = lo >= 0.68;
  RngState g(kSeed, 5);
  std::size_t rows = 0, failed = 0, violations = 0;
  double worst = 1e9;
  for (int k = 0; k < 20; ++k) {
    const std::size_t nu = 2 + static_cast<std::size_t>(g.uniform() * 9);
    const std::size_t na = 2 + static_cast<std::size_t>(g.uniform() * 19);
    const OdrsRunner runner(gen::random_stream(g, nu, na));
    const auto bat = odrs_battery(runner, kTrials, RngState(kSeed, 500 + k), threads());
    violations += bat.matching_violations;
    for (const auto& row : bat.rows) {
      ++rows;
      if (!row.pass) ++failed;
      if (row.sigma > 0.0) worst = std::min(worst, (row.committed - row.bound) / row.sigma);
    }
  }
  v.pass = profile_ok && failed == 0 && violations == 0;
  v.detail << "profile min " << lo << " at r=" << at << "; " << rows << " edges over 20 streams x 1e6 trials, " << failed
           << " below 0.68 g - 4 sigma, min slack " << worst << " sigma";
}

void ac6(Verdict& v) {
  const OnlineParams p;
  const double q01 = cumulative_Q(0.0, 1.0, p);
  const double f1 = attenuation_F(1.0, p);
  bool ok = q01 <= 1.0 / p.alpha && f1 <= 1.0;
  RngState g(kSeed, 6);
  std::size_t edges = 0, bad = 0;
  for (int k = 0; k < 200; ++k) {
    const OdrsRunner runner(gen::random_stream(g, 1 + k % 10, 1 + k % 20));
    std::vector<double> rho(runner.stream().offline.size(), 0.0);
    for (std::size_t e = 0; e < runner.edge_count(); ++e) {
      ++edges;
      if (!(runner.edge(e).x <= runner.edge_g(e))) ++bad;
      rho[runner.edge_offline(e)] += runner.edge(e).rho;
    }
    for (double r : rho) bad += r > 1.0;
  }
  for (const auto& s : {gen::overloaded_node(12), gen::infinitesimal_stream(1.0, 100)}) {
    const OdrsRunner runner(s);
    std::vector<double> rho(s.offline.size(), 0.0);
    for (std::size_t e = 0; e < runner.edge_count(); ++e) {
      ++edges;
      if (!(runner.edge(e).x <= runner.edge_g(e))) ++bad;
      rho[runner.edge_offline(e)] += runner.edge(e).rho;
    }
    for (double r : rho) bad += r > 1.0;
  }
  ok = ok && bad == 0;
  v.pass = ok;
  v.detail << "Q(0,1)=" << q01 << " <= " << 1.0 / p.alpha << ", F(1)=" << f1 << "; " << edges << " edges, " << bad
           << " violations of x<=g or sum rho<=1";
}

void ac7(Verdict& v) {
  const MatchingStream s{{"a", "b", "c"},
                         {{"x", {{0, 0.4}, {1, 0.3}, {2, 0.3}}},
                          {"y", {{0, 0.5}, {1, 0.4}}},
                          {"z", {{1, 0.3}, {2, 0.6}}}}};
  const OdrsRunner runner(s);
  const auto bat = odrs_battery(runner, kTrials, RngState(kSeed, 7), threads());
  const auto rep = estimate_stats(runner.induced_instance(), kTrials, RngState(kSeed, 70), {}, threads());
  int failed = 0;
  double worst = 0.0;
  for (std::size_t e = 0; e < runner.edge_count(); ++e) {
    const double p = bat.rows[e].selected, q = rep.rows[e].empirical;
    const double sp = binomial_sigma(p, kTrials), sq = binomial_sigma(q, kTrials);
    const double sig = std::sqrt(sp * sp + sq * sq);
    const double z = sig > 0.0 ? std::abs(p - q) / sig : (p == q ? 0.0 : 1e9);
    worst = std::max(worst, z);
    if (z > 4.0) ++failed;
  }
  v.pass = failed == 0;
  v.detail << runner.edge_count() << " edges, online vs DepRound selection, worst " << worst << " sigma";
}

void ac8(Verdict& v) {
  const auto rep = analysis_constants({}, {}, 1e-3);
  const bool c1_exact = std::abs(rep.c1_witness - 0.68532025702558509220) <= 1e-9;
  v.pass = rep.c3_ok() && rep.c1_ok() && c1_exact && rep.c2_ok() && rep.c6_bound_ok() && rep.ratio_ok();
  char buf[600];
  std::snprintf(buf, sizeof buf,
                "c3=%.15g [%s]; c1 witness=%.18g [%s]; c2 witness=%.19g vs 0.374713 [%s]; gamma*c3=%.12g vs "
                "c6^2=%.12g [%s]; ratio max=%.10g at (q=%.3f, L=%.3f) over %zu points [%s]",
                rep.c3_formula, rep.c3_ok() ? "ok" : "FAIL", rep.c1_witness, rep.c1_ok() && c1_exact ? "ok" : "FAIL",
                rep.c2_witness, rep.c2_ok() ? "ok" : "FAIL", rep.gamma_c3, rep.c6_squared,
                rep.c6_bound_ok() ? "ok" : "FAIL", rep.ratio_max, rep.ratio_argmax_q, rep.ratio_argmax_L,
                rep.grid_points, rep.ratio_ok() ? "ok" : "FAIL");
  v.detail << buf;
}

void ac9(Verdict& v) {
  RngState g(kSeed, 9);
  std::size_t targets = 0, failed = 0, unassigned = 0;
  double max_ratio = 0.0;
  for (int k = 0; k < 10; ++k) {
    const std::size_t m = 1 + static_cast<std::size_t>(g.uniform() * 3);
    const std::size_t n = 2 + static_cast<std::size_t>(g.uniform() * 7);
    const auto inst = gen::random_scheduling(g, m, n);
    const auto rep = z_and_lb(inst, {}, 200000, RngState(kSeed, 900 + k), threads());
    unassigned += rep.assignment_failures;
    for (const auto& t : rep.targets) {
      ++targets;
      if (!t.within_ceiling(1.5)) ++failed;
      max_ratio = std::max(max_ratio, t.ratio());
    }
  }
  v.pass = failed == 0 && unassigned == 0;
  v.detail << targets << " (machine, job) targets over 10 instances x 2e5 trials, " << failed
           << " above 1.5 baseline + 4 sigma; max E[Z]/baseline " << max_ratio << " (informative, vs 1.387)";
}

void ac10(Verdict& v) {
  const auto rep = certify_region(CertRegion{}, 0.05, 0.3947, {}, 6, 1);
  v.pass = rep.pass && rep.worst_bound < 0.3947 && rep.runtime_seconds <= 1800.0;
  char buf[300];
  std::snprintf(buf, sizeof buf, "%zu/%zu boxes certified, %zu leaves, worst bound %.11g, %.1f s single-threaded",
                rep.boxes_passed, rep.boxes_checked, rep.leaves, rep.worst_bound, rep.runtime_seconds);
  v.detail << buf;
  const auto sg = small_g_bound(0.003);
  std::snprintf(buf, sizeof buf, "; small-g factors %.10g x %.10g = %.10g (reported)", sg.ratio_factor,
                sg.binomial_factor, sg.product());
  v.detail << buf;
}

void ac11(Verdict& v) {
  int bad_c = 0, bad_ratio = 0;
  double min_c = 1e9, min_ratio = 1e9;
  for (int k = 1; k <= 9; ++k) {
    const double rho = k / 10.0;
    const auto c = log_monotone_coefficients(beta_series_coefficients(rho, 30));
    for (double ck : c) {
      min_c = std::min(min_c, ck);
      bad_c += !(ck > 0.0);
    }
    for (int i = 2; i <= 30; ++i) {
      const double r = beta_series_log_convexity_ratio(rho, i);
      min_ratio = std::min(min_ratio, r);
      bad_ratio += !(r >= 1.0);
    }
  }
  v.pass = bad_c == 0 && bad_ratio == 0;
  v.detail << "rho in {0.1..0.9}: min c_k (k<=30) " << min_c << ", min log-convexity ratio " << min_ratio;
}

void ac12(Verdict& v) {
  std::uint64_t right = 0, matching = 0, sched = 0;
  for (const auto& inst : rounding_instances()) {
    right += estimate_stats(inst, 100000, RngState(kSeed, 1200), {}, threads()).right_violations;
  }
  RngState g(kSeed, 12);
  for (int k = 0; k < 10; ++k) {
    matching += odrs_battery(OdrsRunner(gen::random_stream(g, 8, 16)), 100000, RngState(kSeed, 1210 + k), threads())
                    .matching_violations;
    const auto inst = gen::random_scheduling(g, 3, 8);
    sched += z_and_lb(inst, {}, 20000, RngState(kSeed, 1220 + k), threads()).assignment_failures;
  }
  v.pass = right == 0 && matching == 0 && sched == 0;
  v.detail << "violations: right-node " << right << " / 1e6 roundings, matching " << matching
           << " / 1e6 online runs, assignment " << sched << " / 2e5 schedules";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <criterion 1..12>\n", argv[0]);
    return 64;
  }
  const int n = std::atoi(argv[1]);
  void (*const table[])(Verdict&) = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10, ac11, ac12};
  if (n < 1 || n > 12) {
    std::fprintf(stderr, "criterion must be 1..12\n");
    return 64;
  }
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    table[n - 1](v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << "exception: " << e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("AC %d: %s %s [%.1f s]\n", n, v.pass ? "PASS" : "FAIL", v.detail.str().c_str(), secs);
  return v.pass ? 0 : 1;
}
