// dirmech command-line front end.
//
// Exit codes: 0 ok, 1 invalid input, 2 a checked property failed, 64 bad flags.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dirmech/dirmech.hpp"

#ifndef DIRMECH_VERSION
#define DIRMECH_VERSION "unknown"
#endif

namespace {

using dirmech::io::Json;
using dirmech::io::fmt;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kFailed = 2;
constexpr int kUsage = 64;

struct Common {
  std::uint64_t seed = 1;
  std::uint64_t trials = 0;
  std::string in;
  std::string out;
  std::string format = "json";
  unsigned threads = 1;
};

void add_common(CLI::App* sub, Common& c, std::uint64_t default_trials, bool wants_input) {
  c.trials = default_trials;
  sub->add_option("--seed", c.seed, "RNG seed")->envname("DIRMECH_SEED")->capture_default_str();
  sub->add_option("--trials", c.trials, "Monte Carlo trials")->capture_default_str();
  if (wants_input) sub->add_option("--in", c.in, "input JSON file, - for stdin")->required();
  sub->add_option("--out", c.out, "output file (default stdout)");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  sub->add_option("--threads", c.threads, "worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
}

Json run_header(const std::string& command, const Common& c, Json params) {
  Json h;
  h["command"] = command;
  h["version"] = DIRMECH_VERSION;
  h["seed"] = c.seed;
  h["trials"] = c.trials;
  h["threads"] = c.threads;
  if (!c.in.empty()) h["input"] = c.in;
  h["params"] = std::move(params);
  return h;
}

// CSV preamble: one "# key=value" line per header field.
std::string csv_header(const Json& h) {
  std::ostringstream os;
  for (auto it = h.begin(); it != h.end(); ++it) {
    if (it.key() == "params") {
      for (auto p = it.value().begin(); p != it.value().end(); ++p) {
        os << "# " << p.key() << '=' << (p.value().is_string() ? p.value().get<std::string>() : dirmech::io::dump(p.value(), -1))
           << '\n';
      }
    } else {
      os << "# " << it.key() << '=' << (it.value().is_string() ? it.value().get<std::string>() : dirmech::io::dump(it.value(), -1))
         << '\n';
    }
  }
  return os.str();
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw dirmech::ValidationError({"cannot write " + c.out});
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

void emit_json(const Common& c, const Json& header, Json body) {
  Json doc;
  doc["run"] = header;
  for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
  emit(c, dirmech::io::dump(doc));
}

const char* pass_str(bool b) { return b ? "PASS" : "FAIL"; }

// ---- copula-test ----

int cmd_copula(const Common& c, const std::vector<double>& rho, double alpha) {
  const dirmech::DirichletCopula cop(dirmech::DirichletParams{rho});
  std::vector<std::vector<double>> a(rho.size()), t(rho.size());
  dirmech::RngState rng(c.seed);
  for (std::uint64_t k = 0; k < c.trials; ++k) {
    const auto d = cop.draw(rng);
    for (std::size_t i = 0; i < rho.size(); ++i) {
      a[i].push_back(d.A[i]);
      t[i].push_back(d.T[i]);
    }
  }
  const double crit = dirmech::ks_critical(c.trials, alpha);
  Json rows = Json::array();
  bool ok = true;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double da = dirmech::ks_statistic(a[i], [](double u) { return std::clamp(u, 0.0, 1.0); });
    Json row{{"component", i}, {"rho", rho[i]}, {"ks_uniform", da}, {"critical", crit}, {"pass_uniform", da <= crit}};
    ok = ok && da <= crit;
    if (rho[i] > 0.0 && rho[i] < 1.0) {
      const dirmech::RegularizedBeta cdf(rho[i], 1.0 - rho[i]);
      const double dt = dirmech::ks_statistic(t[i], [&](double z) { return z <= 0 ? 0.0 : z >= 1 ? 1.0 : cdf(z); });
      row["ks_beta"] = dt;
      row["pass_beta"] = dt <= crit;
      ok = ok && dt <= crit;
    }
    rows.push_back(row);
  }
  const Json header = run_header("copula-test", c, Json{{"rho", rho}, {"alpha", alpha}});
  if (c.format == "csv") {
    std::ostringstream os;
    os << csv_header(header) << "component,rho,ks_uniform,ks_beta,critical,pass\n";
    for (const auto& r : rows) {
      const bool pass = r["pass_uniform"].get<bool>() && (!r.contains("pass_beta") || r["pass_beta"].get<bool>());
      os << r["component"].get<std::size_t>() << ',' << fmt(r["rho"].get<double>()) << ','
         << fmt(r["ks_uniform"].get<double>()) << ',' << (r.contains("ks_beta") ? fmt(r["ks_beta"].get<double>()) : "")
         << ',' << fmt(crit) << ',' << (pass ? "true" : "false") << '\n';
    }
    emit(c, os.str());
  } else {
    emit_json(c, header, Json{{"rows", rows}, {"pass", ok}});
  }
  return ok ? kOk : kFailed;
}

// ---- round ----

int cmd_round(const Common& c, int order) {
  const auto inst = dirmech::io::bipartite_from_json(dirmech::io::parse(dirmech::io::read_text(c.in)));
  auto violations = dirmech::validate_instance(inst);
  if (!violations.empty()) throw dirmech::ValidationError(std::move(violations));
  const auto rep = dirmech::estimate_stats(inst, c.trials, dirmech::RngState(c.seed), {}, c.threads, order);
  const Json header = run_header("round", c, Json{{"order", order}});
  if (c.format == "csv") {
    emit(c, csv_header(header) + dirmech::io::to_csv(rep, inst));
  } else {
    emit_json(c, header, dirmech::io::to_json(rep, inst));
  }
  return rep.all_pass() ? kOk : kFailed;
}

// ---- psi ----

int cmd_psi(const Common& c, const dirmech::PsiQuery& q, int k, int jmax, const std::string& method) {
  q.validate();
  const double lower = dirmech::psi_partial_sum(q, jmax);
  const double up0 = dirmech::psi_upper_bound(q, 0, 0);
  const double upk = dirmech::psi_upper_bound(q, k, k);
  Json body{{"query", Json{{"x1", q.x1}, {"x2", q.x2}, {"rho1", q.rho1}, {"rho2", q.rho2}}},
            {"lower", lower},
            {"upper_k0", up0},
            {"upper_k", upk},
            {"kappa_tail_j60", Json::array({dirmech::kappa_tail_mass(q.x1, q.rho1), dirmech::kappa_tail_mass(q.x2, q.rho2)})}};
  bool ok = lower <= upk + 1e-12;
  if (c.trials > 0) {
    const auto m = method == "plain"        ? dirmech::PsiMcMethod::Plain
                   : method == "importance" ? dirmech::PsiMcMethod::Importance
                                            : dirmech::PsiMcMethod::Auto;
    const auto mc = dirmech::psi_mc_oracle(q.x1, q.x2, q.rho1, q.rho2, c.trials, dirmech::RngState(c.seed), c.threads, m);
    body["mc_estimate"] = mc.mc.estimate;
    body["mc_std_error"] = mc.mc.std_error;
    body["mc_half_width"] = mc.mc.half_width;
    body["mc_method"] = mc.method == dirmech::PsiMcMethod::Plain ? "plain" : "importance";
    const double s4 = 4.0 * mc.mc.std_error;
    ok = ok && lower - s4 <= mc.mc.estimate && mc.mc.estimate <= upk + s4;
  }
  body["pass"] = ok;
  const Json header = run_header("psi", c, Json{{"k", k}, {"jmax", jmax}, {"method", method}});
  if (c.format == "csv") {
    std::ostringstream os;
    os << csv_header(header) << "x1,x2,rho1,rho2,lower,mc_estimate,mc_half_width,upper_k0,upper_k\n";
    os << fmt(q.x1) << ',' << fmt(q.x2) << ',' << fmt(q.rho1) << ',' << fmt(q.rho2) << ',' << fmt(lower) << ','
       << (body.contains("mc_estimate") ? fmt(body["mc_estimate"].get<double>()) : "") << ','
       << (body.contains("mc_half_width") ? fmt(body["mc_half_width"].get<double>()) : "") << ',' << fmt(up0) << ','
       << fmt(upk) << '\n';
    emit(c, os.str());
  } else {
    emit_json(c, header, body);
  }
  return ok ? kOk : kFailed;
}

// ---- odrs ----

Json params_json(const dirmech::OnlineParams& p) {
  return Json{{"alpha", p.alpha}, {"beta", p.beta}, {"F0", p.F0}, {"Fslope", p.Fslope}, {"c", p.c}};
}

int cmd_odrs(const Common& c, const dirmech::OnlineParams& p, double ratio) {
  const auto stream = dirmech::io::stream_from_json(dirmech::io::parse(dirmech::io::read_text(c.in)));
  const dirmech::OdrsRunner runner(stream, p);
  Json params = params_json(p);
  params["ratio"] = ratio;
  const Json header = run_header("odrs", c, params);
  if (c.trials <= 1) {
    dirmech::RngState rng(c.seed);
    const auto res = runner.run(rng, nullptr, nullptr, true);
    if (c.format == "csv") {
      emit(c, csv_header(header) + dirmech::io::trace_csv(res, stream));
    } else {
      Json trace = Json::array();
      for (const auto& t : res.trace) {
        trace.push_back({{"arrival_index", t.arrival},
                         {"u", stream.offline[t.u]},
                         {"v", stream.arrivals[t.arrival].v},
                         {"g", t.g},
                         {"r", t.r},
                         {"y", t.params.y},
                         {"rho", t.params.rho},
                         {"x", t.params.x},
                         {"selected", t.selected},
                         {"committed", t.committed}});
      }
      Json match = Json::object();
      for (std::size_t u = 0; u < stream.offline.size(); ++u) {
        match[stream.offline[u]] = res.match_of_offline[u] ? Json(stream.arrivals[*res.match_of_offline[u]].v) : Json(nullptr);
      }
      emit_json(c, header, Json{{"matching", match}, {"trace", trace}});
    }
    return kOk;
  }
  const auto bat = dirmech::odrs_battery(runner, c.trials, dirmech::RngState(c.seed), c.threads, ratio);
  if (c.format == "csv") {
    std::ostringstream os;
    os << csv_header(header) << "u,v,g,x,selected,committed,bound,half_width,pass\n";
    for (const auto& r : bat.rows) {
      os << stream.offline[runner.edge_offline(r.edge)] << ',' << stream.arrivals[runner.edge_arrival(r.edge)].v << ','
         << fmt(r.g) << ',' << fmt(r.x) << ',' << fmt(r.selected) << ',' << fmt(r.committed) << ',' << fmt(r.bound) << ','
         << fmt(4.0 * r.sigma) << ',' << (r.pass ? "true" : "false") << '\n';
    }
    emit(c, os.str());
  } else {
    Json rows = Json::array();
    for (const auto& r : bat.rows) {
      rows.push_back({{"u", stream.offline[runner.edge_offline(r.edge)]},
                      {"v", stream.arrivals[runner.edge_arrival(r.edge)].v},
                      {"g", r.g},
                      {"x", r.x},
                      {"selected", r.selected},
                      {"committed", r.committed},
                      {"bound", r.bound},
                      {"half_width", 4.0 * r.sigma},
                      {"pass", r.pass}});
    }
    emit_json(c, header, Json{{"matching_violations", bat.matching_violations}, {"rows", rows}, {"pass", bat.all_pass()}});
  }
  return bat.all_pass() ? kOk : kFailed;
}

// ---- schedule ----

int cmd_schedule(const Common& c, const dirmech::SchedulingParams& p, double eta) {
  const auto inst = dirmech::io::scheduling_from_json(dirmech::io::parse(dirmech::io::read_text(c.in)));
  auto violations = dirmech::validate_scheduling(inst);
  if (!violations.empty()) throw dirmech::ValidationError(std::move(violations));
  p.validate();
  const Json params{{"pi", p.pi}, {"theta", p.theta}, {"tau", p.tau}, {"eta", eta}};
  const Json header = run_header("schedule", c, params);
  if (c.trials <= 1) {
    dirmech::RngState rng(c.seed);
    const auto res = dirmech::schedule(inst, p, rng);
    const bool ok = std::all_of(res.machine_of_job.begin(), res.machine_of_job.end(),
                                [&](std::size_t m) { return m < inst.machines; });
    if (c.format == "csv") {
      std::ostringstream os;
      os << csv_header(header) << "# offset=" << fmt(res.offset) << "\n# objective=" << fmt(res.objective) << '\n';
      os << "machine,position,job\n";
      for (std::size_t i = 0; i < res.order.size(); ++i) {
        for (std::size_t k = 0; k < res.order[i].size(); ++k) os << i << ',' << k << ',' << res.order[i][k] << '\n';
      }
      emit(c, os.str());
    } else {
      Json clusters = Json::array();
      for (const auto& cl : res.layout.clusters) {
        clusters.push_back({{"machine", cl.machine},
                            {"class", cl.k},
                            {"index", cl.ell},
                            {"jobs", cl.jobs},
                            {"rho", cl.rho},
                            {"mass", cl.mass},
                            {"kind", cl.kind == dirmech::ClusterKind::Truncated     ? "truncated"
                                     : cl.kind == dirmech::ClusterKind::ThetaClosed ? "theta_closed"
                                                                                    : "leftover"}});
      }
      emit_json(c, header,
                Json{{"offset", res.offset},
                     {"clusters", clusters},
                     {"machine_of_job", res.machine_of_job},
                     {"order", res.order},
                     {"objective", res.objective}});
    }
    return ok ? kOk : kFailed;
  }
  const auto rep = dirmech::z_and_lb(inst, p, c.trials, dirmech::RngState(c.seed), c.threads);
  bool ok = rep.assignment_failures == 0;
  for (const auto& t : rep.targets) ok = ok && t.within_ceiling(1.5);
  if (c.format == "csv") {
    std::ostringstream os;
    os << csv_header(header) << "machine,job,Q,L,LB,EZ,std_error,baseline,ratio,within_1_5,within_eta\n";
    for (const auto& t : rep.targets) {
      os << t.machine << ',' << t.job << ',' << fmt(t.Q) << ',' << fmt(t.L) << ',' << fmt(t.LB) << ','
         << fmt(t.EZ.estimate) << ',' << fmt(t.EZ.std_error) << ',' << fmt(t.baseline()) << ',' << fmt(t.ratio()) << ','
         << (t.within_ceiling(1.5) ? "true" : "false") << ',' << (t.within_ceiling(eta) ? "true" : "false") << '\n';
    }
    emit(c, os.str());
  } else {
    Json rows = Json::array();
    for (const auto& t : rep.targets) {
      rows.push_back({{"machine", t.machine},
                      {"job", t.job},
                      {"Q", t.Q},
                      {"L", t.L},
                      {"LB", t.LB},
                      {"EZ", t.EZ.estimate},
                      {"std_error", t.EZ.std_error},
                      {"baseline", t.baseline()},
                      {"ratio", t.ratio()},
                      {"within_1_5", t.within_ceiling(1.5)},
                      {"within_eta", t.within_ceiling(eta)}});
    }
    emit_json(c, header, Json{{"assignment_failures", rep.assignment_failures}, {"rows", rows}, {"pass", ok}});
  }
  return ok ? kOk : kFailed;
}

// ---- certify ----

int cmd_certify(const Common& c, double eps, double g_min, double g_max, double cval, int depth, std::size_t spot) {
  dirmech::CertRegion region;
  region.g1 = {g_min, g_max};
  region.g2 = {g_min, g_max};
  const auto rep = dirmech::certify_region(region, eps, cval, {}, depth, c.threads);
  Json body = dirmech::io::to_json(rep);
  const auto sg = dirmech::small_g_bound(0.003);
  body["small_g"] = Json{{"g_max", 0.003},
                         {"ratio_factor", sg.ratio_factor},
                         {"binomial_factor", sg.binomial_factor},
                         {"product", sg.product()},
                         {"product_le_c", sg.product() <= cval}};
  if (spot > 0) {
    auto boxes = dirmech::certification_grid(region, eps);
    std::vector<dirmech::Box4> pick;
    const std::size_t n = std::min<std::size_t>({spot, 100, boxes.size()});
    for (std::size_t i = 0; i < n; ++i) pick.push_back(boxes[i * boxes.size() / n]);
    const auto sc = dirmech::spot_check(pick);
    body["spot_check"] = Json{{"boxes", sc.boxes}, {"max_abs_diff", sc.max_abs_diff}, {"covered", sc.covered}};
  }
  const Json header = run_header("certify", c,
                                 Json{{"epsilon", eps}, {"g_min", g_min}, {"g_max", g_max}, {"c", cval}, {"depth", depth}});
  // The report carries a wall-clock runtime; everything else is deterministic.
  emit_json(c, header, body);
  return rep.pass ? kOk : kFailed;
}

// ---- constants ----

int cmd_constants(const Common& c, double step) {
  const dirmech::SchedulingParams sp;
  const auto rep = dirmech::analysis_constants(sp, {}, step);
  const dirmech::OnlineParams op;
  const double q01 = dirmech::cumulative_Q(0.0, 1.0, op);
  const double f1 = dirmech::attenuation_F(1.0, op);
  double prof_min = 1e300;
  for (int i = 0; i <= 10000; ++i) prof_min = std::min(prof_min, dirmech::ratio_profile(i / 10000.0, op));
  struct Check {
    const char* name;
    double value;
    double target;
    bool pass;
  };
  const std::vector<Check> checks{
      {"c3_formula", rep.c3_formula, rep.constants.c3, rep.c3_ok()},
      {"c1_witness", rep.c1_witness, rep.constants.c1, rep.c1_ok()},
      {"c2_witness", rep.c2_witness, rep.constants.c2, rep.c2_ok()},
      {"gamma_c3_le_c6_sq", rep.gamma_c3, rep.c6_squared, rep.c6_bound_ok()},
      {"ratio_grid_max", rep.ratio_max, 1.38695 + 1e-4, rep.ratio_ok()},
      {"online_Q01", q01, 1.0 / op.alpha, q01 <= 1.0 / op.alpha},
      {"online_F1", f1, 1.0, f1 <= 1.0},
      {"online_profile_min", prof_min, 0.68, prof_min >= 0.68},
  };
  bool ok = true;
  for (const auto& k : checks) ok = ok && k.pass;
  const Json header = run_header("constants", c, Json{{"step", step}, {"pi", sp.pi}, {"theta", sp.theta}, {"tau", sp.tau}});
  if (c.format == "csv") {
    std::ostringstream os;
    os << csv_header(header) << "check,value,target,status\n";
    for (const auto& k : checks) os << k.name << ',' << fmt(k.value) << ',' << fmt(k.target) << ',' << pass_str(k.pass) << '\n';
    emit(c, os.str());
  } else {
    Json rows = Json::array();
    for (const auto& k : checks) rows.push_back({{"check", k.name}, {"value", k.value}, {"target", k.target}, {"status", pass_str(k.pass)}});
    emit_json(c, header,
              Json{{"checks", rows},
                   {"ratio_argmax", Json{{"q", rep.ratio_argmax_q}, {"L", rep.ratio_argmax_L}}},
                   {"grid_points", rep.grid_points},
                   {"status", pass_str(ok)}});
  }
  return ok ? kOk : kFailed;
}

// ---- gen ----

int cmd_gen(const Common& c, const std::string& kind, std::size_t a, std::size_t b, std::size_t degree) {
  dirmech::RngState rng(c.seed);
  Json inst;
  if (kind == "bipartite") {
    inst = dirmech::io::to_json(dirmech::gen::random_bipartite(rng, a, b, degree));
  } else if (kind == "stream") {
    inst = dirmech::io::to_json(dirmech::gen::random_stream(rng, a, b, degree));
  } else {
    inst = dirmech::io::to_json(dirmech::gen::random_scheduling(rng, a, b));
  }
  // Instances stay loadable by the other subcommands, so the echo is a
  // sibling "run" key that their parsers ignore.
  Json doc;
  doc["run"] = run_header("gen", c, Json{{"kind", kind}, {"a", a}, {"b", b}, {"degree", degree}});
  for (auto it = inst.begin(); it != inst.end(); ++it) doc[it.key()] = it.value();
  emit(c, dirmech::io::dump(doc));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet-mechanism dependent rounding toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(DIRMECH_VERSION));
  std::function<int()> action;

  Common cc;
  std::vector<double> rho{0.3, 0.5};
  double ks_alpha = 0.01;
  auto* copula = app.add_subcommand("copula-test", "KS checks of copula marginals");
  add_common(copula, cc, 100000, false);
  copula->add_option("--rho", rho, "Dirichlet parameters")->delimiter(',')->capture_default_str();
  copula->add_option("--alpha", ks_alpha, "KS significance level")->capture_default_str();
  copula->callback([&] { action = [&] { return cmd_copula(cc, rho, ks_alpha); }; });

  Common rc;
  int order = 3;
  auto* round = app.add_subcommand("round", "DepRound with marginal and correlation statistics");
  add_common(round, rc, 100000, true);
  round->add_option("--order", order, "Psi upper-bound order")->check(CLI::Range(0, 12))->capture_default_str();
  round->callback([&] { action = [&] { return cmd_round(rc, order); }; });

  Common pc;
  dirmech::PsiQuery q{1.0, 1.0, 0.0, 0.0};
  int k = 3, jmax = 20;
  std::string method = "auto";
  auto* psi = app.add_subcommand("psi", "Psi bounds and Monte Carlo estimate");
  add_common(psi, pc, 0, false);
  psi->add_option("--x1", q.x1)->required();
  psi->add_option("--x2", q.x2)->required();
  psi->add_option("--rho1", q.rho1)->required();
  psi->add_option("--rho2", q.rho2)->required();
  psi->add_option("--k", k, "upper-bound order")->check(CLI::Range(0, 12))->capture_default_str();
  psi->add_option("--jmax", jmax, "partial-sum truncation")->check(CLI::Range(0, 200))->capture_default_str();
  psi->add_option("--method", method)->check(CLI::IsMember({"auto", "plain", "importance"}))->capture_default_str();
  psi->callback([&] { action = [&] { return cmd_psi(pc, q, k, jmax, method); }; });

  Common oc;
  dirmech::OnlineParams op;
  double ratio = 0.68;
  auto* odrs = app.add_subcommand("odrs", "online rounding: single traced run or Monte Carlo battery");
  add_common(odrs, oc, 1, true);
  odrs->add_option("--ratio", ratio, "asserted Pr(e in M) / g_e")->capture_default_str();
  odrs->add_option("--alpha", op.alpha)->capture_default_str();
  odrs->add_option("--beta", op.beta)->capture_default_str();
  odrs->callback([&] { action = [&] { return cmd_odrs(oc, op, ratio); }; });

  Common sc;
  dirmech::SchedulingParams sp;
  double eta = 1.387;
  auto* sched = app.add_subcommand("schedule", "scheduling pipeline: single run or Z/LB report");
  add_common(sched, sc, 1, true);
  sched->add_option("--pi", sp.pi)->capture_default_str();
  sched->add_option("--theta", sp.theta)->capture_default_str();
  sched->add_option("--tau", sp.tau)->capture_default_str();
  sched->add_option("--eta", eta, "reported (not asserted) ratio")->capture_default_str();
  sched->callback([&] { action = [&] { return cmd_schedule(sc, sp, eta); }; });

  Common kc;
  double eps = 0.05, g_min = 0.3, g_max = 1.0, cval = 0.3947;
  int depth = 6;
  std::size_t spot = 0;
  auto* cert = app.add_subcommand("certify", "box-bound certification of the online correlation inequality");
  add_common(cert, kc, 0, false);
  cert->add_option("--epsilon", eps)->check(CLI::PositiveNumber)->capture_default_str();
  cert->add_option("--g-min", g_min)->check(CLI::Range(0.003, 1.0))->capture_default_str();
  cert->add_option("--g-max", g_max)->check(CLI::Range(0.003, 1.0))->capture_default_str();
  cert->add_option("--c", cval)->capture_default_str();
  cert->add_option("--depth", depth)->check(CLI::Range(0, 12))->capture_default_str();
  cert->add_option("--spot-check", spot, "boxes re-evaluated in 50-digit arithmetic")->check(CLI::Range(0, 100))->capture_default_str();
  cert->callback([&] { action = [&] { return cmd_certify(kc, eps, g_min, g_max, cval, depth, spot); }; });

  Common tc;
  double step = 1e-3;
  auto* consts = app.add_subcommand("constants", "recompute the analysis constants");
  add_common(consts, tc, 0, false);
  consts->add_option("--step", step, "ratio grid step")->check(CLI::PositiveNumber)->capture_default_str();
  consts->callback([&] { action = [&] { return cmd_constants(tc, step); }; });

  Common gc;
  std::string kind = "bipartite";
  std::size_t ga = 4, gb = 4, degree = 3;
  auto* gen = app.add_subcommand("gen", "random instance generators");
  add_common(gen, gc, 0, false);
  gen->add_option("--kind", kind)->check(CLI::IsMember({"bipartite", "stream", "scheduling"}))->capture_default_str();
  gen->add_option("-a,--left,--offline,--machines", ga, "left nodes / offline nodes / machines")->capture_default_str();
  gen->add_option("-b,--right,--arrivals,--jobs", gb, "right nodes / arrivals / jobs")->capture_default_str();
  gen->add_option("--degree", degree)->check(CLI::Range(1, 64))->capture_default_str();
  gen->callback([&] { action = [&] { return cmd_gen(gc, kind, ga, gb, degree); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    return action ? action() : kUsage;
  } catch (const dirmech::ValidationError& e) {
    for (const auto& v : e.violations()) std::cerr << "invalid input: " << v << '\n';
    return kInvalid;
  } catch (const dirmech::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const dirmech::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kFailed;
  }
}
