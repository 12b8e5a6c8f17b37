#include <cmath>

#include "catch_amalgamated.hpp"
#include "dirmech/online.hpp"
#include "oracles.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace dirmech;

TEST_CASE("attenuation function") {
  CHECK(attenuation_F(0.0) == 0.68145);
  CHECK(attenuation_F(1.0) <= 1.0);
  double prev = 0.0, prev_d = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    const double f = attenuation_F(t);
    CHECK(f > prev);
    if (i > 0) {
      const double d = f - prev;
      if (i > 1) CHECK(d >= prev_d);
      prev_d = d;
    }
    prev = f;
  }
  CHECK_THROWS_AS(attenuation_F(1.5), DomainError);
}

TEST_CASE("cumulative Q against quadrature") {
  const OnlineParams p;
  const double quad = oracle::integrate([&](double t) { return attenuation_F(t, p); }, 0.0, 1.0);
  CHECK_THAT(cumulative_Q(0.0, 1.0), WithinAbs(quad, 1e-10));
  CHECK_THAT(cumulative_Q(0.0, 1.0), WithinRel(0.81054833187469527156, 1e-14));
  CHECK(cumulative_Q(0.0, 1.0) <= 1.0 / p.alpha);
  const double part = oracle::integrate([&](double t) { return attenuation_F(t, p); }, 0.3, 0.55);
  CHECK_THAT(cumulative_Q(0.3, 0.25), WithinAbs(part, 1e-12));
  CHECK(cumulative_Q(0.4, 0.0) == 0.0);
  CHECK_THROWS_AS(cumulative_Q(0.8, 0.3), DomainError);
}

TEST_CASE("edge parameters") {
  const auto z = edge_params(0.3, 0.0);
  CHECK(z.y == 0.0);
  CHECK(z.rho == 0.0);
  CHECK(z.x == 0.0);

  const double g = 1e-8;
  const auto tiny = edge_params(0.5, g);
  CHECK_THAT(tiny.x / g, WithinRel(attenuation_F(0.5), 1e-6));

  const auto full = edge_params(0.0, 1.0);
  CHECK(full.rho <= 1.0);
  CHECK_THAT(full.rho, WithinRel(1.2337 * cumulative_Q(0.0, 1.0), 1e-15));

  RngState r(3);
  for (int i = 0; i < 1000; ++i) {
    const double rr = r.uniform();
    const double gg = r.uniform() * (1.0 - rr);
    CHECK(edge_params(rr, gg).x <= gg);
  }
  CHECK_THROWS_AS(edge_params(0.7, 0.4), DomainError);
}

TEST_CASE("ratio profile") {
  CHECK(ratio_profile(0.0) == 0.68145);
  CHECK(ratio_profile(1.0) >= 0.68);
  double lo = 1.0;
  for (int i = 0; i <= 10000; ++i) lo = std::min(lo, ratio_profile(i / 10000.0));
  CHECK(lo >= 0.68);
}

TEST_CASE("derived Q solves the attenuation ODE") {
  CHECK(derive_Q(1.2337, 0.0) == 0.0);
  const double c = 1.0 / gen_binomial(2 * 1.2337, 1.2337);
  const double h = 1e-5;
  auto dq = [&](double t) { return (derive_Q(1.2337, t + h) - derive_Q(1.2337, t - h)) / (2 * h); };
  const double ref = dq(0.5) * (1.0 - c * derive_Q(1.2337, 0.5));
  for (int i = 1; i < 100; ++i) {
    const double t = i / 100.0;
    INFO("t = " << t);
    CHECK_THAT(dq(t) * (1.0 - c * derive_Q(1.2337, t)), WithinRel(ref, 1e-9));
  }
  for (int i = 1; i < 99; ++i) {
    const double t = i / 100.0;
    INFO("t = " << t);
    CHECK_THAT(dq(t), WithinRel(attenuation_F(t), 1e-3));
  }
}

TEST_CASE("stream validation") {
  MatchingStream s{{"a", "b"}, {{"v0", {{0, 0.7}, {1, 0.5}}}, {"v1", {{0, 0.5}}}}};
  const auto bad = validate_stream(s);
  CHECK(bad.size() == 2);
  CHECK_THROWS_AS(OdrsRunner(s), ValidationError);
  MatchingStream rep{{"a"}, {{"v0", {{0, 0.2}, {0, 0.2}}}}};
  CHECK(validate_stream(rep).size() == 1);
}

TEST_CASE("single arrival with full demand") {
  // x < 1 here, so the phantom clock makes selection a coin with bias x
  const MatchingStream s{{"u"}, {{"v", {{0, 1.0}}}}};
  const OdrsRunner runner(s);
  const double x = runner.edge(0).x;
  CHECK_THAT(x, WithinRel(0.3 * 0.68145 + 0.7 * cumulative_Q(0.0, 1.0), 1e-14));
  const auto bat = odrs_battery(runner, 400000, RngState(4));
  CHECK_THAT(bat.rows[0].selected, WithinAbs(x, 4.0 * binomial_sigma(x, 400000)));
  CHECK(bat.rows[0].committed == bat.rows[0].selected);
}

TEST_CASE("battery sigma is taken at the bound, so a never-committed tiny demand passes") {
  const MatchingStream s{{"u", "w"}, {{"v", {{0, 0.9}, {1, 1e-8}}}}};
  const auto bat = odrs_battery(OdrsRunner(s), 20000, RngState(6));
  REQUIRE(bat.rows.size() == 2);
  CHECK(bat.rows[1].committed == 0.0);
  CHECK_THAT(bat.rows[1].sigma, WithinRel(binomial_sigma(0.68e-8, 20000), 1e-12));
  CHECK(bat.all_pass());
}

TEST_CASE("every generated stream satisfies the online invariants") {
  RngState g(5);
  for (int k = 0; k < 50; ++k) {
    const auto s = gen::random_stream(g, 1 + k % 10, 1 + k % 20);
    REQUIRE(validate_stream(s).empty());
    const OdrsRunner runner(s);
    std::vector<double> rho_sum(s.offline.size(), 0.0);
    for (std::size_t e = 0; e < runner.edge_count(); ++e) {
      CHECK(runner.edge(e).x <= runner.edge_g(e));
      CHECK(runner.edge_r(e) + runner.edge_g(e) <= 1.0 + kOnlineSlack);
      rho_sum[runner.edge_offline(e)] += runner.edge(e).rho;
    }
    for (double r : rho_sum) CHECK(r <= 1.0 + kOnlineSlack);
    CHECK(validate_instance(runner.induced_instance()).empty());
  }
}

TEST_CASE("online matching is a matching") {
  RngState g(6);
  const auto s = gen::random_stream(g, 5, 12);
  const OdrsRunner runner(s);
  RngState r(7);
  for (int t = 0; t < 2000; ++t) {
    std::vector<std::uint8_t> sel, com;
    const auto res = runner.run(r, &sel, &com, true);
    std::vector<int> per_off(s.offline.size(), 0), per_arr(s.arrivals.size(), 0);
    for (std::size_t e = 0; e < sel.size(); ++e) {
      per_arr[runner.edge_arrival(e)] += sel[e];
      per_off[runner.edge_offline(e)] += com[e];
      REQUIRE(com[e] <= sel[e]);
    }
    for (int c : per_off) REQUIRE(c <= 1);
    for (int c : per_arr) REQUIRE(c <= 1);
    for (std::size_t u = 0; u < s.offline.size(); ++u) REQUIRE(res.match_of_offline[u].has_value() == (per_off[u] == 1));
  }
}

TEST_CASE("decisions on a shared prefix do not depend on the future") {
  RngState g(8);
  const auto full = gen::random_stream(g, 4, 10);
  MatchingStream prefix = full;
  prefix.arrivals.resize(6);
  const OdrsRunner a(full), b(prefix);
  RngState ra(9), rb(9);
  for (int t = 0; t < 500; ++t) {
    std::vector<std::uint8_t> sa, sb;
    a.run(ra, &sa);
    b.run(rb, &sb);
    for (std::size_t e = 0; e < sb.size(); ++e) REQUIRE(sa[e] == sb[e]);
  }
}

TEST_CASE("online selection law equals DepRound on the induced instance") {
  const MatchingStream s{{"a", "b", "c"},
                         {{"x", {{0, 0.4}, {1, 0.3}, {2, 0.3}}},
                          {"y", {{0, 0.5}, {1, 0.4}}},
                          {"z", {{1, 0.3}, {2, 0.6}}}}};
  const OdrsRunner runner(s);
  const auto inst = runner.induced_instance();
  constexpr std::uint64_t n = 300000;
  const auto bat = odrs_battery(runner, n, RngState(10));
  const auto rep = estimate_stats(inst, n, RngState(11));
  for (std::size_t e = 0; e < runner.edge_count(); ++e) {
    const double p = bat.rows[e].selected;
    const double q = rep.rows[e].empirical;
    const double sig = std::sqrt(binomial_sigma(p, n) * binomial_sigma(p, n) + binomial_sigma(q, n) * binomial_sigma(q, n));
    INFO("edge " << e);
    CHECK_THAT(p, WithinAbs(q, 4.0 * sig + 1e-12));
  }
}

TEST_CASE("odrs battery on generator families") {
  for (const auto& s : {gen::overloaded_node(8), gen::infinitesimal_stream(0.9, 30)}) {
    const auto bat = odrs_battery(OdrsRunner(s), 200000, RngState(12), 2);
    CHECK(bat.matching_violations == 0);
    for (const auto& row : bat.rows) {
      INFO("edge " << row.edge << ": " << row.committed << " vs " << row.bound);
      CHECK(row.pass);
    }
  }
}

TEST_CASE("odrs battery is thread invariant") {
  RngState g(13);
  const OdrsRunner runner(gen::random_stream(g, 4, 8));
  const auto a = odrs_battery(runner, 50000, RngState(14), 1);
  const auto b = odrs_battery(runner, 50000, RngState(14), 4);
  for (std::size_t e = 0; e < a.rows.size(); ++e) CHECK(a.rows[e].committed == b.rows[e].committed);
}
