#include <cmath>

#include "catch_amalgamated.hpp"
#include "dirmech/rounding.hpp"
#include "oracles.hpp"

using Catch::Matchers::WithinAbs;
using namespace dirmech;

namespace {

BipartiteInstance make(std::size_t nl, std::size_t nr, std::vector<BipartiteEdge> edges) {
  BipartiteInstance inst;
  for (std::size_t u = 0; u < nl; ++u) inst.left.push_back("u" + std::to_string(u));
  for (std::size_t v = 0; v < nr; ++v) inst.right.push_back("v" + std::to_string(v));
  inst.edges = std::move(edges);
  return inst;
}

}  // namespace

TEST_CASE("bipartite instance validation") {
  CHECK(validate_instance(make(1, 1, {{0, 0, 1.0, 1.0}})).empty());

  const auto over_x = validate_instance(make(2, 1, {{0, 0, 0.6, 0.1}, {1, 0, 0.6, 0.1}}));
  REQUIRE(over_x.size() == 1);
  CHECK(over_x[0].find("v0") != std::string::npos);

  const auto over_rho = validate_instance(make(1, 2, {{0, 0, 0.3, 0.7}, {0, 1, 0.3, 0.7}}));
  REQUIRE(over_rho.size() == 1);
  CHECK(over_rho[0].find("u0") != std::string::npos);

  CHECK(validate_instance(make(1, 1, {{0, 0, 0.3, 0.1}, {0, 0, 0.3, 0.1}})).size() == 1);
  CHECK(validate_instance(make(1, 1, {{0, 0, -0.1, 0.1}})).size() == 1);
  CHECK(validate_instance(make(1, 1, {{0, 3, 0.1, 0.1}})).size() == 1);
  CHECK_THROWS_AS(DepRounder(make(2, 1, {{0, 0, 0.6, 0.1}, {1, 0, 0.6, 0.1}})), ValidationError);
}

TEST_CASE("x = 1 edge is always kept") {
  const auto inst = make(1, 1, {{0, 0, 1.0, 0.5}});
  RngState r(1);
  for (int i = 0; i < 10000; ++i) REQUIRE(dep_round(inst, r).X[0] == 1);
}

TEST_CASE("x = 0 edge is never kept") {
  const auto inst = make(2, 1, {{0, 0, 0.0, 0.5}, {1, 0, 0.5, 0.5}});
  const DepRounder dr(inst);
  RngState r(2);
  for (int i = 0; i < 10000; ++i) REQUIRE(dr.round(r).X[0] == 0);
}

TEST_CASE("rounding is reproducible") {
  RngState g(3);
  const auto inst = gen::random_bipartite(g, 4, 4);
  RngState a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(dep_round(inst, a).X == dep_round(inst, b).X);
}

TEST_CASE("marginals match x on a single right node") {
  const auto inst = make(3, 1, {{0, 0, 0.2, 0.3}, {1, 0, 0.3, 0.6}, {2, 0, 0.4, 0.1}});
  const auto rep = estimate_stats(inst, 400000, RngState(7));
  CHECK(rep.right_violations == 0);
  for (const auto& row : rep.rows) {
    if (row.kind == "marginal") CHECK(row.pass);
  }
}

TEST_CASE("marginals on a phantom-clock node") {
  // v1 has a single positive edge
  const auto inst = make(2, 2, {{0, 0, 0.5, 0.5}, {1, 0, 0.5, 0.5}, {0, 1, 0.7, 0.5}});
  const auto rep = estimate_stats(inst, 400000, RngState(8));
  for (const auto& row : rep.rows) {
    INFO(row.kind << " " << row.empirical << " vs " << row.bound);
    CHECK(row.pass);
  }
}

TEST_CASE("random instances pass the full battery") {
  RngState g(11);
  for (int k = 0; k < 4; ++k) {
    const auto inst = gen::random_bipartite(g, 4, 5);
    REQUIRE(validate_instance(inst).empty());
    const auto rep = estimate_stats(inst, 200000, g.substream(k), {}, 2);
    CHECK(rep.right_violations == 0);
    for (const auto& row : rep.rows) {
      INFO(row.kind << " " << inst.edge_name(row.edges[0]) << " " << row.empirical << " vs " << row.bound);
      CHECK(row.pass);
    }
  }
}

TEST_CASE("same-left pairs are negatively correlated") {
  const auto inst = make(1, 2, {{0, 0, 0.5, 0.4}, {0, 1, 0.5, 0.4}});
  const auto rep = estimate_stats(inst, 400000, RngState(12));
  bool seen = false;
  for (const auto& row : rep.rows) {
    if (row.kind != "same_left") continue;
    seen = true;
    CHECK(row.pass);
    CHECK(row.bound < 0.25);
    CHECK(row.empirical < 0.25);
  }
  CHECK(seen);
}

TEST_CASE("stable set check") {
  const auto inst = make(2, 2, {{0, 0, 0.5, 0.3}, {0, 1, 0.5, 0.3}, {1, 1, 0.5, 0.3}});
  CHECK(stable_set_check(inst, {0}));
  CHECK(stable_set_check(inst, {0, 1}));
  CHECK_FALSE(stable_set_check(inst, {0, 2}));
  CHECK_THROWS_AS(stable_set_check(inst, {5}), DomainError);

  RngState g(13);
  for (int k = 0; k < 20; ++k) {
    const auto ri = gen::random_bipartite(g, 4, 4, 3);
    const std::size_t m = ri.edges.size();
    for (std::size_t e = 0; e < m; ++e) {
      for (std::size_t f = e + 1; f < m; ++f) {
        CHECK(stable_set_check(ri, {e, f}) == oracle::is_stable_bfs(ri, {e, f}));
      }
    }
  }
}

TEST_CASE("cross-left stable triple") {
  // u0-v0, u1-v1, u2-v2 with no cross edges
  const auto inst = make(3, 3, {{0, 0, 0.5, 0.5}, {1, 1, 0.6, 0.5}, {2, 2, 0.7, 0.5}, {0, 1, 0.3, 0.4}});
  CHECK_FALSE(stable_set_check(inst, {0, 1, 2}));
  CHECK(stable_set_check(inst, {0, 2}));
  const auto rep = estimate_stats(inst, 400000, RngState(14), {{0, 2}, {1, 2}});
  for (const auto& row : rep.rows) {
    INFO(row.kind);
    CHECK(row.pass);
  }
  CHECK_THROWS_AS(estimate_stats(inst, 10, RngState(1), {{0, 1}}), DomainError);
}

TEST_CASE("independent rounding ignores the right constraint") {
  const auto inst = make(2, 1, {{0, 0, 0.5, 0.0}, {1, 0, 0.5, 0.0}});
  RngState r(15);
  int both = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto X = independent_round(inst, r);
    both += X[0] && X[1];
  }
  CHECK(both > 0);
}

TEST_CASE("rho = 0 everywhere gives independent clocks") {
  const auto inst = make(1, 2, {{0, 0, 0.5, 0.0}, {0, 1, 0.5, 0.0}});
  const auto rep = estimate_stats(inst, 400000, RngState(16));
  for (const auto& row : rep.rows) {
    if (row.kind == "same_left") CHECK_THAT(row.empirical, WithinAbs(0.25, 4.0 * row.sigma + 1e-9));
  }
}
