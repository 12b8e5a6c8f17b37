#include "catch_amalgamated.hpp"
#include "dirmech/io.hpp"

using namespace dirmech;

TEST_CASE("bipartite instance round trip") {
  RngState g(1);
  const auto inst = gen::random_bipartite(g, 3, 4);
  const auto back = io::bipartite_from_json(io::parse(io::dump(io::to_json(inst))));
  CHECK(back.left == inst.left);
  CHECK(back.right == inst.right);
  REQUIRE(back.edges.size() == inst.edges.size());
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    CHECK(back.edges[e].u == inst.edges[e].u);
    CHECK(back.edges[e].v == inst.edges[e].v);
    CHECK(back.edges[e].x == inst.edges[e].x);
    CHECK(back.edges[e].rho == inst.edges[e].rho);
  }
}

TEST_CASE("stream and scheduling round trips") {
  RngState g(2);
  const auto s = gen::random_stream(g, 4, 6);
  const auto sb = io::stream_from_json(io::parse(io::dump(io::to_json(s))));
  REQUIRE(sb.arrivals.size() == s.arrivals.size());
  for (std::size_t a = 0; a < s.arrivals.size(); ++a) CHECK(sb.arrivals[a].demands == s.arrivals[a].demands);

  const auto inst = gen::random_scheduling(g, 2, 3);
  const auto ib = io::scheduling_from_json(io::parse(io::dump(io::to_json(inst))));
  CHECK(ib.p == inst.p);
  CHECK(ib.w == inst.w);
  CHECK(ib.x == inst.x);
}

TEST_CASE("doubles keep 17 digits") {
  const double v = 0.1 + 0.2;
  CHECK(io::fmt(v) == "0.30000000000000004");
  const auto text = io::dump(io::Json{{"v", v}});
  CHECK(io::parse(text)["v"].get<double>() == v);
  CHECK(io::dump(io::Json{{"nan", std::nan("")}}, -1) == "{\"nan\":null}");
}

TEST_CASE("malformed input is a validation error") {
  CHECK_THROWS_AS(io::parse("{"), ValidationError);
  CHECK_THROWS_AS(io::bipartite_from_json(io::parse(R"({"left": ["a"], "right": ["b"]})")), ValidationError);
  CHECK_THROWS_AS(io::bipartite_from_json(io::parse(R"({"left": ["a"], "right": ["b"],
      "edges": [{"u": "a", "v": "c", "x": 0.5, "rho": 0.5}]})")),
                  ValidationError);
  CHECK_THROWS_AS(io::bipartite_from_json(io::parse(R"({"left": ["a"], "right": ["b"],
      "edges": [{"u": "a", "v": "b", "x": "half", "rho": 0.5}]})")),
                  ValidationError);
  CHECK_THROWS_AS(io::stream_from_json(io::parse(R"({"offline": ["a"], "arrivals": [{"v": "x", "g": {"q": 0.1}}]})")),
                  ValidationError);
  CHECK_THROWS_AS(io::read_text("/nonexistent/file.json"), ValidationError);
}

TEST_CASE("validation errors list every problem") {
  try {
    io::bipartite_from_json(io::parse(R"({"left": ["a"], "right": ["b"],
        "edges": [{"u": "z", "v": "y", "x": 0.5, "rho": 0.5}]})"));
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.violations().size() == 2);
  }
}

TEST_CASE("report CSV") {
  BipartiteInstance inst{{"a"}, {"b"}, {{0, 0, 0.5, 0.3}}};
  const auto rep = estimate_stats(inst, 1000, RngState(3));
  const auto csv = io::to_csv(rep, inst);
  CHECK(csv.rfind("kind,ids,empirical,bound,half_width,pass\n", 0) == 0);
  CHECK(csv.find("marginal,") != std::string::npos);
}
