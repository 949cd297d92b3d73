#include "doctest.h"

#include <random>

#include "json.hpp"

#include "dilacov/errors.hpp"
#include "dilacov/io.hpp"
#include "random_instances.hpp"

using namespace dilacov;
using namespace dilacov::testsupport;

TEST_SUITE_BEGIN("io");

TEST_CASE("rational literals") {
  CHECK(parse_rational("3/2") == Rational(3, 2));
  CHECK(parse_rational("7") == Rational(7));
  CHECK(format_rational(Rational(1, 3)) == "1/3");
  CHECK(format_rational(Rational(4, 2)) == "2");
  CHECK_THROWS_AS(parse_rational("x"), FormatError);
  CHECK_THROWS_AS(parse_rational("1/0"), FormatError);
}

TEST_CASE("graph json round trip") {
  std::string text = R"({
    "cells": 6,
    "root": [0, 1, 0, 1, 0, 1],
    "involution": [0, 1, 3, 2, 5, 4],
    "genus": {"0": 1, "1": 0},
    "lengths": {"2-3": "3/2", "4-5": "1"}
  })";
  Graph g = graph_from_json(text);
  CHECK(g.vertices().size() == 2);
  CHECK(g.edges().size() == 2);
  CHECK(g.genus(0) == 1);
  CHECK(g.length(0) == Rational(3, 2));

  Graph again = graph_from_json(graph_to_json(g));
  CHECK(again.cell_count() == g.cell_count());
  for (int c = 0; c < g.cell_count(); ++c) {
    CHECK(again.root(c) == g.root(c));
    CHECK(again.involution(c) == g.involution(c));
  }
  CHECK(again.length(1) == g.length(1));

  CHECK_THROWS_AS(graph_from_json("{"), FormatError);
  CHECK_THROWS_AS(graph_from_json(R"({"cells": 1, "root": [0]})"), FormatError);
}

TEST_CASE("dilation json") {
  Graph theta = theta_graph(2);
  std::string text = R"({
    "group": "2,2",
    "vertices": {"0": "<10>", "1": "<10>"},
    "halfedges": {"2": "<10>"}
  })";
  DilationDatum d = dilation_from_json(theta, text);
  Group klein = make_group({2, 2});
  CHECK(d.group == klein);
  CHECK(d.assign[0] == parse_subgroup_literal(klein, "<10>"));
  CHECK(d.assign[theta.edges()[0].hmin] == parse_subgroup_literal(klein, "<10>"));
  CHECK(d.assign[theta.edges()[0].hmax] == parse_subgroup_literal(klein, "<10>"));
  CHECK(d.assign[theta.edges()[1].hmin].is_trivial());

  DilationDatum again = dilation_from_json(theta, dilation_to_json(theta, d));
  CHECK(again == d);

  // constraint violations surface as domain errors
  CHECK_THROWS_AS(
      dilation_from_json(theta, R"({"group": "2,2", "halfedges": {"2": "<10>"}})"), DomainError);
}

TEST_CASE("cover json round trip") {
  Graph theta = theta_graph(2);
  Group klein = make_group({2, 2});
  DilationDatum d = trivial_dilation(theta, klein);
  PairCochain eta;
  eta.pairs.assign(2, {klein.zero(), klein.zero()});
  eta.pairs[0].second = {1, 0};
  Cover c = build_cover(theta, d, eta, GenusMode::kPullback);
  Cover again = cover_from_json(klein, cover_to_json(c));
  CHECK(again.total.cell_count() == c.total.cell_count());
  CHECK(again.projection == c.projection);
  CHECK(again.datum == c.datum);
  CHECK(covers_isomorphic(c, again).isomorphic);

  // corrupting the action must fail certification
  nlohmann::json j = nlohmann::json::parse(cover_to_json(c));
  std::swap(j["action"]["gen0"][0], j["action"]["gen0"][1]);
  CHECK_THROWS_AS(cover_from_json(klein, j.dump()), CertificationError);
}

TEST_CASE("stratification export") {
  Graph theta = theta_graph(2);
  Group klein = make_group({2, 2});
  auto subs = enumerate_subgroups(klein);
  DilationDatum d = trivial_dilation(theta, klein);
  d.assign[0] = Subgroup::full(klein);
  d = validate_dilation(theta, klein, d.assign);
  std::string text = stratification_to_json(theta, datum_to_stratification(theta, d, subs));
  CHECK(text.find("<0>") != std::string::npos);
  CHECK(text.find("<01;10>") != std::string::npos);
}

TEST_CASE("dot export") {
  std::vector<int> root{0, 1, 0, 1, 0, 0};
  std::vector<int> inv{0, 1, 3, 2, 5, 4};
  std::map<int, int64_t> genus{{0, 2}, {1, 0}};
  std::map<std::pair<int, int>, Rational> len{{{2, 3}, Rational(5, 2)}, {{4, 5}, Rational(1)}};
  Graph g = validate_graph(root, inv, genus, len);
  std::string dot = graph_to_dot(g);
  CHECK(dot.find("v0 (g=2)") != std::string::npos);
  CHECK(dot.find("l=5/2") != std::string::npos);

  Group z2 = make_group({2});
  DilationDatum d = trivial_dilation(g, z2);
  PairCochain eta;
  eta.pairs.assign(g.edges().size(), {z2.zero(), z2.zero()});
  Cover c = build_cover(g, d, eta, GenusMode::kPullback);
  std::string cdot = cover_to_dot(c);
  CHECK(cdot.find("cluster_fiber0") != std::string::npos);
  CHECK(cdot.find("d=1") != std::string::npos);
}

TEST_SUITE_END();
