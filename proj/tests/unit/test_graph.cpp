#include <doctest.h>

#include <cmath>

#include "qgraph/errors.hpp"
#include "qgraph/graph.hpp"

using namespace qgraph;
using nlohmann::json;

namespace {

json two_edge_json() {
  return json::parse(R"({
    "vertices": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
    "edges": [
      {"id": "x", "source": "a", "target": "b", "length": 1.5, "conductivity": 2.0},
      {"id": "y", "source": "b", "target": "c", "length": 0.5, "conductivity": 1.0}
    ]})");
}

}  // namespace

TEST_CASE("graph json round trip") {
  const MetricGraph g = graph_from_json(two_edge_json());
  CHECK(g.num_vertices() == 3);
  CHECK(g.num_edges() == 2);
  CHECK(g.vertex_conductivity(g.vertex_index("b")) == doctest::Approx(3.0));
  CHECK(g.total_length() == doctest::Approx(2.0));
  const MetricGraph h = graph_from_json(g.to_json());
  CHECK(h.num_edges() == 2);
  CHECK(h.edge(0).length == 1.5);
  CHECK(h.edge(1).conductivity == 1.0);
}

TEST_CASE("schema validation") {
  json j = two_edge_json();
  j["edges"][0]["target"] = "a";
  CHECK_THROWS_AS(graph_from_json(j), InputError);

  j = two_edge_json();
  j["edges"][1]["length"] = 0.0;
  CHECK_THROWS_AS(graph_from_json(j), InputError);

  j = two_edge_json();
  j["edges"][0]["conductivity"] = -1.0;
  CHECK_THROWS_AS(graph_from_json(j), InputError);

  j = two_edge_json();
  j["vertices"].push_back({{"id", "lonely"}});
  CHECK_THROWS_AS(graph_from_json(j), InputError);

  j = two_edge_json();
  j["edges"][0]["source"] = "nowhere";
  CHECK_THROWS_AS(graph_from_json(j), InputError);
}

TEST_CASE("periodic unrolling") {
  const json j = json::parse(R"({
    "vertices": [{"id": "a"}, {"id": "b"}],
    "edges": [
      {"id": "p", "source": "a", "target": "b", "length": 1.0, "conductivity": 1.0},
      {"id": "q", "source": "a", "target": "b", "length": 1.0, "conductivity": 1.0}
    ],
    "periodic": {"copies": 8, "glue": [["b", "a"]]}})");
  const MetricGraph g = graph_from_json(j);
  CHECK(g.num_edges() == 16);
  CHECK(g.num_vertices() == 8);
  for (int v = 0; v < g.num_vertices(); ++v) CHECK(g.degree(v) == 4);
}

TEST_CASE("transfer coefficients on a weighted star") {
  const MetricGraph g = build::star(3, 1.0, {1.0, 2.0, 3.0});
  // all edges point away from the centre; -e arrives at the centre
  const DirectedEdge in0{0, true}, out0{0, false}, out1{1, false}, out2{2, false};
  CHECK(transfer_coefficient(g, in0, out1) == doctest::Approx(2.0 * 1.0 / 6.0));
  CHECK(transfer_coefficient(g, in0, out2) == doctest::Approx(2.0 * 1.0 / 6.0));
  CHECK(transfer_coefficient(g, in0, out0) == doctest::Approx(2.0 / 6.0 - 1.0));
  CHECK(transfer_coefficient(g, out0, out1) == 0.0);
  const DirectedEdge in2{2, true};
  CHECK(transfer_coefficient(g, in2, out0) == doctest::Approx(1.0));
}

TEST_CASE("distances") {
  const MetricGraph g = build::cycle(4, 1.0);
  const auto vd = vertex_distances(g);
  CHECK(vd[0][2] == doctest::Approx(2.0));
  CHECK(vd[1][3] == doctest::Approx(2.0));
  CHECK(point_distance(g, vd, {0, 0.25}, {2, 0.75}) == doctest::Approx(1.5));
  CHECK(point_distance(g, vd, {0, 0.25}, {0, 0.75}) == doctest::Approx(0.5));
  CHECK(point_distance(g, vd, {0, 0.1}, {3, 0.9}) == doctest::Approx(0.2));
}

TEST_CASE("points") {
  const MetricGraph g = build::cycle(4, 1.0);
  const GraphPoint p = parse_point(g, "e2:0.25");
  CHECK(p.edge == 2);
  CHECK(p.xi == 0.25);
  CHECK_THROWS_AS(parse_point(g, "e2"), InputError);
  CHECK_THROWS_AS(parse_point(g, "e9:0.1"), InputError);
  CHECK_THROWS_AS(parse_point(g, "e0:2"), InputError);
  CHECK(g.vertex_at({0, 1.0}) == 1);
  CHECK(g.vertex_at({0, 0.5}) == -1);
  CHECK(g.same_point({0, 1.0}, {1, 0.0}));
}

TEST_CASE("builders") {
  const MetricGraph t = build::tree(3, 4);
  CHECK(t.num_edges() == 3 + 6 + 12 + 24);
  CHECK(t.degree(0) == 3);
  const MetricGraph lat = build::lattice_torus(3, 3);
  CHECK(lat.num_vertices() == 27);
  CHECK(lat.num_edges() == 81);
  for (int v = 0; v < lat.num_vertices(); ++v) CHECK(lat.degree(v) == 6);
  const MetricGraph r = build::random(5, 6, 9, 0.5, 1.5, 0.2, 5.0);
  CHECK(r.num_edges() == 9);
  CHECK(r.min_length() >= 0.5);
  CHECK(r.min_conductivity() >= 0.2);
  const MetricGraph r2 = build::random(5, 6, 9, 0.5, 1.5, 0.2, 5.0);
  CHECK(r2.edge(4).length == r.edge(4).length);
}
