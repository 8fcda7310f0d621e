#include <doctest.h>

#include <cmath>
#include <map>

#include "qgraph/graph.hpp"
#include "qgraph/paths.hpp"

using namespace qgraph;

TEST_CASE("enumeration matches line-graph powers") {
  const MetricGraph g = build::random(11, 5, 8, 0.5, 2.0, 0.2, 5.0);
  for (int d = 0; d < g.num_directed(); ++d) {
    const DirectedEdge e = DirectedEdge::from_index(d);
    const auto paths = enumerate_paths(g, e, 5);
    std::map<int, std::uint64_t> per_step;
    for (const Path& p : paths) ++per_step[p.steps()];
    for (int m = 0; m <= 5; ++m) CHECK(per_step[m] == path_count_check(g, e, m));
  }
}

TEST_CASE("path length and transfer") {
  const MetricGraph g = build::star(3, 2.0, {1.0, 2.0, 3.0});
  const Path p = make_path(g, {{0, true}, {1, false}, {1, true}, {2, false}});
  CHECK(p.steps() == 3);
  CHECK(p.length == doctest::Approx(6.0));
  // centre: 2c/c(v) - delta; leaf v2: 2*2/2 - 1 = 1
  const double t1 = 2.0 * 1.0 / 6.0;
  const double t2 = 1.0;
  const double t3 = 2.0 * 2.0 / 6.0;
  CHECK(p.transfer == doctest::Approx(t1 * t2 * t3));
  const Path r = p.reversed(g);
  CHECK(r.edges.front() == DirectedEdge{2, true});
  // T_P / c(e_0) = T_{-P} / c(e_m)
  CHECK(p.transfer / g.conductivity(p.edges.front()) ==
        doctest::Approx(r.transfer / g.conductivity(r.edges.front())));
}

TEST_CASE("pruning drops only small subtrees") {
  const MetricGraph g = build::cycle(5, 1.0);
  const auto all = enumerate_paths(g, {0, false}, 6);
  const auto pruned = enumerate_paths(g, {0, false}, 6, 1e-3, [](double L) { return std::exp(-L * L); });
  CHECK(pruned.size() < all.size());
  for (const Path& p : pruned)
    CHECK(std::fabs(p.transfer) * std::pow(3.0, 6 - p.steps()) * std::exp(-p.length * p.length) >= 1e-3);
}

TEST_CASE("transfer audit on random graphs") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MetricGraph g = build::random(seed, 8, 14, 0.3, 2.0, 0.2, 5.0);
    const TransferAudit a = transfer_identities_audit(g, 8);
    CHECK(a.ok(1e-12));
    CHECK(a.max_path_ratio <= 1.0 + 1e-12);
  }
}

TEST_CASE("degree-two vertices transmit fully") {
  const MetricGraph g = build::cycle(4, 1.0);
  const auto paths = enumerate_paths(g, {0, false}, 4);
  for (const Path& p : paths) CHECK(std::fabs(p.transfer) <= 1.0);
  // equal conductivities: straight continuation has T = 1, back-scatter T = 0
  CHECK(transfer_coefficient(g, {0, false}, {1, false}) == doctest::Approx(1.0));
  CHECK(transfer_coefficient(g, {0, false}, {0, true}) == doctest::Approx(0.0));
}
