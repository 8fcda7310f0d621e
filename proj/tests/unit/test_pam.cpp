#include <doctest.h>

#include <cmath>

#include "qgraph/errors.hpp"
#include "qgraph/pam.hpp"

using namespace qgraph;

namespace {

MetricGraph necklace(int copies) {
  nlohmann::json j = {
      {"vertices", nlohmann::json::array({{{"id", "a"}}, {{"id", "b"}}})},
      {"edges", nlohmann::json::array({{{"id", "p"}, {"source", "a"}, {"target", "b"}, {"length", 1.0}, {"conductivity", 1.0}},
                                       {{"id", "q"}, {"source", "a"}, {"target", "b"}, {"length", 1.0}, {"conductivity", 1.0}}})},
      {"periodic", {{"copies", copies}, {"glue", nlohmann::json::array({nlohmann::json::array({"b", "a"})})}}}};
  return graph_from_json(j);
}

}  // namespace

TEST_CASE("law parsing and sampling") {
  const PotentialLaw b = PotentialLaw::parse("bernoulli:0.25,0,2");
  CHECK(b.kind == PotentialLaw::Kind::bernoulli);
  CHECK(b.p == 0.25);
  CHECK(b.hi == 2.0);
  CHECK(PotentialLaw::parse("uniform:-1,1").kind == PotentialLaw::Kind::uniform);
  CHECK(PotentialLaw::parse("constant:0.5").v0 == 0.5);
  CHECK_THROWS_AS(PotentialLaw::parse("gamma:1"), InputError);
  CHECK_THROWS_AS(PotentialLaw::parse("bernoulli:1.5,0,1"), InputError);
  CHECK_THROWS_AS(PotentialLaw::parse("uniform:2,1"), InputError);

  const MetricGraph g = necklace(200);
  const auto v = b.sample(g, 3, 0);
  REQUIRE(v.size() == 400);
  int hi = 0;
  for (double x : v) {
    CHECK((x == 0.0 || x == 2.0));
    hi += x == 2.0;
  }
  // 400 trials, p = 1/4: sd = sqrt(75) ~ 8.7
  CHECK(std::abs(hi - 100) < 35);
  CHECK(b.sample(g, 3, 0) == v);
  CHECK(b.sample(g, 3, 1) != v);
  for (double x : PotentialLaw::uniform(-1, 1).sample(g, 1, 0)) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("solution is positive and constant law is analytic") {
  const MetricGraph g = necklace(4);
  const EdgeFunction u = pam_solve(g, PotentialLaw::bernoulli(0.5, 0.0, 3.0), 1.0, 7);
  for (const auto& r : u.values)
    for (double x : r) {
      CHECK(x > 0.0);
      CHECK(x <= 1.0 + 1e-12);
    }
  const EdgeFunction c = pam_solve(g, PotentialLaw::constant(0.7), 2.0, 7);
  CHECK(c.values[0][3] == std::exp(-1.4));
}

TEST_CASE("moment table identities") {
  const MetricGraph g = necklace(4);
  const std::vector<double> times{0.0, 0.5, 1.0, 1.5, 2.0};
  PamOptions opt;
  opt.bootstrap = 200;
  const MomentTable tab = lyapunov_table(g, PotentialLaw::bernoulli(0.5, 0.0, 2.0), times, 3, 40, 9, opt);
  // Lambda_1(2t) and Lambda_2(t) share one reduction
  CHECK(tab.at(tab.time_index(1.0), 1).lambda == tab.at(tab.time_index(0.5), 2).lambda);
  CHECK(tab.at(tab.time_index(2.0), 1).lambda == tab.at(tab.time_index(1.0), 2).lambda);
  CHECK(tab.at(0, 3).lambda == 0.0);
  // Jensen: Lambda_p / p nondecreasing in p at each time
  for (int ti = 1; ti < 5; ++ti) {
    CHECK(tab.at(ti, 2).lambda / 2 >= tab.at(ti, 1).lambda - 1e-12);
    CHECK(tab.at(ti, 3).lambda / 3 >= tab.at(ti, 2).lambda / 2 - 1e-12);
  }
  for (const auto& c : tab.cells) {
    CHECK(c.ci_lo <= c.lambda + 1e-12);
    CHECK(c.ci_hi >= c.lambda - 1e-12);
  }
  CHECK(tab.min_u > 0.0);

  const MomentTable k = lyapunov_table(g, PotentialLaw::constant(0.3), times, 3, 10, 1, opt);
  for (const auto& c : k.cells) {
    CHECK(c.lambda == -static_cast<double>(c.p) * 0.3 * c.t);
    CHECK(c.ci_lo == c.lambda);
    CHECK(c.ci_hi == c.lambda);
  }

  const MomentTable again = lyapunov_table(g, PotentialLaw::bernoulli(0.5, 0.0, 2.0), times, 3, 40, 9, opt);
  for (std::size_t i = 0; i < tab.cells.size(); ++i) CHECK(again.cells[i].lambda == tab.cells[i].lambda);
}

TEST_CASE("intermittency report shape") {
  const MetricGraph g = necklace(4);
  PamOptions opt;
  opt.bootstrap = 200;
  const MomentTable tab = lyapunov_table(g, PotentialLaw::bernoulli(0.5, 0.0, 2.0), {0, 1, 2, 3, 4}, 3, 40, 5, opt);
  const IntermittencyReport r = intermittency_report(tab);
  CHECK(r.lambda_over_p.size() == 3);
  CHECK(r.gap.size() == 5);
  CHECK(r.gap[0] == 0.0);
  CHECK(r.fit_points >= 2);
  const MomentTable small = lyapunov_table(g, PotentialLaw::constant(0), {0, 1}, 2, 2, 5, opt);
  CHECK_THROWS_AS(intermittency_report(small), InputError);
}
