#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qgraph/errors.hpp"
#include "qgraph/kernel.hpp"
#include "qgraph/stochastic.hpp"

using namespace qgraph;

TEST_CASE("streams depend only on seed and index") {
  auto a = trajectory_rng(5, 17), b = trajectory_rng(5, 17), c = trajectory_rng(5, 18), d = trajectory_rng(6, 17);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("config validation") {
  WalkConfig cfg;
  cfg.dt = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.n = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  CHECK(cfg.variance_rate() == 2.0);
  cfg.scale = GeneratorScale::half_delta;
  CHECK(cfg.variance_rate() == 1.0);
}

TEST_CASE("trajectories stay on the graph and are reproducible") {
  const MetricGraph g = build::star(3, 1.0, {1.0, 2.0, 3.0});
  WalkConfig cfg;
  cfg.t = 0.5;
  cfg.dt = 1e-2;
  cfg.n = 20;
  cfg.seed = 4;
  const auto a = simulate_bm(g, {0, 0.5}, cfg);
  cfg.workers = 1;
  const auto b = simulate_bm(g, {0, 0.5}, cfg);
  REQUIRE(a.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].points.size() == 51);
    CHECK(a[i].points.back().time == doctest::Approx(0.5));
    for (std::size_t k = 0; k < a[i].points.size(); ++k) {
      const GraphPoint& p = a[i].points[k].point;
      CHECK(p.xi >= 0.0);
      CHECK(p.xi <= g.length(p.edge));
      CHECK(p.edge == b[i].points[k].point.edge);
      CHECK(p.xi == b[i].points[k].point.xi);
    }
  }
}

TEST_CASE("vertex scattering follows c(e)/c(v)") {
  const MetricGraph g = build::star(3, 1.0, {1.0, 2.0, 3.0});
  const ScatteringReport r = vertex_scattering(g, 0, 20000, 11);
  REQUIRE(r.expected.size() == 3);
  CHECK(r.expected[2] == doctest::Approx(0.5));
  CHECK(r.max_z <= 3.0);
  CHECK(r.p_value > 1e-3);
}

TEST_CASE("feynman-kac with a constant potential is exact") {
  const MetricGraph g = build::cycle(4, 1.0);
  WalkConfig cfg;
  cfg.t = 0.3;
  cfg.dt = 1e-2;
  cfg.n = 200;
  const auto est = feynman_kac(g, {1, 0.2}, [](int, double) { return 1.5; }, [](int, double) { return 1.0; }, cfg);
  CHECK(est.estimate == doctest::Approx(std::exp(-1.5 * 0.3)).epsilon(1e-12));
  CHECK(est.se < 1e-12);
}

TEST_CASE("feynman-kac against the kernel") {
  const MetricGraph g = build::star(3, 1.0, {1.0, 2.0, 0.5});
  const double t = 0.1;
  auto f = [](int e, double xi) { return e == 0 ? std::cos(xi) : std::cos(xi) * (1.0 + 0.5 * e * xi); };
  const EdgeFunction fe = EdgeFunction::sample(g, f, 64.0);
  const ConvolutionResult ref = convolve(g, KernelProfile::heat(t), fe, 1e-10);
  WalkConfig cfg;
  cfg.t = t;
  cfg.dt = 1e-3;
  cfg.n = 20000;
  cfg.seed = 2;
  const GraphPoint x{1, 0.3};
  const auto est = feynman_kac(g, x, GraphFunction{}, f, cfg);
  CHECK(std::fabs(est.estimate - ref.value.eval(x)) <= 3 * est.se);
}

TEST_CASE("generator scale halves the spread") {
  const MetricGraph g = build::segment(40, 1.0);
  WalkConfig cfg;
  cfg.t = 1.0;
  cfg.dt = 1e-2;
  cfg.n = 4000;
  cfg.seed = 8;
  auto var = [&](GeneratorScale s) {
    cfg.scale = s;
    const auto tr = simulate_bm(g, {20, 0.0}, cfg, false);
    double m2 = 0;
    for (const auto& tj : tr) {
      const auto& p = tj.points.back().point;
      const double d = p.edge + p.xi - 20.0;
      m2 += d * d;
    }
    return m2 / cfg.n;
  };
  CHECK(var(GeneratorScale::delta) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(var(GeneratorScale::half_delta) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("martingale audit on the lattice torus") {
  const MetricGraph lat = build::lattice_torus(3, 3);
  WalkConfig cfg;
  cfg.t = 0.5;
  cfg.dt = 5e-3;
  cfg.n = 20000;
  cfg.seed = 3;
  const MartingaleReport r = martingale_audit(lat, 0, cfg);
  CHECK(r.pass);
  CHECK_THROWS_AS(martingale_audit(build::cycle(4, 1.0), 0, cfg), UnsupportedConfiguration);
}

TEST_CASE("kernel estimate envelope") {
  const MetricGraph fit = build::segment(6, 1.0);
  const MetricGraph check = build::lattice_torus(3, 2);
  const std::vector<double> ts{0.01, 0.03, 0.1};
  const KernelEstimateReport r = kernel_estimate_audit(fit, check, 2, ts);
  CHECK(r.fit.exponent == doctest::Approx(4.0 / 3.0));
  CHECK(r.fit.rms < r.linear_fit.rms);
  CHECK(r.worst_margin_fit >= -1e-12);
  CHECK(r.envelope_holds);
  CHECK(r.fit.c2 > 0.0);

  const KernelEstimateReport h = kernel_estimate_audit(fit, check, 1, ts);
  CHECK(h.envelope_holds);
  CHECK(h.schrodinger_ratio > 0.0);
  CHECK(h.schrodinger_ratio <= 1.0);
  const KernelEstimateReport hv = kernel_estimate_audit(fit, check, 1, ts, [](int, double x) { return 3.0 * x; });
  CHECK(hv.schrodinger_ratio <= 1.0);
}
