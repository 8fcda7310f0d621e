#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qgraph/errors.hpp"
#include "qgraph/kernel.hpp"
#include "qgraph/oracle.hpp"

using namespace qgraph;

namespace {

double heat(double t, double x) { return std::exp(-x * x / (4 * t)) / std::sqrt(4 * std::numbers::pi * t); }

// method of images on a star with equal conductivities, points measured from the centre
double star_images(int d, double t, int ex, double xi, int ey, double eta) {
  if (ex == ey) return heat(t, xi - eta) + (2.0 / d - 1.0) * heat(t, xi + eta);
  return 2.0 / d * heat(t, xi + eta);
}

}  // namespace

TEST_CASE("line graph reduces to the real-line kernel") {
  const MetricGraph g = build::segment(12, 1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double t : {0.01, 0.1}) {
    const KernelProfile f = KernelProfile::heat(t);
    const PathSumKernel k(g, f);
    for (int i = 0; i < 20; ++i) {
      const GraphPoint x{4 + static_cast<int>(4 * u(rng)), u(rng)};
      const GraphPoint y{4 + static_cast<int>(4 * u(rng)), u(rng)};
      const double d = std::fabs((x.edge + x.xi) - (y.edge + y.xi));
      CHECK(k(x, y) == doctest::Approx(heat(t, d)).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("star kernel against images") {
  for (int d : {3, 4}) {
    const MetricGraph g = build::star(d, 20.0);
    const double t = 0.05;
    const auto r = kernel_eval(g, KernelProfile::heat(t), {0, 0.5}, {{0, 0.7}, {1, 0.3}, {d - 1, 0.05}}, 1e-10);
    CHECK(r.values[0].value == doctest::Approx(star_images(d, t, 0, 0.5, 0, 0.7)).epsilon(1e-9));
    CHECK(r.values[1].value == doctest::Approx(star_images(d, t, 0, 0.5, 1, 0.3)).epsilon(1e-9));
    CHECK(r.values[2].value == doctest::Approx(star_images(d, t, 0, 0.5, d - 1, 0.05)).epsilon(1e-9));
    CHECK(closed_form_star_kernel(d, t, 0, 0.5, 1, 0.3) == doctest::Approx(star_images(d, t, 0, 0.5, 1, 0.3)));
  }
}

TEST_CASE("mass conservation and symmetry on a weighted graph") {
  const MetricGraph g = build::random(21, 5, 7, 0.6, 1.4, 0.5, 3.0);
  const double t = 0.1, eps = 1e-9;
  const KernelProfile f = KernelProfile::heat(t);
  const EdgeFunction one = EdgeFunction::sample(g, [](int, double) { return 1.0; }, 48.0);
  const ConvolutionResult c = convolve(g, f, one, eps);
  for (const auto& row : c.value.values)
    for (double v : row) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));

  const PathSumKernel k(g, f, {.eps = eps});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const int ex = static_cast<int>(u(rng) * g.num_edges()), ey = static_cast<int>(u(rng) * g.num_edges());
    const GraphPoint x{ex, u(rng) * g.length(ex)}, y{ey, u(rng) * g.length(ey)};
    CHECK(std::fabs(k(x, y) - k(y, x)) <= 2 * eps);
  }
}

TEST_CASE("kernel satisfies the vertex conditions") {
  const MetricGraph g = build::star(3, 2.0, {1.0, 2.0, 0.5});
  const BoundaryAudit a = boundary_condition_audit(g, KernelProfile::heat(0.1), {0, 0.6}, 1e-10);
  CHECK(a.max_spread <= 1e-8);
  CHECK(a.max_kirchhoff <= 1e-5);
}

TEST_CASE("truncation report meets the target") {
  const MetricGraph g = build::cycle(4, 1.0);
  const double eps = 1e-8;
  const PathSumKernel k(g, KernelProfile::heat(0.5), {.eps = eps});
  const TruncationReport r = k.worst_report();
  CHECK(r.pointwise <= eps);
  CHECK(r.integrated <= eps);
  CHECK(r.steps > 0);
}

TEST_CASE("exceeding the step budget is a numerical error") {
  const MetricGraph g = build::cycle(4, 0.05);
  KernelOptions opt;
  opt.eps = 1e-12;
  opt.max_steps = 3;
  const PathSumKernel k(g, KernelProfile::heat(1.0), opt);
  CHECK_THROWS_AS((void)k({0, 0.01}, {1, 0.02}), NumericalError);
}

TEST_CASE("semigroup agrees with the finite-difference oracle") {
  const MetricGraph g = build::cycle(4, 1.0);
  const DiscretizedOperator op = fd_assemble(g, {}, 1.0 / 100);
  EdgeFunction u0 = EdgeFunction::with_intervals(g, op.intervals);
  u0 = EdgeFunction::sample_like(u0, std::function<double(int, double)>([](int e, double xi) {
                                   return std::cos(std::numbers::pi * (e + xi) / 2.0) + 0.5;
                                 }));
  const auto heat = semigroup_apply(g, SemigroupKind::heat, 1, 0.1, 0.0, u0, 1e-10);
  CHECK(relative_l2(g, heat.value, fd_semigroup(op, 0.1, u0, 1)) < 1e-4);
  const auto bi = semigroup_apply(g, SemigroupKind::polyharmonic, 2, 0.05, 0.0, u0, 1e-10);
  CHECK(relative_l2(g, bi.value, fd_semigroup(op, 0.05, u0, 2)) < 1e-3);
  // cos(pi s / 2) on the 4-cycle is an eigenfunction with eigenvalue pi^2/4
  const double decay = std::exp(-0.1 * std::numbers::pi * std::numbers::pi / 4);
  CHECK(heat.value.values[0][0] == doctest::Approx(decay + 0.5).epsilon(1e-8));
}

TEST_CASE("chapman-kolmogorov on the 4-cycle") {
  const MetricGraph g = build::cycle(4, 1.0);
  const double eps = 1e-10, t = 0.05, s = 0.05;
  const GraphPoint x{1, 0.4};
  const PathSumKernel ks(g, KernelProfile::heat(s), {.eps = eps});
  const PathSumKernel kts(g, KernelProfile::heat(t + s), {.eps = eps});
  EdgeFunction u = EdgeFunction::zeros(g, 64.0);
  for (int e = 0; e < g.num_edges(); ++e)
    for (int j = 0; j <= u.intervals(e); ++j) u.values[e][j] = ks({e, u.xi(e, j)}, x);
  const ConvolutionResult c = convolve(g, KernelProfile::heat(t), u, eps);
  double worst = 0;
  for (int e = 0; e < g.num_edges(); ++e)
    for (int j = 0; j <= u.intervals(e); ++j)
      worst = std::max(worst, std::fabs(c.value.values[e][j] - kts({e, u.xi(e, j)}, x)));
  CHECK(worst <= 10 * (eps + c.quadrature_error + c.truncation_bound));
}

TEST_CASE("ultracontractivity exponent for heat") {
  const MetricGraph g = build::cycle(4, 1.0);
  const auto tab = ultracontractivity_probe(g, SemigroupKind::heat, 1, {1e-3, 1e-2, 1e-1}, 8);
  CHECK(tab.beta == doctest::Approx(0.5).epsilon(0.1));
}
