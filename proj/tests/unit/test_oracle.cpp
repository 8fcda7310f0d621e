#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qgraph/errors.hpp"
#include "qgraph/oracle.hpp"

using namespace qgraph;
using cplx = std::complex<double>;

constexpr double pi = std::numbers::pi;

TEST_CASE("assembly is symmetric with lumped mass") {
  const MetricGraph g = build::star(3, 1.0, {1.0, 2.0, 3.0});
  const DiscretizedOperator op = fd_assemble(g, [](int, double) { return 2.0; }, 0.05);
  CHECK((op.stiffness - op.stiffness.transpose()).norm() == 0.0);
  // total mass = int c dx
  CHECK(op.mass.sum() == doctest::Approx(6.0).epsilon(1e-12));
  CHECK_THROWS_AS(fd_assemble(g, {}, 0.5), InputError);
}

TEST_CASE("interval eigenvalues converge to (k pi)^2") {
  const MetricGraph g = build::interval(1.0);
  double prev = 0;
  for (double h : {1.0 / 50, 1.0 / 100}) {
    const auto ev = fd_eigenvalues(fd_assemble(g, {}, h));
    CHECK(std::fabs(ev[0]) < 1e-10);
    const double err = std::fabs(ev[2] - 4 * pi * pi);
    if (prev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("semigroup preserves constants and decays modes") {
  const MetricGraph g = build::cycle(4, 1.0);
  const DiscretizedOperator op = fd_assemble(g, {}, 0.02);
  EdgeFunction one = EdgeFunction::with_intervals(g, op.intervals);
  for (auto& r : one.values)
    for (double& v : r) v = 1.0;
  const EdgeFunction u = fd_semigroup(op, 0.7, one);
  for (const auto& r : u.values)
    for (double v : r) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("resolvent inverts the operator") {
  const MetricGraph g = build::cycle(3, 1.0);
  const DiscretizedOperator op = fd_assemble(g, {}, 0.05);
  ComplexEdgeFunction f = ComplexEdgeFunction::with_intervals(g, op.intervals);
  for (auto& r : f.values)
    for (auto& v : r) v = 1.0;
  const cplx z(-2.0, 0.5);
  const ComplexEdgeFunction u = fd_resolvent(op, z, f);
  // constants: (0 - z) u = 1
  CHECK(std::abs(u.values[0][3] - 1.0 / (-z)) < 1e-12);
  CHECK_THROWS_AS(fd_resolvent(op, cplx(0.0, 0.0), f), NumericalError);
}

TEST_CASE("star closed form is continuous at the centre") {
  for (int d : {3, 4, 5}) {
    const double a = closed_form_star_kernel(d, 0.1, 0, 0.3, 1, 0.0);
    const double b = closed_form_star_kernel(d, 0.1, 0, 0.3, 0, 0.0);
    const double c = closed_form_star_kernel(d, 0.1, 0, 0.3, d - 1, 0.0);
    CHECK(std::fabs(a - b) < 1e-14);
    CHECK(std::fabs(a - c) < 1e-14);
  }
}
