#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qgraph/errors.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/profile.hpp"

using namespace qgraph;

namespace {

// (1/pi) int_0^S exp(-s^{2m}) cos(y s) ds on the real axis
double g_real_axis(int m, double y) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double s = 0;
  for (int k = 0; k < 60; ++k)
    s += GK::integrate([&](double u) { return std::exp(-std::pow(u, 2 * m)) * std::cos(y * u); },
                       k * 0.1, (k + 1) * 0.1, 0);
  return s / std::numbers::pi;
}

}  // namespace

TEST_CASE("heat profile") {
  const double t = 0.37;
  const KernelProfile h = KernelProfile::heat(t);
  for (double x : {0.0, 0.3, 1.1, 2.5})
    CHECK(h(x) == doctest::Approx(std::exp(-x * x / (4 * t)) / std::sqrt(4 * std::numbers::pi * t)).epsilon(1e-14));
  CHECK(h.integral() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h.tail(0.8) == doctest::Approx(0.5 * std::erfc(0.8 / std::sqrt(4 * t))).epsilon(1e-10));
  CHECK(h.envelope(0.8) >= h(0.8));
  CHECK(h.kind() == ProfileKind::heat);
  CHECK_THROWS_AS(KernelProfile::heat(0.0), InputError);
}

TEST_CASE("polyharmonic profile against real-axis quadrature") {
  for (int m : {2, 3}) {
    for (double y : {0.0, 0.4, 1.5, 3.0}) CHECK(polyharmonic_direct(m, y) == doctest::Approx(g_real_axis(m, y)).epsilon(1e-11));
    const double t = 0.2;
    const KernelProfile k = KernelProfile::polyharmonic(m, t);
    const double s = std::pow(t, 1.0 / (2 * m));
    for (double x : {0.0, 0.1, 0.5, 1.0}) CHECK(k(x) == doctest::Approx(g_real_axis(m, x / s) / s).epsilon(1e-9));
    CHECK(k.integral() == doctest::Approx(1.0).epsilon(1e-9));
  }
  // g_2(0) = Gamma(5/4) / pi
  CHECK(polyharmonic_direct(2, 0.0) == doctest::Approx(std::tgamma(1.25) / std::numbers::pi).epsilon(1e-13));
  // m = 1 is the heat kernel
  CHECK(KernelProfile::polyharmonic(1, 0.3)(0.4) == doctest::Approx(KernelProfile::heat(0.3)(0.4)));
}

TEST_CASE("polyharmonic tails dominate the profile") {
  const KernelProfile k = KernelProfile::polyharmonic(2, 0.05);
  for (double r : {0.0, 0.2, 0.5, 1.0, 2.0}) {
    CHECK(k.tail(r) >= k.abs_integral(r, std::numeric_limits<double>::infinity()) * (1 - 1e-9));
    CHECK(k.envelope(r) >= std::fabs(k(r)));
    CHECK(k.envelope(r) >= std::fabs(k(r + 0.05)));
  }
}

TEST_CASE("sampled and custom profiles") {
  const KernelProfile s = KernelProfile::sampled({2.0, 1.0, 0.0}, 0.5);
  CHECK(s(0.25) == doctest::Approx(1.5));
  CHECK(s(-0.75) == doctest::Approx(0.5));
  CHECK(s(1.2) == 0.0);
  CHECK(s.integral() == doctest::Approx(2 * (0.5 * 1.5 + 0.5 * 0.5)));
  CHECK(s.support() == doctest::Approx(1.0));
  const KernelProfile c = KernelProfile::custom(
      "laplace", [](double x) { return 0.5 * std::exp(-std::fabs(x)); },
      [](double r) { return 0.5 * std::exp(-r); }, [](double r) { return 0.5 * std::exp(-r); });
  CHECK(c.integral() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("weighted L1 norm") {
  const KernelProfile h = KernelProfile::heat(0.05);
  const WeightedNorm n = l1_weighted_norm(h, 1.0);
  double direct = 0;
  for (int m = 0; m < 40; ++m) direct += std::pow(3.0, m) * h.tail(m * 1.0);
  CHECK(n.value == doctest::Approx(direct).epsilon(1e-10));
  // Laplace-type tail exp(-r) with l = 0.5 fails: 3 e^{-0.5} > 1
  const KernelProfile c = KernelProfile::custom(
      "laplace", [](double x) { return 0.5 * std::exp(-std::fabs(x)); },
      [](double r) { return 0.5 * std::exp(-r); }, [](double r) { return 0.5 * std::exp(-r); });
  CHECK_THROWS_AS(l1_weighted_norm(c, 0.5), NumericalError);
  CHECK_NOTHROW(l1_weighted_norm(c, 2.0));
}

TEST_CASE("profile convolution of heat kernels is a heat kernel") {
  const KernelProfile a = KernelProfile::heat(0.05), b = KernelProfile::heat(0.1);
  const KernelProfile ab = profile_convolution(a, b, 0.005, 3.0);
  const KernelProfile ref = KernelProfile::heat(0.15);
  for (double x : {0.0, 0.2, 0.6, 1.0}) CHECK(ab(x) == doctest::Approx(ref(x)).epsilon(1e-4));
}
