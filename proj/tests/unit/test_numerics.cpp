#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numbers>

#include "qgraph/numerics.hpp"

using namespace qgraph;

TEST_CASE("chebyshev fit, derivative and antiderivative") {
  const auto f = Chebyshev<double>::fit([](double x) { return std::exp(x) * std::sin(3 * x); }, -1.0, 2.0, 40);
  for (double x : {-1.0, -0.3, 0.7, 1.9, 2.0}) {
    CHECK(f(x) == doctest::Approx(std::exp(x) * std::sin(3 * x)).epsilon(1e-13));
    CHECK(f.derivative()(x) ==
          doctest::Approx(std::exp(x) * (std::sin(3 * x) + 3 * std::cos(3 * x))).epsilon(1e-10));
  }
  const auto F = Chebyshev<double>::fit([](double x) { return std::cos(x); }, 0.0, 2.0, 30).integral();
  CHECK(F(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(F(1.3) == doctest::Approx(std::sin(1.3)).epsilon(1e-13));
  CHECK(f.tail_magnitude() < 1e-12);
}

TEST_CASE("simpson weights integrate cubics exactly") {
  for (int n : {1, 2, 3, 5, 8}) {
    const double h = 1.7 / n;
    const auto w = simpson_weights(n, h);
    REQUIRE(static_cast<int>(w.size()) == n + 1);
    double s = 0;
    for (int j = 0; j <= n; ++j) s += w[j] * (n == 1 ? 1.0 + j * h : std::pow(j * h, 3));
    const double exact = n == 1 ? 1.7 + 1.7 * 1.7 / 2 : std::pow(1.7, 4) / 4;
    CHECK(s == doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("adaptive quadrature") {
  double err = 0;
  const double v = integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0, 1e-14, &err);
  CHECK(v == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));
  CHECK(err < 1e-12);
}

TEST_CASE("rk45 harmonic oscillator") {
  const cplx w(2.0, 0.3);
  const auto ys = rk45(
      [w](double, const std::vector<cplx>& y, std::vector<cplx>& dy) {
        dy[0] = y[1];
        dy[1] = -w * w * y[0];
      },
      0.0, {1.0, 0.0}, {0.5, 1.0}, 1e-12, 1e-14);
  REQUIRE(ys.size() == 2);
  CHECK(std::abs(ys[1][0] - std::cos(w)) < 1e-10);
  CHECK(std::abs(ys[1][1] + w * std::sin(w)) < 1e-10);
}

TEST_CASE("linear fit, logsumexp, compensated sum") {
  const LinearFit lf = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(lf.slope == doctest::Approx(2.0));
  CHECK(lf.intercept == doctest::Approx(1.0));
  CHECK(lf.residual < 1e-12);
  CHECK(logsumexp({1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 10; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 10.0);
}

TEST_CASE("parallel_for covers every index once") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(1000, [&](int i) { hits[i]++; }, 4);
  for (auto& h : hits) CHECK(h.load() == 1);
}
