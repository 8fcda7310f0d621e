#include "qgraph/numerics.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qgraph/errors.hpp"

namespace qgraph {

int default_workers() {
  if (const char* env = std::getenv("QGRAPH_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return w;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, const std::function<void(int)>& fn, int workers) {
  if (workers <= 0) workers = default_workers();
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    const int lo = static_cast<int>(static_cast<long>(n) * w / workers);
    const int hi = static_cast<int>(static_cast<long>(n) * (w + 1) / workers);
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <class T>
std::vector<double> Chebyshev<T>::nodes(double a, double b, int n) {
  std::vector<double> x(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double u = std::cos(std::numbers::pi * k / n);
    x[k] = 0.5 * (a + b) + 0.5 * (b - a) * u;
  }
  return x;
}

template <class T>
Chebyshev<T> Chebyshev<T>::fit_values(double a, double b, const std::vector<T>& v) {
  const int n = static_cast<int>(v.size()) - 1;
  Chebyshev ch;
  ch.a = a;
  ch.b = b;
  ch.c.assign(n + 1, T{});
  std::vector<double> cs(2 * n);
  for (int q = 0; q < 2 * n; ++q) cs[q] = std::cos(std::numbers::pi * q / n);
  for (int j = 0; j <= n; ++j) {
    T s = 0.5 * (v[0] + v[n] * cs[(static_cast<long>(j) * n) % (2 * n)]);
    for (int k = 1; k < n; ++k) s += v[k] * cs[(static_cast<long>(j) * k) % (2 * n)];
    ch.c[j] = (2.0 / n) * s;
  }
  ch.c[0] *= 0.5;
  ch.c[n] *= 0.5;
  return ch;
}

template <class T>
Chebyshev<T> Chebyshev<T>::derivative() const {
  Chebyshev d;
  d.a = a;
  d.b = b;
  const int n = static_cast<int>(c.size()) - 1;
  if (n <= 0) {
    d.c = {T{}};
    return d;
  }
  d.c.assign(n, T{});
  // c'_{k-1} = c'_{k+1} + 2k c_k
  std::vector<T> dc(n + 2, T{});
  for (int k = n; k >= 1; --k) dc[k - 1] = dc[k + 1] + 2.0 * k * c[k];
  dc[0] *= 0.5;
  const double scale = 2.0 / (b - a);
  for (int k = 0; k < n; ++k) d.c[k] = dc[k] * scale;
  return d;
}

template <class T>
Chebyshev<T> Chebyshev<T>::integral() const {
  Chebyshev r;
  r.a = a;
  r.b = b;
  const int n = static_cast<int>(c.size());
  r.c.assign(n + 1, T{});
  const double half = 0.5 * (b - a);
  for (int k = 1; k <= n; ++k) {
    const T lo = c[k - 1] * (k == 1 ? 2.0 : 1.0);
    const T hi = k + 1 < n ? c[k + 1] : T{};
    r.c[k] = half * (lo - hi) / (2.0 * k);
  }
  r.c[0] = T{};
  r.c[0] = -r(a);
  return r;
}

template struct Chebyshev<double>;
template struct Chebyshev<cplx>;

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 double* error, unsigned max_depth) {
  if (a == b) {
    if (error) *error = 0.0;
    return 0.0;
  }
  double err = 0.0, l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, max_depth, tol, &err, &l1);
  if (error) *error = err * std::max(1.0, l1);
  return v;
}

std::vector<double> simpson_weights(int n, double h) {
  std::vector<double> w(n + 1, 0.0);
  if (n == 1) {
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  const int m = (n % 2 == 0) ? n : n - 3;  // even-part Simpson, then 3/8 on the last 3
  for (int i = 0; i + 2 <= m; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  if (m != n) {
    w[m] += 3.0 * h / 8.0;
    w[m + 1] += 9.0 * h / 8.0;
    w[m + 2] += 9.0 * h / 8.0;
    w[m + 3] += 3.0 * h / 8.0;
  }
  return w;
}

std::vector<std::vector<cplx>> rk45(const OdeRhs& f, double t0, std::vector<cplx> y,
                                    const std::vector<double>& outputs, double rtol, double atol) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const std::size_t n = y.size();
  std::vector<cplx> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  std::vector<std::vector<cplx>> out;
  out.reserve(outputs.size());
  double t = t0;
  double h = 1e-3;
  f(t, y, k1);
  for (double target : outputs) {
    while (target - t > 1e-15 * std::max(1.0, std::fabs(target))) {
      double step = std::min(h, target - t);
      for (int attempt = 0;; ++attempt) {
        if (attempt > 200 || step < 1e-14) throw NumericalError("rk45: step size underflow");
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * a21 * k1[i];
        f(t + c2 * step, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + step * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * step, tmp, k3);
        for (std::size_t i = 0; i < n; ++i)
          tmp[i] = y[i] + step * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * step, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
          tmp[i] = y[i] + step * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * step, tmp, k5);
        for (std::size_t i = 0; i < n; ++i)
          tmp[i] = y[i] + step * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        f(t + step, tmp, k6);
        for (std::size_t i = 0; i < n; ++i)
          ynew[i] = y[i] + step * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f(t + step, ynew, k7);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const cplx e = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                 e7 * k7[i]);
          const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
          err = std::max(err, std::abs(e) / sc);
        }
        if (err <= 1.0) {
          t = (step == target - t) ? target : t + step;
          y.swap(ynew);
          k1.swap(k7);
          const double fac = err > 0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
          h = std::max(h, step) * fac;
          break;
        }
        step *= std::max(0.1, 0.9 * std::pow(err, -0.2));
        h = step;
      }
    }
    out.push_back(y);
  }
  return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i] - fit.intercept - fit.slope * x[i];
    r += d * d;
  }
  fit.residual = std::sqrt(r / n);
  return fit;
}

double logsumexp(const std::vector<double>& x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace qgraph
