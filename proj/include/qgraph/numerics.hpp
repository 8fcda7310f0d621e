#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace qgraph {

using cplx = std::complex<double>;

/// Worker count from QGRAPH_WORKERS, else the hardware concurrency.
int default_workers();
/// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = default).
/// Work is split into contiguous blocks so results written by index are deterministic.
void parallel_for(int n, const std::function<void(int)>& fn, int workers = 0);

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      c_ += (sum_ - t) + x;
    else
      c_ += (x - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0, c_ = 0.0;
};

/// Chebyshev series on [a, b].
template <class T>
struct Chebyshev {
  double a = 0.0, b = 1.0;
  std::vector<T> c;

  /// Interpolate through the n+1 Chebyshev-Lobatto points cos(pi k/n).
  static Chebyshev fit_values(double a, double b, const std::vector<T>& values_at_nodes);
  static std::vector<double> nodes(double a, double b, int n);
  static Chebyshev fit(const std::function<T(double)>& f, double a, double b, int n) {
    std::vector<T> v;
    for (double x : nodes(a, b, n)) v.push_back(f(x));
    return fit_values(a, b, v);
  }

  [[nodiscard]] T operator()(double x) const {
    const double u = (2.0 * x - a - b) / (b - a);
    T b1{}, b2{};
    for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
      const T b0 = c[k] + 2.0 * u * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    return c.empty() ? T{} : c[0] + u * b1 - b2;
  }
  [[nodiscard]] Chebyshev derivative() const;
  /// Antiderivative vanishing at a.
  [[nodiscard]] Chebyshev integral() const;
  /// Size of the trailing coefficients, a proxy for the truncation error.
  [[nodiscard]] double tail_magnitude(int count = 3) const {
    double s = 0.0;
    for (int k = std::max<int>(0, static_cast<int>(c.size()) - count); k < static_cast<int>(c.size()); ++k)
      s += std::abs(c[k]);
    return s;
  }
};

/// Adaptive Gauss-Kronrod (boost) with absolute error estimate.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                 double* error = nullptr, unsigned max_depth = 15);

/// Composite Simpson weights for n uniform intervals of width h (3/8 rule closes odd n;
/// trapezoid for n = 1).
std::vector<double> simpson_weights(int n, double h);

/// Dormand-Prince 5(4) for y' = F(t, y) with complex state. Returns the state at each
/// requested output time (ascending, starting at or after t0).
using OdeRhs = std::function<void(double t, const std::vector<cplx>& y, std::vector<cplx>& dy)>;
std::vector<std::vector<cplx>> rk45(const OdeRhs& f, double t0, std::vector<cplx> y0,
                                    const std::vector<double>& outputs, double rtol = 1e-12,
                                    double atol = 1e-14);

struct LinearFit {
  double slope = 0, intercept = 0, residual = 0;  // residual: RMS
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// log(sum exp(x_i)) without overflow.
double logsumexp(const std::vector<double>& x);

}  // namespace qgraph
