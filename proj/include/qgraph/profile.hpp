#pragma once

// Even kernel profiles on the real line: the heat kernel h_t, the polyharmonic
// kernels k_t of order m, and user-supplied profiles with explicit bounds.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qgraph {

class MetricGraph;

enum class ProfileKind { heat, polyharmonic, custom };

class KernelProfile {
 public:
  static KernelProfile heat(double t);
  /// Order m >= 1; m = 1 coincides with heat(t).
  static KernelProfile polyharmonic(int m, double t);
  /// Custom profile: value must be even, tail(r) >= int_r^inf |f|,
  /// envelope(r) >= sup_{|x| >= r} |f(x)|, both nonincreasing.
  static KernelProfile custom(std::string name, std::function<double(double)> value,
                              std::function<double(double)> tail,
                              std::function<double(double)> envelope);
  /// Even piecewise-linear profile through samples at k*dx (k = 0..n), zero past n*dx.
  static KernelProfile sampled(std::vector<double> samples, double dx,
                               std::string name = "sampled");

  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] double tail(double r) const;
  [[nodiscard]] double envelope(double r) const;
  /// int_a^b |f| for 0 <= a <= b (b may be +inf).
  [[nodiscard]] double abs_integral(double a, double b) const;
  /// int_R f.
  [[nodiscard]] double integral() const;

  [[nodiscard]] ProfileKind kind() const;
  [[nodiscard]] double time() const;
  [[nodiscard]] int order() const;
  [[nodiscard]] const std::string& name() const;
  /// Compact support radius, or +inf.
  [[nodiscard]] double support() const;

  /// sum_j w[j] f(shift + sign x[j]) through the SIMD kernels where available.
  [[nodiscard]] double weighted_sum(std::span<const double> x, std::span<const double> w,
                                    double shift, double sign) const;
  /// out[j] += coef f(shift + sign x[j]).
  void accumulate(std::span<double> out, std::span<const double> x, double shift, double sign,
                  double coef) const;

  struct Impl;

 private:
  explicit KernelProfile(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct WeightedNorm {
  double value = 0;
  int terms = 0;               // number of length-l panels summed
  std::vector<double> panel;   // int_{n l}^{(n+1) l} |f|
};

/// sum_{m>=0} 3^m int_{m l}^inf |f|. Throws NumericalError if the series does not
/// converge ("profile not in L1 for this l").
WeightedNorm l1_weighted_norm(const KernelProfile& f, double lmin);
double l1_weighted_norm(const KernelProfile& f, const MetricGraph& g);

/// Shift-operator constant: 1.1 * max over 64 shifts s in [-lmax, lmax] of
/// ||tau_s f|| / ||f|| in the weighted norm (symmetrised for non-even shifts).
double shift_constant(const KernelProfile& f, double lmin, double lmax);

/// Real-line convolution f*g, returned as a sampled profile on [0, radius].
KernelProfile profile_convolution(const KernelProfile& f, const KernelProfile& g, double dx,
                                  double radius);

/// The scaled polyharmonic profile g_m(y) = (1/pi) int_0^inf exp(-s^{2m}) cos(y s) ds
/// evaluated directly by contour-shifted quadrature (no table).
double polyharmonic_direct(int m, double y);

}  // namespace qgraph
