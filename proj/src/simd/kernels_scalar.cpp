#include <cmath>
#include <cstddef>

#include "kernels.hpp"

namespace qgraph::simd {

double table_eval(const PanelTable& table, double x) {
  const double ax = std::fabs(x);
  if (!(ax < table.x_end())) return 0.0;
  int p = static_cast<int>(ax / table.width);
  if (p >= table.npanels) p = table.npanels - 1;
  const double u = 2.0 * (ax - p * table.width) / table.width - 1.0;
  const double* c = table.coeffs + static_cast<std::ptrdiff_t>(p) * table.ncoef;
  // Clenshaw recurrence
  double b1 = 0.0, b2 = 0.0;
  for (int k = table.ncoef - 1; k >= 1; --k) {
    const double b0 = c[k] + 2.0 * u * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return c[0] + u * b1 - b2;
}

namespace scalar {
namespace {

void exp_impl(std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::exp(in[i]);
}

double dot_impl(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double gaussian_weighted_sum_impl(std::span<const double> x, std::span<const double> w,
                                  double shift, double sign, double inv4t) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double a = shift + sign * x[j];
    s += w[j] * std::exp(-a * a * inv4t);
  }
  return s;
}

void gaussian_accumulate_impl(std::span<double> out, std::span<const double> x, double shift,
                              double sign, double inv4t, double coef) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double a = shift + sign * x[j];
    out[j] += coef * std::exp(-a * a * inv4t);
  }
}

double table_weighted_sum_impl(const PanelTable& table, std::span<const double> x,
                               std::span<const double> w, double shift, double sign) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * table_eval(table, shift + sign * x[j]);
  return s;
}

void table_accumulate_impl(const PanelTable& table, std::span<double> out,
                           std::span<const double> x, double shift, double sign, double coef) {
  for (std::size_t j = 0; j < x.size(); ++j) out[j] += coef * table_eval(table, shift + sign * x[j]);
}

}  // namespace

const KernelSet& kernel_set() {
  static const KernelSet set{exp_impl,
                             dot_impl,
                             gaussian_weighted_sum_impl,
                             gaussian_accumulate_impl,
                             table_weighted_sum_impl,
                             table_accumulate_impl};
  return set;
}

}  // namespace scalar
}  // namespace qgraph::simd
