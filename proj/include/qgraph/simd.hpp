#pragma once

// Data-parallel inner loops used by the path-sum kernel and the quadrature
// code. Every kernel has a scalar reference implementation and an AVX2/FMA
// variant; the variant is chosen once at runtime from CPUID and can be
// overridden with QGRAPH_SIMD=scalar or force_isa().

#include <span>
#include <string_view>

namespace qgraph::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Best instruction set the running CPU supports.
Isa detected_isa();
/// Instruction set currently used by the dispatching entry points.
Isa active_isa();
/// Pin the dispatch target. Throws std::runtime_error if unsupported.
void force_isa(Isa isa);

/// Piecewise Chebyshev table on [0, x_end) with uniform panels, evaluated at
/// |x|. Coefficients are stored panel-major, `degree + 1` per panel.
struct PanelTable {
  double width = 1.0;
  int ncoef = 0;
  int npanels = 0;
  const double* coeffs = nullptr;

  [[nodiscard]] double x_end() const { return width * npanels; }
};

struct KernelSet {
  void (*exp)(std::span<const double> in, std::span<double> out);
  double (*dot)(std::span<const double> a, std::span<const double> b);
  // sum_j w[j] * exp(-(shift + sign*x[j])^2 * inv4t)
  double (*gaussian_weighted_sum)(std::span<const double> x, std::span<const double> w,
                                  double shift, double sign, double inv4t);
  // out[j] += coef * exp(-(shift + sign*x[j])^2 * inv4t)
  void (*gaussian_accumulate)(std::span<double> out, std::span<const double> x, double shift,
                              double sign, double inv4t, double coef);
  // sum_j w[j] * table(|shift + sign*x[j]|)
  double (*table_weighted_sum)(const PanelTable& table, std::span<const double> x,
                               std::span<const double> w, double shift, double sign);
  // out[j] += coef * table(|shift + sign*x[j]|)
  void (*table_accumulate)(const PanelTable& table, std::span<double> out,
                           std::span<const double> x, double shift, double sign, double coef);
};

/// Kernel table for a given ISA (used directly by the equivalence tests).
const KernelSet& kernels(Isa isa);

inline void exp(std::span<const double> in, std::span<double> out) {
  kernels(active_isa()).exp(in, out);
}
inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels(active_isa()).dot(a, b);
}
inline double gaussian_weighted_sum(std::span<const double> x, std::span<const double> w,
                                    double shift, double sign, double inv4t) {
  return kernels(active_isa()).gaussian_weighted_sum(x, w, shift, sign, inv4t);
}
inline void gaussian_accumulate(std::span<double> out, std::span<const double> x, double shift,
                                double sign, double inv4t, double coef) {
  kernels(active_isa()).gaussian_accumulate(out, x, shift, sign, inv4t, coef);
}
inline double table_weighted_sum(const PanelTable& table, std::span<const double> x,
                                 std::span<const double> w, double shift, double sign) {
  return kernels(active_isa()).table_weighted_sum(table, x, w, shift, sign);
}
inline void table_accumulate(const PanelTable& table, std::span<double> out,
                             std::span<const double> x, double shift, double sign, double coef) {
  kernels(active_isa()).table_accumulate(table, out, x, shift, sign, coef);
}

/// Scalar evaluation of a panel table at one point.
double table_eval(const PanelTable& table, double x);

}  // namespace qgraph::simd
