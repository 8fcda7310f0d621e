#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "qgraph/graph.hpp"

namespace qgraph {

/// Function on the metric graph, sampled per edge on a uniform grid
/// xi_j = j |e| / n_e, j = 0..n_e.
template <class T>
struct EdgeFunctionT {
  std::vector<double> lengths;
  std::vector<std::vector<T>> values;

  static EdgeFunctionT zeros(const MetricGraph& g, double per_unit = 64.0, int min_intervals = 2);
  static EdgeFunctionT with_intervals(const MetricGraph& g, const std::vector<int>& intervals);
  static EdgeFunctionT sample(const MetricGraph& g, const std::function<T(int, double)>& fn,
                              double per_unit = 64.0, int min_intervals = 2);
  /// Same grid as `like`, values from fn.
  template <class U>
  static EdgeFunctionT sample_like(const EdgeFunctionT<U>& like,
                                   const std::function<T(int, double)>& fn) {
    EdgeFunctionT f;
    f.lengths = like.lengths;
    f.values.resize(like.values.size());
    for (std::size_t e = 0; e < like.values.size(); ++e) {
      const int n = static_cast<int>(like.values[e].size()) - 1;
      f.values[e].resize(n + 1);
      for (int j = 0; j <= n; ++j) f.values[e][j] = fn(static_cast<int>(e), f.lengths[e] * j / n);
    }
    return f;
  }

  [[nodiscard]] int num_edges() const { return static_cast<int>(values.size()); }
  [[nodiscard]] int intervals(int e) const { return static_cast<int>(values[e].size()) - 1; }
  [[nodiscard]] double h(int e) const { return lengths[e] / intervals(e); }
  [[nodiscard]] double xi(int e, int j) const { return lengths[e] * j / intervals(e); }
  [[nodiscard]] std::size_t size() const {
    std::size_t s = 0;
    for (const auto& v : values) s += v.size();
    return s;
  }

  /// Cubic (4-point) interpolation inside the edge.
  [[nodiscard]] T eval(const GraphPoint& p) const;
  [[nodiscard]] double max_abs() const;
  /// Largest disagreement between samples meeting at a vertex.
  [[nodiscard]] double vertex_spread(const MetricGraph& g) const;
  [[nodiscard]] bool vertex_continuous(const MetricGraph& g, double tol = 1e-9) const {
    return vertex_spread(g) <= tol;
  }
};

using EdgeFunction = EdgeFunctionT<double>;
using ComplexEdgeFunction = EdgeFunctionT<std::complex<double>>;

/// Simpson-weighted integral over the graph with measure c(e) dxi.
double integral(const MetricGraph& g, const EdgeFunction& f);
/// c-weighted L2 norm and inner product (conjugate-linear in the first slot).
double l2_norm(const MetricGraph& g, const EdgeFunction& f);
double l2_norm(const MetricGraph& g, const ComplexEdgeFunction& f);
std::complex<double> inner(const MetricGraph& g, const ComplexEdgeFunction& a,
                           const ComplexEdgeFunction& b);
/// ||a - b||_2 / ||b||_2 on a common grid.
double relative_l2(const MetricGraph& g, const EdgeFunction& a, const EdgeFunction& b);
double relative_l2(const MetricGraph& g, const ComplexEdgeFunction& a,
                   const ComplexEdgeFunction& b);
/// a - b on a common grid.
EdgeFunction difference(const EdgeFunction& a, const EdgeFunction& b);

}  // namespace qgraph
