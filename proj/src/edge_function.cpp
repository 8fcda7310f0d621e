#include "qgraph/edge_function.hpp"

#include <algorithm>
#include <cmath>

#include "qgraph/errors.hpp"
#include "qgraph/numerics.hpp"

namespace qgraph {

template <class T>
EdgeFunctionT<T> EdgeFunctionT<T>::with_intervals(const MetricGraph& g,
                                                  const std::vector<int>& intervals) {
  EdgeFunctionT f;
  f.lengths.resize(g.num_edges());
  f.values.resize(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    if (intervals.at(e) < 1) throw InputError("edge grid needs at least one interval");
    f.lengths[e] = g.length(e);
    f.values[e].assign(intervals[e] + 1, T{});
  }
  return f;
}

template <class T>
EdgeFunctionT<T> EdgeFunctionT<T>::zeros(const MetricGraph& g, double per_unit, int min_intervals) {
  std::vector<int> n(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    n[e] = std::max(min_intervals, static_cast<int>(std::ceil(per_unit * g.length(e) - 1e-9)));
    n[e] += n[e] % 2;
  }
  return with_intervals(g, n);
}

template <class T>
EdgeFunctionT<T> EdgeFunctionT<T>::sample(const MetricGraph& g, const std::function<T(int, double)>& fn,
                                          double per_unit, int min_intervals) {
  EdgeFunctionT f = zeros(g, per_unit, min_intervals);
  for (int e = 0; e < f.num_edges(); ++e)
    for (int j = 0; j <= f.intervals(e); ++j) f.values[e][j] = fn(e, f.xi(e, j));
  return f;
}

template <class T>
T EdgeFunctionT<T>::eval(const GraphPoint& p) const {
  const auto& v = values.at(p.edge);
  const int n = static_cast<int>(v.size()) - 1;
  const double u = std::clamp(p.xi / lengths[p.edge], 0.0, 1.0) * n;
  if (n < 3) {
    const int k = std::min(static_cast<int>(u), n - 1);
    const double f = u - k;
    return v[k] * (1.0 - f) + v[k + 1] * f;
  }
  int k = static_cast<int>(std::floor(u)) - 1;
  k = std::clamp(k, 0, n - 3);
  const double s = u - k;  // nodes at 0, 1, 2, 3
  const double l0 = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  const double l1 = s * (s - 2) * (s - 3) / 2.0;
  const double l2 = -s * (s - 1) * (s - 3) / 2.0;
  const double l3 = s * (s - 1) * (s - 2) / 6.0;
  return l0 * v[k] + l1 * v[k + 1] + l2 * v[k + 2] + l3 * v[k + 3];
}

template <class T>
double EdgeFunctionT<T>::max_abs() const {
  double m = 0.0;
  for (const auto& v : values)
    for (const auto& x : v) m = std::max(m, static_cast<double>(std::abs(x)));
  return m;
}

template <class T>
double EdgeFunctionT<T>::vertex_spread(const MetricGraph& g) const {
  double spread = 0.0;
  for (int v = 0; v < g.num_vertices(); ++v) {
    const auto& out = g.outgoing(v);
    auto at = [&](DirectedEdge d) {
      return d.reversed ? values[d.edge].back() : values[d.edge].front();
    };
    const T ref = at(out.front());
    for (DirectedEdge d : out) spread = std::max(spread, static_cast<double>(std::abs(at(d) - ref)));
  }
  return spread;
}

template struct EdgeFunctionT<double>;
template struct EdgeFunctionT<std::complex<double>>;

double integral(const MetricGraph& g, const EdgeFunction& f) {
  CompensatedSum s;
  for (int e = 0; e < f.num_edges(); ++e) {
    const auto w = simpson_weights(f.intervals(e), f.h(e));
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * f.values[e][j];
    s.add(g.conductivity(e) * acc);
  }
  return s.value();
}

std::complex<double> inner(const MetricGraph& g, const ComplexEdgeFunction& a,
                           const ComplexEdgeFunction& b) {
  std::complex<double> s{};
  for (int e = 0; e < a.num_edges(); ++e) {
    const auto w = simpson_weights(a.intervals(e), a.h(e));
    std::complex<double> acc{};
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * std::conj(a.values[e][j]) * b.values[e][j];
    s += g.conductivity(e) * acc;
  }
  return s;
}

double l2_norm(const MetricGraph& g, const ComplexEdgeFunction& f) {
  return std::sqrt(std::max(0.0, inner(g, f, f).real()));
}

double l2_norm(const MetricGraph& g, const EdgeFunction& f) {
  double s = 0.0;
  for (int e = 0; e < f.num_edges(); ++e) {
    const auto w = simpson_weights(f.intervals(e), f.h(e));
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * f.values[e][j] * f.values[e][j];
    s += g.conductivity(e) * acc;
  }
  return std::sqrt(std::max(0.0, s));
}

EdgeFunction difference(const EdgeFunction& a, const EdgeFunction& b) {
  EdgeFunction d = a;
  for (int e = 0; e < a.num_edges(); ++e) {
    if (a.values[e].size() != b.values.at(e).size()) throw InputError("edge functions on different grids");
    for (std::size_t j = 0; j < a.values[e].size(); ++j) d.values[e][j] -= b.values[e][j];
  }
  return d;
}

double relative_l2(const MetricGraph& g, const EdgeFunction& a, const EdgeFunction& b) {
  return l2_norm(g, difference(a, b)) / l2_norm(g, b);
}

double relative_l2(const MetricGraph& g, const ComplexEdgeFunction& a,
                   const ComplexEdgeFunction& b) {
  ComplexEdgeFunction d = a;
  for (int e = 0; e < a.num_edges(); ++e) {
    if (a.values[e].size() != b.values.at(e).size()) throw InputError("edge functions on different grids");
    for (std::size_t j = 0; j < a.values[e].size(); ++j) d.values[e][j] -= b.values[e][j];
  }
  return l2_norm(g, d) / l2_norm(g, b);
}

}  // namespace qgraph
