#include "qgraph/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <lapacke.h>

#include "qgraph/errors.hpp"

namespace qgraph {

DiscretizedOperator fd_assemble(const MetricGraph& g, const Potential& V, double h) {
  if (!(h > 0.0)) throw InputError("mesh width must be positive");
  if (h > g.min_length() / 4.0 * (1.0 + 1e-12))
    throw InputError("mesh too coarse: h must be <= shortest edge / 4");
  DiscretizedOperator op;
  op.graph = &g;
  const int nv = g.num_vertices();
  op.intervals.resize(g.num_edges());
  op.index.resize(g.num_edges());
  int next = nv;
  for (int e = 0; e < g.num_edges(); ++e) {
    const int n = static_cast<int>(std::ceil(g.length(e) / h - 1e-9));
    op.intervals[e] = n;
    op.index[e].resize(n + 1);
    op.index[e][0] = g.edge(e).source;
    op.index[e][n] = g.edge(e).target;
    for (int j = 1; j < n; ++j) op.index[e][j] = next++;
  }
  op.size = next;
  if (op.size > kOracleMaxUnknowns)
    throw UnsupportedConfiguration("oracle refuses more than 4000 unknowns");

  op.mass = Eigen::VectorXd::Zero(op.size);
  op.stiffness = Eigen::MatrixXd::Zero(op.size, op.size);
  for (int e = 0; e < g.num_edges(); ++e) {
    const int n = op.intervals[e];
    const double he = g.length(e) / n;
    const double c = g.conductivity(e);
    for (int j = 0; j <= n; ++j) {
      const int r = op.index[e][j];
      const double m = (j == 0 || j == n) ? 0.5 * c * he : c * he;
      op.mass[r] += m;
      if (V) op.stiffness(r, r) += m * V(e, he * j);
    }
    for (int j = 0; j < n; ++j) {
      const int a = op.index[e][j], b = op.index[e][j + 1];
      const double k = c / he;
      op.stiffness(a, a) += k;
      op.stiffness(b, b) += k;
      op.stiffness(a, b) -= k;
      op.stiffness(b, a) -= k;
    }
  }
  return op;
}

const DiscretizedOperator::Eigen_& DiscretizedOperator::eigen() const {
  if (eig_) return *eig_;
  auto out = std::make_shared<Eigen_>();
  const Eigen::VectorXd is = mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd B = is.asDiagonal() * stiffness * is.asDiagonal();
  B = 0.5 * (B + B.transpose()).eval();
  out->values.resize(size);
  // column-major, lower triangle
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', size, B.data(), size,
                                         out->values.data());
  if (info != 0) throw NumericalError("oracle eigensolver failed (dsyevd info " + std::to_string(info) + ")");
  out->vectors = std::move(B);
  eig_ = out;
  return *eig_;
}

Eigen::VectorXd DiscretizedOperator::restrict(const EdgeFunction& f) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
  for (int e = 0; e < graph->num_edges(); ++e) {
    const int n = intervals[e];
    const bool same = f.intervals(e) == n;
    for (int j = 0; j <= n; ++j) {
      const double x = graph->length(e) * j / n;
      v[index[e][j]] = same ? f.values[e][j] : f.eval({e, x});
    }
  }
  return v;
}

Eigen::VectorXcd DiscretizedOperator::restrict(const ComplexEdgeFunction& f) const {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(size);
  for (int e = 0; e < graph->num_edges(); ++e) {
    const int n = intervals[e];
    const bool same = f.intervals(e) == n;
    for (int j = 0; j <= n; ++j) {
      const double x = graph->length(e) * j / n;
      v[index[e][j]] = same ? f.values[e][j] : f.eval({e, x});
    }
  }
  return v;
}

EdgeFunction DiscretizedOperator::extend(const Eigen::VectorXd& v) const {
  EdgeFunction f = EdgeFunction::with_intervals(*graph, intervals);
  for (int e = 0; e < graph->num_edges(); ++e)
    for (int j = 0; j <= intervals[e]; ++j) f.values[e][j] = v[index[e][j]];
  return f;
}

ComplexEdgeFunction DiscretizedOperator::extend(const Eigen::VectorXcd& v) const {
  ComplexEdgeFunction f = ComplexEdgeFunction::with_intervals(*graph, intervals);
  for (int e = 0; e < graph->num_edges(); ++e)
    for (int j = 0; j <= intervals[e]; ++j) f.values[e][j] = v[index[e][j]];
  return f;
}

Eigen::VectorXd DiscretizedOperator::apply_generator(const Eigen::VectorXd& u) const {
  return -(stiffness * u).cwiseQuotient(mass);
}

EdgeFunction fd_semigroup(const DiscretizedOperator& op, double t, const EdgeFunction& u0, int m) {
  if (!(t > 0.0)) throw InputError("semigroup time must be positive");
  const auto& eg = op.eigen();
  const Eigen::VectorXd sq = op.mass.cwiseSqrt();
  const Eigen::VectorXd w = sq.cwiseProduct(op.restrict(u0));
  Eigen::VectorXd coef = eg.vectors.transpose() * w;
  for (int k = 0; k < op.size; ++k) {
    const double lam = eg.values[k];
    const double p = m == 1 ? lam : std::copysign(std::pow(std::fabs(lam), m), lam);
    coef[k] *= std::exp(-t * p);
  }
  const Eigen::VectorXd u = (eg.vectors * coef).cwiseQuotient(sq);
  return op.extend(u);
}

ComplexEdgeFunction fd_resolvent(const DiscretizedOperator& op, std::complex<double> z,
                                 const ComplexEdgeFunction& g) {
  const auto& eg = op.eigen();
  for (int k = 0; k < op.size; ++k)
    if (std::abs(eg.values[k] - z) < 1e-8)
      throw NumericalError("resolvent parameter within 1e-8 of an eigenvalue",
                           std::abs(eg.values[k] - z));
  const Eigen::VectorXd sq = op.mass.cwiseSqrt();
  const Eigen::VectorXcd w = sq.cast<std::complex<double>>().cwiseProduct(op.restrict(g));
  Eigen::VectorXcd coef = eg.vectors.transpose().cast<std::complex<double>>() * w;
  for (int k = 0; k < op.size; ++k) coef[k] /= (eg.values[k] - z);
  const Eigen::VectorXcd u =
      (eg.vectors.cast<std::complex<double>>() * coef).cwiseQuotient(sq.cast<std::complex<double>>());
  return op.extend(u);
}

std::vector<double> fd_eigenvalues(const DiscretizedOperator& op) {
  const auto& eg = op.eigen();
  return {eg.values.data(), eg.values.data() + eg.values.size()};
}

double closed_form_star_kernel(int d, double t, int edge_x, double xi, int edge_y, double eta) {
  auto h = [t](double x) { return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t); };
  if (edge_x == edge_y) return h(xi - eta) + (2.0 / d - 1.0) * h(xi + eta);
  return (2.0 / d) * h(xi + eta);
}

}  // namespace qgraph
