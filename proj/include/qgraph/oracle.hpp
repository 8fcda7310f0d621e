#pragma once

// Reference discretisation of H = -Delta + V with Kirchhoff coupling, solved by
// dense eigen-expansion. Vertex-centred finite volumes: one shared unknown per
// vertex, interior nodes per edge, mass c(e) h per interior node and
// sum_e c(e) h_e / 2 at a vertex, flux c(e)/h between neighbours.

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/edge_function.hpp"
#include "qgraph/graph.hpp"

namespace qgraph {

using Potential = std::function<double(int edge, double xi)>;

struct DiscretizedOperator {
  const MetricGraph* graph = nullptr;
  std::vector<int> intervals;            // n_e per edge
  std::vector<std::vector<int>> index;   // (edge, node j) -> unknown, j = 0..n_e
  Eigen::VectorXd mass;                  // lumped mass per unknown
  Eigen::MatrixXd stiffness;             // S + M V (symmetric, dense)
  int size = 0;

  /// Eigenpairs of M^{-1/2} (S + MV) M^{-1/2}, computed on first use.
  struct Eigen_ {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
  };
  [[nodiscard]] const Eigen_& eigen() const;

  /// Grid values of an edge function on this mesh (same node positions).
  [[nodiscard]] Eigen::VectorXd restrict(const EdgeFunction& f) const;
  [[nodiscard]] Eigen::VectorXcd restrict(const ComplexEdgeFunction& f) const;
  [[nodiscard]] EdgeFunction extend(const Eigen::VectorXd& v) const;
  [[nodiscard]] ComplexEdgeFunction extend(const Eigen::VectorXcd& v) const;
  /// A u = -(M^{-1})(S + MV) u, the discrete generator Delta - V.
  [[nodiscard]] Eigen::VectorXd apply_generator(const Eigen::VectorXd& u) const;

 private:
  mutable std::shared_ptr<Eigen_> eig_;
};

constexpr int kOracleMaxUnknowns = 4000;

/// Assemble on mesh width <= h per edge (n_e = ceil(|e|/h)). Requires h <= lmin/4.
DiscretizedOperator fd_assemble(const MetricGraph& g, const Potential& V, double h);

/// exp(-t H^m) u0 by eigen-expansion (m = 1 heat, m >= 2 polyharmonic).
EdgeFunction fd_semigroup(const DiscretizedOperator& op, double t, const EdgeFunction& u0, int m = 1);
/// (H - z)^{-1} g by eigen-expansion. Throws NumericalError near an eigenvalue.
ComplexEdgeFunction fd_resolvent(const DiscretizedOperator& op, std::complex<double> z,
                                 const ComplexEdgeFunction& g);
/// Eigenvalues of H (ascending).
std::vector<double> fd_eigenvalues(const DiscretizedOperator& op);

/// Method-of-images kernel on a d-star of long edges (points measured from the centre).
double closed_form_star_kernel(int d, double t, int edge_x, double xi, int edge_y, double eta);

}  // namespace qgraph
