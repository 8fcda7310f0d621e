#pragma once

// Vertex reduction of H = -d^2/dx^2 + V on equilateral graphs. V is given on the
// unit interval and applied on every edge in its own orientation; an edge of
// length l is handled through the rescaling lambda -> l^2 lambda, V -> l^2 V.

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/edge_function.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/numerics.hpp"

namespace qgraph {

class EdgePotential {
 public:
  enum class Kind { zero, constant, function, sampled };

  static EdgePotential zero();
  static EdgePotential constant(double v0);
  /// Closed-form V on [0, 1] with a sup-norm bound.
  static EdgePotential function(std::function<double(double)> v, double sup_bound);
  /// Piecewise-linear through samples at j/n, j = 0..n.
  static EdgePotential sampled(std::vector<double> samples);

  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] bool is_constant() const { return kind_ == Kind::zero || kind_ == Kind::constant; }
  [[nodiscard]] double constant_value() const { return v0_; }
  [[nodiscard]] double sup_bound() const { return sup_; }
  /// V(x) = V(1 - x) at 101 sample points.
  [[nodiscard]] bool is_symmetric(double tol = 1e-14) const;
  /// The same potential multiplied by s (used for edge rescaling).
  [[nodiscard]] EdgePotential scaled(double s) const;

 private:
  Kind kind_ = Kind::zero;
  double v0_ = 0.0;
  double sup_ = 0.0;
  double scale_ = 1.0;
  std::function<double(double)> fn_;
  std::vector<double> samples_;
};

/// c, s with c(0)=1, c'(0)=0, s(0)=0, s'(0)=1 for -psi'' + V psi = lambda psi on [0,1].
class FundamentalPair {
 public:
  FundamentalPair(const EdgePotential& V, cplx lambda);

  [[nodiscard]] cplx lambda() const { return lambda_; }
  [[nodiscard]] cplx c(double t) const;
  [[nodiscard]] cplx dc(double t) const;
  [[nodiscard]] cplx s(double t) const;
  [[nodiscard]] cplx ds(double t) const;
  [[nodiscard]] cplx c1() const { return c1_; }
  [[nodiscard]] cplx dc1() const { return dc1_; }
  [[nodiscard]] cplx s1() const { return s1_; }
  [[nodiscard]] cplx ds1() const { return ds1_; }
  [[nodiscard]] cplx wronskian(double t) const { return ds(t) * c(t) - s(t) * dc(t); }
  [[nodiscard]] cplx discriminant() const { return 0.5 * (c1_ + ds1_); }
  /// phi_1 = s1 c - c1 s (vanishes at 1), phi_2 = s (vanishes at 0).
  [[nodiscard]] cplx phi1(double t) const { return s1_ * c(t) - c1_ * s(t); }
  [[nodiscard]] cplx dphi1(double t) const { return s1_ * dc(t) - c1_ * ds(t); }

 private:
  cplx lambda_;
  bool closed_ = true;
  cplx mu_;  // lambda - v0 for constant V
  Chebyshev<cplx> cc_, dcc_, sc_, dsc_;
  cplx c1_, dc1_, s1_, ds1_;
};

cplx floquet_discriminant(const EdgePotential& V, cplx lambda);

/// (Pz)(v) = sum_{e in E_v} c(e)/c(v) z(other end of e).
Eigen::MatrixXd build_P(const MetricGraph& g);

/// Inward boundary derivatives of the gamma field on one edge:
/// m = (1/s1) [[-c1, 1], [1, -s1']] (unit length).
Eigen::Matrix2cd dtn_map(const EdgePotential& V, cplx lambda);

/// (M z)(v) = sum_{e in E_v} c(e) (inward derivative of (gamma z)_e at v).
/// Equals diag(c(v)/s1) (P - D) when V is symmetric.
Eigen::MatrixXcd vertex_condition_operator(const MetricGraph& g, const EdgePotential& V,
                                           cplx lambda);

/// Edgewise [s(t) z(t(e)) + z(i(e)) phi1(t)] / s1 on a grid with per_unit samples.
ComplexEdgeFunction gamma_field(const MetricGraph& g, const EdgePotential& V, cplx lambda,
                                const Eigen::VectorXcd& z, double per_unit = 64.0);

/// (mu u)(v) = (1/c(v)) sum_{e in E_v} c(e) int f_v u_e / s1 with f = phi1 at i(e),
/// s at t(e) (bilinear; adjoint of gamma at conj(lambda) in the c-weighted spaces).
Eigen::VectorXcd mu_map(const MetricGraph& g, const EdgePotential& V, cplx lambda,
                        const ComplexEdgeFunction& u);

struct MetricEigenvalue {
  double lambda = 0;
  int multiplicity = 0;
  double source_mu = 0;
  double kirchhoff_residual = 0;
};

/// Dirichlet points are not resolved by the vertex reduction; their metric
/// multiplicity is read off the nullity of the full edge-coefficient system.
struct DirichletPoint {
  double lambda = 0;
  int multiplicity = 0;
  double residual = 0;  // smallest singular value that was counted
};

struct SpectrumResult {
  std::vector<MetricEigenvalue> eigenvalues;
  std::vector<DirichletPoint> dirichlet;  // s_lambda(1) = 0 inside the window, not resolved
  std::vector<double> p_spectrum;
};

/// Solve D(lambda) = mu for each eigenvalue mu of P inside [lo, hi].
SpectrumResult eigenvalues_via_reduction(const MetricGraph& g, const EdgePotential& V, double lo,
                                         double hi, double tol = 1e-12);

struct ResolventResult {
  ComplexEdgeFunction u;
  std::vector<Chebyshev<cplx>> edge_series;  // u on each edge in the unit coordinate
  Eigen::VectorXcd vertex_values;
  double residual = 0;       // ||(H - z)u - g||_2 (c-weighted)
  double condition = 0;      // 2-norm condition number of the vertex system
};

using ComplexSource = std::function<cplx(int edge, double xi)>;

/// (H - z)^{-1} g via the Krein formula: Dirichlet resolvent per edge plus the gamma
/// field of the vertex solution U of (P - diag(d)) U = -W.
ResolventResult krein_resolvent(const MetricGraph& g, const EdgePotential& V, cplx z,
                                const ComplexSource& gfun, double per_unit = 64.0);
ResolventResult krein_resolvent(const MetricGraph& g, const EdgePotential& V, cplx z,
                                const ComplexEdgeFunction& gfun);

}  // namespace qgraph
