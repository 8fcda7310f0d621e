#pragma once

// Parabolic Anderson model du/dt = Delta u - V_omega u, u(0) = 1, with i.i.d. edge
// potentials, solved per realization by eigen-expansion of the discretised operator.

#include <cstdint>
#include <string>
#include <vector>

#include "qgraph/edge_function.hpp"
#include "qgraph/graph.hpp"

namespace qgraph {

struct PotentialLaw {
  enum class Kind { bernoulli, uniform, constant };
  Kind kind = Kind::constant;
  double p = 0.5;  // bernoulli: P(V = hi)
  double lo = 0, hi = 0;
  double v0 = 0;

  static PotentialLaw bernoulli(double p, double lo, double hi);
  static PotentialLaw uniform(double lo, double hi);
  static PotentialLaw constant(double v0);
  /// "bernoulli:p,lo,hi", "uniform:lo,hi" or "constant:v0".
  static PotentialLaw parse(const std::string& spec);
  [[nodiscard]] std::string describe() const;

  /// One value per edge from the realization stream (seed, realization).
  [[nodiscard]] std::vector<double> sample(const MetricGraph& g, std::uint64_t seed,
                                           std::uint64_t realization) const;
};

struct PamOptions {
  double per_unit = 16.0;  // mesh nodes per unit length
  int workers = 0;
  int bootstrap = 1000;
};

/// u(t, .) on the mesh for one realization.
EdgeFunction pam_solve(const MetricGraph& g, const PotentialLaw& law, double t, std::uint64_t seed,
                       std::uint64_t realization = 0, const PamOptions& opt = {});

struct MomentCell {
  double t = 0;
  int p = 1;
  double lambda = 0;  // Lambda_p(t) = log E[ int u^p / |D| ]
  double ci_lo = 0, ci_hi = 0;
};

struct MomentTable {
  std::vector<double> times;
  int p_max = 0;
  int realizations = 0;
  std::uint64_t seed = 0;
  std::string law;
  std::vector<MomentCell> cells;             // index ti * p_max + (p - 1)
  std::vector<std::vector<double>> replicates;  // bootstrap Lambda values per resample, same indexing
  double min_u = 0;                          // smallest solution value met (positivity)

  [[nodiscard]] const MomentCell& at(int ti, int p) const { return cells[ti * p_max + (p - 1)]; }
  [[nodiscard]] int time_index(double t) const;
};

/// Moments over the whole torus (translation invariance makes it an unbiased
/// fundamental-domain average). int u^p uses the c-weighted lumped mass; int u(s) is
/// evaluated as ||e^{-sH/2} 1||^2 so that Lambda_1(2t) and Lambda_2(t) share one reduction.
MomentTable lyapunov_table(const MetricGraph& g, const PotentialLaw& law, const std::vector<double>& t_grid,
                           int p_max, int realizations, std::uint64_t seed, const PamOptions& opt = {});

struct IntermittencyReport {
  std::vector<double> lambda_over_p;  // finite-t slope estimates lambda_p / p
  std::vector<double> ci_lo, ci_hi;
  bool intermittent = false;          // lambda_p / p strictly increasing beyond the CIs
  std::vector<double> gap;            // Lambda_2(t) - 2 Lambda_1(t)
  std::vector<double> gap_ci_lo, gap_ci_hi;
  bool gap_nondecreasing = false;     // within CIs
  int fit_points = 0;
};

IntermittencyReport intermittency_report(const MomentTable& table);

}  // namespace qgraph
