#pragma once

// Path-sum kernel K_f on G x G. For x = (e, xi) and y = (e', xi'):
//
//   c(e) K(x, y) = [e = e'] f(xi' - xi)
//                + sum_{s in +-e} sum_{d in +-e'} sum_{paths s..d} T_P f(a_s + L_P + b_d)
//
// where a_s is the distance from x to t(s), b_d the distance from i(d) to y and
// L_P the length of the intermediate edges. Paths are grouped per (s, d) into
// image lists of (L, summed T), built by dynamic programming over step count.

#include <cstddef>
#include <memory>
#include <mutex>
#include <vector>

#include "qgraph/edge_function.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/profile.hpp"

namespace qgraph {

struct KernelOptions {
  double eps = 1e-8;             // pointwise and integrated truncation target
  int max_steps = 200;           // step budget
  std::size_t max_states = 4'000'000;  // live DP states per source orientation
  int steps_override = -1;       // force this truncation depth (no target check)
  bool prune = true;             // spend part of the budget on pruning and list cuts
  int workers = 0;
};

struct Image {
  double length;    // L: intermediate edges
  double transfer;  // summed T_P over paths with this (s, d, L)
};

/// Truncation bookkeeping for one source edge.
struct TruncationReport {
  int steps = 0;                 // M
  double pointwise = 0.0;        // sup_y |K - K_M|
  double integrated = 0.0;       // int |K - K_M| c dy
  std::size_t images = 0;
  std::size_t states = 0;
};

class PathSumKernel {
 public:
  PathSumKernel(const MetricGraph& g, KernelProfile f, KernelOptions opt = {});

  [[nodiscard]] const MetricGraph& graph() const { return *g_; }
  [[nodiscard]] const KernelProfile& profile() const { return f_; }
  [[nodiscard]] const KernelOptions& options() const { return opt_; }

  [[nodiscard]] double operator()(const GraphPoint& x, const GraphPoint& y) const;
  /// K(x, (e', xi'_j)) accumulated into out (size = xs.size()).
  void edge_values(const GraphPoint& x, int target_edge, std::span<const double> xs,
                   std::span<double> out) const;

  /// Report for the source edge (builds its image table on first use).
  [[nodiscard]] TruncationReport report(int source_edge) const;
  /// Worst case over all source edges.
  [[nodiscard]] TruncationReport worst_report() const;
  /// Image list for source orientation s and final directed edge d.
  [[nodiscard]] const std::vector<Image>& images(DirectedEdge s, DirectedEdge d) const;

 private:
  struct Table {
    std::vector<std::vector<Image>> lists[2];  // [s reversed][d index]
    TruncationReport report;
  };
  const Table& table(int e) const;
  Table build(int e) const;

  const MetricGraph* g_;
  KernelProfile f_;
  KernelOptions opt_;
  mutable std::vector<std::unique_ptr<Table>> tables_;
  mutable std::unique_ptr<std::once_flag[]> once_;
};

struct KernelTarget {
  GraphPoint point;
  double value = 0;
};

struct KernelEvalResult {
  std::vector<KernelTarget> values;
  double truncation_bound = 0;
  double quadrature_tol = 0;  // zero for point evaluation
};

/// K_f(x, y) for each target.
KernelEvalResult kernel_eval(const MetricGraph& g, const KernelProfile& f, const GraphPoint& x,
                             const std::vector<GraphPoint>& targets, double eps);

struct ConvolutionResult {
  EdgeFunction value;
  double truncation_bound = 0;  // ||u||_inf * integrated kernel remainder
  double quadrature_error = 0;  // Richardson estimate |S_h - S_2h| / 15, max over targets
};

/// (f *_G u)(x) = int K_f(x, y) u(y) c(y) dy at the grid points of u.
ConvolutionResult convolve(const PathSumKernel& k, const EdgeFunction& u);
ConvolutionResult convolve(const MetricGraph& g, const KernelProfile& f, const EdgeFunction& u,
                           double eps);

enum class SemigroupKind { heat, polyharmonic };

/// e^{shift t} (k_t *_G u0) with k_t the heat (m = 1) or polyharmonic profile.
ConvolutionResult semigroup_apply(const MetricGraph& g, SemigroupKind kind, int m, double t,
                                  double shift, const EdgeFunction& u0, double eps);

struct VertexAudit {
  int vertex = 0;
  double continuity_spread = 0;  // max - min of K(x, v) over incident edges
  double kirchhoff_sum = 0;      // |sum_e c(e) dK/dn_e(v)|
};

struct BoundaryAudit {
  std::vector<VertexAudit> vertices;
  double max_spread = 0;
  double max_kirchhoff = 0;
};

/// Continuity and flux balance of y -> K_f(x, y) at every vertex. Derivatives by
/// one-sided second-order differences with Richardson extrapolation.
BoundaryAudit boundary_condition_audit(const MetricGraph& g, const KernelProfile& f,
                                       const GraphPoint& x, double eps, double h = 1e-3);

struct UltracontractivityRow {
  double t = 0;
  double sup_kernel = 0;
};

struct UltracontractivityTable {
  std::vector<UltracontractivityRow> rows;
  double beta = 0;       // fitted exponent in sup K ~ C t^{-beta}
  double log_c = 0;
  double fit_residual = 0;
};

/// sup_{x,y} K over a grid (points_per_edge per edge, including vertices).
UltracontractivityTable ultracontractivity_probe(const MetricGraph& g, SemigroupKind kind, int m,
                                                 const std::vector<double>& t_grid,
                                                 int points_per_edge = 16, double eps = 1e-10);

/// sup_x int |K(x, y)| c dy over the grid of `like` (operator norm L_inf -> L_inf).
double kernel_row_l1_sup(const PathSumKernel& k, const EdgeFunction& like);

}  // namespace qgraph
