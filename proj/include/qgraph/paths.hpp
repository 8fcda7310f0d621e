#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qgraph/graph.hpp"

namespace qgraph {

/// Edge sequence e_0..e_m. |P| sums the first m edges; T_P is the product of
/// transfer coefficients along consecutive pairs.
struct Path {
  std::vector<DirectedEdge> edges;
  double length = 0.0;
  double transfer = 1.0;

  [[nodiscard]] int steps() const { return static_cast<int>(edges.size()) - 1; }
  [[nodiscard]] Path reversed(const MetricGraph& g) const;
};

Path make_path(const MetricGraph& g, std::vector<DirectedEdge> edges);

/// All paths from `from` with at most max_steps steps, in nondecreasing step
/// count. A subtree is dropped when |T_P| * 3^remaining * tail(|P|) < prune_bound;
/// with prune_bound = 0 nothing is dropped, zeros included. `tail` defaults to 1.
std::vector<Path> enumerate_paths(const MetricGraph& g, DirectedEdge from, int max_steps,
                                  double prune_bound = 0.0,
                                  const std::function<double(double)>& tail = {});

/// Number of m-step continuations of e via powers of the line-graph adjacency.
std::uint64_t path_count_check(const MetricGraph& g, DirectedEdge e, int m);

struct TransferAudit {
  double max_row_sum_error = 0;        // |sum_e T_{e,e'} - 1|
  double max_weighted_sum_error = 0;   // |sum_e' c(e')T_{e,e'} - c(e)| / c(e)
  double max_abs_row_sum = 0;          // max_e' sum_e |T_{e,e'}|
  double max_abs_weighted_ratio = 0;   // max_e sum_e' c(e')|T| / c(e)
  double max_path_ratio = 0;           // max over m, e, e' of sum_P |T_P| / 3^m
  double max_weighted_path_ratio = 0;  // max over m, e of sum c(e_m)|T_P| / (c(e) 3^m)
  double max_reversal_error = 0;       // |T_P/c(e_0) - T_{-P}/c(e_m)| relative
  int max_m = 0;

  [[nodiscard]] bool ok(double tol = 1e-12) const {
    return max_row_sum_error <= tol && max_weighted_sum_error <= tol &&
           max_abs_row_sum <= 3.0 + tol && max_abs_weighted_ratio <= 3.0 + tol &&
           max_path_ratio <= 1.0 + tol && max_weighted_path_ratio <= 1.0 + tol &&
           max_reversal_error <= tol;
  }
};

/// Transfer identities and path bounds up to `max_m` steps. Path sums use
/// dynamic programming over (edge, step) so they stay cheap for m = 8.
TransferAudit transfer_identities_audit(const MetricGraph& g, int max_m = 8,
                                        int reversal_sample_steps = 4);

}  // namespace qgraph
