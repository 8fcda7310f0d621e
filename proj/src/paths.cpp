#include "qgraph/paths.hpp"

#include <algorithm>
#include <cmath>

namespace qgraph {

Path Path::reversed(const MetricGraph& g) const {
  std::vector<DirectedEdge> rev;
  rev.reserve(edges.size());
  for (auto it = edges.rbegin(); it != edges.rend(); ++it) rev.push_back(it->reverse());
  return make_path(g, std::move(rev));
}

Path make_path(const MetricGraph& g, std::vector<DirectedEdge> edges) {
  Path p;
  p.edges = std::move(edges);
  for (std::size_t i = 0; i + 1 < p.edges.size(); ++i) {
    p.length += g.length(p.edges[i]);
    p.transfer *= transfer_coefficient(g, p.edges[i], p.edges[i + 1]);
  }
  return p;
}

std::vector<Path> enumerate_paths(const MetricGraph& g, DirectedEdge from, int max_steps,
                                  double prune_bound, const std::function<double(double)>& tail) {
  auto keep = [&](const Path& p, int remaining) {
    if (prune_bound <= 0.0) return true;
    const double t = tail ? tail(p.length) : 1.0;
    return std::fabs(p.transfer) * std::pow(3.0, remaining) * t >= prune_bound;
  };
  std::vector<Path> out;
  Path root;
  root.edges = {from};
  if (!keep(root, max_steps)) return out;
  std::vector<Path> level{root};
  for (int m = 0;; ++m) {
    for (const Path& p : level) out.push_back(p);
    if (m == max_steps) break;
    std::vector<Path> next;
    for (const Path& p : level) {
      const DirectedEdge last = p.edges.back();
      for (DirectedEdge d : g.outgoing(g.terminal(last))) {
        Path q = p;
        q.edges.push_back(d);
        q.length += g.length(last);
        q.transfer *= transfer_coefficient(g, last, d);
        if (keep(q, max_steps - m - 1)) next.push_back(std::move(q));
      }
    }
    if (next.empty()) break;
    level = std::move(next);
  }
  return out;
}

std::uint64_t path_count_check(const MetricGraph& g, DirectedEdge e, int m) {
  const int nd = g.num_directed();
  // row vector times adjacency A[d][d'] = [t(d) = i(d')]
  std::vector<std::uint64_t> cur(nd, 0), next(nd);
  cur[e.index()] = 1;
  for (int k = 0; k < m; ++k) {
    std::fill(next.begin(), next.end(), 0);
    for (int d = 0; d < nd; ++d) {
      if (!cur[d]) continue;
      for (DirectedEdge dp : g.outgoing(g.terminal(DirectedEdge::from_index(d))))
        next[dp.index()] += cur[d];
    }
    cur.swap(next);
  }
  std::uint64_t s = 0;
  for (auto c : cur) s += c;
  return s;
}

TransferAudit transfer_identities_audit(const MetricGraph& g, int max_m, int reversal_sample_steps) {
  TransferAudit r;
  r.max_m = max_m;
  const int nd = g.num_directed();

  for (int i = 0; i < nd; ++i) {
    const DirectedEdge ep = DirectedEdge::from_index(i);
    // incoming: e with t(e) = i(e'), i.e. reverses of the edges leaving i(e')
    double s = 0.0, sa = 0.0;
    for (DirectedEdge out : g.outgoing(g.initial(ep))) {
      const double t = transfer_coefficient(g, out.reverse(), ep);
      s += t;
      sa += std::fabs(t);
    }
    r.max_row_sum_error = std::max(r.max_row_sum_error, std::fabs(s - 1.0));
    r.max_abs_row_sum = std::max(r.max_abs_row_sum, sa);

    const DirectedEdge e = ep;
    double w = 0.0, wa = 0.0;
    for (DirectedEdge d : g.outgoing(g.terminal(e))) {
      const double t = transfer_coefficient(g, e, d);
      w += g.conductivity(d) * t;
      wa += g.conductivity(d) * std::fabs(t);
    }
    const double ce = g.conductivity(e);
    r.max_weighted_sum_error = std::max(r.max_weighted_sum_error, std::fabs(w - ce) / ce);
    r.max_abs_weighted_ratio = std::max(r.max_abs_weighted_ratio, wa / ce);
  }

  // a[d]: sum over m-step paths ending in d of |T_P|; w[e]: sum over m-step paths
  // starting at e of c(e_m)|T_P|.
  std::vector<double> a(nd, 1.0), w(nd), an(nd), wn(nd);
  for (int i = 0; i < nd; ++i) w[i] = g.conductivity(DirectedEdge::from_index(i));
  double scale = 1.0;
  for (int m = 1; m <= max_m; ++m) {
    scale *= 3.0;
    std::fill(an.begin(), an.end(), 0.0);
    for (int i = 0; i < nd; ++i) {
      const DirectedEdge e = DirectedEdge::from_index(i);
      double acc = 0.0;
      for (DirectedEdge d : g.outgoing(g.terminal(e))) {
        const double t = std::fabs(transfer_coefficient(g, e, d));
        an[d.index()] += t * a[i];
        acc += t * w[d.index()];
      }
      wn[i] = acc;
    }
    a.swap(an);
    w.swap(wn);
    for (int i = 0; i < nd; ++i) {
      r.max_path_ratio = std::max(r.max_path_ratio, a[i] / scale);
      r.max_weighted_path_ratio = std::max(
          r.max_weighted_path_ratio, w[i] / (g.conductivity(DirectedEdge::from_index(i)) * scale));
    }
  }

  for (int i = 0; i < nd; ++i) {
    for (const Path& p : enumerate_paths(g, DirectedEdge::from_index(i), reversal_sample_steps)) {
      const Path q = p.reversed(g);
      const double lhs = p.transfer / g.conductivity(p.edges.front());
      const double rhs = q.transfer / g.conductivity(p.edges.back());
      const double err = std::fabs(lhs - rhs) / std::max(1.0, std::fabs(lhs));
      r.max_reversal_error = std::max(r.max_reversal_error, err);
    }
  }
  return r;
}

}  // namespace qgraph
