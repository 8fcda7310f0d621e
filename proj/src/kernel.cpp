#include "qgraph/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qgraph/errors.hpp"
#include "qgraph/numerics.hpp"

namespace qgraph {

namespace {

constexpr double kQuantum = 1e-9;

struct State {
  int d;
  long long key;
  double length;
  double transfer;
};

long long quantize(double L) { return std::llround(L / kQuantum); }

// sum_{m > M} terms[m] for every M, terms indexed from 1
std::vector<double> suffix_sums(const std::vector<double>& terms) {
  std::vector<double> s(terms.size() + 1, 0.0);
  for (std::size_t m = terms.size(); m-- > 0;) s[m] = s[m + 1] + terms[m];
  return s;  // s[M+1] = sum_{m > M}
}

}  // namespace

PathSumKernel::PathSumKernel(const MetricGraph& g, KernelProfile f, KernelOptions opt)
    : g_(&g), f_(std::move(f)), opt_(opt) {
  if (!(opt_.eps > 0.0)) throw InputError("kernel tolerance must be positive");
  tables_.resize(g.num_edges());
  once_ = std::make_unique<std::once_flag[]>(g.num_edges());
}

const PathSumKernel::Table& PathSumKernel::table(int e) const {
  std::call_once(once_[e], [&] { tables_[e] = std::make_unique<Table>(build(e)); });
  return *tables_[e];
}

TruncationReport PathSumKernel::report(int source_edge) const { return table(source_edge).report; }

TruncationReport PathSumKernel::worst_report() const {
  TruncationReport w;
  for (int e = 0; e < g_->num_edges(); ++e) {
    const auto& r = table(e).report;
    w.steps = std::max(w.steps, r.steps);
    w.pointwise = std::max(w.pointwise, r.pointwise);
    w.integrated = std::max(w.integrated, r.integrated);
    w.images += r.images;
    w.states = std::max(w.states, r.states);
  }
  return w;
}

const std::vector<Image>& PathSumKernel::images(DirectedEdge s, DirectedEdge d) const {
  return table(s.edge).lists[s.reversed ? 1 : 0][d.index()];
}

PathSumKernel::Table PathSumKernel::build(int e) const {
  const MetricGraph& g = *g_;
  const double ce = g.conductivity(e);
  const double cmin = g.min_conductivity();
  const double lmin = g.min_length();
  const double eps = opt_.eps;
  const int nd = g.num_directed();

  // remainder terms for paths with m steps: L >= (m-1) lmin
  const int horizon = std::max(opt_.max_steps, opt_.steps_override) + 1;
  std::vector<double> termP(horizon + 1, 0.0), termI(horizon + 1, 0.0);
  for (int m = 1; m <= horizon; ++m) {
    const double L = (m - 1) * lmin;
    const double pow3 = std::exp(m * std::log(3.0));
    termP[m] = 4.0 / ce * pow3 * f_.envelope(L);
    termI[m] = 2.0 * pow3 * f_.tail(L);
  }
  // the series tail beyond the horizon: terms must be decaying by then
  const double beyondP = termP[horizon] * 10.0, beyondI = termI[horizon] * 10.0;
  std::vector<double> sufP = suffix_sums(termP), sufI = suffix_sums(termI);
  auto truncP = [&](int M) { return sufP[M + 1] + beyondP; };
  auto truncI = [&](int M) { return sufI[M + 1] + beyondI; };

  int M = opt_.steps_override;
  if (M < 0) {
    M = 1;
    while (M <= opt_.max_steps && (truncP(M) > 0.5 * eps || truncI(M) > 0.5 * eps)) ++M;
    if (M > opt_.max_steps) {
      throw NumericalError("kernel truncation target not reachable within the step budget",
                           std::max(truncP(opt_.max_steps), truncI(opt_.max_steps)));
    }
  }

  Table tab;
  for (auto& l : tab.lists) l.assign(nd, {});
  tab.report.steps = M;

  // subtree bounds: sum_{k=0}^{R} 3^k env(L + k lmin)
  auto subtree = [&](double L, int R, double& sp, double& si) {
    sp = si = 0.0;
    double pow3 = 1.0;
    for (int k = 0; k <= R; ++k) {
      const double env = f_.envelope(L + k * lmin);
      const double tl = f_.tail(L + k * lmin);
      sp += pow3 * env;
      si += pow3 * tl;
      if (env == 0.0 && tl == 0.0) break;
      pow3 *= 3.0;
    }
  };

  double prunedP = 0.0, prunedI = 0.0;
  double pruneBudgetP = opt_.prune ? 0.25 * eps : 0.0;
  double pruneBudgetI = opt_.prune ? 0.25 * eps : 0.0;

  for (int sr = 0; sr < 2; ++sr) {
    const DirectedEdge s{e, sr == 1};
    std::vector<State> level;
    for (DirectedEdge d : g.outgoing(g.terminal(s))) {
      const double t = transfer_coefficient(g, s, d);
      if (t != 0.0) level.push_back({d.index(), 0, 0.0, t});
    }
    for (int m = 1; m <= M && !level.empty(); ++m) {
      std::vector<char> pruned(level.size(), 0);
      if (opt_.prune) {
        // levels left for this orientation share what is left of the budget
        const int levels_left = (M - m + 1) + (sr == 0 ? M : 0);
        const double levelP = pruneBudgetP / levels_left;
        const double levelI = pruneBudgetI / levels_left;
        std::vector<double> bp(level.size()), bi(level.size());
        for (std::size_t i = 0; i < level.size(); ++i) {
          double sp, si;
          subtree(level[i].length, M - m, sp, si);
          const double cd = g.conductivity(DirectedEdge::from_index(level[i].d));
          bp[i] = cd / (ce * cmin) * std::fabs(level[i].transfer) * sp;
          bi[i] = cd / ce * std::fabs(level[i].transfer) * si;
        }
        std::vector<std::size_t> order(level.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return bp[a] < bp[b]; });
        double usedP = 0.0, usedI = 0.0;
        for (std::size_t i : order) {
          if (usedP + bp[i] > levelP || usedI + bi[i] > levelI) break;
          usedP += bp[i];
          usedI += bi[i];
          pruned[i] = 1;
        }
        prunedP += usedP;
        prunedI += usedI;
        pruneBudgetP -= usedP;
        pruneBudgetI -= usedI;
      }

      std::vector<State> next;
      for (std::size_t i = 0; i < level.size(); ++i) {
        if (pruned[i]) continue;
        const State& st = level[i];
        tab.lists[sr][st.d].push_back({st.length, st.transfer});
        if (m == M) continue;
        const DirectedEdge d = DirectedEdge::from_index(st.d);
        const double L = st.length + g.length(d);
        for (DirectedEdge dp : g.outgoing(g.terminal(d))) {
          const double t = transfer_coefficient(g, d, dp);
          if (t == 0.0) continue;
          next.push_back({dp.index(), quantize(L), L, st.transfer * t});
        }
      }
      std::sort(next.begin(), next.end(), [](const State& a, const State& b) {
        return a.d != b.d ? a.d < b.d : a.key < b.key;
      });
      level.clear();
      for (const State& st : next) {
        if (!level.empty() && level.back().d == st.d && level.back().key == st.key)
          level.back().transfer += st.transfer;
        else
          level.push_back(st);
      }
      std::erase_if(level, [](const State& st) { return st.transfer == 0.0; });
      tab.report.states = std::max(tab.report.states, level.size());
      if (level.size() > opt_.max_states) {
        throw NumericalError("kernel path enumeration exceeded the state cap",
                             std::max(truncP(m), truncI(m)));
      }
    }
  }

  // merge images with equal length and cut each list's tail within its budget
  const double nlists = 4.0 * g.num_edges();
  std::vector<double> cutP(nd * 2, 0.0);
  double cutI = 0.0;
  for (int sr = 0; sr < 2; ++sr) {
    for (int di = 0; di < nd; ++di) {
      auto& list = tab.lists[sr][di];
      std::sort(list.begin(), list.end(),
                [](const Image& a, const Image& b) { return a.length < b.length; });
      std::vector<Image> merged;
      for (const Image& im : list) {
        if (!merged.empty() && quantize(merged.back().length) == quantize(im.length))
          merged.back().transfer += im.transfer;
        else
          merged.push_back(im);
      }
      std::erase_if(merged, [](const Image& im) { return im.transfer == 0.0; });
      if (opt_.prune && !merged.empty()) {
        const double cd = g.conductivity(DirectedEdge::from_index(di));
        const double budgetP = eps * ce / 16.0;
        const double budgetI = 0.25 * eps * ce / nlists;
        double sp = 0.0, si = 0.0;
        std::size_t keep = merged.size();
        for (std::size_t i = merged.size(); i-- > 0;) {
          const double np = sp + std::fabs(merged[i].transfer) * f_.envelope(merged[i].length);
          const double ni = si + cd * std::fabs(merged[i].transfer) * f_.tail(merged[i].length);
          if (np > budgetP || ni > budgetI) break;
          sp = np;
          si = ni;
          keep = i;
        }
        merged.resize(keep);
        cutP[sr * nd + di] = sp / ce;
        cutI += si / ce;
      }
      tab.report.images += merged.size();
      list = std::move(merged);
    }
  }
  double worstCut = 0.0;
  for (int ep = 0; ep < g.num_edges(); ++ep) {
    double s = 0.0;
    for (int sr = 0; sr < 2; ++sr)
      for (int r = 0; r < 2; ++r) s += cutP[sr * nd + 2 * ep + r];
    worstCut = std::max(worstCut, s);
  }
  tab.report.pointwise = truncP(M) + prunedP + worstCut;
  tab.report.integrated = truncI(M) + prunedI + cutI;
  return tab;
}

double PathSumKernel::operator()(const GraphPoint& x, const GraphPoint& y) const {
  double out = 0.0;
  const double xs = y.xi;
  edge_values(x, y.edge, std::span<const double>(&xs, 1), std::span<double>(&out, 1));
  return out;
}

void PathSumKernel::edge_values(const GraphPoint& x, int target_edge, std::span<const double> xs,
                                std::span<double> out) const {
  const MetricGraph& g = *g_;
  const Table& tab = table(x.edge);
  const double ce = g.conductivity(x.edge);
  const double le = g.length(x.edge);
  const double lt = g.length(target_edge);
  if (x.edge == target_edge) f_.accumulate(out, xs, -x.xi, 1.0, 1.0 / ce);
  for (int sr = 0; sr < 2; ++sr) {
    const double a = sr == 0 ? le - x.xi : x.xi;
    for (int r = 0; r < 2; ++r) {
      const DirectedEdge d{target_edge, r == 1};
      const double off = r == 0 ? 0.0 : lt;
      const double sign = r == 0 ? 1.0 : -1.0;
      for (const Image& im : tab.lists[sr][d.index()])
        f_.accumulate(out, xs, a + im.length + off, sign, im.transfer / ce);
    }
  }
}

KernelEvalResult kernel_eval(const MetricGraph& g, const KernelProfile& f, const GraphPoint& x,
                             const std::vector<GraphPoint>& targets, double eps) {
  KernelOptions opt;
  opt.eps = eps;
  PathSumKernel k(g, f, opt);
  KernelEvalResult r;
  for (const GraphPoint& y : targets) r.values.push_back({y, k(x, y)});
  r.truncation_bound = k.report(x.edge).pointwise;
  return r;
}

namespace {

// Simpson weights on the fine grid and on the every-other-point grid (zeros at odd
// points); odd interval counts fall back to the trapezoid rule for the estimate.
struct EdgeWeights {
  std::vector<double> fine, coarse;
};

EdgeWeights edge_weights(int n, double h) {
  EdgeWeights w;
  w.fine = simpson_weights(n, h);
  w.coarse.assign(n + 1, 0.0);
  if (n % 2 == 0 && n >= 4) {
    const auto c = simpson_weights(n / 2, 2.0 * h);
    for (int j = 0; j <= n / 2; ++j) w.coarse[2 * j] = c[j];
  } else {
    for (int j = 0; j <= n; ++j) w.coarse[j] = (j == 0 || j == n) ? 0.5 * h : h;
  }
  return w;
}

}  // namespace

ConvolutionResult convolve(const PathSumKernel& k, const EdgeFunction& u) {
  const MetricGraph& g = k.graph();
  const int ne = g.num_edges();
  std::vector<EdgeWeights> w(ne);
  std::vector<std::vector<double>> grid(ne), wu(ne), wu2(ne);
  for (int e = 0; e < ne; ++e) {
    const int n = u.intervals(e);
    w[e] = edge_weights(n, u.h(e));
    grid[e].resize(n + 1);
    wu[e].resize(n + 1);
    wu2[e].resize(n + 1);
    for (int j = 0; j <= n; ++j) {
      grid[e][j] = u.xi(e, j);
      wu[e][j] = g.conductivity(e) * w[e].fine[j] * u.values[e][j];
      wu2[e][j] = g.conductivity(e) * w[e].coarse[j] * u.values[e][j];
    }
  }
  // build every source table up front so the parallel loop only reads
  const TruncationReport worst = k.worst_report();

  ConvolutionResult res;
  res.value = u;
  std::vector<std::pair<int, int>> targets;
  for (int e = 0; e < ne; ++e)
    for (int i = 0; i <= u.intervals(e); ++i) targets.emplace_back(e, i);
  std::vector<double> qerr(targets.size(), 0.0);
  parallel_for(
      static_cast<int>(targets.size()),
      [&](int t) {
        const auto [e, i] = targets[t];
        const GraphPoint x{e, u.xi(e, i)};
        double s = 0.0, s2 = 0.0;
        std::vector<double> buf;
        for (int ep = 0; ep < ne; ++ep) {
          buf.assign(grid[ep].size(), 0.0);
          k.edge_values(x, ep, grid[ep], buf);
          for (std::size_t j = 0; j < buf.size(); ++j) {
            s += wu[ep][j] * buf[j];
            s2 += wu2[ep][j] * buf[j];
          }
        }
        res.value.values[e][i] = s;
        qerr[t] = std::fabs(s - s2) / 15.0;
      },
      k.options().workers);
  res.quadrature_error = *std::max_element(qerr.begin(), qerr.end());
  res.truncation_bound = worst.integrated * u.max_abs();
  return res;
}

ConvolutionResult convolve(const MetricGraph& g, const KernelProfile& f, const EdgeFunction& u,
                           double eps) {
  KernelOptions opt;
  opt.eps = eps;
  return convolve(PathSumKernel(g, f, opt), u);
}

ConvolutionResult semigroup_apply(const MetricGraph& g, SemigroupKind kind, int m, double t,
                                  double shift, const EdgeFunction& u0, double eps) {
  if (!(t > 0.0)) throw InputError("semigroup time must be positive");
  const KernelProfile f =
      kind == SemigroupKind::heat ? KernelProfile::heat(t) : KernelProfile::polyharmonic(m, t);
  ConvolutionResult r = convolve(g, f, u0, eps);
  const double scale = std::exp(shift * t);
  for (auto& v : r.value.values)
    for (double& x : v) x *= scale;
  r.truncation_bound *= scale;
  r.quadrature_error *= scale;
  return r;
}

BoundaryAudit boundary_condition_audit(const MetricGraph& g, const KernelProfile& f,
                                       const GraphPoint& x, double eps, double h) {
  KernelOptions opt;
  opt.eps = eps;
  PathSumKernel k(g, f, opt);
  BoundaryAudit audit;
  for (int v = 0; v < g.num_vertices(); ++v) {
    VertexAudit va;
    va.vertex = v;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    double flux = 0.0;
    for (DirectedEdge d : g.outgoing(v)) {
      const double len = g.length(d);
      auto at = [&](double delta) {
        return k(x, GraphPoint{d.edge, d.reversed ? len - delta : delta});
      };
      const double k0 = at(0.0);
      lo = std::min(lo, k0);
      hi = std::max(hi, k0);
      auto deriv = [&](double step) { return (-3.0 * k0 + 4.0 * at(step) - at(2.0 * step)) / (2.0 * step); };
      const double dh = deriv(h), dh2 = deriv(0.5 * h);
      flux += g.conductivity(d) * (4.0 * dh2 - dh) / 3.0;
    }
    va.continuity_spread = hi - lo;
    va.kirchhoff_sum = std::fabs(flux);
    audit.max_spread = std::max(audit.max_spread, va.continuity_spread);
    audit.max_kirchhoff = std::max(audit.max_kirchhoff, va.kirchhoff_sum);
    audit.vertices.push_back(va);
  }
  return audit;
}

UltracontractivityTable ultracontractivity_probe(const MetricGraph& g, SemigroupKind kind, int m,
                                                 const std::vector<double>& t_grid,
                                                 int points_per_edge, double eps) {
  UltracontractivityTable tab;
  std::vector<GraphPoint> pts;
  for (int e = 0; e < g.num_edges(); ++e)
    for (int j = 0; j <= points_per_edge; ++j)
      pts.push_back({e, g.length(e) * j / points_per_edge});
  std::vector<double> lx, ly;
  for (double t : t_grid) {
    const KernelProfile f =
        kind == SemigroupKind::heat ? KernelProfile::heat(t) : KernelProfile::polyharmonic(m, t);
    KernelOptions opt;
    opt.eps = eps;
    PathSumKernel k(g, f, opt);
    double sup = 0.0;
    for (const auto& x : pts)
      for (const auto& y : pts) sup = std::max(sup, std::fabs(k(x, y)));
    tab.rows.push_back({t, sup});
    lx.push_back(std::log(t));
    ly.push_back(std::log(sup));
  }
  const LinearFit fit = linear_fit(lx, ly);
  tab.beta = -fit.slope;
  tab.log_c = fit.intercept;
  tab.fit_residual = fit.residual;
  return tab;
}

double kernel_row_l1_sup(const PathSumKernel& k, const EdgeFunction& like) {
  const MetricGraph& g = k.graph();
  double sup = 0.0;
  std::vector<double> buf;
  for (int e = 0; e < like.num_edges(); ++e) {
    for (int i = 0; i <= like.intervals(e); ++i) {
      const GraphPoint x{e, like.xi(e, i)};
      double s = 0.0;
      for (int ep = 0; ep < g.num_edges(); ++ep) {
        const int n = like.intervals(ep);
        std::vector<double> xs(n + 1);
        for (int j = 0; j <= n; ++j) xs[j] = like.xi(ep, j);
        buf.assign(n + 1, 0.0);
        k.edge_values(x, ep, xs, buf);
        const auto w = simpson_weights(n, like.h(ep));
        for (int j = 0; j <= n; ++j) s += g.conductivity(ep) * w[j] * std::fabs(buf[j]);
      }
      sup = std::max(sup, s);
    }
  }
  return sup;
}

}  // namespace qgraph
