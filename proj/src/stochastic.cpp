#include "qgraph/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>

#include "qgraph/errors.hpp"
#include "qgraph/kernel.hpp"
#include "qgraph/numerics.hpp"
#include "qgraph/oracle.hpp"
#include "qgraph/profile.hpp"

namespace qgraph {

void WalkConfig::validate() const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("walk horizon t must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("walk step dt must be > 0");
  if (n < 1) throw InputError("trajectory count must be >= 1");
}

std::mt19937_64 trajectory_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

namespace {

// Uniform in [0, 1) from the raw 64-bit stream, independent of library distributions.
double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

// Box-Muller on the raw stream, so streams are identical across standard libraries.
double normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

Walker::Walker(const MetricGraph& g, GraphPoint start) : g_(&g), pos_(start) {
  if (start.edge < 0 || start.edge >= g.num_edges()) throw InputError("start point: unknown edge");
  if (!(start.xi >= 0.0 && start.xi <= g.length(start.edge)))
    throw InputError("start point: coordinate outside the edge");
}

DirectedEdge Walker::scatter(int v, std::mt19937_64& rng) {
  const auto& out = g_->outgoing(v);
  double u = uniform01(rng) * g_->vertex_conductivity(v);
  for (DirectedEdge d : out) {
    u -= g_->conductivity(d.edge);
    if (u < 0.0) return d;
  }
  return out.back();
}

// Leave the vertex at the current position by `distance`, scattering at every vertex met.
void Walker::move(double distance, std::mt19937_64& rng, const SegmentObserver& observe) {
  int v = g_->vertex_at(pos_, 0.0);
  for (;;) {
    const DirectedEdge d = scatter(v, rng);
    const double len = g_->length(d);
    const double from = d.reversed ? len : 0.0;
    if (distance <= len) {
      const double to = d.reversed ? len - distance : distance;
      if (observe) observe(d.edge, from, to);
      pos_ = {d.edge, to};
      return;
    }
    const double to = d.reversed ? 0.0 : len;
    if (observe) observe(d.edge, from, to);
    distance -= len;
    v = g_->terminal(d);
    ++passages_;
  }
}

void Walker::step(double dt, double variance_rate, std::mt19937_64& rng, bool touch_correction,
                  const SegmentObserver& observe) {
  const double sd = std::sqrt(variance_rate * dt);
  const double delta = sd * normal(rng);
  const double len = g_->length(pos_.edge);
  if (pos_.xi <= 0.0 || pos_.xi >= len) {
    pos_.xi = pos_.xi <= 0.0 ? 0.0 : len;
    ++passages_;
    move(std::fabs(delta), rng, observe);
    return;
  }
  const double target = pos_.xi + delta;
  if (target <= 0.0 || target >= len) {
    const double end = target <= 0.0 ? 0.0 : len;
    if (observe) observe(pos_.edge, pos_.xi, end);
    pos_.xi = end;
    ++passages_;
    move(std::fabs(target - end), rng, observe);
    return;
  }
  if (touch_correction) {
    // bridge from xi to target touches an endpoint with probability exp(-2ab / (rate dt))
    const double var = variance_rate * dt;
    const double p0 = std::exp(-2.0 * pos_.xi * target / var);
    const double p1 = std::exp(-2.0 * (len - pos_.xi) * (len - target) / var);
    const double u = uniform01(rng);
    if (u < p0 || u < p0 + p1 * (1.0 - p0)) {
      const bool left = u < p0;
      const double end = left ? 0.0 : len;
      if (observe) observe(pos_.edge, pos_.xi, end);
      pos_.xi = end;
      ++passages_;
      move(left ? target : len - target, rng, observe);
      return;
    }
  }
  if (observe) observe(pos_.edge, pos_.xi, target);
  pos_.xi = target;
}

namespace {

struct StepPlan {
  int steps = 0;
  double dt = 0, last = 0;
};

StepPlan plan(const WalkConfig& cfg) {
  StepPlan p;
  if (cfg.t == 0.0) return p;
  p.steps = static_cast<int>(std::ceil(cfg.t / cfg.dt - 1e-9));
  p.dt = cfg.dt;
  p.last = cfg.t - (p.steps - 1) * cfg.dt;
  return p;
}

Trajectory run_one(const MetricGraph& g, const GraphPoint& start, const WalkConfig& cfg,
                   std::uint64_t index, bool record, const GraphFunction& V) {
  auto rng = trajectory_rng(cfg.seed, index);
  Walker w(g, start);
  Trajectory tr;
  const StepPlan p = plan(cfg);
  if (record) {
    tr.points.reserve(p.steps + 1);
    tr.points.push_back({0.0, start});
  }
  double vprev = V ? V(start.edge, start.xi) : 0.0;
  double time = 0.0;
  for (int k = 0; k < p.steps; ++k) {
    const double h = k + 1 == p.steps ? p.last : p.dt;
    w.step(h, cfg.variance_rate(), rng, cfg.touch_correction);
    time = k + 1 == p.steps ? cfg.t : time + h;
    if (V) {
      const double vnext = V(w.position().edge, w.position().xi);
      tr.potential_integral += 0.5 * h * (vprev + vnext);
      vprev = vnext;
    }
    if (record) tr.points.push_back({time, w.position()});
  }
  if (!record) tr.points.push_back({cfg.t, w.position()});
  return tr;
}

MonteCarloEstimate summarize(const std::vector<double>& samples) {
  MonteCarloEstimate r;
  r.n = static_cast<int>(samples.size());
  CompensatedSum s;
  for (double x : samples) s.add(x);
  r.estimate = s.value() / r.n;
  CompensatedSum q;
  for (double x : samples) q.add((x - r.estimate) * (x - r.estimate));
  r.se = r.n > 1 ? std::sqrt(q.value() / (r.n - 1) / r.n) : 0.0;
  return r;
}

}  // namespace

std::vector<Trajectory> simulate_bm(const MetricGraph& g, const GraphPoint& start, const WalkConfig& cfg,
                                    bool record, const GraphFunction& V) {
  cfg.validate();
  Walker check(g, start);
  std::vector<Trajectory> out(cfg.n);
  parallel_for(cfg.n, [&](int i) { out[i] = run_one(g, start, cfg, static_cast<std::uint64_t>(i), record, V); },
               cfg.workers);
  return out;
}

MonteCarloEstimate feynman_kac(const MetricGraph& g, const GraphPoint& start, const GraphFunction& V,
                               const GraphFunction& f, const WalkConfig& cfg) {
  cfg.validate();
  if (!f) throw InputError("feynman_kac needs an observable f");
  Walker check(g, start);
  std::vector<double> samples(cfg.n);
  parallel_for(
      cfg.n,
      [&](int i) {
        const Trajectory tr = run_one(g, start, cfg, static_cast<std::uint64_t>(i), false, V);
        const GraphPoint& x = tr.points.back().point;
        samples[i] = f(x.edge, x.xi) * std::exp(-tr.potential_integral);
      },
      cfg.workers);
  return summarize(samples);
}

MonteCarloEstimate feynman_kac(const MetricGraph& g, const GraphPoint& start, const EdgeFunction& V,
                               const EdgeFunction& f, const WalkConfig& cfg) {
  const GraphFunction vf = [&](int e, double xi) { return V.eval({e, xi}); };
  const GraphFunction ff = [&](int e, double xi) { return f.eval({e, xi}); };
  return feynman_kac(g, start, vf, ff, cfg);
}

ScatteringReport vertex_scattering(const MetricGraph& g, int v, int n, std::uint64_t seed) {
  if (v < 0 || v >= g.num_vertices()) throw InputError("unknown vertex");
  if (n < 1) throw InputError("sample count must be >= 1");
  ScatteringReport r;
  r.vertex = v;
  const auto& out = g.outgoing(v);
  for (DirectedEdge d : out) {
    r.edges.push_back(d.edge);
    r.expected.push_back(g.conductivity(d.edge) / g.vertex_conductivity(v));
  }
  const DirectedEdge d0 = out.front();
  const GraphPoint start{d0.edge, d0.reversed ? g.length(d0.edge) : 0.0};
  const double tiny = 1e-6 * g.min_length();
  std::vector<int> chosen(n);
  for (int i = 0; i < n; ++i) {
    auto rng = trajectory_rng(seed, static_cast<std::uint64_t>(i));
    Walker w(g, start);
    w.step(tiny * tiny, 1.0, rng, false);
    chosen[i] = w.position().edge;
  }
  const int k = static_cast<int>(out.size());
  std::vector<double> counts(k, 0.0);
  for (int c : chosen)
    for (int j = 0; j < k; ++j)
      if (r.edges[j] == c) counts[j] += 1.0;
  for (int j = 0; j < k; ++j) {
    r.observed.push_back(counts[j] / n);
    const double p = r.expected[j];
    r.se.push_back(std::sqrt(p * (1.0 - p) / n));
    const double e = p * n;
    r.chi2 += (counts[j] - e) * (counts[j] - e) / e;
    if (r.se.back() > 0) r.max_z = std::max(r.max_z, std::fabs(r.observed.back() - p) / r.se.back());
  }
  if (k > 1) r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(k - 1), r.chi2));
  return r;
}

MartingaleReport martingale_audit(const MetricGraph& g, int start_vertex, const WalkConfig& cfg) {
  cfg.validate();
  std::vector<int> axis(g.num_edges());
  int dim = 0;
  for (int e = 0; e < g.num_edges(); ++e) {
    const std::string& id = g.edge(e).id;
    const auto colon = id.find(':');
    if (id.size() < 3 || id[0] != 'a' || colon == std::string::npos || g.length(e) != 1.0 ||
        g.conductivity(e) != 1.0)
      throw UnsupportedConfiguration("martingale audit needs the unit lattice torus");
    axis[e] = std::stoi(id.substr(1, colon - 1));
    dim = std::max(dim, axis[e] + 1);
  }
  int side = static_cast<int>(std::lround(std::pow(g.num_vertices(), 1.0 / dim)));
  int nv = 1;
  for (int k = 0; k < dim; ++k) nv *= side;
  if (nv != g.num_vertices()) throw UnsupportedConfiguration("martingale audit needs the unit lattice torus");
  if (start_vertex < 0 || start_vertex >= nv) throw InputError("unknown start vertex");

  std::vector<double> b0(dim);
  for (int k = 0, s = 1; k < dim; ++k, s *= side) b0[k] = (start_vertex / s) % side;
  DirectedEdge d0 = g.outgoing(start_vertex).front();
  const GraphPoint start{d0.edge, d0.reversed ? 1.0 : 0.0};

  const double rate = cfg.variance_rate();
  std::vector<std::vector<double>> disp(dim, std::vector<double>(cfg.n));
  std::vector<double> comp(cfg.n);
  const StepPlan p = plan(cfg);
  parallel_for(
      cfg.n,
      [&](int i) {
        auto rng = trajectory_rng(cfg.seed, static_cast<std::uint64_t>(i));
        Walker w(g, start);
        std::vector<double> d(dim, 0.0);
        const SegmentObserver obs = [&](int e, double a, double b) { d[axis[e]] += b - a; };
        for (int k = 0; k < p.steps; ++k)
          w.step(k + 1 == p.steps ? p.last : p.dt, rate, rng, cfg.touch_correction, obs);
        double norm2 = 0.0;
        for (int k = 0; k < dim; ++k) {
          disp[k][i] = d[k];
          norm2 += (b0[k] + d[k]) * (b0[k] + d[k]);
        }
        comp[i] = norm2 - rate * cfg.t;
      },
      cfg.workers);

  MartingaleReport r;
  r.t = cfg.t;
  r.pass = true;
  for (int k = 0; k < dim; ++k) {
    const auto s = summarize(disp[k]);
    r.mean_displacement.push_back(s.estimate);
    r.se_displacement.push_back(s.se);
    r.pass = r.pass && std::fabs(s.estimate) <= 3.0 * s.se;
  }
  const auto s = summarize(comp);
  r.compensated = s.estimate;
  r.compensated_se = s.se;
  for (double x : b0) r.start_norm2 += x * x;
  r.pass = r.pass && std::fabs(s.estimate - r.start_norm2) <= 3.0 * s.se;
  return r;
}

namespace {

struct KernelSample {
  double t, d, logk;
};

std::vector<GraphPoint> interior_points(const MetricGraph& g, int per_edge) {
  std::vector<GraphPoint> pts;
  for (int e = 0; e < g.num_edges(); ++e)
    for (int j = 0; j < per_edge; ++j) pts.push_back({e, g.length(e) * (j + 0.5) / per_edge});
  return pts;
}

std::vector<KernelSample> kernel_samples(const MetricGraph& g, int m, const std::vector<double>& t_grid) {
  const auto vd = vertex_distances(g);
  const auto ys = interior_points(g, 8);
  std::vector<GraphPoint> xs;
  for (int e = 0; e < std::min(g.num_edges(), 3); ++e) xs.push_back({e, 0.5 * g.length(e)});
  std::vector<KernelSample> out;
  for (double t : t_grid) {
    KernelOptions opt;
    opt.eps = 1e-12;
    const PathSumKernel k(g, m == 1 ? KernelProfile::heat(t) : KernelProfile::polyharmonic(m, t), opt);
    const double floor = 1e3 * k.worst_report().pointwise + 1e-300;
    for (const auto& x : xs)
      for (const auto& y : ys) {
        const double v = std::fabs(k(x, y));
        if (v > floor) out.push_back({t, point_distance(g, vd, x, y), std::log(v)});
      }
  }
  return out;
}

// log|K| + log(t)/(2m) = a - c2 d^q / t^{q-1} + c3 t on per-(t, distance bin) maxima.
EnvelopeFit fit_envelope(const std::vector<KernelSample>& data, int m, double q) {
  std::vector<KernelSample> top;
  for (const auto& s : data) {
    const double bin = std::floor(s.d / 0.125);
    auto it = std::find_if(top.begin(), top.end(),
                           [&](const KernelSample& u) { return u.t == s.t && std::floor(u.d / 0.125) == bin; });
    if (it == top.end())
      top.push_back(s);
    else if (s.logk > it->logk)
      *it = s;
  }
  Eigen::MatrixXd A(top.size(), 3);
  Eigen::VectorXd b(top.size());
  for (std::size_t i = 0; i < top.size(); ++i) {
    const auto& s = top[i];
    A(i, 0) = 1.0;
    A(i, 1) = -std::pow(s.d, q) / std::pow(s.t, q - 1.0);
    A(i, 2) = s.t;
    b[i] = s.logk + std::log(s.t) / (2.0 * m);
  }
  const Eigen::Vector3d x = A.colPivHouseholderQr().solve(b);
  EnvelopeFit f;
  f.log_c = x[0];
  f.c2 = x[1];
  f.c3 = x[2];
  f.exponent = q;
  f.rms = std::sqrt((A * x - b).squaredNorm() / top.size());
  return f;
}

double envelope(const EnvelopeFit& f, int m, double t, double d, double c2_scale) {
  return f.log_c - std::log(t) / (2.0 * m) - c2_scale * f.c2 * std::pow(d, f.exponent) / std::pow(t, f.exponent - 1.0) +
         f.c3 * t;
}

}  // namespace

KernelEstimateReport kernel_estimate_audit(const MetricGraph& fit_graph, const MetricGraph& check_graph,
                                           int m, const std::vector<double>& t_grid, const GraphFunction& V) {
  if (m < 1) throw InputError("polyharmonic order must be >= 1");
  if (t_grid.size() < 2) throw InputError("kernel estimate audit needs at least two times");
  KernelEstimateReport r;
  r.m = m;
  const double q = 2.0 * m / (2.0 * m - 1.0);
  const auto fit_data = kernel_samples(fit_graph, m, t_grid);
  r.fit = fit_envelope(fit_data, m, q);
  r.linear_fit = fit_envelope(fit_data, m, 1.0);
  // lift C so the envelope covers every fitted sample
  double lift = 0.0;
  for (const auto& s : fit_data) lift = std::max(lift, s.logk - envelope(r.fit, m, s.t, s.d, 1.0));
  r.fit.log_c += lift;
  r.worst_margin_fit = std::numeric_limits<double>::infinity();
  for (const auto& s : fit_data)
    r.worst_margin_fit = std::min(r.worst_margin_fit, envelope(r.fit, m, s.t, s.d, 1.0) - s.logk);
  r.worst_margin_check = std::numeric_limits<double>::infinity();
  for (const auto& s : kernel_samples(check_graph, m, t_grid))
    r.worst_margin_check = std::min(r.worst_margin_check, envelope(r.fit, m, s.t, s.d, 0.5) - s.logk);
  r.envelope_holds = r.worst_margin_fit >= -1e-12 && r.worst_margin_check >= 0.0;

  if (m == 1) {
    // |e^{-tH}(x,y)| against |e^{t Delta}(x,y)|^{1/2} t^{-1/4} e^{t ||V+||}
    const MetricGraph& g = fit_graph;
    const double h = g.min_length() / 64.0;
    const DiscretizedOperator op = fd_assemble(g, V ? Potential(V) : Potential{}, h);
    double vplus = 0.0;
    if (V)
      for (int e = 0; e < g.num_edges(); ++e)
        for (int j = 0; j <= op.intervals[e]; ++j) vplus = std::max(vplus, V(e, g.length(e) * j / op.intervals[e]));
    const auto& eg = op.eigen();
    std::vector<int> rows;
    std::vector<GraphPoint> nodes;
    for (const auto& p : interior_points(g, 4)) {
      const int n = op.intervals[p.edge];
      const int j = static_cast<int>(std::lround(p.xi / g.length(p.edge) * n));
      rows.push_back(op.index[p.edge][j]);
      nodes.push_back({p.edge, g.length(p.edge) * j / n});
    }
    for (double t : t_grid) {
      const PathSumKernel heat(g, KernelProfile::heat(t));
      for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < rows.size(); ++b) {
          double kh = 0.0;
          for (int k = 0; k < op.size; ++k)
            kh += std::exp(-t * eg.values[k]) * eg.vectors(rows[a], k) * eg.vectors(rows[b], k);
          kh /= std::sqrt(op.mass[rows[a]] * op.mass[rows[b]]);
          const GraphPoint& x = nodes[a];
          const GraphPoint& y = nodes[b];
          if (std::fabs(kh) < 1e-10) continue;  // below the oracle's round-off floor
          const double kd = heat(x, y);
          const double bound = std::sqrt(std::max(kd, 1e-300)) * std::pow(t, -0.25) * std::exp(t * vplus);
          r.schrodinger_ratio = std::max(r.schrodinger_ratio, std::fabs(kh) / bound);
        }
    }
  }
  return r;
}

}  // namespace qgraph
