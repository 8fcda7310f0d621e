// Acceptance run: one pass/fail line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qgraph/cli.hpp"
#include "qgraph/kernel.hpp"
#include "qgraph/oracle.hpp"
#include "qgraph/pam.hpp"
#include "qgraph/paths.hpp"
#include "qgraph/spectral.hpp"
#include "qgraph/stochastic.hpp"

using namespace qgraph;

namespace {

constexpr double pi = std::numbers::pi;
const std::string kGraphs = QGRAPH_GRAPHS_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2e", x);
  return b;
}

double heat(double t, double x) { return std::exp(-x * x / (4 * t)) / std::sqrt(4 * pi * t); }

GraphFunction bump(const MetricGraph& g, GraphPoint c, double w) {
  auto vd = vertex_distances(g);
  return [&g, vd, c, w](int e, double xi) {
    const double d = point_distance(g, vd, c, {e, xi});
    return std::exp(-0.5 * d * d / (w * w));
  };
}

Outcome transfer_identities() {
  std::mt19937_64 rng(2024);
  double worst_sum = 0, worst_path = 0;
  bool ok = true;
  for (int i = 0; i < 20; ++i) {
    const int nv = 4 + static_cast<int>(rng() % 12);
    const int ne = std::min(30, nv - 1 + static_cast<int>(rng() % (31 - nv + 1)));
    const MetricGraph g = build::random(rng(), nv, ne, 0.3, 2.0, 0.2, 5.0);
    const TransferAudit a = transfer_identities_audit(g, 8);
    ok = ok && a.ok(1e-12);
    worst_sum = std::max({worst_sum, a.max_row_sum_error, a.max_weighted_sum_error});
    worst_path = std::max(worst_path, a.max_path_ratio);
  }
  return {ok, "identity err " + sci(worst_sum) + ", max sum|T_P|/3^m " + sci(worst_path)};
}

Outcome line_reduction() {
  const MetricGraph g = build::segment(80, 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  for (double t : {0.01, 0.1, 1.0}) {
    const PathSumKernel k(g, KernelProfile::heat(t), {.eps = 1e-12});
    for (int i = 0; i < 100; ++i) {
      const GraphPoint x{30 + static_cast<int>(20 * u(rng)), u(rng)};
      const GraphPoint y{30 + static_cast<int>(20 * u(rng)), u(rng)};
      const double d = std::fabs((x.edge + x.xi) - (y.edge + y.xi));
      worst = std::max(worst, std::fabs(k(x, y) - heat(t, d)));
    }
  }
  return {worst <= 1e-10, "max |K - h_t(d)| " + sci(worst)};
}

Outcome star_closed_form() {
  double worst = 0;
  for (int d : {3, 4, 5}) {
    const MetricGraph g = build::star(d, 40.0);
    for (double t : {0.05, 0.5, 2.0}) {
      std::vector<GraphPoint> ys;
      for (int e = 0; e < d; ++e)
        for (double eta : {0.0, 0.3, 1.0, 2.5}) ys.push_back({e, eta});
      for (double xi : {0.2, 1.5}) {
        const auto r = kernel_eval(g, KernelProfile::heat(t), {0, xi}, ys, 1e-10);
        for (std::size_t i = 0; i < ys.size(); ++i) {
          const double images = ys[i].edge == 0 ? heat(t, xi - ys[i].xi) + (2.0 / d - 1.0) * heat(t, xi + ys[i].xi)
                                                : 2.0 / d * heat(t, xi + ys[i].xi);
          worst = std::max(worst, std::fabs(r.values[i].value - images) / std::max(images, 1e-300));
        }
      }
    }
  }
  return {worst <= 1e-8, "max rel err vs images " + sci(worst)};
}

Outcome mass_and_symmetry() {
  const double eps = 1e-9;
  double mass = 0, asym = 0;
  for (const MetricGraph& g : {build::cycle(4, 1.0), build::random(77, 5, 7, 0.6, 1.4, 0.3, 3.0)}) {
    const KernelProfile f = KernelProfile::heat(0.1);
    const EdgeFunction one = EdgeFunction::sample(g, [](int, double) { return 1.0; }, 48.0);
    const ConvolutionResult c = convolve(g, f, one, eps);
    for (const auto& row : c.value.values)
      for (double v : row) mass = std::max(mass, std::fabs(v - 1.0));
    const PathSumKernel k(g, f, {.eps = eps});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      const int ex = static_cast<int>(rng() % g.num_edges()), ey = static_cast<int>(rng() % g.num_edges());
      const GraphPoint x{ex, u(rng) * g.length(ex)}, y{ey, u(rng) * g.length(ey)};
      asym = std::max(asym, std::fabs(k(x, y) - k(y, x)));
    }
  }
  return {mass <= 1e-6 && asym <= 2 * eps, "mass err " + sci(mass) + ", asymmetry " + sci(asym)};
}

Outcome chapman_kolmogorov() {
  const MetricGraph g = build::cycle(4, 1.0);
  const double eps = 1e-10;
  bool ok = true;
  double worst_ratio = 0;
  for (auto [t, s] : {std::pair{0.05, 0.05}, std::pair{0.1, 0.2}}) {
    const PathSumKernel ks(g, KernelProfile::heat(s), {.eps = eps});
    const PathSumKernel kts(g, KernelProfile::heat(t + s), {.eps = eps});
    for (const GraphPoint x : {GraphPoint{0, 0.1}, GraphPoint{2, 0.5}, GraphPoint{3, 1.0}}) {
      EdgeFunction u = EdgeFunction::zeros(g, 64.0);
      for (int e = 0; e < 4; ++e)
        for (int j = 0; j <= u.intervals(e); ++j) u.values[e][j] = ks({e, u.xi(e, j)}, x);
      const ConvolutionResult c = convolve(g, KernelProfile::heat(t), u, eps);
      double sup = 0;
      for (int e = 0; e < 4; ++e)
        for (int j = 0; j <= u.intervals(e); ++j)
          sup = std::max(sup, std::fabs(c.value.values[e][j] - kts({e, u.xi(e, j)}, x)));
      const double bound = 10 * (eps + c.quadrature_error);
      ok = ok && sup <= bound;
      worst_ratio = std::max(worst_ratio, sup / bound);
    }
  }
  return {ok, "max sup-err / bound " + sci(worst_ratio)};
}

Outcome oracle_equivalence() {
  bool ok = true;
  std::string detail;
  for (const MetricGraph& g : {build::cycle(4, 1.0), build::star(3, 1.0)}) {
    const GraphFunction u0fn = bump(g, {0, 0.5}, 0.25);
    double err[2];
    for (int k = 0; k < 2; ++k) {
      const double h = k == 0 ? 1.0 / 400 : 1.0 / 800;
      const DiscretizedOperator op = fd_assemble(g, {}, h);
      EdgeFunction u0 = EdgeFunction::with_intervals(g, op.intervals);
      u0 = EdgeFunction::sample_like(u0, u0fn);
      const ConvolutionResult r = semigroup_apply(g, SemigroupKind::heat, 1, 0.1, 0.0, u0, 1e-11);
      err[k] = relative_l2(g, r.value, fd_semigroup(op, 0.1, u0, 1));
    }
    ok = ok && err[0] <= 1e-3 && err[0] / err[1] >= 3.0;
    detail += (detail.empty() ? "" : "; ") + std::to_string(g.num_edges()) + " edges: " + sci(err[0]) +
              ", ratio " + sci(err[0] / err[1]);
  }
  return {ok, detail};
}

Outcome spectral_reduction() {
  const MetricGraph g = build::cycle(4, 1.0);
  const SpectrumResult r = eigenvalues_via_reduction(g, EdgePotential::zero(), -1.0, 600.0);
  double eig_err = 0, kirchhoff = 0;
  int count = 0;
  for (const auto& e : r.eigenvalues) {
    if (count == 8) break;
    const double k = std::round(2 * std::sqrt(std::max(e.lambda, 0.0)) / pi);
    eig_err = std::max(eig_err, std::fabs(e.lambda - std::pow(pi * k / 2, 2)));
    kirchhoff = std::max(kirchhoff, e.kirchhoff_residual);
    ++count;
  }
  const EdgePotential V = EdgePotential::function([](double x) { return 3 * std::cos(2 * pi * x); }, 3.0);
  const SpectrumResult rv = eigenvalues_via_reduction(g, V, -5.0, 100.0);
  for (const auto& e : rv.eigenvalues) kirchhoff = std::max(kirchhoff, e.kirchhoff_residual);

  const DiscretizedOperator op = fd_assemble(g, [](int, double x) { return 3 * std::cos(2 * pi * x); }, 1.0 / 400);
  double resid = 0, rel = 0;
  const ComplexSource f = [](int e, double x) { return cplx(1.0 + std::cos(pi * (e + x) / 2), std::sin(pi * (e + x))); };
  for (cplx z : {cplx(-1, 0), cplx(-2, 0.5)}) {
    const ResolventResult res = krein_resolvent(g, V, z, f);
    resid = std::max(resid, res.residual);
    ComplexEdgeFunction src = ComplexEdgeFunction::with_intervals(g, op.intervals);
    src = ComplexEdgeFunction::sample_like(src, f);
    const ComplexEdgeFunction u = ComplexEdgeFunction::sample_like(
        src, std::function<cplx(int, double)>([&](int e, double x) { return res.edge_series[e](x); }));
    rel = std::max(rel, relative_l2(g, u, fd_resolvent(op, z, src)));
  }
  const bool ok = count == 8 && eig_err <= 1e-8 && kirchhoff <= 1e-6 && resid <= 1e-8 && rel <= 1e-4;
  return {ok, "eig err " + sci(eig_err) + ", kirchhoff " + sci(kirchhoff) + ", krein residual " + sci(resid) +
                  ", vs oracle " + sci(rel)};
}

Outcome tree_band() {
  const int q = 3;
  const MetricGraph g = build::tree(q, 6);
  const Eigen::MatrixXd P = build_P(g);
  std::vector<int> in;
  for (int v = 0; v < g.num_vertices(); ++v)
    if (g.degree(v) > 1) in.push_back(v);
  Eigen::MatrixXd B(in.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i)
    for (std::size_t j = 0; j < in.size(); ++j) B(i, j) = P(in[i], in[j]);
  const double rho = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(B).eigenvalues().cwiseAbs().maxCoeff();
  const double edge = 2 * std::sqrt(q - 1.0) / q;
  return {std::fabs(edge - 0.942809) < 1e-6 && rho <= 0.9429 + 1e-9,
          "band edge " + std::to_string(edge) + ", interior spectral radius " + std::to_string(rho)};
}

Outcome ultracontractivity() {
  const MetricGraph g = build::cycle(4, 1.0);
  const std::vector<double> ts{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  const auto h = ultracontractivity_probe(g, SemigroupKind::heat, 1, ts, 8);
  const auto b = ultracontractivity_probe(g, SemigroupKind::polyharmonic, 2, ts, 8);
  return {std::fabs(h.beta - 0.5) <= 0.05 && std::fabs(b.beta - 0.25) <= 0.05,
          "beta heat " + std::to_string(h.beta) + ", beta m=2 " + std::to_string(b.beta)};
}

Outcome stochastic_validation() {
  const MetricGraph star = build::star(3, 1.0, {1.0, 2.0, 3.0});
  const ScatteringReport sc = vertex_scattering(star, 0, 100000, 17);
  bool ok = sc.max_z <= 3.0;
  std::string detail = "scattering max z " + sci(sc.max_z);

  WalkConfig cfg;
  cfg.t = 0.4;
  cfg.dt = 1e-3;
  cfg.n = 1000;
  const auto fk = feynman_kac(star, {1, 0.3}, [](int, double) { return 0.8; }, [](int, double) { return 1.0; }, cfg);
  const double exact = std::exp(-0.8 * 0.4);
  ok = ok && std::fabs(fk.estimate - exact) <= 3 * fk.se + 1e-12;
  detail += ", const V err " + sci(std::fabs(fk.estimate - exact));

  struct Config {
    MetricGraph g;
    GraphPoint x;
    double t;
  };
  const MetricGraph cyc = build::cycle(4, 1.0), rnd = build::random(31, 5, 7, 0.6, 1.4, 0.3, 3.0);
  const std::vector<Config> configs{{star, {0, 0.5}, 0.05},  {star, {1, 0.1}, 0.1},  {star, {2, 0.8}, 0.2},
                                    {cyc, {0, 0.5}, 0.05},   {cyc, {1, 0.9}, 0.1},   {cyc, {3, 0.2}, 0.2},
                                    {rnd, {0, 0.3}, 0.05},   {rnd, {2, 0.1}, 0.1},   {rnd, {4, 0.5}, 0.15},
                                    {rnd, {6, 0.2}, 0.2}};
  double worst_z = 0;
  int idx = 0;
  for (const auto& c : configs) {
    const GraphFunction f = bump(c.g, {idx % c.g.num_edges(), 0.5 * c.g.length(idx % c.g.num_edges())}, 0.4);
    const EdgeFunction fe = EdgeFunction::sample(c.g, f, 64.0);
    const ConvolutionResult ref = convolve(c.g, KernelProfile::heat(c.t), fe, 1e-10);
    WalkConfig w;
    w.t = c.t;
    w.dt = 5e-4;
    w.n = 40000;
    w.seed = 100 + idx;
    const auto est = feynman_kac(c.g, c.x, GraphFunction{}, f, w);
    worst_z = std::max(worst_z, std::fabs(est.estimate - ref.value.eval(c.x)) / est.se);
    ++idx;
  }
  ok = ok && worst_z <= 3.0;
  detail += ", FK vs kernel max z " + sci(worst_z);

  WalkConfig mc;
  mc.t = 1.0;
  mc.dt = 5e-3;
  mc.n = 100000;
  mc.seed = 12;
  const MartingaleReport m = martingale_audit(build::lattice_torus(3, 3), 0, mc);
  ok = ok && m.pass;
  detail += std::string(", martingale ") + (m.pass ? "ok" : "failed");
  return {ok, detail};
}

Outcome pam_identities() {
  const MetricGraph g = load_graph(kGraphs + "/torus16.json");
  std::vector<double> times;
  for (int k = 0; k <= 8; ++k) times.push_back(0.5 * k);
  const MomentTable tab = lyapunov_table(g, PotentialLaw::bernoulli(0.5, 0.0, 2.0), times, 3, 200, 2718);
  bool product = true;
  for (std::size_t i = 0; 2 * i < times.size(); ++i)
    product = product && tab.at(tab.time_index(2 * times[i]), 1).lambda == tab.at(static_cast<int>(i), 2).lambda;
  const MomentTable k = lyapunov_table(g, PotentialLaw::constant(0.4), times, 3, 10, 1);
  bool constant = true;
  for (const auto& c : k.cells) constant = constant && c.lambda == -static_cast<double>(c.p) * 0.4 * c.t;
  const IntermittencyReport rep = intermittency_report(tab);
  return {product && constant && rep.gap_nondecreasing,
          std::string("Lambda1(2t) == Lambda2(t): ") + (product ? "yes" : "no") + ", constant exact: " +
              (constant ? "yes" : "no") + ", gap nondecreasing: " + (rep.gap_nondecreasing ? "yes" : "no")};
}

Outcome cli_determinism() {
  auto run = [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return std::pair{code, out.str()};
  };
  const std::vector<std::vector<std::string>> cmds{
      {"kernel", "--graph", kGraphs + "/star3.json", "--x", "e0:0.5", "--y", "e0:0.7", "--t", "0.05"},
      {"simulate", "--graph", kGraphs + "/cycle4.json", "--start", "e0:0.5", "--t", "0.2", "--n", "2000", "--seed",
       "9", "--observable", "gaussian:e1:0.5:0.3"},
      {"pam", "--graph", kGraphs + "/torus16.json", "--law", "uniform:0,2", "--tmax", "2", "--tsteps", "4",
       "--realizations", "20", "--seed", "5", "--bootstrap", "100"},
      {"spectrum", "--graph", kGraphs + "/cycle4.json", "--window", "0", "50"}};
  bool same = true;
  for (const auto& c : cmds) {
    const auto a = run(c), b = run(c);
    same = same && a.first == 0 && a == b;
  }
  const int verify = run({"verify", "--graph", kGraphs + "/cycle4.json"}).first;
  return {same && verify == 0, std::string("identical outputs: ") + (same ? "yes" : "no") +
                                   ", verify exit " + std::to_string(verify)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"transfer identities", transfer_identities},
      {"line-graph reduction", line_reduction},
      {"star closed form", star_closed_form},
      {"mass conservation and symmetry", mass_and_symmetry},
      {"chapman-kolmogorov", chapman_kolmogorov},
      {"oracle equivalence", oracle_equivalence},
      {"spectral reduction", spectral_reduction},
      {"tree band formula", tree_band},
      {"ultracontractivity exponents", ultracontractivity},
      {"stochastic validation", stochastic_validation},
      {"parabolic anderson model", pam_identities},
      {"cli determinism", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2zu. %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
