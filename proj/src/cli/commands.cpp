#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <functional>
#include <numbers>
#include <ostream>

#include <CLI11.hpp>

#include "io.hpp"
#include "qgraph/cli.hpp"
#include "qgraph/errors.hpp"
#include "qgraph/kernel.hpp"
#include "qgraph/oracle.hpp"
#include "qgraph/pam.hpp"
#include "qgraph/paths.hpp"
#include "qgraph/profile.hpp"

namespace qgraph::cli {

namespace {

struct Common {
  std::string graph;
  std::string out;
  int workers = 0;
};

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

KernelProfile make_profile(const std::string& name, int m, double t) {
  if (!(t > 0)) throw InputError("--t must be positive");
  if (name == "heat") return KernelProfile::heat(t);
  if (name == "polyharmonic") return KernelProfile::polyharmonic(m, t);
  throw InputError("--profile must be heat or polyharmonic");
}

std::vector<int> grid_intervals(const MetricGraph& g, double per_unit) {
  if (!(per_unit > 0)) throw InputError("--per-unit must be positive");
  const EdgeFunction grid = EdgeFunction::zeros(g, per_unit);
  std::vector<int> n(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) n[e] = grid.intervals(e);
  return n;
}

// kernel ---------------------------------------------------------------------

struct KernelArgs {
  std::string x;
  std::vector<std::string> y;
  double t = 0;
  double eps = 1e-8;
  std::string profile = "heat";
  int m = 1;
};

int cmd_kernel(const Common& c, const KernelArgs& a, const std::vector<std::string>& args,
               std::ostream& out) {
  const LoadedGraph lg = load_graph_file(c.graph);
  const MetricGraph& g = lg.graph;
  const KernelProfile f = make_profile(a.profile, a.m, a.t);
  const GraphPoint x = parse_point(g, a.x);
  std::vector<GraphPoint> ys;
  for (const auto& s : a.y) ys.push_back(parse_point(g, s));
  const KernelEvalResult r = kernel_eval(g, f, x, ys, a.eps);

  json doc;
  doc["manifest"] = manifest("kernel", args, &lg,
                             {{"profile", a.profile}, {"m", a.m}, {"t", a.t}, {"eps", a.eps}});
  doc["x"] = point_label(g, x);
  json vals = json::array();
  for (std::size_t i = 0; i < r.values.size(); ++i)
    vals.push_back({{"y", point_label(g, ys[i])},
                    {"value", r.values[i].value},
                    {"truncation_bound", r.truncation_bound}});
  doc["values"] = vals;
  doc["truncation_bound"] = r.truncation_bound;
  emit_json(doc, c.out, out);
  return kExitOk;
}

// solve ----------------------------------------------------------------------

struct SolveArgs {
  double t = 0;
  int m = 1;
  double shift = 0;
  std::string init = "constant:1";
  double eps = 1e-8;
  double per_unit = 32;
  std::string csv;
  bool oracle = false;
};

int cmd_solve(const Common& c, const SolveArgs& a, const std::vector<std::string>& args,
              std::ostream& out) {
  const LoadedGraph lg = load_graph_file(c.graph);
  const MetricGraph& g = lg.graph;
  if (!(a.t > 0)) throw InputError("--t must be positive");
  if (a.m < 1) throw InputError("--m must be at least 1");
  const GraphFunction u0fn = parse_field(g, a.init);

  std::optional<DiscretizedOperator> op;
  std::vector<int> intervals;
  if (a.oracle) {
    op = fd_assemble(g, {}, 1.0 / a.per_unit);
    intervals = op->intervals;
  } else {
    intervals = grid_intervals(g, a.per_unit);
  }
  EdgeFunction u0 = EdgeFunction::with_intervals(g, intervals);
  u0 = EdgeFunction::sample_like(u0, u0fn);

  const SemigroupKind kind = a.m == 1 ? SemigroupKind::heat : SemigroupKind::polyharmonic;
  const ConvolutionResult r = semigroup_apply(g, kind, a.m, a.t, a.shift, u0, a.eps);

  json doc;
  doc["manifest"] = manifest("solve", args, &lg,
                             {{"t", a.t}, {"m", a.m}, {"shift", a.shift}, {"init", a.init},
                              {"eps", a.eps}, {"per_unit", a.per_unit}, {"oracle", a.oracle}});
  doc["truncation_bound"] = r.truncation_bound;
  doc["quadrature_error"] = r.quadrature_error;
  doc["integral"] = {{"value", integral(g, r.value)},
                     {"error_bound", r.truncation_bound + r.quadrature_error}};
  doc["max_abs"] = r.value.max_abs();
  if (op) {
    EdgeFunction ref = fd_semigroup(*op, a.t, u0, a.m);
    const double gain = std::exp(a.shift * a.t);
    for (auto& row : ref.values)
      for (double& v : row) v *= gain;
    doc["oracle"] = {{"h", 1.0 / a.per_unit}, {"relative_l2", relative_l2(g, r.value, ref)}};
  }
  if (!a.csv.empty()) {
    write_file(a.csv, edge_function_csv(g, r.value));
    write_manifest_sidecar(a.csv, doc["manifest"]);
  }
  emit_json(doc, c.out, out);
  return kExitOk;
}

// spectrum -------------------------------------------------------------------

struct SpectrumArgs {
  std::vector<double> window;
  std::string potential = "zero";
  double tol = 1e-12;
};

int cmd_spectrum(const Common& c, const SpectrumArgs& a, const std::vector<std::string>& args,
                 std::ostream& out) {
  const LoadedGraph lg = load_graph_file(c.graph);
  const MetricGraph& g = lg.graph;
  if (a.window.size() != 2 || !(a.window[0] < a.window[1]))
    throw InputError("--window needs lo < hi");
  const EdgePotential V = parse_edge_potential(a.potential);
  const SpectrumResult r = eigenvalues_via_reduction(g, V, a.window[0], a.window[1], a.tol);

  json doc;
  doc["manifest"] = manifest("spectrum", args, &lg,
                             {{"window", a.window}, {"potential", a.potential}, {"tol", a.tol}});
  json ev = json::array();
  for (const auto& e : r.eigenvalues)
    ev.push_back({{"lambda", e.lambda},
                  {"multiplicity", e.multiplicity},
                  {"source_mu", e.source_mu},
                  {"kirchhoff_residual", e.kirchhoff_residual},
                  {"tol", a.tol}});
  json dp = json::array();
  for (const auto& d : r.dirichlet)
    dp.push_back({{"lambda", d.lambda}, {"multiplicity", d.multiplicity}, {"residual", d.residual}});
  doc["eigenvalues"] = ev;
  doc["dirichlet"] = dp;
  doc["p_spectrum"] = r.p_spectrum;

  struct Entry {
    double lambda;
    int multiplicity;
    const char* source;
    double residual;
  };
  std::vector<Entry> all;
  for (const auto& e : r.eigenvalues)
    all.push_back({e.lambda, e.multiplicity, "reduction", e.kirchhoff_residual});
  for (const auto& d : r.dirichlet) all.push_back({d.lambda, d.multiplicity, "dirichlet", d.residual});
  std::sort(all.begin(), all.end(), [](const Entry& p, const Entry& q) { return p.lambda < q.lambda; });
  json merged = json::array();
  for (const auto& e : all)
    merged.push_back({{"lambda", e.lambda},
                      {"multiplicity", e.multiplicity},
                      {"source", e.source},
                      {"residual", e.residual}});
  doc["spectrum"] = merged;
  emit_json(doc, c.out, out);
  return kExitOk;
}

// resolvent ------------------------------------------------------------------

struct ResolventArgs {
  std::string z;
  std::string potential = "zero";
  std::string source = "constant:1";
  double per_unit = 64;
  std::string csv;
  bool oracle = false;
};

int cmd_resolvent(const Common& c, const ResolventArgs& a, const std::vector<std::string>& args,
                  std::ostream& out) {
  const LoadedGraph lg = load_graph_file(c.graph);
  const MetricGraph& g = lg.graph;
  const cplx z = parse_complex(a.z);
  const EdgePotential V = parse_edge_potential(a.potential);
  const GraphFunction src = parse_field(g, a.source);
  const ComplexSource csrc = [src](int e, double xi) { return cplx(src(e, xi), 0.0); };

  json doc;
  doc["manifest"] = manifest("resolvent", args, &lg,
                             {{"z", complex_json(z)}, {"potential", a.potential}, {"source", a.source},
                              {"per_unit", a.per_unit}, {"oracle", a.oracle}});
  ResolventResult r;
  if (a.oracle) {
    const DiscretizedOperator op = fd_assemble(g, potential_on_graph(g, V), 1.0 / a.per_unit);
    ComplexEdgeFunction gf = ComplexEdgeFunction::with_intervals(g, op.intervals);
    gf = ComplexEdgeFunction::sample_like(gf, csrc);
    r = krein_resolvent(g, V, z, gf);
    const ComplexEdgeFunction ref = fd_resolvent(op, z, gf);
    doc["oracle"] = {{"h", 1.0 / a.per_unit}, {"relative_l2", relative_l2(g, r.u, ref)}};
  } else {
    r = krein_resolvent(g, V, z, csrc, a.per_unit);
  }
  doc["residual"] = r.residual;
  doc["condition"] = r.condition;
  json vv = json::array();
  for (int v = 0; v < g.num_vertices(); ++v)
    vv.push_back({{"vertex", g.vertex_id(v)}, {"value", complex_json(r.vertex_values[v])}});
  doc["vertex_values"] = vv;
  if (!a.csv.empty()) {
    write_file(a.csv, edge_function_csv(g, r.u));
    write_manifest_sidecar(a.csv, doc["manifest"]);
  }
  emit_json(doc, c.out, out);
  return kExitOk;
}

// simulate -------------------------------------------------------------------

struct SimulateArgs {
  std::string start;
  double t = 1.0;
  double dt = 1e-3;
  int n = 1000;
  std::uint64_t seed = 0;
  std::string scale = "delta";
  std::string potential = "zero";
  std::string observable = "constant:1";
  std::string trajectories;
  int record = 1;
};

int cmd_simulate(const Common& c, const SimulateArgs& a, const std::vector<std::string>& args,
                 std::ostream& out) {
  const LoadedGraph lg = load_graph_file(c.graph);
  const MetricGraph& g = lg.graph;
  const GraphPoint start = parse_point(g, a.start);
  WalkConfig cfg;
  cfg.t = a.t;
  cfg.dt = a.dt;
  cfg.n = a.n;
  cfg.seed = a.seed;
  cfg.workers = c.workers;
  cfg.scale = a.scale == "half" ? GeneratorScale::half_delta : GeneratorScale::delta;
  cfg.validate();
  const EdgePotential V = parse_edge_potential(a.potential);
  const GraphFunction Vg = potential_on_graph(g, V);
  const GraphFunction f = parse_field(g, a.observable);
  const MonteCarloEstimate est = feynman_kac(g, start, Vg, f, cfg);

  json doc;
  doc["manifest"] = manifest("simulate", args, &lg,
                             {{"start", a.start}, {"t", a.t}, {"dt", a.dt}, {"n", a.n},
                              {"seed", a.seed}, {"scale", a.scale}, {"potential", a.potential},
                              {"observable", a.observable}});
  doc["estimate"] = est.estimate;
  doc["se"] = est.se;
  doc["n"] = est.n;
  if (!a.trajectories.empty()) {
    if (a.record < 1) throw InputError("--record must be at least 1");
    WalkConfig tc = cfg;
    tc.n = a.record;
    const auto paths = simulate_bm(g, start, tc, true, Vg);
    std::string s = "trajectory,time,edge,xi\n";
    for (std::size_t i = 0; i < paths.size(); ++i)
      for (const auto& p : paths[i].points)
        s += std::to_string(i) + "," + fmt(p.time) + "," + g.edge(p.point.edge).id + "," +
             fmt(p.point.xi) + "\n";
    write_file(a.trajectories, s);
    write_manifest_sidecar(a.trajectories, doc["manifest"]);
  }
  emit_json(doc, c.out, out);
  return kExitOk;
}

// pam ------------------------------------------------------------------------

struct PamArgs {
  std::string law;
  double tmax = 4.0;
  int tsteps = 8;
  int pmax = 3;
  int realizations = 200;
  std::uint64_t seed = 0;
  double per_unit = 16;
  int bootstrap = 1000;
  std::string csv;
};

int cmd_pam(const Common& c, const PamArgs& a, const std::vector<std::string>& args,
            std::ostream& out) {
  const LoadedGraph lg = load_graph_file(c.graph);
  const MetricGraph& g = lg.graph;
  const PotentialLaw law = PotentialLaw::parse(a.law);
  if (!(a.tmax > 0) || a.tsteps < 1) throw InputError("need --tmax > 0 and --tsteps >= 1");
  if (a.pmax < 1 || a.realizations < 2) throw InputError("need --pmax >= 1 and --realizations >= 2");
  std::vector<double> times;
  for (int k = 0; k <= a.tsteps; ++k) times.push_back(a.tmax * k / a.tsteps);
  PamOptions opt;
  opt.per_unit = a.per_unit;
  opt.workers = c.workers;
  opt.bootstrap = a.bootstrap;
  const MomentTable table = lyapunov_table(g, law, times, a.pmax, a.realizations, a.seed, opt);

  json doc;
  doc["manifest"] = manifest("pam", args, &lg,
                             {{"law", law.describe()}, {"tmax", a.tmax}, {"tsteps", a.tsteps},
                              {"pmax", a.pmax}, {"realizations", a.realizations}, {"seed", a.seed},
                              {"per_unit", a.per_unit}, {"bootstrap", a.bootstrap}});
  std::string csv = "t,p,lambda_est,ci_lo,ci_hi\n";
  json cells = json::array();
  for (const auto& cell : table.cells) {
    csv += fmt(cell.t) + "," + std::to_string(cell.p) + "," + fmt(cell.lambda) + "," +
           fmt(cell.ci_lo) + "," + fmt(cell.ci_hi) + "\n";
    cells.push_back({{"t", cell.t}, {"p", cell.p}, {"lambda", cell.lambda},
                     {"ci_lo", cell.ci_lo}, {"ci_hi", cell.ci_hi}});
  }
  doc["table"] = cells;
  doc["min_u"] = table.min_u;
  if (table.times.size() >= 4 && a.pmax >= 2) {
    const IntermittencyReport rep = intermittency_report(table);
    json lp = json::array();
    for (std::size_t p = 0; p < rep.lambda_over_p.size(); ++p)
      lp.push_back({{"p", p + 1}, {"value", rep.lambda_over_p[p]},
                    {"ci_lo", rep.ci_lo[p]}, {"ci_hi", rep.ci_hi[p]}});
    json gap = json::array();
    for (std::size_t i = 0; i < rep.gap.size(); ++i)
      gap.push_back({{"t", table.times[i]}, {"value", rep.gap[i]},
                     {"ci_lo", rep.gap_ci_lo[i]}, {"ci_hi", rep.gap_ci_hi[i]}});
    doc["intermittency"] = {{"lambda_over_p", lp},
                            {"intermittent", rep.intermittent},
                            {"gap", gap},
                            {"gap_nondecreasing", rep.gap_nondecreasing},
                            {"fit_points", rep.fit_points}};
  }
  if (!a.csv.empty()) {
    write_file(a.csv, csv);
    write_manifest_sidecar(a.csv, doc["manifest"]);
  }
  emit_json(doc, c.out, out);
  return kExitOk;
}

// verify ---------------------------------------------------------------------

struct VerifyArgs {
  std::uint64_t seed = 1;
  int n = 20000;
};

struct Check {
  std::string name;
  bool ran = false;
  bool pass = false;
  double value = 0;
  double bound = 0;
  std::string note;
};

Check check_transfer(const MetricGraph& g) {
  Check c;
  c.name = "transfer identities";
  c.ran = true;
  const TransferAudit t = transfer_identities_audit(g, 8);
  c.value = std::max({t.max_row_sum_error, t.max_weighted_sum_error, t.max_reversal_error,
                      t.max_path_ratio - 1.0, t.max_weighted_path_ratio - 1.0, 0.0});
  c.bound = 1e-12;
  c.pass = t.ok(1e-12);
  c.note = "m <= 8";
  return c;
}

Check check_kernel_oracle(const MetricGraph& g, const GraphFunction& u0fn, EdgeFunction& kernel_out) {
  Check c;
  c.name = "kernel vs oracle";
  const double t = 0.1;
  const double h = std::max(g.min_length() / 100.0, g.total_length() / 1000.0);
  const bool fd = h <= g.min_length() / 4.0;
  std::optional<DiscretizedOperator> op;
  if (fd) op = fd_assemble(g, {}, h);
  EdgeFunction u0 = fd ? EdgeFunction::with_intervals(g, op->intervals) : EdgeFunction::zeros(g, 32.0);
  u0 = EdgeFunction::sample_like(u0, u0fn);
  const ConvolutionResult r = semigroup_apply(g, SemigroupKind::heat, 1, t, 0.0, u0, 1e-10);
  kernel_out = r.value;
  if (!fd) {
    c.note = "skipped: graph too large for the dense oracle";
    return c;
  }
  c.ran = true;
  const EdgeFunction ref = fd_semigroup(*op, t, u0, 1);
  c.value = relative_l2(g, r.value, ref);
  c.bound = 1e-3;
  c.pass = c.value <= c.bound;
  char buf[64];
  std::snprintf(buf, sizeof buf, "heat t = 0.1, h = %.3g", h);
  c.note = buf;
  return c;
}

Check check_spectrum_oracle(const MetricGraph& g) {
  Check c;
  c.name = "spectrum vs oracle";
  if (!g.is_equilateral()) {
    c.note = "skipped: graph is not equilateral";
    return c;
  }
  c.ran = true;
  const double l = g.min_length();
  const double hi = 50.0 / (l * l);
  const SpectrumResult r = eigenvalues_via_reduction(g, EdgePotential::zero(), 0.0, hi);
  std::vector<double> red;
  double kirchhoff = 0;
  for (const auto& e : r.eigenvalues) {
    red.insert(red.end(), e.multiplicity, e.lambda);
    kirchhoff = std::max(kirchhoff, e.kirchhoff_residual);
  }
  for (const auto& d : r.dirichlet) red.insert(red.end(), d.multiplicity, d.lambda);
  std::sort(red.begin(), red.end());
  const double h = std::max(l / 100.0, g.total_length() / 1000.0);
  if (h > l / 4.0) {
    c.ran = false;
    c.note = "skipped: graph too large for the dense oracle";
    return c;
  }
  const DiscretizedOperator op = fd_assemble(g, {}, h);
  std::vector<double> fd;
  for (double v : fd_eigenvalues(op))
    if (v <= hi) fd.push_back(v);
  c.bound = 1e-3;
  if (fd.size() != red.size()) {
    c.value = std::numeric_limits<double>::infinity();
    c.note = "count " + std::to_string(red.size()) + " vs oracle " + std::to_string(fd.size());
    return c;
  }
  for (std::size_t i = 0; i < red.size(); ++i)
    c.value = std::max(c.value, std::abs(red[i] - fd[i]) / std::max(1.0, std::abs(red[i])));
  c.pass = c.value <= c.bound && kirchhoff <= 1e-6;
  c.note = std::to_string(red.size()) + " eigenvalues below " + fmt(hi);
  return c;
}

Check check_fk(const MetricGraph& g, const GraphFunction& f, const EdgeFunction& kernel_solution,
               std::uint64_t seed, int n) {
  Check c;
  c.name = "feynman-kac vs kernel";
  c.ran = true;
  const GraphPoint x{0, 0.5 * g.length(0)};
  WalkConfig cfg;
  cfg.t = 0.1;
  cfg.dt = 2.5e-4;
  cfg.n = n;
  cfg.seed = seed;
  const MonteCarloEstimate est = feynman_kac(g, x, GraphFunction{}, f, cfg);
  const double ref = kernel_solution.eval(x);
  c.value = std::abs(est.estimate - ref) / est.se;
  c.bound = 3.0;
  c.pass = c.value <= c.bound;
  c.note = "z-score, N = " + std::to_string(n);
  return c;
}

int cmd_verify(const Common& c, const VerifyArgs& a, const std::vector<std::string>& args,
               std::ostream& out) {
  LoadedGraph lg;
  if (c.graph.empty()) {
    lg.graph = build::cycle(4);
    lg.path = "builtin:cycle4";
    lg.digest = fnv1a_hex(lg.graph.to_json().dump());
  } else {
    lg = load_graph_file(c.graph);
  }
  const MetricGraph& g = lg.graph;
  const GraphPoint centre{0, 0.5 * g.length(0)};
  const std::string bump = g.edge(0).id + ":" + fmt(centre.xi) + ":" + fmt(0.25 * g.min_length());
  const GraphFunction u0 = parse_field(g, "gaussian:" + bump);

  std::vector<Check> checks;
  checks.push_back(check_transfer(g));
  EdgeFunction solution;
  checks.push_back(check_kernel_oracle(g, u0, solution));
  checks.push_back(check_spectrum_oracle(g));
  checks.push_back(check_fk(g, u0, solution, a.seed, a.n));

  bool ok = true;
  json rows = json::array();
  out << "check                     result   value          bound      note\n";
  for (const auto& ch : checks) {
    const char* status = !ch.ran ? "skip" : ch.pass ? "pass" : "FAIL";
    if (ch.ran && !ch.pass) ok = false;
    char line[160];
    std::snprintf(line, sizeof line, "%-25s %-8s %-14.6g %-10.3g %s\n", ch.name.c_str(), status,
                  ch.value, ch.bound, ch.note.c_str());
    out << line;
    rows.push_back({{"check", ch.name}, {"status", status}, {"value", ch.value},
                    {"bound", ch.bound}, {"note", ch.note}});
  }
  out << (ok ? "all checks passed\n" : "some checks failed\n");
  if (!c.out.empty()) {
    json doc;
    doc["manifest"] = manifest("verify", args, &lg, {{"seed", a.seed}, {"n", a.n}});
    doc["checks"] = rows;
    doc["pass"] = ok;
    emit_json(doc, c.out, out);
  }
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernels, spectra and stochastic experiments on metric graphs", "qgraph"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&common](CLI::App* sub, bool graph_required) {
    auto* opt = sub->add_option("--graph", common.graph, "graph JSON file");
    if (graph_required) opt->required();
    sub->add_option("--out", common.out, "write JSON here instead of stdout");
    sub->add_option("--workers", common.workers, "worker threads (default: QGRAPH_WORKERS or all cores)")
        ->check(CLI::NonNegativeNumber);
  };

  KernelArgs ka;
  auto* kernel = app.add_subcommand("kernel", "evaluate K_f(x, y)");
  add_common(kernel, true);
  kernel->add_option("--x", ka.x, "source point edge:xi")->required();
  kernel->add_option("--y", ka.y, "target points edge:xi")->required();
  kernel->add_option("--t", ka.t, "time")->required();
  kernel->add_option("--eps", ka.eps, "truncation target");
  kernel->add_option("--profile", ka.profile, "heat | polyharmonic");
  kernel->add_option("--m", ka.m, "polyharmonic order");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "apply the heat or polyharmonic semigroup");
  add_common(solve, true);
  solve->add_option("--t", sa.t, "time")->required();
  solve->add_option("--m", sa.m, "order (1 = heat)");
  solve->add_option("--shift", sa.shift, "exponential shift");
  solve->add_option("--init", sa.init, "constant:c | gaussian:edge:xi:width");
  solve->add_option("--eps", sa.eps, "truncation target");
  solve->add_option("--per-unit", sa.per_unit, "grid nodes per unit length");
  solve->add_option("--csv", sa.csv, "write the solution grid as CSV");
  solve->add_flag("--oracle", sa.oracle, "compare with the finite-difference oracle");

  SpectrumArgs spa;
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues by vertex reduction");
  add_common(spectrum, true);
  spectrum->add_option("--window", spa.window, "lo hi")->required()->expected(2);
  spectrum->add_option("--potential", spa.potential, "zero | constant:v0 | cos:a,k");
  spectrum->add_option("--tol", spa.tol, "root tolerance");

  ResolventArgs ra;
  auto* resolvent = app.add_subcommand("resolvent", "(H - z)^{-1} g by the Krein formula");
  add_common(resolvent, true);
  resolvent->add_option("--z", ra.z, "re or re,im")->required();
  resolvent->add_option("--potential", ra.potential, "zero | constant:v0 | cos:a,k");
  resolvent->add_option("--source", ra.source, "constant:c | gaussian:edge:xi:width");
  resolvent->add_option("--per-unit", ra.per_unit, "grid nodes per unit length");
  resolvent->add_option("--csv", ra.csv, "write the solution grid as CSV");
  resolvent->add_flag("--oracle", ra.oracle, "compare with the finite-difference oracle");

  SimulateArgs sia;
  auto* simulate = app.add_subcommand("simulate", "Brownian motion and Feynman-Kac estimates");
  add_common(simulate, true);
  simulate->add_option("--start", sia.start, "start point edge:xi")->required();
  simulate->add_option("--t", sia.t, "horizon");
  simulate->add_option("--dt", sia.dt, "time step");
  simulate->add_option("--n", sia.n, "trajectories");
  simulate->add_option("--seed", sia.seed, "seed");
  simulate->add_option("--scale", sia.scale, "delta | half")->check(CLI::IsMember({"delta", "half"}));
  simulate->add_option("--potential", sia.potential, "zero | constant:v0 | cos:a,k");
  simulate->add_option("--observable", sia.observable, "constant:c | gaussian:edge:xi:width");
  simulate->add_option("--trajectories", sia.trajectories, "write recorded paths as CSV");
  simulate->add_option("--record", sia.record, "number of paths to record");

  PamArgs pa;
  auto* pam = app.add_subcommand("pam", "parabolic Anderson model moments");
  add_common(pam, true);
  pam->add_option("--law", pa.law, "bernoulli:p,lo,hi | uniform:lo,hi | constant:v0")->required();
  pam->add_option("--tmax", pa.tmax, "last time");
  pam->add_option("--tsteps", pa.tsteps, "time steps");
  pam->add_option("--pmax", pa.pmax, "largest moment");
  pam->add_option("--realizations", pa.realizations, "realizations");
  pam->add_option("--seed", pa.seed, "seed");
  pam->add_option("--per-unit", pa.per_unit, "mesh nodes per unit length");
  pam->add_option("--bootstrap", pa.bootstrap, "bootstrap resamples");
  pam->add_option("--csv", pa.csv, "write the moment table as CSV");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "cross-validation suite");
  add_common(verify, false);
  verify->add_option("--seed", va.seed, "seed for the Monte Carlo check");
  verify->add_option("--n", va.n, "Monte Carlo trajectories");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (common.workers > 0) setenv("QGRAPH_WORKERS", std::to_string(common.workers).c_str(), 1);

  try {
    if (*kernel) return cmd_kernel(common, ka, args, out);
    if (*solve) return cmd_solve(common, sa, args, out);
    if (*spectrum) return cmd_spectrum(common, spa, args, out);
    if (*resolvent) return cmd_resolvent(common, ra, args, out);
    if (*simulate) return cmd_simulate(common, sia, args, out);
    if (*pam) return cmd_pam(common, pa, args, out);
    if (*verify) return cmd_verify(common, va, args, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what();
    if (!std::isnan(e.achieved_bound())) err << " (achieved bound " << e.achieved_bound() << ")";
    err << "\n";
    return kExitNumerical;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace qgraph::cli
