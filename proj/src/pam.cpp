#include "qgraph/pam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qgraph/errors.hpp"
#include "qgraph/numerics.hpp"
#include "qgraph/oracle.hpp"
#include "qgraph/stochastic.hpp"

namespace qgraph {

PotentialLaw PotentialLaw::bernoulli(double p, double lo, double hi) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("bernoulli law: p must lie in [0, 1]");
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw InputError("bernoulli law: values must be finite");
  PotentialLaw l;
  l.kind = Kind::bernoulli;
  l.p = p;
  l.lo = lo;
  l.hi = hi;
  return l;
}

PotentialLaw PotentialLaw::uniform(double lo, double hi) {
  if (!(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw InputError("uniform law: need lo <= hi");
  PotentialLaw l;
  l.kind = Kind::uniform;
  l.lo = lo;
  l.hi = hi;
  return l;
}

PotentialLaw PotentialLaw::constant(double v0) {
  if (!std::isfinite(v0)) throw InputError("constant law: value must be finite");
  PotentialLaw l;
  l.kind = Kind::constant;
  l.v0 = v0;
  l.lo = l.hi = v0;
  return l;
}

PotentialLaw PotentialLaw::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(spec.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        args.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw InputError("potential law: bad number '" + tok + "'");
      }
    }
  }
  if (name == "bernoulli" && args.size() == 3) return bernoulli(args[0], args[1], args[2]);
  if (name == "uniform" && args.size() == 2) return uniform(args[0], args[1]);
  if (name == "constant" && args.size() == 1) return constant(args[0]);
  throw InputError("potential law: expected bernoulli:p,lo,hi | uniform:lo,hi | constant:v0, got '" + spec + "'");
}

std::string PotentialLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::bernoulli: os << "bernoulli:" << p << "," << lo << "," << hi; break;
    case Kind::uniform: os << "uniform:" << lo << "," << hi; break;
    case Kind::constant: os << "constant:" << v0; break;
  }
  return os.str();
}

std::vector<double> PotentialLaw::sample(const MetricGraph& g, std::uint64_t seed,
                                         std::uint64_t realization) const {
  std::vector<double> v(g.num_edges(), v0);
  if (kind == Kind::constant) return v;
  auto rng = trajectory_rng(seed ^ 0x5bd1e995u, realization);
  for (double& x : v) {
    const double u = (rng() >> 11) * 0x1.0p-53;
    x = kind == Kind::bernoulli ? (u < p ? hi : lo) : lo + (hi - lo) * u;
  }
  return v;
}

namespace {

DiscretizedOperator assemble(const MetricGraph& g, const std::vector<double>& v, const PamOptions& opt) {
  const double h = std::min(1.0 / opt.per_unit, g.min_length() / 4.0);
  return fd_assemble(g, [&v](int e, double) { return v[e]; }, h);
}

// log of the mean of exp(x): exact for identical entries.
double log_mean_exp(const std::vector<double>& x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s / static_cast<double>(x.size()));
}

double percentile(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  const double pos = q * (x.size() - 1);
  const auto k = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - k;
  return k + 1 < x.size() ? x[k] * (1 - f) + x[k + 1] * f : x[k];
}

}  // namespace

EdgeFunction pam_solve(const MetricGraph& g, const PotentialLaw& law, double t, std::uint64_t seed,
                       std::uint64_t realization, const PamOptions& opt) {
  if (!(t >= 0.0)) throw InputError("pam: time must be >= 0");
  const auto v = law.sample(g, seed, realization);
  const auto op = assemble(g, v, opt);
  EdgeFunction one = EdgeFunction::with_intervals(g, op.intervals);
  for (auto& row : one.values) std::fill(row.begin(), row.end(), 1.0);
  if (law.kind == PotentialLaw::Kind::constant || t == 0.0) {
    const double val = std::exp(-law.v0 * t);
    for (auto& row : one.values) std::fill(row.begin(), row.end(), t == 0.0 ? 1.0 : val);
    return one;
  }
  return fd_semigroup(op, t, one);
}

int MomentTable::time_index(double t) const {
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] == t) return static_cast<int>(k);
  return -1;
}

MomentTable lyapunov_table(const MetricGraph& g, const PotentialLaw& law, const std::vector<double>& t_grid,
                           int p_max, int realizations, std::uint64_t seed, const PamOptions& opt) {
  if (realizations < 2) throw InputError("lyapunov table needs at least 2 realizations");
  if (p_max < 1) throw InputError("p_max must be >= 1");
  if (t_grid.empty()) throw InputError("time grid is empty");
  for (double t : t_grid)
    if (!(t >= 0.0)) throw InputError("times must be >= 0");
  const int nt = static_cast<int>(t_grid.size());
  const int ncell = nt * p_max;

  // log moments per realization
  std::vector<std::vector<double>> lm(realizations, std::vector<double>(ncell));
  std::vector<double> min_u(realizations, 1.0);
  parallel_for(
      realizations,
      [&](int r) {
        auto& out = lm[r];
        if (law.kind == PotentialLaw::Kind::constant) {
          for (int ti = 0; ti < nt; ++ti)
            for (int p = 1; p <= p_max; ++p)
              out[ti * p_max + p - 1] = t_grid[ti] == 0.0 ? 0.0 : -static_cast<double>(p) * law.v0 * t_grid[ti];
          min_u[r] = std::exp(-std::max(0.0, law.v0) * *std::max_element(t_grid.begin(), t_grid.end()));
          return;
        }
        const auto v = law.sample(g, seed, static_cast<std::uint64_t>(r));
        const auto op = assemble(g, v, opt);
        const auto& eg = op.eigen();
        const Eigen::VectorXd sq = op.mass.cwiseSqrt();
        const Eigen::VectorXd w = eg.vectors.transpose() * sq;
        const double total = op.mass.sum();
        auto parseval = [&](double s) {
          double acc = 0.0;
          for (int k = 0; k < op.size; ++k) {
            const double a = std::exp(-s * eg.values[k]) * w[k];
            acc += a * a;
          }
          return acc / total;
        };
        for (int ti = 0; ti < nt; ++ti) {
          const double t = t_grid[ti];
          if (t == 0.0) {
            for (int p = 1; p <= p_max; ++p) out[ti * p_max + p - 1] = 0.0;
            continue;
          }
          out[ti * p_max] = std::log(parseval(0.5 * t));
          if (p_max >= 2) out[ti * p_max + 1] = std::log(parseval(t));
          Eigen::VectorXd a(op.size);
          for (int k = 0; k < op.size; ++k) a[k] = std::exp(-t * eg.values[k]) * w[k];
          const Eigen::VectorXd u = (eg.vectors * a).cwiseQuotient(sq);
          min_u[r] = std::min(min_u[r], u.minCoeff());
          for (int p = 3; p <= p_max; ++p) {
            double acc = 0.0;
            for (int j = 0; j < op.size; ++j) acc += op.mass[j] * std::pow(u[j], p);
            out[ti * p_max + p - 1] = std::log(acc / total);
          }
        }
      },
      opt.workers);

  MomentTable tab;
  tab.times = t_grid;
  tab.p_max = p_max;
  tab.realizations = realizations;
  tab.seed = seed;
  tab.law = law.describe();
  tab.min_u = *std::min_element(min_u.begin(), min_u.end());
  tab.cells.resize(ncell);
  std::vector<double> col(realizations);
  for (int c = 0; c < ncell; ++c) {
    for (int r = 0; r < realizations; ++r) col[r] = lm[r][c];
    tab.cells[c].t = t_grid[c / p_max];
    tab.cells[c].p = c % p_max + 1;
    tab.cells[c].lambda = log_mean_exp(col);
  }

  // bootstrap over realizations, one shared resample for all cells
  const int B = std::max(1, opt.bootstrap);
  tab.replicates.assign(ncell, std::vector<double>(B));
  auto rng = trajectory_rng(seed ^ 0xb0075u, 0);
  std::vector<int> idx(realizations);
  for (int b = 0; b < B; ++b) {
    for (int& i : idx) i = static_cast<int>(((rng() >> 11) * 0x1.0p-53) * realizations);
    for (int c = 0; c < ncell; ++c) {
      for (int r = 0; r < realizations; ++r) col[r] = lm[idx[r]][c];
      tab.replicates[c][b] = log_mean_exp(col);
    }
  }
  for (int c = 0; c < ncell; ++c) {
    tab.cells[c].ci_lo = std::min(tab.cells[c].lambda, percentile(tab.replicates[c], 0.025));
    tab.cells[c].ci_hi = std::max(tab.cells[c].lambda, percentile(tab.replicates[c], 0.975));
  }
  return tab;
}

IntermittencyReport intermittency_report(const MomentTable& tab) {
  const int nt = static_cast<int>(tab.times.size());
  if (nt < 4) throw InputError("intermittency report needs at least 4 times");
  if (tab.p_max < 2) throw InputError("intermittency report needs p_max >= 2");
  IntermittencyReport r;
  const int nfit = std::max(2, (nt + 2) / 3);
  r.fit_points = nfit;
  std::vector<double> ts(tab.times.end() - nfit, tab.times.end());
  const int B = static_cast<int>(tab.replicates.front().size());
  auto slope = [&](int p, int b) {
    std::vector<double> ys;
    for (int ti = nt - nfit; ti < nt; ++ti) {
      const int c = ti * tab.p_max + p - 1;
      ys.push_back(b < 0 ? tab.cells[c].lambda : tab.replicates[c][b]);
    }
    return linear_fit(ts, ys).slope;
  };
  for (int p = 1; p <= tab.p_max; ++p) {
    r.lambda_over_p.push_back(slope(p, -1) / p);
    std::vector<double> rep(B);
    for (int b = 0; b < B; ++b) rep[b] = slope(p, b) / p;
    r.ci_lo.push_back(std::min(r.lambda_over_p.back(), percentile(rep, 0.025)));
    r.ci_hi.push_back(std::max(r.lambda_over_p.back(), percentile(rep, 0.975)));
  }
  r.intermittent = true;
  for (int p = 1; p < tab.p_max; ++p) r.intermittent = r.intermittent && r.ci_lo[p] > r.ci_hi[p - 1];

  for (int ti = 0; ti < nt; ++ti) {
    const int c1 = ti * tab.p_max, c2 = c1 + 1;
    r.gap.push_back(tab.cells[c2].lambda - 2.0 * tab.cells[c1].lambda);
    std::vector<double> rep(B);
    for (int b = 0; b < B; ++b) rep[b] = tab.replicates[c2][b] - 2.0 * tab.replicates[c1][b];
    r.gap_ci_lo.push_back(std::min(r.gap.back(), percentile(rep, 0.025)));
    r.gap_ci_hi.push_back(std::max(r.gap.back(), percentile(rep, 0.975)));
  }
  r.gap_nondecreasing = true;
  for (int ti = 0; ti + 1 < nt; ++ti) {
    const double slack = 0.5 * (r.gap_ci_hi[ti] - r.gap_ci_lo[ti]) + 0.5 * (r.gap_ci_hi[ti + 1] - r.gap_ci_lo[ti + 1]);
    if (r.gap[ti + 1] < r.gap[ti] - slack) r.gap_nondecreasing = false;
  }
  return r;
}

}  // namespace qgraph
