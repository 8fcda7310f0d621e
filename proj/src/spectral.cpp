#include "qgraph/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qgraph/errors.hpp"

namespace qgraph {

namespace {

constexpr double kDirichletTol = 1e-12;

double require_equilateral(const MetricGraph& g) {
  if (!g.is_equilateral())
    throw UnsupportedConfiguration("vertex reduction needs an equilateral graph");
  return g.length(0);
}

// c and s for constant potential; mu = lambda - v0.
void closed_form(cplx mu, double t, cplx& c, cplx& dc, cplx& s, cplx& ds) {
  const cplx w = mu * t * t;
  if (std::abs(w) < 1e-3) {
    // series in w = mu t^2
    cplx cs{1.0}, ss{1.0}, tc{1.0}, ts{1.0};
    for (int k = 1; k < 12; ++k) {
      tc *= -w / double((2 * k - 1) * (2 * k));
      ts *= -w / double((2 * k) * (2 * k + 1));
      cs += tc;
      ss += ts;
    }
    c = cs;
    s = t * ss;
    ds = c;
    dc = -mu * s;
    return;
  }
  const cplx r = std::sqrt(mu);
  c = std::cos(r * t);
  s = std::sin(r * t) / r;
  ds = c;
  dc = -r * std::sin(r * t);
}

struct Reduced {
  double ell;
  EdgePotential V;
  cplx lambda;
};

Reduced reduce(const MetricGraph& g, const EdgePotential& V, cplx lambda) {
  const double ell = require_equilateral(g);
  return {ell, V.scaled(ell * ell), lambda * (ell * ell)};
}

}  // namespace

EdgePotential EdgePotential::zero() { return {}; }

EdgePotential EdgePotential::constant(double v0) {
  EdgePotential p;
  p.kind_ = v0 == 0.0 ? Kind::zero : Kind::constant;
  p.v0_ = v0;
  p.sup_ = std::fabs(v0);
  return p;
}

EdgePotential EdgePotential::function(std::function<double(double)> v, double sup_bound) {
  if (!v) throw InputError("potential function is empty");
  EdgePotential p;
  p.kind_ = Kind::function;
  p.fn_ = std::move(v);
  p.sup_ = sup_bound;
  return p;
}

EdgePotential EdgePotential::sampled(std::vector<double> samples) {
  if (samples.size() < 2) throw InputError("sampled potential needs at least two samples");
  EdgePotential p;
  p.kind_ = Kind::sampled;
  for (double v : samples) {
    if (!std::isfinite(v)) throw InputError("potential samples must be finite");
    p.sup_ = std::max(p.sup_, std::fabs(v));
  }
  p.samples_ = std::move(samples);
  return p;
}

double EdgePotential::operator()(double x) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::constant: return v0_;
    case Kind::function: return scale_ * fn_(x);
    case Kind::sampled: {
      const int n = static_cast<int>(samples_.size()) - 1;
      const double u = std::clamp(x, 0.0, 1.0) * n;
      const int k = std::min(static_cast<int>(u), n - 1);
      const double f = u - k;
      return scale_ * (samples_[k] * (1.0 - f) + samples_[k + 1] * f);
    }
  }
  return 0.0;
}

bool EdgePotential::is_symmetric(double tol) const {
  if (is_constant()) return true;
  for (int k = 0; k <= 100; ++k) {
    const double x = k / 100.0;
    const double a = (*this)(x), b = (*this)(1.0 - x);
    if (std::fabs(a - b) > tol * std::max(1.0, std::fabs(a))) return false;
  }
  return true;
}

EdgePotential EdgePotential::scaled(double s) const {
  EdgePotential p = *this;
  p.v0_ *= s;
  p.sup_ *= std::fabs(s);
  p.scale_ *= s;
  return p;
}

FundamentalPair::FundamentalPair(const EdgePotential& V, cplx lambda) : lambda_(lambda) {
  if (V.is_constant()) {
    closed_ = true;
    mu_ = lambda - V.constant_value();
    closed_form(mu_, 1.0, c1_, dc1_, s1_, ds1_);
    return;
  }
  closed_ = false;
  const int n = 48 + 2 * static_cast<int>(std::ceil(std::sqrt(std::abs(lambda)) + V.sup_bound() / 8.0));
  auto desc = Chebyshev<cplx>::nodes(0.0, 1.0, n);  // descending
  std::vector<double> asc(desc.rbegin(), desc.rend());
  asc.front() = 0.0;
  asc.back() = 1.0;
  const OdeRhs rhs = [&](double t, const std::vector<cplx>& y, std::vector<cplx>& dy) {
    const cplx q = V(t) - lambda;
    dy[0] = y[1];
    dy[1] = q * y[0];
    dy[2] = y[3];
    dy[3] = q * y[2];
  };
  const auto sol = rk45(rhs, 0.0, {1.0, 0.0, 0.0, 1.0}, asc, 1e-13, 1e-15);
  std::vector<cplx> vc(n + 1), vdc(n + 1), vs(n + 1), vds(n + 1);
  for (int k = 0; k <= n; ++k) {
    const auto& y = sol[n - k];
    vc[k] = y[0];
    vdc[k] = y[1];
    vs[k] = y[2];
    vds[k] = y[3];
  }
  cc_ = Chebyshev<cplx>::fit_values(0.0, 1.0, vc);
  dcc_ = Chebyshev<cplx>::fit_values(0.0, 1.0, vdc);
  sc_ = Chebyshev<cplx>::fit_values(0.0, 1.0, vs);
  dsc_ = Chebyshev<cplx>::fit_values(0.0, 1.0, vds);
  const auto& end = sol.back();
  c1_ = end[0];
  dc1_ = end[1];
  s1_ = end[2];
  ds1_ = end[3];
}

cplx FundamentalPair::c(double t) const {
  if (!closed_) return cc_(t);
  cplx c, dc, s, ds;
  closed_form(mu_, t, c, dc, s, ds);
  return c;
}

cplx FundamentalPair::dc(double t) const {
  if (!closed_) return dcc_(t);
  cplx c, dc, s, ds;
  closed_form(mu_, t, c, dc, s, ds);
  return dc;
}

cplx FundamentalPair::s(double t) const {
  if (!closed_) return sc_(t);
  cplx c, dc, s, ds;
  closed_form(mu_, t, c, dc, s, ds);
  return s;
}

cplx FundamentalPair::ds(double t) const {
  if (!closed_) return dsc_(t);
  cplx c, dc, s, ds;
  closed_form(mu_, t, c, dc, s, ds);
  return ds;
}

namespace {

// c(1), c'(1), s(1), s'(1) without building interpolants.
struct Endpoint {
  cplx c1, dc1, s1, ds1;
};

Endpoint endpoint(const EdgePotential& V, cplx lambda) {
  Endpoint r;
  if (V.is_constant()) {
    closed_form(lambda - V.constant_value(), 1.0, r.c1, r.dc1, r.s1, r.ds1);
    return r;
  }
  const OdeRhs rhs = [&](double t, const std::vector<cplx>& y, std::vector<cplx>& dy) {
    const cplx q = V(t) - lambda;
    dy[0] = y[1];
    dy[1] = q * y[0];
    dy[2] = y[3];
    dy[3] = q * y[2];
  };
  const auto sol = rk45(rhs, 0.0, {1.0, 0.0, 0.0, 1.0}, {1.0}, 1e-13, 1e-15);
  r.c1 = sol[0][0];
  r.dc1 = sol[0][1];
  r.s1 = sol[0][2];
  r.ds1 = sol[0][3];
  return r;
}

}  // namespace

cplx floquet_discriminant(const EdgePotential& V, cplx lambda) {
  const Endpoint e = endpoint(V, lambda);
  return 0.5 * (e.c1 + e.ds1);
}

Eigen::MatrixXd build_P(const MetricGraph& g) {
  const int n = g.num_vertices();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int e = 0; e < g.num_edges(); ++e) {
    const int a = g.edge(e).source, b = g.edge(e).target;
    P(a, b) += g.conductivity(e);
    P(b, a) += g.conductivity(e);
  }
  for (int v = 0; v < n; ++v) P.row(v) /= g.vertex_conductivity(v);
  return P;
}

Eigen::Matrix2cd dtn_map(const EdgePotential& V, cplx lambda) {
  const Endpoint e = endpoint(V, lambda);
  if (std::abs(e.s1) < kDirichletTol)
    throw NumericalError("lambda is a Dirichlet point of the edge", std::abs(e.s1));
  Eigen::Matrix2cd m;
  m << -e.c1, 1.0, 1.0, -e.ds1;
  return m / e.s1;
}

Eigen::MatrixXcd vertex_condition_operator(const MetricGraph& g, const EdgePotential& V,
                                           cplx lambda) {
  const Reduced r = reduce(g, V, lambda);
  const Endpoint ep = endpoint(r.V, r.lambda);
  if (std::abs(ep.s1) < kDirichletTol)
    throw NumericalError("lambda is a Dirichlet point of the edge", std::abs(ep.s1));
  const int n = g.num_vertices();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
  const cplx f = 1.0 / (ep.s1 * r.ell);
  for (int e = 0; e < g.num_edges(); ++e) {
    const int i = g.edge(e).source, t = g.edge(e).target;
    const double c = g.conductivity(e);
    M(i, t) += c * f;
    M(i, i) -= c * ep.c1 * f;
    M(t, i) += c * f;
    M(t, t) -= c * ep.ds1 * f;
  }
  return M;
}

ComplexEdgeFunction gamma_field(const MetricGraph& g, const EdgePotential& V, cplx lambda,
                                const Eigen::VectorXcd& z, double per_unit) {
  if (z.size() != g.num_vertices()) throw InputError("gamma field: one value per vertex expected");
  const Reduced r = reduce(g, V, lambda);
  const FundamentalPair fp(r.V, r.lambda);
  if (std::abs(fp.s1()) < kDirichletTol)
    throw NumericalError("lambda is a Dirichlet point of the edge", std::abs(fp.s1()));
  return ComplexEdgeFunction::sample(
      g,
      [&](int e, double xi) {
        const double t = xi / r.ell;
        const cplx zi = z[g.edge(e).source], zt = z[g.edge(e).target];
        return (fp.s(t) * zt + zi * fp.phi1(t)) / fp.s1();
      },
      per_unit);
}

Eigen::VectorXcd mu_map(const MetricGraph& g, const EdgePotential& V, cplx lambda,
                        const ComplexEdgeFunction& u) {
  const Reduced r = reduce(g, V, lambda);
  const FundamentalPair fp(r.V, r.lambda);
  if (std::abs(fp.s1()) < kDirichletTol)
    throw NumericalError("lambda is a Dirichlet point of the edge", std::abs(fp.s1()));
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(g.num_vertices());
  for (int e = 0; e < g.num_edges(); ++e) {
    const int n = u.intervals(e);
    const auto w = simpson_weights(n, u.h(e));
    cplx a{}, b{};
    for (int j = 0; j <= n; ++j) {
      const double t = u.xi(e, j) / r.ell;
      a += w[j] * fp.phi1(t) * u.values[e][j];
      b += w[j] * fp.s(t) * u.values[e][j];
    }
    const int i = g.edge(e).source, t = g.edge(e).target;
    const double c = g.conductivity(e);
    out[i] += c * a / fp.s1() / g.vertex_conductivity(i);
    out[t] += c * b / fp.s1() / g.vertex_conductivity(t);
  }
  return out;
}

namespace {

// Bracketed root of f on [a, b] with f(a) f(b) < 0.
template <class F>
double bisect(const F& f, double a, double b, double fa, double tol) {
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (b - a <= tol * std::max(1.0, std::fabs(m))) break;
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  const double x = 0.5 * (a + b);
  // one secant-Newton polish kept only if it stays in the bracket and improves |f|
  const double hstep = 1e-7 * std::max(1.0, std::fabs(x));
  const double fx = f(x);
  const double d = (f(x + hstep) - f(x - hstep)) / (2.0 * hstep);
  if (d != 0.0) {
    const double y = x - fx / d;
    if (y >= a && y <= b && std::fabs(f(y)) < std::fabs(fx)) return y;
  }
  return x;
}

// Sign changes of samples fv on grid xs, refined by bisection; also resolves narrow
// sign pairs hiding inside one grid cell near a small local extremum.
template <class F>
std::vector<double> scan_roots(const F& f, const std::vector<double>& xs, const std::vector<double>& fv,
                               double tol) {
  std::vector<double> roots;
  const int n = static_cast<int>(xs.size());
  for (int j = 0; j < n; ++j) {
    if (fv[j] == 0.0) {
      roots.push_back(xs[j]);
      continue;
    }
    if (j + 1 < n && fv[j + 1] != 0.0 && (fv[j] < 0) != (fv[j + 1] < 0)) {
      roots.push_back(bisect(f, xs[j], xs[j + 1], fv[j], tol));
      continue;
    }
    if (j > 0 && j + 1 < n) {
      const bool extremum = (fv[j] - fv[j - 1]) * (fv[j + 1] - fv[j]) < 0.0;
      const bool toward_zero = std::fabs(fv[j]) < std::fabs(fv[j - 1]) && std::fabs(fv[j]) < std::fabs(fv[j + 1]);
      const bool same_sign = (fv[j - 1] < 0) == (fv[j] < 0) && (fv[j + 1] < 0) == (fv[j] < 0);
      if (extremum && toward_zero && same_sign && std::fabs(fv[j]) < 0.05) {
        constexpr int sub = 64;
        double xa = xs[j - 1], fa = fv[j - 1];
        for (int k = 1; k <= 2 * sub; ++k) {
          const double xb = xs[j - 1] + (xs[j + 1] - xs[j - 1]) * k / (2.0 * sub);
          const double fb = f(xb);
          if (fb != 0.0 && (fa < 0) != (fb < 0)) roots.push_back(bisect(f, xa, xb, fa, tol));
          xa = xb;
          fa = fb;
        }
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots)
    if (out.empty() || r - out.back() > 1e-9 * std::max(1.0, std::fabs(r))) out.push_back(r);
  return out;
}

// psi_e = a_e c + b_e s; rows: continuity at every vertex, Kirchhoff balance.
DirichletPoint dirichlet_point(const MetricGraph& g, const EdgePotential& Vh, double root, double l2) {
  const Endpoint ep = endpoint(Vh, root);
  const int ne = g.num_edges(), nv = g.num_vertices();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * ne, 2 * ne);
  int row = 0;
  auto value = [&](DirectedEdge d, Eigen::RowVectorXd& r) {
    // value at i(d): source end of e if not reversed
    if (!d.reversed) {
      r[2 * d.edge] += 1.0;
    } else {
      r[2 * d.edge] += ep.c1.real();
      r[2 * d.edge + 1] += ep.s1.real();
    }
  };
  for (int v = 0; v < nv; ++v) {
    const auto& out = g.outgoing(v);
    for (std::size_t k = 1; k < out.size(); ++k) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(2 * ne), q = Eigen::RowVectorXd::Zero(2 * ne);
      value(out[k], r);
      value(out[0], q);
      A.row(row++) = r - q;
    }
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(2 * ne);
    for (DirectedEdge d : out) {
      const double c = g.conductivity(d.edge);
      if (!d.reversed) {
        r[2 * d.edge + 1] += c;
      } else {
        r[2 * d.edge] -= c * ep.dc1.real();
        r[2 * d.edge + 1] -= c * ep.ds1.real();
      }
    }
    A.row(row++) = r / g.vertex_conductivity(v);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  DirichletPoint dp;
  dp.lambda = root / l2;
  const double thresh = 1e-8 * std::max(1.0, sv[0]);
  for (int k = static_cast<int>(sv.size()) - 1; k >= 0 && sv[k] < thresh; --k) {
    ++dp.multiplicity;
    dp.residual = std::max(dp.residual, sv[k]);
  }
  return dp;
}

}  // namespace

SpectrumResult eigenvalues_via_reduction(const MetricGraph& g, const EdgePotential& V, double lo,
                                         double hi, double tol) {
  if (!(hi > lo)) throw InputError("spectral window must satisfy lo < hi");
  const double ell = require_equilateral(g);
  const double l2 = ell * ell;
  const EdgePotential Vh = V.scaled(l2);
  const int nv = g.num_vertices();

  if (!Vh.is_symmetric()) {
    for (int v = 0; v < nv; ++v) {
      double cout = 0.0, cin = 0.0;
      for (DirectedEdge d : g.outgoing(v)) (d.reversed ? cin : cout) += g.conductivity(d.edge);
      if (std::fabs(cout - cin) > 1e-12 * (cout + cin))
        throw UnsupportedConfiguration(
            "asymmetric edge potential needs orientation-balanced vertices for the scalar reduction");
    }
  }

  // P is similar to the symmetric C^{-1/2} A C^{-1/2}
  Eigen::VectorXd cv(nv);
  for (int v = 0; v < nv; ++v) cv[v] = g.vertex_conductivity(v);
  const Eigen::MatrixXd P = build_P(g);
  Eigen::MatrixXd S = cv.cwiseSqrt().asDiagonal() * P * cv.cwiseSqrt().cwiseInverse().asDiagonal();
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::VectorXd mus = es.eigenvalues();
  const Eigen::MatrixXd Z = cv.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors();

  SpectrumResult res;
  res.p_spectrum.assign(mus.data(), mus.data() + nv);

  const double a = lo * l2, b = hi * l2;
  const double step = std::numbers::pi * std::numbers::pi / 100.0;
  std::vector<double> xs;
  for (int j = 0;; ++j) {
    const double x = a + j * step;
    if (x >= b) break;
    xs.push_back(x);
  }
  xs.push_back(b);
  std::vector<double> D(xs.size()), s1(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const Endpoint ep = endpoint(Vh, xs[j]);
    D[j] = 0.5 * (ep.c1 + ep.ds1).real();
    s1[j] = ep.s1.real();
  }
  auto Dfn = [&](double x) {
    const Endpoint ep = endpoint(Vh, x);
    return 0.5 * (ep.c1 + ep.ds1).real();
  };
  auto s1fn = [&](double x) { return endpoint(Vh, x).s1.real(); };

  for (double r : scan_roots(s1fn, xs, s1, tol)) res.dirichlet.push_back(dirichlet_point(g, Vh, r, l2));

  int k = 0;
  while (k < nv) {
    int e = k + 1;
    while (e < nv && mus[e] - mus[e - 1] < 1e-8) ++e;
    double mu = 0.0;
    for (int q = k; q < e; ++q) mu += mus[q];
    mu = std::clamp(mu / (e - k), -1.0, 1.0);
    const bool edge_band = std::fabs(std::fabs(mu) - 1.0) < 1e-8;
    if (edge_band) mu = std::copysign(1.0, mu);
    std::vector<double> fv(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) fv[j] = D[j] - mu;
    auto f = [&](double x) { return Dfn(x) - mu; };
    for (double root : scan_roots(f, xs, fv, tol)) {
      if (std::fabs(s1fn(root)) < kDirichletTol) continue;
      if (edge_band && std::any_of(res.dirichlet.begin(), res.dirichlet.end(), [&](const DirichletPoint& d) {
            return std::fabs(d.lambda * l2 - root) < 1e-5 * std::max(1.0, std::fabs(root));
          }))
        continue;
      MetricEigenvalue ev;
      ev.lambda = root / l2;
      ev.multiplicity = e - k;
      ev.source_mu = mu;
      const Eigen::MatrixXcd M = vertex_condition_operator(g, V, ev.lambda);
      for (int q = k; q < e; ++q) {
        const Eigen::VectorXcd z = Z.col(q).cast<cplx>();
        const Eigen::VectorXcd kz = M * z;
        double worst = 0.0;
        for (int v = 0; v < nv; ++v) worst = std::max(worst, std::abs(kz[v]) / cv[v]);
        ev.kirchhoff_residual = std::max(ev.kirchhoff_residual, worst / z.cwiseAbs().maxCoeff());
      }
      res.eigenvalues.push_back(ev);
    }
    k = e;
  }
  std::sort(res.eigenvalues.begin(), res.eigenvalues.end(),
            [](const MetricEigenvalue& x, const MetricEigenvalue& y) { return x.lambda < y.lambda; });
  return res;
}

ResolventResult krein_resolvent(const MetricGraph& g, const EdgePotential& V, cplx z,
                                const ComplexSource& gfun, double per_unit) {
  const Reduced r = reduce(g, V, z);
  const FundamentalPair fp(r.V, r.lambda);
  const cplx s1 = fp.s1();
  if (std::abs(s1) < kDirichletTol)
    throw NumericalError("resolvent parameter is a Dirichlet point of the edge", std::abs(s1));
  const int nv = g.num_vertices(), ne = g.num_edges();
  const double l2 = r.ell * r.ell;

  // source resolution: grow the node count until the series of g settles
  int n = 96 + 2 * static_cast<int>(std::ceil(std::sqrt(std::abs(r.lambda))));
  std::vector<std::vector<cplx>> gh(ne);
  std::vector<double> t;
  for (;; n *= 2) {
    t = Chebyshev<cplx>::nodes(0.0, 1.0, n);
    double tail = 0.0, scale = 0.0;
    for (int e = 0; e < ne; ++e) {
      gh[e].resize(n + 1);
      for (int k = 0; k <= n; ++k) gh[e][k] = l2 * gfun(e, r.ell * t[k]);
      const auto ch = Chebyshev<cplx>::fit_values(0.0, 1.0, gh[e]);
      tail = std::max(tail, ch.tail_magnitude(4));
      for (const auto& c : ch.c) scale = std::max(scale, std::abs(c));
    }
    if (tail <= 1e-14 * std::max(scale, 1e-300) || n >= 2048) break;
  }

  std::vector<cplx> p1(n + 1), p2(n + 1);
  for (int k = 0; k <= n; ++k) {
    p1[k] = fp.phi1(t[k]);
    p2[k] = fp.s(t[k]);
  }

  std::vector<Chebyshev<cplx>> Pint(ne), Iint(ne);
  Eigen::VectorXcd W = Eigen::VectorXcd::Zero(nv);
  for (int e = 0; e < ne; ++e) {
    std::vector<cplx> h1(n + 1), h2(n + 1);
    for (int k = 0; k <= n; ++k) {
      h1[k] = p1[k] * gh[e][k];
      h2[k] = p2[k] * gh[e][k];
    }
    Iint[e] = Chebyshev<cplx>::fit_values(0.0, 1.0, h1).integral();
    Pint[e] = Chebyshev<cplx>::fit_values(0.0, 1.0, h2).integral();
    const int i = g.edge(e).source, tv = g.edge(e).target;
    const double c = g.conductivity(e);
    W[i] += c / g.vertex_conductivity(i) * Iint[e](1.0);
    W[tv] += c / g.vertex_conductivity(tv) * Pint[e](1.0);
  }

  // (P - diag(d)) U = -W with d_v = (c_out c1 + c_in s1') / c(v)
  Eigen::MatrixXcd A = build_P(g).cast<cplx>();
  for (int v = 0; v < nv; ++v) {
    double cout = 0.0, cin = 0.0;
    for (DirectedEdge d : g.outgoing(v)) (d.reversed ? cin : cout) += g.conductivity(d.edge);
    A(v, v) -= (cout * fp.c1() + cin * fp.ds1()) / g.vertex_conductivity(v);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cond = sv[0] / sv[sv.size() - 1];
  if (!(sv[sv.size() - 1] > 1e-14 * sv[0]))
    throw NumericalError("resolvent parameter is (numerically) an eigenvalue", cond);
  const Eigen::VectorXcd U = svd.solve(-W);

  ResolventResult res;
  res.vertex_values = U;
  res.condition = cond;
  res.edge_series.resize(ne);
  double r2 = 0.0;
  for (int e = 0; e < ne; ++e) {
    const cplx ui = U[g.edge(e).source], ut = U[g.edge(e).target];
    const cplx I1 = Iint[e](1.0);
    std::vector<cplx> uv(n + 1), duv(n + 1);
    for (int k = 0; k <= n; ++k) {
      const cplx Pk = Pint[e](t[k]);
      const cplx Qk = I1 - Iint[e](t[k]);
      uv[k] = (p1[k] * (Pk + ui) + p2[k] * (Qk + ut)) / s1;
      duv[k] = (fp.dphi1(t[k]) * (Pk + ui) + fp.ds(t[k]) * (Qk + ut)) / s1;
    }
    res.edge_series[e] = Chebyshev<cplx>::fit_values(0.0, 1.0, uv);
    const auto d2 = Chebyshev<cplx>::fit_values(0.0, 1.0, duv).derivative();
    std::vector<cplx> rv(n + 1);
    for (int k = 0; k <= n; ++k) rv[k] = -d2(t[k]) + (r.V(t[k]) - r.lambda) * uv[k] - gh[e][k];
    const auto rc = Chebyshev<cplx>::fit_values(0.0, 1.0, rv);
    constexpr int m = 400;
    const auto w = simpson_weights(m, 1.0 / m);
    double acc = 0.0;
    for (int j = 0; j <= m; ++j) acc += w[j] * std::norm(rc(double(j) / m));
    // physical residual is r / l^2, measure l dt
    r2 += g.conductivity(e) * r.ell * acc / (l2 * l2);
  }
  res.residual = std::sqrt(r2);
  res.u = ComplexEdgeFunction::sample(
      g, [&](int e, double xi) { return res.edge_series[e](xi / r.ell); }, per_unit);
  return res;
}

ResolventResult krein_resolvent(const MetricGraph& g, const EdgePotential& V, cplx z,
                                const ComplexEdgeFunction& gfun) {
  auto res = krein_resolvent(
      g, V, z, [&](int e, double xi) { return gfun.eval({e, xi}); }, 64.0);
  const double ell = g.length(0);
  res.u = ComplexEdgeFunction::sample_like(
      gfun, std::function<cplx(int, double)>([&](int e, double xi) { return res.edge_series[e](xi / ell); }));
  return res;
}

}  // namespace qgraph
