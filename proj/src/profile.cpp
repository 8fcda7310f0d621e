#include "qgraph/profile.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qgraph/errors.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/numerics.hpp"
#include "qgraph/simd.hpp"

namespace qgraph {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PolyPair {
  double value;
  double bound;  // (1/pi) int |integrand| along the shifted contour
};

// Contour through the saddle of exp(-s^{2m} + i y s): Im s = r sin(theta).
PolyPair polyharmonic_contour(int m, double y) {
  const int p = 2 * m;
  double sigma = 0.0;
  if (y > 0.0) {
    const double r = std::pow(y / p, 1.0 / (p - 1));
    sigma = r * std::sin(std::numbers::pi / (2.0 * (p - 1)));
  }
  const double r0 = y > 0.0 ? std::pow(y / p, 1.0 / (p - 1)) : 0.0;
  const double upper = 3.0 * (r0 + 1.0) + 2.0;
  const double width = std::min(0.5, 2.0 / (y + 1.0));
  const int panels = static_cast<int>(std::ceil(upper / width));
  const double hw = upper / panels;

  auto integrand = [&](double u) {
    const std::complex<double> s(u, sigma);
    std::complex<double> sp = s;
    for (int k = 1; k < p; ++k) sp *= s;
    return std::exp(-sp + std::complex<double>(0.0, y * u) - y * sigma);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  double val = 0.0, bnd = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = k * hw, b = (k + 1) * hw;
    val += GK::integrate([&](double u) { return integrand(u).real(); }, a, b, 0);
    bnd += GK::integrate([&](double u) { return std::abs(integrand(u)); }, a, b, 0);
  }
  return {val / std::numbers::pi, bnd / std::numbers::pi};
}

struct PolyTable {
  int m = 2;
  double width = 0.5;
  int ncoef = 21;
  int npanels = 0;
  std::vector<double> coeffs;
  // envelope on a uniform grid of step dy: env[k] >= sup_{y >= k dy} |g(y)|
  double dy = 0.05;
  std::vector<double> env;
  std::vector<double> tail;  // tail[k] >= int_{k dy}^inf |g|
  // past the grid: b_end (y/y_end)^gamma exp(-a (y^q - y_end^q)), the saddle-point decay
  double b_end = 0.0, gamma = 0.0, a = 0.0, q = 1.0;

  [[nodiscard]] simd::PanelTable view() const {
    return {width, ncoef, npanels, coeffs.data()};
  }
  [[nodiscard]] double y_end() const { return width * npanels; }
  [[nodiscard]] double grid_end() const { return dy * (static_cast<double>(env.size()) - 1); }

  [[nodiscard]] double extrapolated(double y) const {
    const double ye = grid_end();
    return b_end * std::pow(y / ye, gamma) * std::exp(-a * (std::pow(y, q) - std::pow(ye, q)));
  }
  // phi = -log(extrapolated) is convex, so int_y^inf e^{-phi} <= e^{-phi(y)} / phi'(y)
  [[nodiscard]] double extrapolated_tail(double y) const {
    const double dphi = a * q * std::pow(y, q - 1.0) - gamma / y;
    return extrapolated(y) / dphi;
  }

  [[nodiscard]] double envelope(double y) const {
    y = std::fabs(y);
    if (y >= grid_end()) return extrapolated(y);
    return env[static_cast<std::size_t>(y / dy)];
  }
  [[nodiscard]] double tail_bound(double y) const {
    y = std::max(0.0, y);
    if (y >= grid_end()) return extrapolated_tail(y);
    const auto k = static_cast<std::size_t>(y / dy);
    // partial first cell plus the cached upper sums
    return env[k] * ((k + 1) * dy - y) + tail[k + 1];
  }
};

std::shared_ptr<const PolyTable> build_poly_table(int m) {
  auto t = std::make_shared<PolyTable>();
  t->m = m;
  const double y_end = 60.0;
  t->npanels = static_cast<int>(y_end / t->width);
  const int deg = t->ncoef - 1;
  t->coeffs.resize(static_cast<std::size_t>(t->npanels) * t->ncoef);
  for (int p = 0; p < t->npanels; ++p) {
    const double a = p * t->width, b = a + t->width;
    auto ch = Chebyshev<double>::fit([m](double y) { return polyharmonic_contour(m, y).value; },
                                     a, b, deg);
    std::copy(ch.c.begin(), ch.c.end(), t->coeffs.begin() + static_cast<std::ptrdiff_t>(p) * t->ncoef);
  }
  const int ng = static_cast<int>(y_end / t->dy) + 1;
  std::vector<double> b(ng);
  for (int k = 0; k < ng; ++k) b[k] = polyharmonic_contour(m, k * t->dy).bound;
  // widen by the relative rounding of the quadrature
  for (double& v : b) v = v * (1.0 + 1e-10) + 1e-300;
  t->env.resize(ng);
  double run = 0.0;
  for (int k = ng - 1; k >= 0; --k) {
    run = std::max(run, b[k]);
    t->env[k] = run;
  }
  const int p = 2 * m;
  t->q = static_cast<double>(p) / (p - 1);
  t->a = (p - 1) * std::pow(static_cast<double>(p), -t->q) *
         std::fabs(std::cos(m * std::numbers::pi / (p - 1)));
  // prefactor growth exponent from the last 10 units of the grid
  const int back = static_cast<int>(10.0 / t->dy);
  const double y1 = (ng - 1 - back) * t->dy, y2 = (ng - 1) * t->dy;
  const double c1 = std::log(b[ng - 1 - back]) + t->a * std::pow(y1, t->q);
  const double c2 = std::log(b[ng - 1]) + t->a * std::pow(y2, t->q);
  t->gamma = std::max(0.0, (c2 - c1) / std::log(y2 / y1));
  t->b_end = t->env[ng - 1];
  t->tail.assign(ng + 1, 0.0);
  t->tail[ng - 1] = t->extrapolated_tail(y2);
  for (int k = ng - 2; k >= 0; --k) t->tail[k] = t->tail[k + 1] + t->env[k] * t->dy;
  return t;
}

std::shared_ptr<const PolyTable> poly_table(int m) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const PolyTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  auto t = build_poly_table(m);
  cache.emplace(m, t);
  return t;
}

double abs_linear_integral(double x0, double x1, double f0, double f1) {
  const double h = x1 - x0;
  if (h <= 0.0) return 0.0;
  if ((f0 >= 0 && f1 >= 0) || (f0 <= 0 && f1 <= 0)) return 0.5 * h * std::fabs(f0 + f1);
  const double z = h * f0 / (f0 - f1);
  return 0.5 * (z * std::fabs(f0) + (h - z) * std::fabs(f1));
}

}  // namespace

struct KernelProfile::Impl {
  ProfileKind kind = ProfileKind::custom;
  std::string name;
  double t = 0.0;
  int m = 1;
  // heat
  double norm = 0.0, inv4t = 0.0;
  // polyharmonic (m >= 2)
  double tau = 1.0;
  std::shared_ptr<const PolyTable> table;
  // custom
  std::function<double(double)> value, tailf, envf;
  // sampled
  std::vector<double> samples;
  double dx = 0.0;
  std::vector<double> sample_env;   // suffix max of |samples|
  std::vector<double> sample_tail;  // int_{k dx}^inf |f|
  double support = kInf;

  [[nodiscard]] double eval(double x) const {
    x = std::fabs(x);
    switch (kind) {
      case ProfileKind::heat:
        return norm * std::exp(-x * x * inv4t);
      case ProfileKind::polyharmonic:
        return simd::table_eval(table->view(), x / tau) / tau;
      case ProfileKind::custom:
        break;
    }
    if (!samples.empty()) {
      const double u = x / dx;
      const auto k = static_cast<std::size_t>(u);
      if (k + 1 >= samples.size()) return (k + 1 == samples.size() && u == k) ? samples[k] : 0.0;
      const double f = u - k;
      return samples[k] * (1.0 - f) + samples[k + 1] * f;
    }
    return value(x);
  }
};

KernelProfile KernelProfile::heat(double t) {
  if (!(t > 0.0)) throw InputError("heat profile needs t > 0");
  auto p = std::make_shared<Impl>();
  p->kind = ProfileKind::heat;
  p->name = "heat";
  p->t = t;
  p->m = 1;
  p->norm = 1.0 / std::sqrt(4.0 * std::numbers::pi * t);
  p->inv4t = 1.0 / (4.0 * t);
  return KernelProfile(p);
}

KernelProfile KernelProfile::polyharmonic(int m, double t) {
  if (m < 1) throw InputError("polyharmonic order must be >= 1");
  if (!(t > 0.0)) throw InputError("polyharmonic profile needs t > 0");
  if (m == 1) return heat(t);
  auto p = std::make_shared<Impl>();
  p->kind = ProfileKind::polyharmonic;
  p->name = "polyharmonic";
  p->t = t;
  p->m = m;
  p->tau = std::pow(t, 1.0 / (2.0 * m));
  p->table = poly_table(m);
  return KernelProfile(p);
}

KernelProfile KernelProfile::custom(std::string name, std::function<double(double)> value,
                                    std::function<double(double)> tail,
                                    std::function<double(double)> envelope) {
  if (!value || !tail || !envelope)
    throw InputError("custom profile needs an evaluator, a tail bound and an envelope");
  auto p = std::make_shared<Impl>();
  p->kind = ProfileKind::custom;
  p->name = std::move(name);
  p->value = std::move(value);
  p->tailf = std::move(tail);
  p->envf = std::move(envelope);
  return KernelProfile(p);
}

KernelProfile KernelProfile::sampled(std::vector<double> samples, double dx, std::string name) {
  if (samples.size() < 2 || !(dx > 0.0)) throw InputError("sampled profile needs >= 2 samples, dx > 0");
  auto p = std::make_shared<Impl>();
  p->kind = ProfileKind::custom;
  p->name = std::move(name);
  p->dx = dx;
  p->samples = std::move(samples);
  const std::size_t n = p->samples.size();
  p->support = dx * (n - 1);
  p->sample_env.assign(n + 1, 0.0);
  p->sample_tail.assign(n, 0.0);
  for (std::size_t k = n; k-- > 0;) p->sample_env[k] = std::max(p->sample_env[k + 1], std::fabs(p->samples[k]));
  for (std::size_t k = n - 1; k-- > 0;)
    p->sample_tail[k] = p->sample_tail[k + 1] +
                        abs_linear_integral(0.0, dx, p->samples[k], p->samples[k + 1]);
  return KernelProfile(p);
}

double KernelProfile::operator()(double x) const { return impl_->eval(x); }

double KernelProfile::tail(double r) const {
  const Impl& p = *impl_;
  r = std::max(0.0, r);
  switch (p.kind) {
    case ProfileKind::heat:
      return 0.5 * std::erfc(r / (2.0 * std::sqrt(p.t)));
    case ProfileKind::polyharmonic:
      return p.table->tail_bound(r / p.tau);
    case ProfileKind::custom:
      break;
  }
  if (!p.samples.empty()) return abs_integral(r, kInf);
  return p.tailf(r);
}

double KernelProfile::envelope(double r) const {
  const Impl& p = *impl_;
  r = std::max(0.0, r);
  switch (p.kind) {
    case ProfileKind::heat:
      return p.eval(r);
    case ProfileKind::polyharmonic:
      return p.table->envelope(r / p.tau) / p.tau;
    case ProfileKind::custom:
      break;
  }
  if (!p.samples.empty()) {
    const auto k = static_cast<std::size_t>(r / p.dx);
    return k < p.samples.size() ? p.sample_env[k] : 0.0;
  }
  return p.envf(r);
}

double KernelProfile::abs_integral(double a, double b) const {
  const Impl& p = *impl_;
  a = std::max(0.0, a);
  if (!(b > a)) return 0.0;
  switch (p.kind) {
    case ProfileKind::heat: {
      const double s = 2.0 * std::sqrt(p.t);
      return 0.5 * (std::erfc(a / s) - (std::isinf(b) ? 0.0 : std::erfc(b / s)));
    }
    case ProfileKind::polyharmonic: {
      const double ya = a / p.tau;
      const double yb = b / p.tau;
      const double yend = p.table->y_end();
      double s = 0.0;
      const double hi = std::min(yb, yend);
      if (hi > ya) {
        const auto view = p.table->view();
        // split at the panel grid; |g| has kinks only at sign changes
        double lo = ya;
        while (lo < hi) {
          const double next = std::min(hi, (std::floor(lo / view.width) + 1.0) * view.width);
          s += integrate([&](double y) { return std::fabs(simd::table_eval(view, y)); }, lo, next,
                         1e-14, nullptr, 10);
          lo = next;
        }
      }
      if (yb > yend) s += p.table->tail_bound(std::max(ya, yend)) - (std::isinf(yb) ? 0.0 : p.table->tail_bound(yb));
      return s;
    }
    case ProfileKind::custom:
      break;
  }
  if (!p.samples.empty()) {
    auto cum = [&](double x) {  // int_x^inf |f|
      if (x >= p.support) return 0.0;
      const auto k = static_cast<std::size_t>(x / p.dx);
      const double x1 = (k + 1) * p.dx;
      return abs_linear_integral(x, x1, p.eval(x), p.samples[k + 1]) + p.sample_tail[k + 1];
    };
    return cum(a) - (std::isinf(b) ? 0.0 : cum(b));
  }
  // generic custom: adaptive quadrature up to a finite cutoff, tail bound beyond
  double hi = b;
  double extra = 0.0;
  if (std::isinf(b)) {
    hi = a + 1.0;
    while (p.tailf(hi) > 1e-16 && hi < a + 1e6) hi = a + 2.0 * (hi - a);
    extra = p.tailf(hi);
  }
  return integrate([&](double x) { return std::fabs(p.eval(x)); }, a, hi, 1e-13, nullptr, 15) + extra;
}

double KernelProfile::integral() const {
  const Impl& p = *impl_;
  switch (p.kind) {
    case ProfileKind::heat:
    case ProfileKind::polyharmonic:
      return 1.0;
    case ProfileKind::custom:
      break;
  }
  if (!p.samples.empty()) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < p.samples.size(); ++k) s += 0.5 * p.dx * (p.samples[k] + p.samples[k + 1]);
    return 2.0 * s;
  }
  double hi = 1.0;
  while (p.tailf(hi) > 1e-16 && hi < 1e6) hi *= 2.0;
  return 2.0 * integrate([&](double x) { return p.eval(x); }, 0.0, hi, 1e-13, nullptr, 15);
}

ProfileKind KernelProfile::kind() const { return impl_->kind; }
double KernelProfile::time() const { return impl_->t; }
int KernelProfile::order() const { return impl_->m; }
const std::string& KernelProfile::name() const { return impl_->name; }
double KernelProfile::support() const { return impl_->support; }

double KernelProfile::weighted_sum(std::span<const double> x, std::span<const double> w,
                                   double shift, double sign) const {
  const Impl& p = *impl_;
  switch (p.kind) {
    case ProfileKind::heat:
      return p.norm * simd::gaussian_weighted_sum(x, w, shift, sign, p.inv4t);
    case ProfileKind::polyharmonic:
      return simd::table_weighted_sum(p.table->view(), x, w, shift / p.tau, sign / p.tau) / p.tau;
    case ProfileKind::custom:
      break;
  }
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * p.eval(shift + sign * x[j]);
  return s;
}

void KernelProfile::accumulate(std::span<double> out, std::span<const double> x, double shift,
                               double sign, double coef) const {
  const Impl& p = *impl_;
  switch (p.kind) {
    case ProfileKind::heat:
      simd::gaussian_accumulate(out, x, shift, sign, p.inv4t, coef * p.norm);
      return;
    case ProfileKind::polyharmonic:
      simd::table_accumulate(p.table->view(), out, x, shift / p.tau, sign / p.tau, coef / p.tau);
      return;
    case ProfileKind::custom:
      break;
  }
  for (std::size_t j = 0; j < x.size(); ++j) out[j] += coef * p.eval(shift + sign * x[j]);
}

WeightedNorm l1_weighted_norm(const KernelProfile& f, double lmin) {
  if (!(lmin > 0.0)) throw InputError("weighted norm needs l > 0");
  WeightedNorm r;
  const int cap = 200000;
  double sum = 0.0;
  double pow3 = 1.0;  // 3^n
  for (int n = 0; n < cap; ++n) {
    const double a = n * lmin;
    const double phi = f.abs_integral(a, a + lmin);
    r.panel.push_back(phi);
    // panel n enters every I_m with m <= n: weight (3^{n+1} - 1)/2
    sum += phi * 0.5 * (3.0 * pow3 - 1.0);
    pow3 *= 3.0;
    r.terms = n + 1;
    if (!std::isfinite(sum) || !std::isfinite(pow3)) break;
    // remaining series is bounded by sum_{k>n} 3^{k+1}/2 tail(k l); stop when the
    // next few terms are negligible and decreasing
    const double next = 0.5 * 3.0 * pow3 * f.tail(a + lmin);
    if (next <= 1e-13 * std::max(sum, 1e-300)) {
      const double next2 = 0.5 * 9.0 * pow3 * f.tail(a + 2.0 * lmin);
      if (next2 <= next || next2 <= 1e-15 * sum) {
        r.value = sum;
        return r;
      }
    }
  }
  throw NumericalError("profile not in L1 for this l (weighted series diverges)");
}

double l1_weighted_norm(const KernelProfile& f, const MetricGraph& g) {
  return l1_weighted_norm(f, g.min_length()).value;
}

double shift_constant(const KernelProfile& f, double lmin, double lmax) {
  const WeightedNorm base = l1_weighted_norm(f, lmin);
  const double total = f.abs_integral(0.0, kInf);
  // A(r) = int_r^inf |f| for real r
  auto A = [&](double r) {
    if (r >= 0.0) return f.abs_integral(r, kInf);
    return total + f.abs_integral(0.0, -r);
  };
  const int extra = static_cast<int>(std::ceil(lmax / lmin)) + 2;
  const int nterms = base.terms + extra;
  double best = 0.0;
  const int ns = 64;
  for (int i = 0; i < ns; ++i) {
    const double s = -lmax + 2.0 * lmax * i / (ns - 1);
    double acc = 0.0, pow3 = 1.0;
    for (int m = 0; m < nterms; ++m) {
      const double a = m * lmin;
      acc += pow3 * 0.5 * (A(a - s) + A(a + s));
      pow3 *= 3.0;
    }
    best = std::max(best, acc / base.value);
  }
  return 1.1 * best;
}

KernelProfile profile_convolution(const KernelProfile& f, const KernelProfile& g, double dx,
                                  double radius) {
  const int n = static_cast<int>(std::ceil(radius / dx));
  const int span_n = 2 * n;
  std::vector<double> fs(2 * span_n + 1), gs(2 * span_n + 1);
  for (int k = -span_n; k <= span_n; ++k) {
    fs[k + span_n] = f(k * dx);
    gs[k + span_n] = g(k * dx);
  }
  std::vector<double> out(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) {
    double s = 0.0;
    for (int k = -span_n; k <= span_n; ++k) {
      const int j = i - k;
      if (j < -span_n || j > span_n) continue;
      const double w = (k == -span_n || k == span_n) ? 0.5 : 1.0;
      s += w * fs[k + span_n] * gs[j + span_n];
    }
    out[i] = s * dx;
  }
  return KernelProfile::sampled(std::move(out), dx, f.name() + "*" + g.name());
}

double polyharmonic_direct(int m, double y) { return polyharmonic_contour(m, std::fabs(y)).value; }

}  // namespace qgraph
