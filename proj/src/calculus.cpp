#include "prescurv/calculus.hpp"

#include "prescurv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace prescurv {

namespace {

constexpr int kDenseSub = 8;
constexpr int kQuadOrder = 8;

// Cumulative integral of g over the grid intervals of a domain.
template <class G>
std::vector<double> cumulative(const Grid& grid, G&& g) {
  std::vector<double> c(grid.intervals + 1, 0.0);
  const double h = grid.step();
  for (int j = 0; j < grid.intervals; ++j) {
    const double lo = grid.domain.a + j * h;
    c[j + 1] = c[j] + integrate(g, lo, lo + h, 1, kQuadOrder);
  }
  return c;
}

// Solves int_a^t g = target for t, with g > 0 and the cumulative table `c` on `grid`.
template <class G>
double invert_cumulative(const Grid& grid, const std::vector<double>& c, G&& g, double target) {
  const double h = grid.step();
  if (target <= 0.0) return grid.domain.a;
  if (target >= c.back()) return grid.domain.b;
  const auto it = std::upper_bound(c.begin(), c.end(), target);
  const int k = std::clamp(static_cast<int>(it - c.begin()) - 1, 0, grid.intervals - 1);
  const double lo = grid.domain.a + k * h;
  const double hi = lo + h;
  const double rem = target - c[k];
  double t = lo + h * rem / std::max(c[k + 1] - c[k], 1e-300);
  double blo = lo, bhi = hi;
  for (int it2 = 0; it2 < 60; ++it2) {
    const double r = integrate(g, lo, t, 1, kQuadOrder) - rem;
    if (r > 0) bhi = t;
    else blo = t;
    double next = t - r / g(t);
    if (!(next > blo && next < bhi)) next = 0.5 * (blo + bhi);
    if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) return next;
    t = next;
  }
  return t;
}

template <class F>
void for_dense(const ParamCurve& f, F&& fn) {
  for (double t : f.dense_params(kDenseSub)) fn(t);
}

}  // namespace

double c1_norm(const ParamCurve& f) {
  double s0 = 0.0, s1 = 0.0;
  Vec d[2];
  for_dense(f, [&](double t) {
    f.eval_upto(t, 1, d);
    s0 = std::max(s0, d[0].norm());
    s1 = std::max(s1, d[1].norm());
  });
  return s0 + s1;
}

double c1_norm(const Diffeo& phi) {
  double s0 = 0.0, s1 = 0.0;
  const int n = phi.intervals() * kDenseSub;
  const Domain& d = phi.source();
  for (int j = 0; j <= n; ++j) {
    const double t = d.a + d.length() * j / n;
    s0 = std::max(s0, std::abs(phi(t)));
    s1 = std::max(s1, std::abs(phi.derivative(t)));
  }
  return s0 + s1;
}

std::vector<double> cumulative_length(const ParamCurve& f) {
  return cumulative(f.grid(), [&](double t) { return f.eval(t, 1).norm(); });
}

double length(const ParamCurve& f) { return cumulative_length(f).back(); }

double min_speed(const ParamCurve& f) {
  double m = std::numeric_limits<double>::infinity();
  for_dense(f, [&](double t) { m = std::min(m, f.eval(t, 1).norm()); });
  return m;
}

double speed_deviation(const ParamCurve& f, double speed) {
  double m = 0.0;
  for_dense(f, [&](double t) { m = std::max(m, std::abs(f.eval(t, 1).norm() - speed)); });
  return m;
}

UnitSpeed resample_unit_speed(const ParamCurve& f, int intervals, bool scale) {
  if (intervals <= 0) intervals = f.intervals();
  auto speed = [&](double t) { return f.eval(t, 1).norm(); };
  const std::vector<double> c = cumulative(f.grid(), speed);
  const double L = c.back();
  const double norm = c1_norm(f);
  // An isolated stop at an end of an interval still has a regular arclength reparametrization.
  double vmin = std::numeric_limits<double>::infinity();
  for_dense(f, [&](double t) {
    if (!f.domain().periodic() && (t == f.domain().a || t == f.domain().b)) return;
    vmin = std::min(vmin, speed(t));
  });
  if (!(L > 0) || vmin < 1e-10 * std::max(norm, 1e-300))
    throw Error(ErrorKind::DegenerateCurve, "curve speed vanishes");
  const Domain& dom = f.domain();
  const double lambda = scale ? dom.length() / L : 1.0;
  const Grid out{dom, intervals};
  Eigen::VectorXd tv(out.nodes());
  Eigen::MatrixXd s(out.nodes(), f.dim());
  for (int j = 0; j < out.nodes(); ++j) {
    const double target = (out.param(j) - dom.a) / lambda;
    tv[j] = (j == 0) ? dom.a : invert_cumulative(f.grid(), c, speed, target);
    s.row(j) = lambda * f.eval(tv[j]).transpose();
  }
  UnitSpeed r;
  r.lambda = lambda;
  r.phi = Diffeo(dom, dom, tv, f.smoothness_order());
  r.g = ParamCurve(dom, std::move(s), f.smoothness_order());
  return r;
}

SphericalCurve tantrix(const ParamCurve& f) {
  // Sampled at twice the grid density so the tantrix keeps the accuracy of f'.
  const Grid g{f.domain(), 2 * f.intervals()};
  Eigen::MatrixXd s(g.nodes(), f.dim());
  for (int j = 0; j < g.nodes(); ++j) s.row(j) = normalized(f.eval(g.param(j), 1)).transpose();
  return SphericalCurve(ParamCurve(f.domain(), std::move(s), f.smoothness_order()));
}

double curvature_at(const ParamCurve& f, double t) {
  Vec d[3];
  f.eval_upto(t, 2, d);
  const double v = d[1].norm();
  if (!(v > 0)) throw Error(ErrorKind::DegenerateCurve, "zero speed in curvature");
  const Vec T = d[1] / v;
  return project_out(d[2], T).norm() / (v * v);
}

ScalarFn curvature(const ParamCurve& f) {
  return [f](double t) { return curvature_at(f, t); };
}

Vec average(const ParamCurve& f) {
  Vec sum = Vec::Zero(f.dim());
  auto acc = [&](double, double w, const Vec& v) { sum += w * v; };
  const Grid g = f.grid();
  composite_gauss([&](double t) { return f.eval(t); }, g.domain.a, g.domain.b, g.intervals,
                  kQuadOrder, acc);
  return sum / f.domain().length();
}

MassCm mass_and_cm(const ParamCurve& f, const ScalarFn& rho) {
  MassCm r;
  r.cm = Vec::Zero(f.dim());
  bool bad = false;
  Vec d[2];
  auto acc = [&](double t, double w, double) {
    f.eval_upto(t, 1, d);
    const double p = rho(t);
    if (!(p > 0)) bad = true;
    const double m = p * d[1].norm();
    r.mass += w * m;
    r.cm += (w * m) * d[0];
  };
  const Grid g = f.grid();
  composite_gauss([](double) { return 0.0; }, g.domain.a, g.domain.b, g.intervals, kQuadOrder, acc);
  if (bad) throw Error(ErrorKind::NonpositiveDensity, "density must be positive");
  r.cm /= r.mass;
  return r;
}

Diffeo mass_reparam(const ParamCurve& f, const ScalarFn& rho, int intervals) {
  if (intervals <= 0) intervals = f.intervals();
  auto g = [&](double t) {
    const double p = rho(t);
    if (!(p > 0)) throw Error(ErrorKind::NonpositiveDensity, "density must be positive");
    return p * f.eval(t, 1).norm();
  };
  const std::vector<double> c = cumulative(f.grid(), g);
  const double mass = c.back();
  const Domain& dom = f.domain();
  const Domain src = dom.periodic() ? Domain::circle(0.0, mass) : Domain::interval(0.0, mass);
  const Grid out{src, intervals};
  Eigen::VectorXd v(out.nodes());
  for (int j = 0; j < out.nodes(); ++j)
    v[j] = (j == 0) ? dom.a : invert_cumulative(f.grid(), c, g, out.param(j));
  return Diffeo(src, dom, std::move(v), f.smoothness_order());
}

ParamCurve compose(const ParamCurve& f, const Diffeo& phi) {
  if (phi.target().length() != f.domain().length() || phi.target().a != f.domain().a)
    throw Error(ErrorKind::DomainMismatch, "diffeo target differs from curve domain");
  const Grid g{phi.source(), phi.intervals()};
  Eigen::MatrixXd s(g.nodes(), f.dim());
  for (int j = 0; j < g.nodes(); ++j) s.row(j) = f.eval(phi(g.param(j))).transpose();
  return ParamCurve(phi.source(), std::move(s), f.smoothness_order());
}

ParamCurve integrate_tantrix(const SphericalCurve& T, const Vec& base) {
  const ParamCurve& tc = T.curve();
  const Grid g = tc.grid();
  const int nodes = g.nodes();
  Eigen::MatrixXd s(nodes, T.dim());
  Vec p = base;
  s.row(0) = p.transpose();
  const double h = g.step();
  auto acc = [&](double, double w, const Vec& v) { p += w * v; };
  for (int j = 1; j <= g.intervals; ++j) {
    const double lo = g.domain.a + (j - 1) * h;
    composite_gauss([&](double t) { return T.eval(t); }, lo, lo + h, 1, kQuadOrder, acc);
    if (j < nodes) s.row(j) = p.transpose();
  }
  if (g.domain.periodic() && (p - base).norm() > 1e-6 * g.domain.length())
    throw Error(ErrorKind::InvalidArgument, "tantrix on a circle does not integrate to a closed curve");
  return ParamCurve(g.domain, std::move(s), tc.smoothness_order());
}

double c1_distance(const ParamCurve& f, const ParamCurve& g) {
  if (!(f.domain() == g.domain())) throw Error(ErrorKind::DomainMismatch, "curves live on different domains");
  if (f.dim() != g.dim()) throw Error(ErrorKind::DomainMismatch, "curves have different dimensions");
  const ParamCurve& fine = f.intervals() >= g.intervals() ? f : g;
  double s0 = 0.0, s1 = 0.0;
  Vec a[2], b[2];
  for_dense(fine, [&](double t) {
    f.eval_upto(t, 1, a);
    g.eval_upto(t, 1, b);
    s0 = std::max(s0, (a[0] - b[0]).norm());
    s1 = std::max(s1, (a[1] - b[1]).norm());
  });
  return s0 + s1;
}

}  // namespace prescurv
