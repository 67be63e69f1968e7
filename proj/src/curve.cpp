#include "prescurv/curve.hpp"

#include "prescurv/expr.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace prescurv {

Domain Domain::interval(double a, double b) {
  if (!(b > a)) throw Error(ErrorKind::InvalidArgument, "domain requires b > a");
  return Domain{Kind::Interval, a, b};
}

Domain Domain::circle(double a, double b) {
  if (!(b > a)) throw Error(ErrorKind::InvalidArgument, "domain requires b > a");
  return Domain{Kind::Circle, a, b};
}

double Domain::wrap(double t) const {
  if (!periodic()) return t;
  const double L = length();
  double r = std::fmod(t - a, L);
  if (r < 0) r += L;
  if (r >= L) r = 0.0;
  return a + r;
}

// ---------------------------------------------------------------------------

ParamCurve::ParamCurve(Domain domain, Eigen::MatrixXd samples, int smoothness_order)
    : domain_(domain), samples_(std::move(samples)), order_(smoothness_order) {
  if (samples_.cols() < 3)
    throw Error(ErrorKind::InvalidArgument, "ambient dimension must be at least 3");
  spline_ = UniformSpline(domain_.a, domain_.b, domain_.periodic(), samples_, order_);
}

ParamCurve ParamCurve::from_function(Domain domain, int intervals, const CurveFn& f,
                                     int smoothness_order) {
  if (intervals < 2) throw Error(ErrorKind::InvalidArgument, "need at least two intervals");
  const Grid grid{domain, intervals};
  const Vec first = f(grid.param(0));
  Eigen::MatrixXd s(grid.nodes(), first.size());
  s.row(0) = first.transpose();
  for (int j = 1; j < grid.nodes(); ++j) s.row(j) = f(grid.param(j)).transpose();
  return ParamCurve(domain, std::move(s), smoothness_order);
}

std::vector<double> ParamCurve::dense_params(int sub) const {
  std::vector<double> out;
  const int n = intervals();
  const double h = step();
  out.reserve(static_cast<std::size_t>(n) * sub + 1);
  for (int j = 0; j < n; ++j)
    for (int q = 0; q < sub; ++q) out.push_back(domain_.a + (j + static_cast<double>(q) / sub) * h);
  if (!domain_.periodic()) out.push_back(domain_.b);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

ParamCurve renormalized(ParamCurve c) {
  Eigen::MatrixXd s = c.samples();
  for (int j = 0; j < s.rows(); ++j) {
    const double r = s.row(j).norm();
    if (std::abs(r - 1.0) > 1e-3)
      throw Error(ErrorKind::InvalidArgument, "spherical curve sample far from the unit sphere");
    s.row(j) /= r;
  }
  return ParamCurve(c.domain(), std::move(s), c.smoothness_order());
}

}  // namespace

SphericalCurve::SphericalCurve(ParamCurve curve) : curve_(renormalized(std::move(curve))) {}

Vec SphericalCurve::eval(double t) const { return normalized(curve_.eval(t)); }

NormalizedDerivs SphericalCurve::eval_derivs(double t, int order) const {
  Vec d[3];
  curve_.eval_upto(t, std::min(order, 2), d);
  if (order < 2) d[2] = Vec::Zero(dim());
  if (order < 1) d[1] = Vec::Zero(dim());
  return normalize_with_derivs(d[0], d[1], d[2], order);
}

// ---------------------------------------------------------------------------

Diffeo::Diffeo(Domain source, Domain target, Eigen::VectorXd values, int smoothness_order)
    : source_(source), target_(target), values_(std::move(values)) {
  if (source.periodic() != target.periodic())
    throw Error(ErrorKind::DomainMismatch, "diffeo must map interval to interval or circle to circle");
  Eigen::MatrixXd s(values_.size(), 1);
  if (source.periodic()) {
    slope_ = target.length() / source.length();
    const double h = source.length() / values_.size();
    for (int j = 0; j < values_.size(); ++j)
      s(j, 0) = values_[j] - target.a - slope_ * (j * h);
  } else {
    s.col(0) = values_;
  }
  spline_ = UniformSpline(source.a, source.b, source.periodic(), s, smoothness_order);
}

Diffeo Diffeo::identity(Domain d, int intervals) {
  const Grid g{d, intervals};
  Eigen::VectorXd v(g.nodes());
  for (int j = 0; j < g.nodes(); ++j) v[j] = g.param(j);
  return Diffeo(d, d, std::move(v));
}

double Diffeo::operator()(double t) const {
  const double v = spline_.eval(t)[0];
  if (source_.periodic()) return target_.a + slope_ * (t - source_.a) + v;
  return v;
}

double Diffeo::derivative(double t) const {
  const double v = spline_.eval(t, 1)[0];
  return source_.periodic() ? slope_ + v : v;
}

double Diffeo::inverse(double s) const {
  double lo, hi, t;
  if (source_.periodic()) {
    const double t0 = source_.a + (s - target_.a) / slope_;
    lo = t0 - source_.length();
    hi = t0 + source_.length();
    t = t0;
  } else {
    lo = source_.a;
    hi = source_.b;
    if (s <= (*this)(lo)) return lo;
    if (s >= (*this)(hi)) return hi;
    t = lo + (s - (*this)(lo)) / ((*this)(hi) - (*this)(lo)) * (hi - lo);
  }
  for (int it = 0; it < 200; ++it) {
    const double r = (*this)(t) - s;
    if (r > 0) hi = t;
    else lo = t;
    const double d = derivative(t);
    double next = (d > 0) ? t - r / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) < 1e-13 * std::max(1.0, std::abs(t))) return next;
    t = next;
    if (hi - lo < 1e-14 * std::max(1.0, std::abs(t))) return t;
  }
  return t;
}

Diffeo Diffeo::inverted() const {
  const Grid g{target_, intervals()};
  Eigen::VectorXd v(g.nodes());
  for (int j = 0; j < g.nodes(); ++j) v[j] = inverse(g.param(j));
  return Diffeo(target_, source_, std::move(v), spline_.degree());
}

double Diffeo::min_derivative() const {
  double m = std::numeric_limits<double>::infinity();
  const int n = intervals() * 4;
  const double h = source_.length() / n;
  for (int j = 0; j <= n; ++j) m = std::min(m, derivative(source_.a + j * h));
  return m;
}

// ---------------------------------------------------------------------------

CurvatureSpec CurvatureSpec::constant(double value) {
  CurvatureSpec s;
  s.kind_ = Kind::Constant;
  s.value_ = value;
  s.fn_ = [value](double) { return value; };
  return s;
}

CurvatureSpec CurvatureSpec::expression(std::string text) {
  CurvatureSpec s;
  s.kind_ = Kind::Expression;
  s.fn_ = compile_expression(text);
  s.text_ = std::move(text);
  return s;
}

CurvatureSpec CurvatureSpec::samples(Domain domain, Eigen::VectorXd values) {
  CurvatureSpec s;
  s.kind_ = Kind::Samples;
  Eigen::MatrixXd m(values.size(), 1);
  m.col(0) = values;
  auto spline = std::make_shared<UniformSpline>(domain.a, domain.b, domain.periodic(), m, 5);
  s.fn_ = [spline, domain](double t) { return spline->eval(domain.wrap(t))[0]; };
  s.text_ = "samples[" + std::to_string(values.size()) + "]";
  return s;
}

std::string CurvatureSpec::describe() const {
  switch (kind_) {
    case Kind::Constant: {
      std::ostringstream os;
      os.precision(17);
      os << value_;
      return os.str();
    }
    case Kind::Expression:
    case Kind::Samples: return text_;
  }
  return {};
}

}  // namespace prescurv
