#include "prescurv/loops.hpp"

#include "prescurv/density.hpp"
#include "prescurv/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace prescurv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kOrder = 10;

struct Hermite {
  double p, dp, ddp;
};

struct HermiteBasis {
  double H[6], D[6], DD[6];
};

// Quintic Hermite basis on [x0, x0 + h] in the order y0, d0, a0, a1, d1, y1 (unscaled by h).
void hermite_basis(double x, double x0, double h, HermiteBasis& b) {
  const double t = (x - x0) / h;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double H[6] = {1 - 10 * t3 + 15 * t4 - 6 * t5, t - 6 * t3 + 8 * t4 - 3 * t5,
                       0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5, 0.5 * t3 - t4 + 0.5 * t5,
                       -4 * t3 + 7 * t4 - 3 * t5, 10 * t3 - 15 * t4 + 6 * t5};
  const double D[6] = {-30 * t2 + 60 * t3 - 30 * t4, 1 - 18 * t2 + 32 * t3 - 15 * t4,
                       t - 4.5 * t2 + 6 * t3 - 2.5 * t4, 1.5 * t2 - 4 * t3 + 2.5 * t4,
                       -12 * t2 + 28 * t3 - 15 * t4, 30 * t2 - 60 * t3 + 30 * t4};
  const double DD[6] = {-60 * t + 180 * t2 - 120 * t3, -36 * t + 96 * t2 - 60 * t3,
                        1 - 9 * t + 18 * t2 - 10 * t3, 3 * t - 12 * t2 + 10 * t3,
                        -24 * t + 84 * t2 - 60 * t3, 60 * t - 180 * t2 + 120 * t3};
  for (int i = 0; i < 6; ++i) {
    b.H[i] = H[i];
    b.D[i] = D[i];
    b.DD[i] = DD[i];
  }
}

// Quintic Hermite on [x0, x0 + h] from values, first and second derivatives at both ends.
Hermite hermite5(double x, double x0, double h, double y0, double d0, double a0, double y1,
                 double d1, double a1) {
  HermiteBasis b;
  hermite_basis(x, x0, h, b);
  const double c[6] = {y0, h * d0, h * h * a0, h * h * a1, h * d1, y1};
  Hermite r{0, 0, 0};
  for (int i = 0; i < 6; ++i) {
    r.p += c[i] * b.H[i];
    r.dp += c[i] * b.D[i];
    r.ddp += c[i] * b.DD[i];
  }
  r.dp /= h;
  r.ddp /= h * h;
  return r;
}

std::size_t locate(const std::vector<double>& xs, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t j = (it == xs.begin()) ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  return std::min(j, xs.size() - 2);
}

// M(q, j) = int_{-1}^{x_q} l_j for the Lagrange basis on the Gauss nodes.
const Eigen::MatrixXd& spectral_integration() {
  static const Eigen::MatrixXd M = [] {
    const GaussRule& r = gauss_legendre(kOrder);
    const int n = kOrder;
    Eigen::MatrixXd V(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) V(i, k) = std::pow(r.nodes[i], k);
    const Eigen::MatrixXd C = V.fullPivLu().inverse();  // l_j(x) = sum_k C(k, j) x^k
    Eigen::MatrixXd out(n, n);
    for (int q = 0; q < n; ++q)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
          s += C(k, j) * (std::pow(r.nodes[q], k + 1) - std::pow(-1.0, k + 1)) / (k + 1);
        out(q, j) = s;
      }
    return out;
  }();
  return M;
}

}  // namespace

TantrixFn tantrix_of(const ParamCurve& f) {
  auto fp = std::make_shared<ParamCurve>(f);
  return [fp](double t) {
    Vec d[4];
    fp->eval_upto(t, 3, d);
    return normalize_with_derivs(d[1], d[2], d[3], 2);
  };
}

TantrixFn tantrix_of(const SphericalCurve& T) {
  auto tp = std::make_shared<SphericalCurve>(T);
  return [tp](double t) { return tp->eval_derivs(t, 2); };
}

// ---------------------------------------------------------------------------

BasePath::BasePath(TantrixFn T, double tau0, double tau1, int panels) : T_(std::move(T)) {
  if (!(tau1 > tau0) || panels < 1) throw Error(ErrorKind::InvalidArgument, "bad base path range");
  const int n = panels + 1;
  tau_.resize(n);
  s_.resize(n);
  ds_.resize(n);
  dds_.resize(n);
  dtau_.resize(n);
  ddtau_.resize(n);
  const double h = (tau1 - tau0) / panels;
  auto speed = [&](double t) { return T_(t).dn.norm(); };
  for (int j = 0; j < n; ++j) {
    tau_[j] = (j == panels) ? tau1 : tau0 + j * h;
    const NormalizedDerivs d = T_(tau_[j]);
    const double sp = d.dn.norm();
    if (!(sp > 0.0)) throw Error(ErrorKind::DegenerateCurve, "tantrix has zero speed");
    ds_[j] = sp;
    dds_[j] = d.dn.dot(d.ddn) / sp;
    dtau_[j] = 1.0 / sp;
    ddtau_[j] = -dds_[j] / (sp * sp * sp);
    s_[j] = (j == 0) ? 0.0 : s_[j - 1] + integrate(speed, tau_[j - 1], tau_[j], 1, kOrder);
    g0_.push_back(d.n);
    g1_.push_back(d.dn * dtau_[j]);
    g2_.push_back(d.ddn * (dtau_[j] * dtau_[j]) + d.dn * ddtau_[j]);
  }
}

double BasePath::s_of_tau(double tau) const {
  const std::size_t j = locate(tau_, tau);
  const double h = tau_[j + 1] - tau_[j];
  return hermite5(tau, tau_[j], h, s_[j], ds_[j], dds_[j], s_[j + 1], ds_[j + 1], dds_[j + 1]).p;
}

double BasePath::tau_of_s(double s) const {
  const std::size_t j = locate(s_, s);
  const double h = s_[j + 1] - s_[j];
  return hermite5(s, s_[j], h, tau_[j], dtau_[j], ddtau_[j], tau_[j + 1], dtau_[j + 1],
                  ddtau_[j + 1])
      .p;
}

Vec BasePath::eval(double s) const {
  Vec out[3];
  eval(s, 0, out);
  return out[0];
}

void BasePath::eval(double s, int order, Vec* out) const {
  // Quintic Hermite of gamma in s between the tabulated nodes, then back onto the sphere.
  const std::size_t j = locate(s_, s);
  const double h = s_[j + 1] - s_[j];
  HermiteBasis b;
  hermite_basis(s, s_[j], h, b);
  const Vec* c[6] = {&g0_[j], &g1_[j], &g2_[j], &g2_[j + 1], &g1_[j + 1], &g0_[j + 1]};
  const double scale[6] = {1.0, h, h * h, h * h, h, 1.0};
  Vec P = Vec::Zero(g0_[j].size()), dP = P, ddP = P;
  for (int i = 0; i < 6; ++i) {
    P += (scale[i] * b.H[i]) * *c[i];
    if (order >= 1) dP += (scale[i] * b.D[i] / h) * *c[i];
    if (order >= 2) ddP += (scale[i] * b.DD[i] / (h * h)) * *c[i];
  }
  const NormalizedDerivs d = normalize_with_derivs(P, dP, ddP, order);
  out[0] = d.n;
  if (order >= 1) out[1] = d.dn;
  if (order >= 2) out[2] = d.ddn;
}

// ---------------------------------------------------------------------------

SpeedProfile::SpeedProfile(double v) : constant_(true), c_(v) {
  if (!(v > 0.0)) throw Error(ErrorKind::InvalidArgument, "speed must be positive");
}

namespace {

// Legendre P_0..P_{n-1} at x.
void legendre(double x, int n, double* P) {
  P[0] = 1.0;
  if (n > 1) P[1] = x;
  for (int k = 2; k < n; ++k) P[k] = ((2 * k - 1) * x * P[k - 1] - (k - 1) * P[k - 2]) / k;
}

}  // namespace

SpeedProfile::SpeedProfile(std::function<double(double)> v, int panels)
    : constant_(false), fn_(std::move(v)), panels_(panels) {
  if (panels < 1) throw Error(ErrorKind::InvalidArgument, "need at least one panel");
  // Per panel, the Legendre expansion of the degree kOrder - 1 interpolant at the Gauss nodes.
  S_.resize(panels + 1, 0.0);
  coef_.assign(static_cast<std::size_t>(panels) * kOrder, 0.0);
  const GaussRule& r = gauss_legendre(kOrder);
  double P[kOrder + 1];
  for (int j = 0; j < panels; ++j) {
    const double a = static_cast<double>(j) / panels, b = static_cast<double>(j + 1) / panels;
    double* c = &coef_[static_cast<std::size_t>(j) * kOrder];
    for (int q = 0; q < kOrder; ++q) {
      const double val = fn_(0.5 * (a + b) + 0.5 * (b - a) * r.nodes[q]);
      if (!(val > 0.0)) throw Error(ErrorKind::InvalidArgument, "speed must be positive");
      legendre(r.nodes[q], kOrder, P);
      for (int k = 0; k < kOrder; ++k) c[k] += 0.5 * (2 * k + 1) * r.weights[q] * val * P[k];
    }
    S_[j + 1] = S_[j] + (b - a) * c[0];
  }
}

double SpeedProfile::table_v(int j, double x) const {
  double P[kOrder];
  legendre(x, kOrder, P);
  const double* c = &coef_[static_cast<std::size_t>(j) * kOrder];
  double sum = 0.0;
  for (int k = 0; k < kOrder; ++k) sum += c[k] * P[k];
  return sum;
}

double SpeedProfile::table_S(int j, double x) const {
  // int_{-1}^x P_k = (P_{k+1} - P_{k-1}) / (2k + 1) for k >= 1.
  double P[kOrder + 1];
  legendre(x, kOrder + 1, P);
  const double* c = &coef_[static_cast<std::size_t>(j) * kOrder];
  double sum = c[0] * (x + 1.0);
  for (int k = 1; k < kOrder; ++k) sum += c[k] * (P[k + 1] - P[k - 1]) / (2 * k + 1);
  return S_[j] + 0.5 / panels_ * sum;
}

double SpeedProfile::S(double u) const {
  if (constant_) return c_ * u;
  if (u < 0.0) return fn_(0.0) * u;
  if (u > 1.0) return S_.back() + fn_(1.0) * (u - 1.0);
  const int j = std::min(static_cast<int>(u * panels_), panels_ - 1);
  return table_S(j, 2.0 * (u * panels_ - j) - 1.0);
}

double SpeedProfile::U(double sigma) const {
  if (constant_) return sigma / c_;
  if (sigma <= 0.0) return sigma / fn_(0.0);
  if (sigma >= S_.back()) return 1.0 + (sigma - S_.back()) / fn_(1.0);
  const int j = static_cast<int>(locate(S_, sigma));
  // Newton on the panel polynomial, safeguarded by bisection, in the local variable x.
  double lo = -1.0, hi = 1.0;
  double x = -1.0 + 2.0 * (sigma - S_[j]) / (S_[j + 1] - S_[j]);
  const double tol = 1e-15 * S_.back();
  for (int it = 0; it < 100; ++it) {
    const double r = table_S(j, x) - sigma;
    if (std::abs(r) <= tol) break;
    if (r > 0) hi = x;
    else lo = x;
    double next = x - r / (table_v(j, x) / (2.0 * panels_));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-16) break;
    x = next;
  }
  return (j + 0.5 * (x + 1.0)) / panels_;
}

// ---------------------------------------------------------------------------

std::vector<double> segment_for_loops(const BasePath& path, double max_len, int min_pieces,
                                      int max_pieces) {
  if (!(max_len > 0.0)) throw Error(ErrorKind::CannotSegment, "piece length bound must be positive");
  const double L = path.length();
  const double want = std::floor(L / max_len) + 1.0;
  if (want > max_pieces) throw Error(ErrorKind::CannotSegment, "too many pieces needed");
  const int P = std::max(min_pieces, static_cast<int>(want));
  std::vector<double> u(P + 1);
  const double span = path.tau1() - path.tau0();
  u[0] = 0.0;
  u[P] = 1.0;
  for (int i = 1; i < P; ++i) u[i] = (path.tau_of_s(L * i / P) - path.tau0()) / span;
  for (int i = 1; i <= P; ++i)
    if (!(u[i] > u[i - 1])) throw Error(ErrorKind::CannotSegment, "pieces are not monotone");
  return u;
}

std::vector<double> balance_budgets(const BasePath& path, const SpeedProfile& v, int pieces) {
  if (pieces < 1) throw Error(ErrorKind::CannotSegment, "need at least one piece");
  const double span = path.tau1() - path.tau0();
  auto B = [&](double u) { return v.S(u) - path.s_of_tau(path.tau0() + u * span); };
  const double total = B(1.0);
  if (!(total > 0.0)) throw Error(ErrorKind::SpeedMarginViolated, "target speed does not exceed the base speed");
  std::vector<double> u(pieces + 1, 0.0);
  u[pieces] = 1.0;
  for (int i = 1; i < pieces; ++i) {
    const double want = total * i / pieces;
    double lo = u[i - 1], hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (B(mid) < want ? lo : hi) = mid;
    }
    u[i] = 0.5 * (lo + hi);
    if (!(u[i] > u[i - 1])) throw Error(ErrorKind::CannotSegment, "pieces are not monotone");
  }
  return u;
}

double loop_budget(const SpeedProfile& v, double u_a, double u_b, double s_a, double s_b) {
  const double L = (v.S(u_b) - v.S(u_a)) - (s_b - s_a);
  if (!(L > 0.0))
    throw Error(ErrorKind::SpeedMarginViolated, "target speed does not exceed tantrix speed on a piece");
  return L;
}

// ---------------------------------------------------------------------------

LoopFamily::LoopFamily(const BasePath* path, double s_m, int side, double cap_radius, double lean)
    : path_(path), s_m_(s_m), cap_(cap_radius), lean_(lean) {
  if (!(cap_radius > 0.0)) throw Error(ErrorKind::CapTooSmall, "cap radius must be positive");
  Vec g[3];
  path->eval(s_m, 1, g);
  q_ = g[0];
  u_ = normalized(project_out(g[1], q_));
  const int n = static_cast<int>(q_.size());
  if (n == 3) {
    const Eigen::Vector3d c = Eigen::Vector3d(q_[0], q_[1], q_[2]).cross(Eigen::Vector3d(u_[0], u_[1], u_[2]));
    nu_ = Vec(3);
    nu_ << c[0], c[1], c[2];
    nu_ = normalized(nu_);
  } else {
    double best = -1.0;
    for (int k = 0; k < n; ++k) {
      Vec e = Vec::Zero(n);
      e[k] = 1.0;
      const Vec w = project_out(project_out(e, q_), u_);
      if (w.norm() > best + 1e-12) {
        best = w.norm();
        nu_ = w;
      }
    }
    nu_ = normalized(nu_);
  }
  if (side < 0) nu_ = -nu_;
}

double LoopFamily::max_radius(double half_window) const {
  return std::min(0.45 * cap_, 0.9 * half_window);
}

void LoopFamily::eval(double r, double theta, Vec& point, Vec* dpoint) const {
  const double c = std::cos(theta), s = std::sin(theta);
  const double h = std::sin(0.5 * theta);
  double S = 0.0, dS = 0.0;
  if (h > 1e-3 * kFlat) {
    S = std::exp(-kFlat / h);
    dS = S * kFlat * 0.5 * std::cos(0.5 * theta) / (h * h);
  }
  const double b = lean_ * r * (1 - c) * S, db = lean_ * r * (s * S + (1 - c) * dS);
  Vec g[3];
  path_->eval(s_m_ + r * s, 1, g);
  const Vec H = g[0] + b * nu_;
  const double nh = H.norm();
  point = H / nh;
  if (dpoint) {
    const Vec dH = (r * c) * g[1] + db * nu_;
    *dpoint = (dH - point * point.dot(dH)) / nh;
  }
}

const std::vector<double>& LoopFamily::panels() {
  static const std::vector<double> p = [] {
    std::vector<double> out;
    for (int i = 0; i <= 16; ++i) out.push_back(kTwoPi * i / 16);
    return out;
  }();
  return p;
}

std::vector<double> LoopFamily::cumulative(double r) const {
  const auto& P = panels();
  std::vector<double> cum(P.size(), 0.0);
  Vec pt, d;
  for (std::size_t p = 0; p + 1 < P.size(); ++p) {
    const double sp = integrate(
        [&](double th) {
          eval(r, th, pt, &d);
          return d.norm();
        },
        P[p], P[p + 1], 1, kOrder);
    cum[p + 1] = cum[p] + sp;
  }
  return cum;
}

double LoopFamily::length(double r) const { return cumulative(r).back(); }

double LoopFamily::theta_at(double r, const std::vector<double>& cum, double mu) const {
  const auto& P = panels();
  if (mu <= 0.0) return 0.0;
  if (mu >= cum.back()) return kTwoPi;
  const std::size_t p = locate(cum, mu);
  double lo = P[p], hi = P[p + 1];
  double th = lo + (mu - cum[p]) / (cum[p + 1] - cum[p]) * (hi - lo);
  Vec pt, d;
  auto speed = [&](double x) {
    eval(r, x, pt, &d);
    return d.norm();
  };
  for (int it = 0; it < 60; ++it) {
    const double res = cum[p] + integrate(speed, P[p], th, 1, kOrder) - mu;
    if (res > 0) hi = th;
    else lo = th;
    eval(r, th, pt, &d);
    double next = th - res / d.norm();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - th) < 1e-15) return next;
    th = next;
  }
  return th;
}

Vec LoopFamily::at_length(double r, const std::vector<double>& cum, double mu) const {
  Vec pt;
  eval(r, theta_at(r, cum, mu), pt, nullptr);
  return pt;
}

double LoopFamily::radius_for_length(double len, double r_max) const {
  if (!(len > 0.0)) return 0.0;
  double r0 = r_max * len / length(r_max);
  double g0 = length(r0) - len;
  double r1 = r0 * len / (g0 + len);
  for (int it = 0; it < 50; ++it) {
    const double g1 = length(r1) - len;
    if (std::abs(g1) <= 1e-14 * len || g1 == g0) return r1;
    const double r2 = r1 - g1 * (r1 - r0) / (g1 - g0);
    r0 = r1;
    g0 = g1;
    r1 = r2 > 0 ? r2 : 0.5 * r1;
  }
  return r1;
}

double LoopFamily::max_distance(double r) const {
  double m = 0.0;
  Vec pt;
  for (int i = 0; i <= 256; ++i) {
    eval(r, kTwoPi * i / 256, pt, nullptr);
    m = std::max(m, std::acos(std::clamp(pt.dot(q_), -1.0, 1.0)));
  }
  return m;
}

CompositeLoop composite_loop(const LoopFamily& fam, int laps, double L, double r_bound) {
  if (laps < 1) throw Error(ErrorKind::InvalidArgument, "need at least one lap");
  if (!(L > 0.0)) throw Error(ErrorKind::SpeedMarginViolated, "loop budget is not positive");
  CompositeLoop c;
  c.total = L;
  c.laps = laps;
  c.radius = fam.radius_for_length(L / laps, r_bound);
  if (c.radius > 2.0 * r_bound) throw Error(ErrorKind::RTooLarge, "loop budget outgrows the cap");
  c.cum = fam.cumulative(c.radius);
  c.lap_length = c.cum.back();
  return c;
}

double site_position(const std::vector<double>& s, int site) {
  const int P = static_cast<int>(s.size()) - 1;
  const int b = 2 * site + 1;
  if (b < P) return s[b];
  return 0.5 * (s[P - 1] + s[P]);
}

double site_window(const std::vector<double>& s, int site) {
  const int P = static_cast<int>(s.size()) - 1;
  const int b = 2 * site + 1;
  if (b < P) return std::min(s[b] - s[b - 1], s[b + 1] - s[b]);
  return 0.5 * (s[P] - s[P - 1]);
}

namespace {

// Loop budget of each site: the budgets of the pieces it serves.
std::vector<double> site_budgets(const SpeedProfile& v, const std::vector<double>& u,
                                 const std::vector<double>& s, std::vector<double>* piece_budget) {
  const int P = static_cast<int>(u.size()) - 1;
  std::vector<double> out((P + 1) / 2, 0.0);
  for (int i = 0; i < P; ++i) {
    const double L = loop_budget(v, u[i], u[i + 1], s[i], s[i + 1]);
    if (piece_budget) piece_budget->push_back(L);
    out[i / 2] += L;
  }
  return out;
}

}  // namespace

LoopPlan plan_loops(const BasePath& path, const SpeedProfile& v, std::vector<double> u_breaks,
                    double cap_radius) {
  if (!(cap_radius > 0.0)) throw Error(ErrorKind::CapTooSmall, "cap radius must be positive");
  LoopPlan plan;
  plan.cap_radius = cap_radius;
  const int P = static_cast<int>(u_breaks.size()) - 1;
  if (P < 1) throw Error(ErrorKind::InvalidArgument, "need at least one piece");
  const double span = path.tau1() - path.tau0();
  std::vector<double> s(P + 1);
  for (int i = 0; i <= P; ++i) s[i] = path.s_of_tau(path.tau0() + u_breaks[i] * span);
  const std::vector<double> L = site_budgets(v, u_breaks, s, nullptr);
  const int sites = static_cast<int>(L.size());
  // One lap count for all sites, so sites with equal budgets get congruent loops.
  double ratio = 0.0;
  for (int j = 0; j < sites; ++j) {
    const int side = (j % 2 == 0) ? 1 : -1;
    const LoopFamily fam(&path, site_position(s, j), side, cap_radius);
    const double rmax = fam.max_radius(site_window(s, j));
    ratio = std::max(ratio, L[j] / fam.length(rmax));
    plan.max_radius.push_back(rmax);
    plan.side.push_back(side);
  }
  const double laps = std::max(1.0, std::ceil(ratio / 0.75));
  if (laps > 1e5) throw Error(ErrorKind::CapTooSmall, "loop budget needs too many laps");
  plan.laps = static_cast<int>(laps);
  plan.u_breaks = std::move(u_breaks);
  return plan;
}

// ---------------------------------------------------------------------------

TildeTantrix::TildeTantrix(const BasePath* path, const SpeedProfile* v, const LoopPlan& plan,
                           const std::vector<double>& s_breaks)
    : path_(path), v_(v) {
  const int P = plan.pieces();
  if (static_cast<int>(s_breaks.size()) != P + 1)
    throw Error(ErrorKind::InvalidArgument, "breakpoint count mismatch");
  for (int i = 0; i < P; ++i)
    if (!(s_breaks[i + 1] > s_breaks[i]))
      throw Error(ErrorKind::InvalidArgument, "base path breakpoints not increasing");
  std::vector<double> budget;
  const std::vector<double> L = site_budgets(*v, plan.u_breaks, s_breaks, &budget);
  sites_.reserve(L.size());
  for (int j = 0; j < static_cast<int>(L.size()); ++j) {
    Site st;
    st.s = site_position(s_breaks, j);
    st.family = LoopFamily(path, st.s, plan.side[j], plan.cap_radius, plan.lean(j));
    st.loop = composite_loop(st.family, plan.laps, L[j], plan.max_radius[j]);
    sites_.push_back(std::move(st));
  }
  pieces_.reserve(P);
  for (int i = 0; i < P; ++i) {
    Piece p;
    p.u_a = plan.u_breaks[i];
    p.u_b = plan.u_breaks[i + 1];
    p.s_a = s_breaks[i];
    p.s_b = s_breaks[i + 1];
    p.sigma_a = v->S(p.u_a);
    p.budget = budget[i];
    p.site = i / 2;
    const double D = p.s_b - p.s_a;
    if (i % 2 == 0 && i + 1 < P) {
      p.pre = D;
      p.post = 0.0;
      p.loop_start = 0.0;
    } else if (i % 2 == 1) {
      p.pre = 0.0;
      p.post = D;
      p.loop_start = budget[i - 1];
    } else {
      p.pre = p.post = 0.5 * D;
      p.loop_start = 0.0;
    }
    pieces_.push_back(p);
  }
}

Vec TildeTantrix::site_point(const Site& st, double mu) const {
  const CompositeLoop& c = st.loop;
  const double lap = std::clamp(std::floor(mu / c.lap_length), 0.0, c.laps - 1.0);
  return st.family.at_length(c.radius, c.cum, mu - lap * c.lap_length);
}

Vec TildeTantrix::path_point(const Piece& p, double lambda) const {
  if (p.pre > 0.0 && lambda <= p.pre) return path_->eval(p.s_a + lambda);
  if (lambda < p.pre + p.budget || p.post == 0.0)
    return site_point(sites_[p.site], p.loop_start + std::clamp(lambda - p.pre, 0.0, p.budget));
  return path_->eval(std::min(p.s_b, p.s_b - p.post + (lambda - p.pre - p.budget)));
}

Vec TildeTantrix::eval(double u) const {
  std::size_t i = 0;
  while (i + 1 < pieces_.size() && u > pieces_[i].u_b) ++i;
  const Piece& p = pieces_[i];
  return path_point(p, v_->S(u) - p.sigma_a);
}

Vec TildeTantrix::integrate_base(double s0, double s1, double sigma0) const {
  const int dim = static_cast<int>(path_->eval(s0).size());
  Vec sum = Vec::Zero(dim);
  if (!(s1 > s0)) return sum;
  const int panels = std::max(2, static_cast<int>(std::ceil((s1 - s0) / path_->length() * 64)));
  auto acc = [&](double s, double w, const Vec& val) {
    sum += (w / v_->v(v_->U(sigma0 + (s - s0)))) * val;
  };
  composite_gauss([&](double s) { return path_->eval(s); }, s0, s1, panels, kOrder, acc);
  return sum;
}

namespace {

// int T~ du over loop arclength [a, b] of the loop of radius r, the start at sigma0.
Vec integrate_loop_range(const LoopFamily& fam, double r, const std::vector<double>& cum, double a,
                         double b, double sigma0, const SpeedProfile& v) {
  const auto& P = LoopFamily::panels();
  const GaussRule& rule = gauss_legendre(kOrder);
  const Eigen::MatrixXd& M = spectral_integration();
  const double th_a = fam.theta_at(r, cum, a), th_b = fam.theta_at(r, cum, b);
  Vec sum = Vec::Zero(fam.q().size());
  Vec pts[kOrder];
  double sp[kOrder];
  double lam0 = 0.0;
  Vec d;
  for (std::size_t k = 0; k + 1 < P.size(); ++k) {
    const double lo = std::max(P[k], th_a), hi = std::min(P[k + 1], th_b);
    if (!(hi > lo)) continue;
    const double h = 0.5 * (hi - lo);
    for (int q = 0; q < kOrder; ++q) {
      fam.eval(r, 0.5 * (lo + hi) + h * rule.nodes[q], pts[q], &d);
      sp[q] = d.norm();
    }
    for (int q = 0; q < kOrder; ++q) {
      double weight = 1.0 / v.v(0.5);
      if (!v.constant()) {
        double lam = lam0;
        for (int j = 0; j < kOrder; ++j) lam += h * M(q, j) * sp[j];
        weight = 1.0 / v.v(v.U(sigma0 + lam));
      }
      sum += (h * rule.weights[q] * sp[q] * weight) * pts[q];
    }
    for (int q = 0; q < kOrder; ++q) lam0 += h * rule.weights[q] * sp[q];
  }
  return sum;
}

}  // namespace

Vec TildeTantrix::integrate_site(const Site& st, double mu0, double mu1, double sigma0) const {
  const CompositeLoop& c = st.loop;
  const double Lo = c.lap_length;
  Vec sum = Vec::Zero(st.family.q().size());
  Vec full;
  bool have_full = false;
  for (int l = 0; l < c.laps; ++l) {
    const double a = std::max(mu0, l * Lo) - l * Lo;
    const double b = std::min(mu1, (l + 1) * Lo) - l * Lo;
    if (!(b > a)) continue;
    const double start = sigma0 + (l * Lo + a - mu0);
    if (v_->constant() && a <= 1e-14 * Lo && b >= Lo * (1 - 1e-14)) {
      if (!have_full) {
        full = integrate_loop_range(st.family, c.radius, c.cum, 0.0, Lo, start, *v_);
        have_full = true;
      }
      sum += full;
    } else {
      sum += integrate_loop_range(st.family, c.radius, c.cum, a, b, start, *v_);
    }
  }
  return sum;
}

Vec TildeTantrix::integral() const {
  Vec total = Vec::Zero(path_->eval(0.0).size());
  for (const Piece& p : pieces_) {
    total += integrate_base(p.s_a, p.s_a + p.pre, p.sigma_a);
    double sigma = p.sigma_a + p.pre;
    total += integrate_site(sites_[p.site], p.loop_start, p.loop_start + p.budget, sigma);
    sigma += p.budget;
    total += integrate_base(p.s_b - p.post, p.s_b, sigma);
  }
  return total;
}

double TildeTantrix::piece_length(int i) const {
  const Piece& p = pieces_.at(i);
  auto speed = [&](double s) {
    Vec g[3];
    path_->eval(s, 1, g);
    return g[1].norm();
  };
  auto base = [&](double s0, double s1) {
    if (!(s1 > s0)) return 0.0;
    const int panels = std::max(2, static_cast<int>(std::ceil((s1 - s0) / path_->length() * 64)));
    return integrate(speed, s0, s1, panels, kOrder);
  };
  double len = base(p.s_a, p.s_a + p.pre) + base(p.s_b - p.post, p.s_b);
  // Loop part measured from an independent evaluation of the lap length.
  const CompositeLoop& c = sites_[p.site].loop;
  len += p.budget / c.lap_length * sites_[p.site].family.length(c.radius);
  return len;
}

double TildeTantrix::min_loop_period() const {
  double m = 1.0;
  for (const Piece& p : pieces_)
    m = std::min(m, sites_[p.site].loop.lap_length / v_->v(0.5 * (p.u_a + p.u_b)));
  return m;
}

double TildeTantrix::speed_error(int samples_per_piece) const {
  double worst = 0.0;
  const double period = min_loop_period();
  for (const Piece& p : pieces_) {
    const double w = p.u_b - p.u_a;
    const double h = std::min(1e-4 * w, 1e-3 * period);
    for (int j = 1; j < samples_per_piece; ++j) {
      const double u = p.u_a + w * j / samples_per_piece;
      const Vec d = (eval(u - 2 * h) - 8.0 * eval(u - h) + 8.0 * eval(u + h) - eval(u + 2 * h)) / (12 * h);
      const double v = v_->v(u);
      worst = std::max(worst, std::abs(d.norm() - v) / v);
    }
  }
  return worst;
}

}  // namespace prescurv
