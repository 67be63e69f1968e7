#include "prescurv/density.hpp"

#include "prescurv/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace prescurv {

double smoothstep(double y) {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  const double y2 = y * y;
  return y2 * y2 * y * (126.0 + y * (-420.0 + y * (540.0 + y * (-315.0 + y * 70.0))));
}

double smoothstep_integral(double y) {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 0.5 + (y - 1.0);
  const double y3 = y * y * y;
  return y3 * y3 * (21.0 + y * (-60.0 + y * (67.5 + y * (-35.0 + y * 7.0))));
}

PartitionOfUnity::PartitionOfUnity(Domain domain, int k, double window)
    : domain_(domain), k_(k), delta_(window / k) {
  if (k < 1) throw Error(ErrorKind::BadK, "partition needs k >= 1");
  if (!(window > 0 && window < 0.5)) throw Error(ErrorKind::InvalidArgument, "window must lie in (0, 1/2)");
  if (domain.periodic() && k < 2) throw Error(ErrorKind::BadK, "periodic partition needs k >= 2");
  if (domain.periodic()) breaks_.push_back(delta_);
  for (int j = 1; j < k; ++j) {
    breaks_.push_back(static_cast<double>(j) / k - delta_);
    breaks_.push_back(static_cast<double>(j) / k + delta_);
  }
  if (domain.periodic()) breaks_.push_back(1.0 - delta_);
}

double PartitionOfUnity::centred(int i, double u) const {
  double v = u - (i + 0.5) / k_;
  v -= std::floor(v + 0.5);
  return v;
}

double PartitionOfUnity::periodic_bump(double v) const {
  const double h = 0.5 / k_;
  return smoothstep((v + h + delta_) / (2 * delta_)) - smoothstep((v - h + delta_) / (2 * delta_));
}

double PartitionOfUnity::periodic_bump_integral(double v) const {
  const double h = 0.5 / k_;
  auto F = [&](double w) {
    return 2 * delta_ *
           (smoothstep_integral((w + h + delta_) / (2 * delta_)) - smoothstep_integral((w - h + delta_) / (2 * delta_)));
  };
  return F(v) - F(-0.5);
}

double PartitionOfUnity::step_up(int j, double u) const {
  return smoothstep((u - static_cast<double>(j) / k_ + delta_) / (2 * delta_));
}

double PartitionOfUnity::step_up_integral(int j, double u) const {
  const double y0 = (-static_cast<double>(j) / k_ + delta_) / (2 * delta_);
  const double y = (u - static_cast<double>(j) / k_ + delta_) / (2 * delta_);
  return 2 * delta_ * (smoothstep_integral(y) - smoothstep_integral(y0));
}

double PartitionOfUnity::theta(int i, double u) const {
  if (domain_.periodic()) return periodic_bump(centred(i, u));
  const double left = i >= 1 ? step_up(i, u) : 1.0;
  const double right = i + 1 <= k_ - 1 ? step_up(i + 1, u) : 0.0;
  return left - right;
}

double PartitionOfUnity::theta_integral(int i, double u) const {
  if (domain_.periodic()) {
    const double v0 = centred(i, 0.0), v = centred(i, u);
    const double wraps = std::floor(u) + (v < v0 ? 1.0 : 0.0);
    return periodic_bump_integral(v) - periodic_bump_integral(v0) + wraps / k_;
  }
  const double left = i >= 1 ? step_up_integral(i, u) : u;
  const double right = i + 1 <= k_ - 1 ? step_up_integral(i + 1, u) : 0.0;
  return left - right;
}

std::pair<double, double> PartitionOfUnity::support(int i) const {
  if (domain_.periodic()) return {0.0, 1.0};  // may wrap; callers evaluate theta directly
  const double lo = i == 0 ? 0.0 : static_cast<double>(i) / k_ - delta_;
  const double hi = i == k_ - 1 ? 1.0 : static_cast<double>(i + 1) / k_ + delta_;
  return {lo, hi};
}

PartitionOfUnity build_pou(Domain domain, int k, int ambient_dim) {
  if (k <= ambient_dim)
    throw Error(ErrorKind::BadK, "k = " + std::to_string(k) + " must exceed the dimension " +
                                     std::to_string(ambient_dim));
  return PartitionOfUnity(domain, k);
}

Eigen::MatrixXd node_points(const SphericalCurve& T, const PartitionOfUnity& pou) {
  const int k = pou.k();
  const int n = T.dim();
  const Domain& d = T.domain();
  const double L = d.length();
  // Panel ends: grid nodes of T and the window ends, both in normalized units.
  std::vector<double> cuts;
  const int nint = T.curve().intervals();
  for (int j = 0; j <= nint; ++j) cuts.push_back(static_cast<double>(j) / nint);
  cuts.insert(cuts.end(), pou.breakpoints().begin(), pou.breakpoints().end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double x, double y) { return y - x < 1e-15; }),
             cuts.end());

  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(k, n);
  const GaussRule& rule = gauss_legendre(8);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double lo = cuts[c], hi = cuts[c + 1];
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double u = mid + half * rule.nodes[q];
      const Vec Tu = T.eval(d.a + L * u);
      const double w = half * rule.weights[q];
      for (int i = 0; i < k; ++i) {
        const auto [s0, s1] = pou.support(i);
        if (u < s0 || u > s1) continue;
        const double th = pou.theta(i, u);
        if (th != 0.0) p.row(i) += (k * w * th) * Tu.transpose();
      }
    }
  }
  return p;
}

DensityFamily make_density_family(const SphericalCurve& T, int k) {
  const PartitionOfUnity pou = build_pou(T.domain(), k, T.dim());
  return family_from_nodes(node_points(T, pou), pou);
}

DensityFamily family_from_nodes(const Eigen::MatrixXd& nodes, const PartitionOfUnity& pou) {
  DensityFamily fam;
  fam.pou = pou;
  fam.nodes = nodes;
  const int k = static_cast<int>(nodes.rows());
  const int n = static_cast<int>(nodes.cols());
  if (k != pou.k()) throw Error(ErrorKind::BadK, "node count differs from the partition size");
  if (k <= n) throw Error(ErrorKind::BadK, "need more nodes than dimensions");
  fam.x0 = fam.nodes.colwise().mean().transpose();
  const Eigen::MatrixXd M = (fam.nodes.rowwise() - fam.x0.transpose()).transpose();  // n x k
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  qr.setThreshold(1e-12);
  if (qr.rank() < n) throw Error(ErrorKind::DegenerateCurve, "node points do not span the ambient space");
  const auto& perm = qr.colsPermutation().indices();
  Eigen::MatrixXd S(n, n);
  for (int j = 0; j < n; ++j) {
    fam.subset.push_back(perm[j]);
    S.col(j) = M.col(perm[j]);
  }
  const Eigen::MatrixXd Sinv = S.inverse();
  const Eigen::RowVectorXd sum_a = Sinv.colwise().sum();
  fam.gradient = Eigen::MatrixXd::Zero(k, n);
  for (int i = 0; i < k; ++i) fam.gradient.row(i) = -sum_a / k;
  for (int j = 0; j < n; ++j) fam.gradient.row(fam.subset[j]) += Sinv.row(j);
  return fam;
}

double positivity_radius(const DensityFamily& fam) {
  const int k = fam.pou.k();
  double r = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    const double g = fam.gradient.row(i).norm();
    if (g > 0) r = std::min(r, (1.0 / k) / g);
  }
  return r;
}

double initial_radius(const DensityFamily& fam, double hull_inradius) {
  return 0.9 * std::min(hull_inradius, positivity_radius(fam));
}

Eigen::VectorXd barycentric_coeffs(const DensityFamily& fam, const Vec& x) {
  const Vec dx = x - fam.x0;
  if (dx.norm() > fam.R * (1 + 1e-12))
    throw Error(ErrorKind::OutsideBall, "point lies outside the ball about x0");
  const int k = fam.pou.k();
  Eigen::VectorXd c = Eigen::VectorXd::Constant(k, 1.0 / k) + fam.gradient * Eigen::VectorXd(dx);
  if (c.minCoeff() <= 0.0) throw Error(ErrorKind::NegativeCoefficient, "barycentric coefficient is not positive");
  return c;
}

Density::Density(const PartitionOfUnity& pou, Eigen::VectorXd coeffs) : pou_(pou), c_(std::move(coeffs)) {
  double total = 0.0;
  for (int i = 0; i < pou_.k(); ++i) total += c_[i] * pou_.theta_integral(i, 1.0);
  lambda_ = 1.0 / total;
}

double Density::operator()(double u) const {
  double s = 0.0;
  for (int i = 0; i < pou_.k(); ++i) {
    const auto [lo, hi] = pou_.support(i);
    if (u >= lo && u <= hi) s += c_[i] * pou_.theta(i, u);
  }
  return lambda_ * s;
}

double Density::mass(double u) const {
  double s = 0.0;
  for (int i = 0; i < pou_.k(); ++i) s += c_[i] * pou_.theta_integral(i, u);
  return lambda_ * s;
}

double Density::inverse_mass(double m) const {
  if (m <= 0.0) return 0.0;
  if (m >= 1.0) return 1.0;
  double lo = 0.0, hi = 1.0, u = m;
  for (int it = 0; it < 100; ++it) {
    const double r = mass(u) - m;
    if (r > 0) hi = u;
    else lo = u;
    double next = u - r / (*this)(u);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) < 1e-16) return next;
    u = next;
  }
  return u;
}

Density density(const DensityFamily& fam, const Vec& x) {
  return Density(fam.pou, barycentric_coeffs(fam, x));
}

Reparam reparam_family(const SphericalCurve& T, const DensityFamily& fam, const Vec& x) {
  Reparam r;
  try {
    r.rho = density(fam, x);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NegativeCoefficient) throw Error(ErrorKind::RTooLarge, e.what());
    throw;
  }
  const int k = fam.pou.k();
  if (!(std::abs(r.rho.lambda() / k - 1.0) < 0.5)) throw Error(ErrorKind::RTooLarge, "lambda bound violated");
  const Domain& d = T.domain();
  const Grid g = T.curve().grid();
  Eigen::VectorXd v(g.nodes());
  Eigen::MatrixXd s(g.nodes(), T.dim());
  for (int j = 0; j < g.nodes(); ++j) {
    v[j] = d.a + d.length() * r.rho.inverse_mass((g.param(j) - d.a) / d.length());
    s.row(j) = T.eval(v[j]).transpose();
  }
  r.phi = Diffeo(d, d, v, T.curve().smoothness_order());
  r.Tbar = SphericalCurve(ParamCurve(d, std::move(s), T.curve().smoothness_order()));
  return r;
}

}  // namespace prescurv
