#include "prescurv/nonflat.hpp"

#include "prescurv/calculus.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

namespace prescurv {

namespace {

using Eigen::Vector3d;

struct Face {
  int a, b, c;
  Vector3d n;
  double d;
};

// Outward orientation is inherited from the vertex order; `inside` only fixes the first tetrahedron.
Face make_face(const std::vector<Vector3d>& p, int a, int b, int c, const Vector3d* inside = nullptr) {
  Face f{a, b, c, (p[b] - p[a]).cross(p[c] - p[a]), 0.0};
  const double len = f.n.norm();
  f.n = len > 0 ? Vector3d(f.n / len) : Vector3d::Zero();
  f.d = f.n.dot(p[a]);
  if (inside && f.n.dot(*inside) - f.d > 0) {
    std::swap(f.b, f.c);
    f.n = -f.n;
    f.d = -f.d;
  }
  return f;
}

// Quickhull: the farthest outside point is always added next, which keeps faces well shaped.
// Returns false when the points do not span three dimensions.
bool hull3(const std::vector<Vector3d>& p, double eps, std::vector<Face>& faces) {
  const int m = static_cast<int>(p.size());
  if (m < 4) return false;
  int i0 = 0;
  for (int i = 1; i < m; ++i)
    if (p[i].x() < p[i0].x()) i0 = i;
  int i1 = -1;
  double best = eps;
  for (int i = 0; i < m; ++i) {
    const double d = (p[i] - p[i0]).norm();
    if (d > best) best = d, i1 = i;
  }
  if (i1 < 0) return false;
  const Vector3d dir = (p[i1] - p[i0]).normalized();
  int i2 = -1;
  best = eps;
  for (int i = 0; i < m; ++i) {
    const Vector3d w = p[i] - p[i0];
    const double d = (w - dir * dir.dot(w)).norm();
    if (d > best) best = d, i2 = i;
  }
  if (i2 < 0) return false;
  const Vector3d nrm = (p[i1] - p[i0]).cross(p[i2] - p[i0]).normalized();
  int i3 = -1;
  best = eps;
  for (int i = 0; i < m; ++i) {
    const double d = std::abs(nrm.dot(p[i] - p[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (i3 < 0) return false;
  const Vector3d inside = (p[i0] + p[i1] + p[i2] + p[i3]) / 4.0;

  std::vector<Face> all = {make_face(p, i0, i1, i2, &inside), make_face(p, i0, i1, i3, &inside),
                           make_face(p, i0, i2, i3, &inside), make_face(p, i1, i2, i3, &inside)};
  std::vector<char> alive(4, 1);
  std::vector<std::vector<int>> outside(4);
  auto assign = [&](int i, int first_face) {
    for (int f = first_face; f < static_cast<int>(all.size()); ++f) {
      if (!alive[f]) continue;
      if (all[f].n.dot(p[i]) - all[f].d > eps) {
        outside[f].push_back(i);
        return;
      }
    }
  };
  for (int i = 0; i < m; ++i)
    if (i != i0 && i != i1 && i != i2 && i != i3) assign(i, 0);

  for (;;) {
    int face = -1;
    for (int f = 0; f < static_cast<int>(all.size()); ++f)
      if (alive[f] && !outside[f].empty()) {
        face = f;
        break;
      }
    if (face < 0) break;
    int apex = outside[face][0];
    double far = -1.0;
    for (int i : outside[face]) {
      const double d = all[face].n.dot(p[i]) - all[face].d;
      if (d > far) far = d, apex = i;
    }
    std::set<std::pair<int, int>> edges;
    std::vector<int> orphans;
    for (int f = 0; f < static_cast<int>(all.size()); ++f) {
      if (!alive[f] || all[f].n.dot(p[apex]) - all[f].d <= eps) continue;
      alive[f] = 0;
      edges.insert({all[f].a, all[f].b});
      edges.insert({all[f].b, all[f].c});
      edges.insert({all[f].c, all[f].a});
      orphans.insert(orphans.end(), outside[f].begin(), outside[f].end());
      outside[f].clear();
    }
    const int first_new = static_cast<int>(all.size());
    for (const auto& e : edges)
      if (!edges.count({e.second, e.first})) {
        all.push_back(make_face(p, e.first, e.second, apex));
        alive.push_back(1);
        outside.emplace_back();
      }
    for (int i : orphans)
      if (i != apex) assign(i, first_new);
  }
  faces.clear();
  for (int f = 0; f < static_cast<int>(all.size()); ++f)
    if (alive[f]) faces.push_back(all[f]);
  return true;
}

// Pivoting search for n + 1 points whose simplex contains the origin in its interior.
// Returns the inradius bound about the origin (0 on failure).
double witness_simplex(const Eigen::MatrixXd& q, std::vector<int>& out) {
  const int m = static_cast<int>(q.rows());
  const int n = static_cast<int>(q.cols());
  out.clear();
  if (m < n + 1) return 0.0;
  const double scale = q.rowwise().norm().maxCoeff();
  const double eps = 1e-12 * std::max(scale, 1e-300);
  // Greedy affinely independent start.
  std::vector<int> idx;
  {
    int first = 0;
    for (int i = 1; i < m; ++i)
      if (q.row(i).norm() > q.row(first).norm()) first = i;
    idx.push_back(first);
    Eigen::MatrixXd basis(n, 0);
    for (int s = 1; s <= n; ++s) {
      int pick = -1;
      double best = eps;
      for (int i = 0; i < m; ++i) {
        Eigen::VectorXd w = (q.row(i) - q.row(first)).transpose();
        if (basis.cols() > 0) w -= basis * (basis.transpose() * w);
        if (w.norm() > best) best = w.norm(), pick = i;
      }
      if (pick < 0) return 0.0;
      idx.push_back(pick);
      Eigen::VectorXd w = (q.row(pick) - q.row(first)).transpose();
      if (basis.cols() > 0) w -= basis * (basis.transpose() * w);
      basis.conservativeResize(n, basis.cols() + 1);
      basis.col(basis.cols() - 1) = w.normalized();
    }
  }
  Eigen::MatrixXd A(n + 1, n + 1);
  for (int iter = 0; iter < 50 * (n + 1) + m; ++iter) {
    for (int s = 0; s <= n; ++s) {
      A.block(0, s, n, 1) = q.row(idx[s]).transpose();
      A(n, s) = 1.0;
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::MatrixXd inv = lu.inverse();
    const Eigen::VectorXd mu = inv.col(n);  // barycentric coordinates of the origin
    int j = 0;
    for (int s = 1; s <= n; ++s)
      if (mu[s] < mu[j]) j = s;
    if (mu[j] > 1e-14) {
      double r = std::numeric_limits<double>::infinity();
      for (int s = 0; s <= n; ++s) r = std::min(r, mu[s] / inv.row(s).head(n).norm());
      out = idx;
      return r;
    }
    // Replace vertex j by the sample furthest on the origin's side of the opposite facet.
    const Eigen::VectorXd g = inv.row(j).head(n).transpose();
    int pick = -1;
    double lowest = mu[j] - 1e-14;
    for (int i = 0; i < m; ++i) {
      const double l = g.dot(q.row(i).transpose()) + inv(j, n);
      if (l < lowest) lowest = l, pick = i;
    }
    if (pick < 0) return 0.0;  // origin is not inside the hull
    idx[j] = pick;
  }
  return 0.0;
}

double bump(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

}  // namespace

HullReport hull_thickness(const Eigen::MatrixXd& points, const Vec& x0) {
  HullReport rep;
  const int n = static_cast<int>(points.cols());
  Eigen::MatrixXd q = points.rowwise() - x0.transpose();
  const double simplex_r = witness_simplex(q, rep.witness_simplex);
  if (n != 3) {
    rep.thickness = simplex_r;
    return rep;
  }
  // Facets are affine invariant: build the hull in whitened coordinates, where thin point
  // clouds become round, and measure facet distances back in the original frame.
  const Eigen::Vector3d mean = q.colwise().mean().transpose();
  const Eigen::MatrixXd centered = q.rowwise() - mean.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(centered.transpose() * centered / q.rows());
  const Eigen::Vector3d ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  if (!(top > 0) || ev.minCoeff() <= 1e-28 * top) return HullReport{};
  const Eigen::Matrix3d W = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal();
  std::vector<Vector3d> p(q.rows());
  for (int i = 0; i < q.rows(); ++i) p[i] = W.transpose() * (q.row(i).transpose() - mean);
  std::vector<Face> faces;
  if (!hull3(p, 1e-11, faces)) return HullReport{};
  double r = std::numeric_limits<double>::infinity();
  const double scale = q.rowwise().norm().maxCoeff();
  for (const Face& f : faces) {
    Vector3d n = W * f.n;
    const double len = n.norm();
    n /= len;
    const Vector3d va = q.row(f.a).transpose();
    const double d = n.dot(va);
    // Supporting-plane check in the original frame; reject the hull if it fails.
    double worst = 0.0;
    for (int i = 0; i < q.rows(); ++i) worst = std::max(worst, n.dot(q.row(i).transpose()) - d);
    if (worst > 1e-9 * scale) {
      rep.thickness = simplex_r;
      return rep;
    }
    r = std::min(r, d);  // distance from x0 (origin) to the facet plane
  }
  rep.thickness = std::max(0.0, std::max(r, simplex_r));
  if (rep.thickness == 0.0) rep.witness_simplex.clear();
  return rep;
}

HullReport hull_thickness(const SphericalCurve& T, const Vec& x0, int max_samples) {
  const Domain& d = T.domain();
  const int nodes = T.curve().node_count();
  const int m = std::min(nodes, max_samples);
  Eigen::MatrixXd pts(m, T.dim());
  const double span = d.periodic() ? d.length() / m : d.length() / std::max(m - 1, 1);
  for (int i = 0; i < m; ++i) pts.row(i) = T.eval(d.a + i * span).transpose();
  return hull_thickness(pts, x0);
}

double c2_distance(const ParamCurve& f, const ParamCurve& g) {
  if (!(f.domain() == g.domain())) throw Error(ErrorKind::DomainMismatch, "curves live on different domains");
  double s[3] = {0, 0, 0};
  Vec a[3], b[3];
  for (double t : (f.intervals() >= g.intervals() ? f : g).dense_params(4)) {
    f.eval_upto(t, 2, a);
    g.eval_upto(t, 2, b);
    for (int k = 0; k < 3; ++k) s[k] = std::max(s[k], (a[k] - b[k]).norm());
  }
  return s[0] + s[1] + s[2];
}

NonflatResult ensure_nonflat(const ParamCurve& f, double budget, double flat_tol) {
  NonflatResult res;
  const SphericalCurve T0 = tantrix(f);
  const Vec x0 = average(T0.curve());
  res.thickness = hull_thickness(T0, x0).thickness;
  res.curve = f;
  if (res.thickness > flat_tol) return res;
  if (!(budget > 0)) throw Error(ErrorKind::PerturbationFailed, "flat tantrix and no perturbation budget");

  const Domain& dom = f.domain();
  const int n = f.dim();
  const Grid grid = f.grid();
  const double L0 = length(f);
  const double center = 0.5 * (dom.a + dom.b);
  const double half = 0.25 * dom.length();

  // Perturb along the thinnest direction of the tantrix cloud.
  Eigen::MatrixXd cloud(grid.nodes(), n);
  for (int j = 0; j < grid.nodes(); ++j) cloud.row(j) = (T0.eval(grid.param(j)) - x0).transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cloud.transpose() * cloud);
  const Vec w = es.eigenvectors().col(0);

  std::vector<Vec> W(grid.nodes()), N(grid.nodes());
  std::vector<double> beta(grid.nodes());
  Vec d[3];
  for (int j = 0; j < grid.nodes(); ++j) {
    const double t = grid.param(j);
    beta[j] = bump((t - center) / half);
    f.eval_upto(t, 2, d);
    const Vec Tt = normalized(d[1]);
    const Vec k = project_out(d[2], Tt);
    N[j] = k.norm() > 0 ? Vec(k / k.norm()) : Vec::Zero(n);
    Vec ww = project_out(w, Tt);
    ww -= N[j] * N[j].dot(ww);
    W[j] = ww;
  }
  auto build = [&](double A, double mu) {
    Eigen::MatrixXd s = f.samples();
    for (int j = 0; j < grid.nodes(); ++j) s.row(j) += (beta[j] * (A * W[j] + mu * N[j])).transpose();
    return ParamCurve(dom, std::move(s), f.smoothness_order());
  };

  // The amplitude ladder does not depend on the budget, so a larger budget can only reach further.
  for (double A = 1e-8 * L0; A <= L0; A *= 2.0) {
    // Length-preserving correction along the principal normal.
    auto excess = [&](double mu) { return length(build(A, mu)) - L0; };
    // Secant iteration; the excess is smooth and nearly linear in mu.
    double m0 = 0.0, m1 = A, e0 = excess(m0), e1 = excess(m1);
    for (int k = 0; k < 40 && std::abs(e1) > 1e-15 * L0 && e1 != e0; ++k) {
      const double m2 = m1 - e1 * (m1 - m0) / (e1 - e0);
      m0 = m1, e0 = e1;
      m1 = m2, e1 = excess(m1);
    }
    if (!(std::abs(e1) <= 1e-13 * L0)) continue;
    const double mu = m1;
    const ParamCurve g = resample_unit_speed(build(A, mu), 0, false).g;
    const double used = c2_distance(g, f);
    if (used > budget) break;
    const SphericalCurve Tg = tantrix(g);
    const double th = hull_thickness(Tg, average(Tg.curve())).thickness;
    if (th > flat_tol) {
      res.curve = g;
      res.thickness = th;
      res.amplitude = A;
      res.c2_distance = used;
      res.perturbed = true;
      return res;
    }
  }
  throw Error(ErrorKind::PerturbationFailed, "no bump within budget makes the tantrix thick enough");
}

}  // namespace prescurv
