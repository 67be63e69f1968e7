#include "prescurv/spline.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>

namespace prescurv {

namespace {

constexpr int kMaxDegree = 9;

// Values of the degree-q cardinal B-splines that are nonzero on [i, i+1) at local u,
// indexed by r = j - (i - q).
void cardinal_basis(double u, int q, double* out) {
  out[0] = 1.0;
  std::array<double, kMaxDegree + 1> prev{};
  for (int deg = 1; deg <= q; ++deg) {
    for (int r = 0; r < deg; ++r) prev[r] = out[r];
    for (int r = 0; r <= deg; ++r) {
      double v = 0.0;
      if (r >= 1) v += (u + deg - r) * prev[r - 1];
      if (r <= deg - 1) v += (1.0 - u + r) * prev[r];
      out[r] = v / deg;
    }
  }
}

// Weights on the coefficient window c_{i-p..i} giving h^d times the d-th derivative.
void window_weights(double u, int p, int d, double* w) {
  std::array<double, kMaxDegree + 1> g{};
  cardinal_basis(u, p - d, g.data());
  int len = p - d + 1;
  for (int k = 0; k < d; ++k) {
    std::array<double, kMaxDegree + 1> next{};
    for (int r = 0; r <= len; ++r) {
      double v = 0.0;
      if (r >= 1) v += g[r - 1];
      if (r < len) v -= g[r];
      next[r] = v;
    }
    ++len;
    g = next;
  }
  for (int r = 0; r <= p; ++r) w[r] = g[r];
}

int effective_degree(int requested, int n_samples, bool periodic) {
  int p = std::max(1, std::min(requested, kMaxDegree));
  if (p % 2 == 0) --p;
  const int limit = periodic ? n_samples - 1 : n_samples - 1;
  while (p > 1 && p > limit) p -= 2;
  return std::max(1, p);
}

}  // namespace

std::vector<double> fd_weights(double x0, const std::vector<double>& nodes, int order) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

UniformSpline::UniformSpline(double a, double b, bool periodic, const Eigen::MatrixXd& samples,
                             int degree)
    : a_(a), b_(b), periodic_(periodic) {
  if (!(b > a)) throw Error(ErrorKind::InvalidArgument, "spline domain must satisfy b > a");
  const int ns = static_cast<int>(samples.rows());
  const int dim = static_cast<int>(samples.cols());
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::InvalidArgument, "unsupported dimension");
  if (periodic ? ns < 3 : ns < 2) throw Error(ErrorKind::InvalidArgument, "too few samples");
  intervals_ = periodic ? ns : ns - 1;
  h_ = (b - a) / intervals_;
  degree_ = effective_degree(degree, ns, periodic);
  half_ = (degree_ - 1) / 2;
  const int p = degree_;

  // Centered basis values (and derivatives) at integer offsets: index k = offset + half_.
  std::array<std::array<double, kMaxDegree + 3>, kMaxDegree + 1> centered{};
  for (int d = 0; d <= half_; ++d) {
    std::array<double, kMaxDegree + 1> w{};
    window_weights(0.0, p, d, w.data());
    // At a node, window r corresponds to coefficient offset r - p + (half_ + 1) relative to node.
    for (int r = 0; r <= p; ++r) {
      const int off = r - p + half_ + 1;  // coefficient index minus node index
      if (off >= -half_ - 1 && off <= half_ + 1) {
        const int k = off + half_ + 1;
        if (k >= 0 && k <= kMaxDegree + 2) centered[d][k] = w[r];
      }
    }
  }

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> trip;
  Eigen::MatrixXd rhs;
  int unknowns = 0;
  if (periodic) {
    unknowns = ns;
    rhs = samples;
    for (int i = 0; i < ns; ++i) {
      for (int off = -half_ - 1; off <= half_ + 1; ++off) {
        const double v = centered[0][off + half_ + 1];
        if (v == 0.0) continue;
        const int j = ((i + off) % ns + ns) % ns;
        trip.emplace_back(i, j, v);
      }
    }
  } else {
    unknowns = ns + 2 * half_;
    rhs = Eigen::MatrixXd::Zero(unknowns, dim);
    int row = 0;
    auto add_row = [&](int node, int d, const Eigen::RowVectorXd& value) {
      for (int off = -half_ - 1; off <= half_ + 1; ++off) {
        const double v = centered[d][off + half_ + 1];
        if (v == 0.0) continue;
        const int j = node + off + half_;
        if (j < 0 || j >= unknowns) continue;
        trip.emplace_back(row, j, v);
      }
      rhs.row(row) = value;
      ++row;
    };
    const int fd_pts = std::min(ns, 10);
    for (int d = 1; d <= half_; ++d) {
      std::vector<double> nodes(fd_pts);
      for (int q = 0; q < fd_pts; ++q) nodes[q] = q;
      const auto wl = fd_weights(0.0, nodes, d);
      Eigen::RowVectorXd left = Eigen::RowVectorXd::Zero(dim);
      Eigen::RowVectorXd right = Eigen::RowVectorXd::Zero(dim);
      for (int q = 0; q < fd_pts; ++q) {
        left += wl[q] * samples.row(q);
        // Mirror: derivative d at the right end flips sign with parity of d.
        right += ((d % 2) ? -1.0 : 1.0) * wl[q] * samples.row(ns - 1 - q);
      }
      add_row(0, d, left);
      add_row(ns - 1, d, right);
    }
    for (int i = 0; i < ns; ++i) add_row(i, 0, samples.row(i));
  }
  Eigen::SparseMatrix<double> A(unknowns, unknowns);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::InvalidArgument, "spline system is singular");
  coeffs_ = lu.solve(rhs);
}

void UniformSpline::locate(double t, int& i, double& u) const {
  const double xi = (t - a_) / h_;
  if (periodic_) {
    const double fl = std::floor(xi);
    i = static_cast<int>(fl);
    u = xi - fl;
    i = ((i % intervals_) + intervals_) % intervals_;
    return;
  }
  // Interval: knot-interval index in [0, intervals_-1], u may leave [0,1] for extrapolation.
  double fl = std::floor(xi);
  if (fl < 0) fl = 0;
  if (fl > intervals_ - 1) fl = intervals_ - 1;
  i = static_cast<int>(fl);
  u = xi - fl;
}

Vec UniformSpline::combine(int i, const double* weights) const {
  // Window c_{i'-p..i'} with i' = i + half_ + 1 in shifted coordinates; coefficient index
  // j (node-centered) lives at storage j + half_ for interval splines.
  const int p = degree_;
  Vec out = Vec::Zero(dim());
  for (int r = 0; r <= p; ++r) {
    const double w = weights[r];
    if (w == 0.0) continue;
    int j = i + half_ + 1 - p + r;  // node-centered coefficient index
    if (periodic_) {
      j = ((j % intervals_) + intervals_) % intervals_;
      out += w * coeffs_.row(j).transpose();
    } else {
      out += w * coeffs_.row(j + half_).transpose();
    }
  }
  return out;
}

Vec UniformSpline::eval(double t, int d) const {
  if (d > degree_) return Vec::Zero(dim());
  int i;
  double u;
  locate(t, i, u);
  std::array<double, kMaxDegree + 1> w{};
  window_weights(u, degree_, d, w.data());
  Vec out = combine(i, w.data());
  if (d > 0) out /= std::pow(h_, d);
  return out;
}

void UniformSpline::eval_upto(double t, int dmax, Vec* out) const {
  int i;
  double u;
  locate(t, i, u);
  double scale = 1.0;
  for (int d = 0; d <= dmax; ++d) {
    if (d > degree_) {
      out[d] = Vec::Zero(dim());
      continue;
    }
    std::array<double, kMaxDegree + 1> w{};
    window_weights(u, degree_, d, w.data());
    out[d] = combine(i, w.data()) * scale;
    scale /= h_;
  }
}

}  // namespace prescurv
