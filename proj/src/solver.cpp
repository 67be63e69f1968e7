#include "prescurv/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace prescurv {

double BallSpec::norm(const Vec& dx) const {
  if (metric.size() == 0) return dx.norm();
  return (metric * Eigen::VectorXd(dx)).norm();
}

namespace {

bool shrinkable(ErrorKind k) {
  return k == ErrorKind::RTooLarge || k == ErrorKind::NegativeCoefficient ||
         k == ErrorKind::OutsideBall || k == ErrorKind::SpeedMarginViolated;
}

void flag(SolveReport& rep, const std::string& f) {
  if (std::find(rep.condition_flags.begin(), rep.condition_flags.end(), f) == rep.condition_flags.end())
    rep.condition_flags.push_back(f);
}

// Works in coordinates z with x = x0 + M z, in which the ball is the Euclidean ball |z| <= R.
class Search {
 public:
  Search(const AverageMap& F, BallSpec ball, const Vec& target, const SolveOptions& opt, SolveReport& rep)
      : F_(F), ball_(std::move(ball)), target_(target), opt_(opt), rep_(rep) {
    const int n = static_cast<int>(ball_.x0.size());
    if (ball_.metric.size() == 0) {
      M_ = Minv_ = Eigen::MatrixXd::Identity(n, n);
    } else {
      if (ball_.metric.cols() != n) throw Error(ErrorKind::DomainMismatch, "ball metric has the wrong width");
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(ball_.metric, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::VectorXd sv = svd.singularValues();
      if (sv.size() < n || !(sv[n - 1] > 1e-14 * sv[0])) throw Error(ErrorKind::InvalidArgument, "ball metric is singular");
      Minv_ = sv.asDiagonal() * svd.matrixV().transpose();
      M_ = svd.matrixV() * sv.cwiseInverse().asDiagonal();
    }
  }

  Vec to_x(const Vec& z) const { return ball_.x0 + Vec(M_ * Eigen::VectorXd(z)); }
  Vec to_z(const Vec& dx) const { return Vec(Minv_ * Eigen::VectorXd(dx)); }

  Vec project(const Vec& z) const {
    const double r = z.norm();
    const double lim = (1.0 - 1e-12) * ball_.R;
    return r <= lim ? z : Vec(z * (lim / r));
  }

  // Residual vector target - F(x(z)), shrinking the ball on recoverable failures.
  Vec residual(Vec& z) {
    for (;;) {
      z = project(z);
      const Vec x = to_x(z);
      try {
        ++rep_.evaluations;
        const Vec fx = F_(x);
        if (ball_.norm(fx - x) >= ball_.R) flag(rep_, "self_map_bound_exceeded");
        return target_ - fx;
      } catch (const Error& e) {
        if (!shrinkable(e.kind())) throw;
        ball_ = shrink_R(ball_, std::string(to_string(e.kind())), rep_, opt_.R_min);
      }
    }
  }

  bool done() const { return best_r_ <= opt_.tol || rep_.iterations >= opt_.max_iter; }

  void accept(const Vec& z, const Vec& res, const char* method) {
    best_z_ = z;
    best_res_ = res;
    best_r_ = res.norm();
    rep_.method = method;
  }

  void start() {
    Vec z = Vec::Zero(ball_.x0.size());
    const Vec res = residual(z);
    accept(z, res, "initial");
  }

  // x <- x + w (target - F(x)), with backtracking on w.
  void fixed_point() {
    double omega = opt_.omega0;
    int slow = 0;
    while (!done()) {
      bool ok = false;
      for (int bt = 0; bt < 10 && !ok; ++bt) {
        Vec z = best_z_ + omega * to_z(best_res_);
        const Vec res = residual(z);
        if (res.norm() < best_r_) {
          slow = (res.norm() > 0.5 * best_r_) ? slow + 1 : 0;
          accept(z, res, "fixed_point");
          ++rep_.iterations;
          ok = true;
          omega = std::min(opt_.omega0, 2.0 * omega);
        } else {
          omega *= 0.5;
        }
      }
      if (!ok || slow >= 3) {
        flag(rep_, ok ? "fixed_point_slow" : "fixed_point_stalled");
        return;
      }
    }
  }

  // dF/dz by forward differences of size 1e-4 R, pointing inwards near the boundary.
  Eigen::MatrixXd jacobian(const Vec& z, const Vec& res) {
    const int n = static_cast<int>(z.size());
    Eigen::MatrixXd J(n, n);
    const double h = 1e-4 * ball_.R;
    for (int i = 0; i < n; ++i) {
      Vec zp = z;
      zp[i] += h;
      if (zp.norm() >= (1.0 - 1e-12) * ball_.R) zp[i] = z[i] - h;
      Vec zq = zp;
      const Vec rp = residual(zq);
      // residual = target - F, so dF = -(rp - res).
      J.col(i) = -(rp - res).head(n) / (zq[i] - z[i]);
    }
    return J;
  }

  // Newton with Broyden updates; a fresh finite-difference Jacobian when a step fails.
  void newton() {
    if (done()) return;
    Eigen::MatrixXd J = jacobian(best_z_, best_res_);
    int fresh = 1;
    while (!done()) {
      const Eigen::VectorXd dz = J.fullPivLu().solve(Eigen::VectorXd(best_res_));
      bool ok = false;
      double t = 1.0;
      for (int bt = 0; bt < 12 && !ok; ++bt) {
        Vec z = best_z_ + t * Vec(dz);
        const Vec res = residual(z);
        if (res.norm() < best_r_) {
          const Eigen::VectorXd s = Eigen::VectorXd(z - best_z_);
          const Eigen::VectorXd y = -Eigen::VectorXd(res - best_res_);
          if (s.squaredNorm() > 0) J += (y - J * s) * s.transpose() / s.squaredNorm();
          accept(z, res, "newton");
          ++rep_.iterations;
          ok = true;
          fresh = 0;
        } else {
          t *= 0.5;
        }
      }
      if (!ok) {
        if (fresh) {
          flag(rep_, "newton_stalled");
          return;
        }
        J = jacobian(best_z_, best_res_);
        fresh = 1;
      }
    }
  }

  void nelder_mead() {
    if (done()) return;
    flag(rep_, "nelder_mead");
    const int n = static_cast<int>(best_z_.size());
    std::vector<Vec> pts;
    std::vector<double> val;
    auto eval = [&](Vec x) {
      const Vec res = residual(x);
      const double v = res.squaredNorm();
      if (std::sqrt(v) < best_r_) accept(x, res, "nelder_mead");
      return std::make_pair(x, v);
    };
    pts.push_back(best_z_);
    val.push_back(best_r_ * best_r_);
    const double step = std::min(10.0 * to_z(best_res_).norm(), 1e-2 * ball_.R);
    for (int i = 0; i < n; ++i) {
      Vec z = best_z_;
      z[i] += step;
      auto [px, v] = eval(z);
      pts.push_back(px);
      val.push_back(v);
    }
    while (!done()) {
      ++rep_.iterations;
      std::vector<int> idx(n + 1);
      for (int i = 0; i <= n; ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return val[a] < val[b]; });
      const int worst = idx[n], second = idx[n - 1], bestI = idx[0];
      Vec c = Vec::Zero(n);
      for (int i = 0; i < n; ++i) c += pts[idx[i]];
      c /= n;
      auto [xr, vr] = eval(c + (c - pts[worst]));
      if (vr < val[bestI]) {
        auto [xe, ve] = eval(c + 2.0 * (c - pts[worst]));
        if (ve < vr) pts[worst] = xe, val[worst] = ve;
        else pts[worst] = xr, val[worst] = vr;
      } else if (vr < val[second]) {
        pts[worst] = xr;
        val[worst] = vr;
      } else {
        auto [xc, vc] = eval(c + 0.5 * (pts[worst] - c));
        if (vc < val[worst]) {
          pts[worst] = xc;
          val[worst] = vc;
        } else {
          for (int i = 0; i <= n; ++i) {
            if (i == bestI) continue;
            auto [xs, vs] = eval(pts[bestI] + 0.5 * (pts[i] - pts[bestI]));
            pts[i] = xs;
            val[i] = vs;
          }
        }
      }
      double spread = 0.0;
      for (int i = 0; i <= n; ++i) spread = std::max(spread, (pts[i] - pts[bestI]).norm());
      if (spread < 1e-16 * ball_.R) break;
    }
  }

  void finish() {
    rep_.x_star = to_x(best_z_);
    rep_.residual = best_r_;
    rep_.converged = best_r_ <= opt_.tol;
  }

 private:
  const AverageMap& F_;
  BallSpec ball_;
  Vec target_;
  const SolveOptions& opt_;
  SolveReport& rep_;
  Eigen::MatrixXd M_, Minv_;
  Vec best_z_, best_res_;
  double best_r_ = 0.0;
};

}  // namespace

BallSpec shrink_R(const BallSpec& ball, const std::string& reason, SolveReport& report, double R_min) {
  BallSpec out = ball;
  out.R = 0.5 * ball.R;
  if (out.R < R_min) {
    std::ostringstream os;
    os << "ball radius " << out.R << " fell below " << R_min << " (" << reason << ")";
    throw Error(ErrorKind::RUnderflow, os.str());
  }
  if (report.R_history.empty()) report.R_history.push_back(ball.R);
  report.R_history.push_back(out.R);
  report.condition_flags.push_back("shrink:" + reason);
  return out;
}

SolveReport solve_average_constraint(const AverageMap& F, BallSpec ball, const Vec& target,
                                     const SolveOptions& opt) {
  if (!(ball.R > 0.0)) throw Error(ErrorKind::InvalidArgument, "ball radius must be positive");
  if (target.size() != ball.x0.size()) throw Error(ErrorKind::DomainMismatch, "target dimension mismatch");
  SolveReport rep;
  rep.R_history.push_back(ball.R);
  Search s(F, ball, target, opt, rep);
  s.start();
  s.fixed_point();
  s.newton();
  s.nelder_mead();
  s.finish();
  // Keep the history strictly decreasing: the first entry is the initial radius.
  rep.R_history.erase(std::unique(rep.R_history.begin(), rep.R_history.end()), rep.R_history.end());
  if (!rep.converged && opt.throw_on_failure) {
    std::ostringstream os;
    os << "residual " << rep.residual << " above tolerance " << opt.tol << " after " << rep.iterations
       << " iterations";
    throw Error(ErrorKind::NoConvergence, os.str());
  }
  return rep;
}

}  // namespace prescurv
