#pragma once

#include "prescurv/curve.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace prescurv {

/// T, T', T'' of a unit tangent field at a parameter.
using TantrixFn = std::function<NormalizedDerivs(double)>;

/// Tantrix of a curve from its spline derivatives.
TantrixFn tantrix_of(const ParamCurve& f);
TantrixFn tantrix_of(const SphericalCurve& T);

/// Arclength parametrization gamma(s) = T(tau(s)) of the image of T over [tau0, tau1].
/// tau(s) is a quintic Hermite interpolant of the exact inverse; gamma is a quintic Hermite
/// interpolant in s of T(tau(s)) at the nodes, renormalized onto the sphere.
class BasePath {
 public:
  BasePath() = default;
  BasePath(TantrixFn T, double tau0, double tau1, int panels = 64);

  double length() const { return s_.back(); }
  double tau0() const { return tau_.front(); }
  double tau1() const { return tau_.back(); }
  /// Arclength of T over [tau0, tau].
  double s_of_tau(double tau) const;
  double tau_of_s(double s) const;
  Vec eval(double s) const;
  /// gamma(s) and its first `order` derivatives (order <= 2).
  void eval(double s, int order, Vec* out) const;
  const TantrixFn& tantrix() const { return T_; }

 private:
  TantrixFn T_;
  std::vector<double> tau_, s_;        // nodes
  std::vector<double> ds_, dds_;       // s'(tau), s''(tau)
  std::vector<double> dtau_, ddtau_;   // tau'(s), tau''(s)
  std::vector<Vec> g0_, g1_, g2_;      // gamma, gamma', gamma'' at the nodes
};

/// Target speed v(u) on the normalized parameter u in [0, 1], its integral S and inverse.
/// S and its inverse use a degree 9 interpolant of v on each panel.
class SpeedProfile {
 public:
  SpeedProfile() = default;
  /// Constant speed.
  explicit SpeedProfile(double v);
  SpeedProfile(std::function<double(double)> v, int panels = 64);

  double v(double u) const { return constant_ ? c_ : fn_(u); }
  double S(double u) const;
  double total() const { return S_.empty() ? c_ : S_.back(); }
  /// Inverse of S.
  double U(double sigma) const;
  bool constant() const { return constant_; }

 private:
  bool constant_ = true;
  double c_ = 1.0;
  double table_v(int panel, double x) const;
  double table_S(int panel, double x) const;

  std::function<double(double)> fn_;
  std::vector<double> S_;
  std::vector<double> coef_;  // Legendre coefficients of v per panel
  int panels_ = 0;
};

/// Split [0, 1] (normalized T parameter) into pieces of equal T-arclength, each shorter than
/// max_len and at least min_pieces of them. Throws CannotSegment if more than max_pieces
/// would be needed.
std::vector<double> segment_for_loops(const BasePath& path, double max_len, int min_pieces = 1,
                                      int max_pieces = 100000);

/// Breakpoints u_0 = 0 < ... < u_P = 1 that give every piece the same loop budget.
std::vector<double> balance_budgets(const BasePath& path, const SpeedProfile& v, int pieces);

/// int_{I_i} v - (s_b - s_a); throws SpeedMarginViolated if not positive.
double loop_budget(const SpeedProfile& v, double u_a, double u_b, double s_a, double s_b);

/// Loops based at q = gamma(s_m), following the base path as they leave and rejoin it:
///   C(theta) = normalize(gamma(s_m + r sin(theta)) + r (1 - cos(theta)) S(theta) nu),
///   S(theta) = exp(-a / sin(theta / 2)),
/// with nu the unit normal to q and gamma'(s_m) on the chosen side, scaled by `lean`. S is flat at theta = 0, so
/// loops join the base path smoothly to all orders while their curvature stays close to that
/// of a round loop of the same length.
class LoopFamily {
 public:
  static constexpr double kFlat = 0.3;  // a above

  LoopFamily() = default;
  LoopFamily(const BasePath* path, double s_m, int side, double cap_radius, double lean = 1.0);

  const Vec& q() const { return q_; }
  const Vec& u() const { return u_; }
  const Vec& nu() const { return nu_; }
  double cap_radius() const { return cap_; }
  /// Largest admissible radius: loops stay within the cap and the base path window.
  double max_radius(double half_window) const;

  /// Point and theta-derivative of the loop of radius r.
  void eval(double r, double theta, Vec& point, Vec* dpoint) const;
  /// Arclength of the loop of radius r.
  double length(double r) const;
  /// Radius whose loop has the requested length (0 < len <= length(r_max)).
  double radius_for_length(double len, double r_max) const;
  /// Max geodesic distance from q over a sampling of the loop of radius r.
  double max_distance(double r) const;
  /// Arclength at the ends of panels().
  std::vector<double> cumulative(double r) const;
  /// Loop angle at arclength mu, given cumulative(r).
  double theta_at(double r, const std::vector<double>& cum, double mu) const;
  Vec at_length(double r, const std::vector<double>& cum, double mu) const;

  /// Panel ends in theta used for loop quadrature.
  static const std::vector<double>& panels();

 private:
  const BasePath* path_ = nullptr;
  double s_m_ = 0.0;
  Vec q_, u_, nu_;
  double cap_ = 0.0;
  double lean_ = 1.0;
};

/// Composite loop at one site: `laps` equal laps of one radius, total length L.
struct CompositeLoop {
  double total = 0.0;
  int laps = 0;
  double radius = 0.0;
  double lap_length = 0.0;
  std::vector<double> cum;  // lap arclength at the theta panel ends
};

/// Throws RTooLarge when a lap would need more than twice r_bound.
CompositeLoop composite_loop(const LoopFamily& fam, int laps, double L, double r_bound);

/// Layout of the Part II path, fixed across x. Pieces 2j and 2j+1 share one loop site at their
/// common breakpoint; with an odd count the last piece has its own site at its midpoint.
struct LoopPlan {
  std::vector<double> u_breaks;      // P + 1 normalized parameters, 0 ... 1
  int laps = 1;                      // laps per site
  std::vector<double> max_radius;    // per site
  std::vector<int> side;             // per site, +1 or -1
  double cap_radius = 0.0;
  /// Loops on the +1 side bulge by exp(tilt) and on the -1 side by exp(-tilt), which moves the
  /// average of the path across the base path.
  double tilt = 0.0;

  double lean(int site) const { return std::exp(side[site] * tilt); }

  int pieces() const { return static_cast<int>(u_breaks.size()) - 1; }
  int sites() const { return (pieces() + 1) / 2; }
};

/// Loop site position for the given piece-end arclengths.
double site_position(const std::vector<double>& s_breaks, int site);
/// Arclength window around a site available to the loop blends.
double site_window(const std::vector<double>& s_breaks, int site);

/// Plan at the base layout (s_i = arclength at u_i): every site runs the same number of laps,
/// the least that keeps each lap within 3/4 of the largest admissible loop. As x moves the lap
/// radius follows the budget, so the path depends continuously on x.
LoopPlan plan_loops(const BasePath& path, const SpeedProfile& v, std::vector<double> u_breaks,
                    double cap_radius);

/// Unit-norm path with speed v on [0, 1]. On each piece it runs the base path between its
/// breakpoints and its share of the composite loop at its site: the first piece of a pair ends
/// with the first part of the loop, the second starts with the rest.
class TildeTantrix {
 public:
  struct Site {
    LoopFamily family;
    CompositeLoop loop;
    double s = 0.0;
  };
  struct Piece {
    double u_a, u_b;     // normalized parameter range
    double s_a, s_b;     // base path arclength range
    double sigma_a;      // S(u_a)
    double budget;       // loop length run inside this piece
    int site;
    double pre, post;    // base path length before / after the loop part
    double loop_start;   // offset into the site's composite loop
  };

  /// s_breaks: base path arclength at the piece ends (P + 1 values).
  TildeTantrix(const BasePath* path, const SpeedProfile* v, const LoopPlan& plan,
               const std::vector<double>& s_breaks);

  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::vector<Site>& sites() const { return sites_; }
  Vec eval(double u) const;
  /// int_0^1 T~ du.
  Vec integral() const;
  /// Arclength of T~ over piece i measured by quadrature.
  double piece_length(int i) const;
  /// Max over samples of | |T~'(u)| - v(u) | / v(u), by a five-point difference.
  double speed_error(int samples_per_piece = 200) const;
  /// Smallest loop period in u, a resolution scale for samplers.
  double min_loop_period() const;

 private:
  Vec path_point(const Piece& p, double lambda) const;
  Vec site_point(const Site& st, double mu) const;
  Vec integrate_site(const Site& st, double mu0, double mu1, double sigma0) const;
  Vec integrate_base(double s0, double s1, double sigma0) const;

  const BasePath* path_;
  const SpeedProfile* v_;
  std::vector<Site> sites_;
  std::vector<Piece> pieces_;
};

}  // namespace prescurv
