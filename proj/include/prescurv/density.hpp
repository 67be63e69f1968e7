#pragma once

#include "prescurv/curve.hpp"

#include <Eigen/Core>

#include <vector>

namespace prescurv {

/// Smooth partition of unity on [a, b] subordinate to k equal segments. Each theta_i is
/// one on the middle of its segment and crosses over to its neighbours through a
/// degree-9 smoothstep window of half-width delta (in units of the normalized parameter).
/// On circle domains the partition is periodic and every bump has the same shape.
class PartitionOfUnity {
 public:
  PartitionOfUnity() = default;
  PartitionOfUnity(Domain domain, int k, double window = 0.25);

  const Domain& domain() const { return domain_; }
  int k() const { return k_; }
  double delta() const { return delta_; }

  /// Normalized parameter u = (t - a) / (b - a).
  double normalize(double t) const { return (t - domain_.a) / domain_.length(); }

  double theta(int i, double u) const;
  /// int_0^u theta_i (normalized parameter).
  double theta_integral(int i, double u) const;
  /// Normalized window ends, sorted, interior only.
  const std::vector<double>& breakpoints() const { return breaks_; }
  /// Normalized support [lo, hi] of theta_i.
  std::pair<double, double> support(int i) const;

 private:
  double step_up(int j, double u) const;           // 0 -> 1 across junction j (1..k-1)
  double step_up_integral(int j, double u) const;  // int_0^u step_up
  double periodic_bump(double v) const;             // bump centred at 0, v in [-1/2, 1/2)
  double periodic_bump_integral(double v) const;    // int_{-1/2}^v
  double centred(int i, double u) const;            // u - centre_i wrapped to [-1/2, 1/2)

  Domain domain_;
  int k_ = 0;
  double delta_ = 0.0;
  std::vector<double> breaks_;
};

/// Smoothstep of order 4 on [0,1] (C^4 at both ends) and its antiderivative.
double smoothstep(double y);
double smoothstep_integral(double y);  // int_0^y, continued linearly past 1

/// Throws BadK when k <= ambient_dim.
PartitionOfUnity build_pou(Domain domain, int k, int ambient_dim);

/// p_i = k int_0^1 theta_i T du over the normalized domain of T.
Eigen::MatrixXd node_points(const SphericalCurve& T, const PartitionOfUnity& pou);

/// Nodes p_i (rows), centre x0 and the affine barycentric map c(x) = 1/k + G (x - x0).
struct DensityFamily {
  PartitionOfUnity pou;
  Eigen::MatrixXd nodes;     // k x n
  Vec x0;
  double R = 0.0;
  std::vector<int> subset;   // indices of n linearly independent nodes
  Eigen::MatrixXd gradient;  // k x n
};

/// Nodes, independent subset (column-pivoted QR) and coefficient gradients. R is left 0.
DensityFamily make_density_family(const SphericalCurve& T, int k);
/// Same from explicit nodes (one per row); k is the number of rows.
DensityFamily family_from_nodes(const Eigen::MatrixXd& nodes, const PartitionOfUnity& pou);

/// Largest R with every c_i > 0 on the closed ball: min_i (1/k) / |grad c_i|.
double positivity_radius(const DensityFamily& fam);

/// 0.9 * min(hull inradius about x0, positivity radius). lambda(x) is identically k for this
/// partition, so its bound never binds.
double initial_radius(const DensityFamily& fam, double hull_inradius);

/// Throws OutsideBall if |x - x0| > R, NegativeCoefficient if some c_i <= 0.
Eigen::VectorXd barycentric_coeffs(const DensityFamily& fam, const Vec& x);

/// rho_x(u) = lambda sum_i c_i theta_i(u) on the normalized parameter, with analytic mass.
class Density {
 public:
  Density() = default;
  Density(const PartitionOfUnity& pou, Eigen::VectorXd coeffs);

  const Eigen::VectorXd& coeffs() const { return c_; }
  double lambda() const { return lambda_; }
  double operator()(double u) const;
  /// int_0^u rho (normalized parameter); equals 1 at u = 1.
  double mass(double u) const;
  /// Inverse of mass: the reparametrization phi_x in normalized units.
  double inverse_mass(double m) const;

 private:
  PartitionOfUnity pou_;
  Eigen::VectorXd c_;
  double lambda_ = 1.0;
};

Density density(const DensityFamily& fam, const Vec& x);

struct Reparam {
  SphericalCurve Tbar;
  Diffeo phi;
  Density rho;
};

/// T o phi_x sampled on the grid of T. Throws RTooLarge when |lambda/k - 1| >= 1/2 or when
/// positivity fails inside the ball.
Reparam reparam_family(const SphericalCurve& T, const DensityFamily& fam, const Vec& x);

}  // namespace prescurv
