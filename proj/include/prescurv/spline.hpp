#pragma once

#include "prescurv/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace prescurv {

/// Vector-valued interpolating B-spline of odd degree on a uniform grid.
///
/// Periodic splines take N samples at a + j h (h = (b - a) / N). Interval
/// splines take N + 1 samples including both endpoints and close the system
/// with end derivatives up to order (degree - 1) / 2, estimated by one-sided
/// finite differences of order eight.
class UniformSpline {
 public:
  UniformSpline() = default;
  UniformSpline(double a, double b, bool periodic, const Eigen::MatrixXd& samples, int degree);

  int dim() const { return static_cast<int>(coeffs_.cols()); }
  int degree() const { return degree_; }
  int intervals() const { return intervals_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double step() const { return h_; }
  bool periodic() const { return periodic_; }

  /// d-th derivative at t (d <= degree). Interval splines extrapolate the end pieces.
  Vec eval(double t, int d = 0) const;

  /// Derivatives 0..dmax at t written to out[0..dmax].
  void eval_upto(double t, int dmax, Vec* out) const;

 private:
  void locate(double t, int& i, double& u) const;
  Vec combine(int i, const double* weights) const;

  double a_ = 0.0, b_ = 1.0, h_ = 1.0;
  bool periodic_ = false;
  int degree_ = 1;
  int half_ = 0;  // (degree - 1) / 2
  int intervals_ = 0;
  Eigen::MatrixXd coeffs_;
};

/// Finite-difference weights (Fornberg) for derivative `order` at `x0` from `nodes`.
std::vector<double> fd_weights(double x0, const std::vector<double>& nodes, int order);

}  // namespace prescurv
