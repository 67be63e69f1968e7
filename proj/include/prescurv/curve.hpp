#pragma once

#include "prescurv/spline.hpp"
#include "prescurv/types.hpp"

#include <Eigen/Core>

#include <functional>

namespace prescurv {

using ScalarFn = std::function<double(double)>;
using CurveFn = std::function<Vec(double)>;

struct Domain {
  enum class Kind { Interval, Circle };

  Kind kind = Kind::Interval;
  double a = 0.0;
  double b = 1.0;

  static Domain interval(double a, double b);
  static Domain circle(double a, double b);

  bool periodic() const { return kind == Kind::Circle; }
  double length() const { return b - a; }
  /// Maps t into [a, b) for circles; identity for intervals.
  double wrap(double t) const;
  bool operator==(const Domain&) const = default;
};

/// Uniform parameter grid of a domain: N intervals, N+1 (interval) or N (circle) nodes.
struct Grid {
  Domain domain;
  int intervals = 0;

  int nodes() const { return domain.periodic() ? intervals : intervals + 1; }
  double step() const { return domain.length() / intervals; }
  double param(int j) const { return domain.a + j * step(); }
};

/// Densely sampled curve with spline reconstruction.
class ParamCurve {
 public:
  ParamCurve() = default;
  /// `samples` holds one point per row at the grid nodes of `domain`.
  ParamCurve(Domain domain, Eigen::MatrixXd samples, int smoothness_order = 5);

  static ParamCurve from_function(Domain domain, int intervals, const CurveFn& f,
                                  int smoothness_order = 5);

  const Domain& domain() const { return domain_; }
  Grid grid() const { return Grid{domain_, spline_.intervals()}; }
  int node_count() const { return static_cast<int>(samples_.rows()); }
  int intervals() const { return spline_.intervals(); }
  int dim() const { return static_cast<int>(samples_.cols()); }
  int smoothness_order() const { return order_; }
  double step() const { return spline_.step(); }
  double param(int j) const { return domain_.a + j * spline_.step(); }
  Vec sample(int j) const { return samples_.row(j).transpose(); }
  const Eigen::MatrixXd& samples() const { return samples_; }

  Vec eval(double t, int d = 0) const { return spline_.eval(t, d); }
  void eval_upto(double t, int dmax, Vec* out) const { spline_.eval_upto(t, dmax, out); }

  /// Dense evaluation parameters: every node plus `sub - 1` points inside each interval.
  std::vector<double> dense_params(int sub = 4) const;

 private:
  Domain domain_;
  Eigen::MatrixXd samples_;
  int order_ = 5;
  UniformSpline spline_;
};

/// Curve on the unit sphere; reconstruction is renormalized on evaluation.
class SphericalCurve {
 public:
  static constexpr double kSphereTol = 1e-10;

  SphericalCurve() = default;
  /// Samples are renormalized; throws InvalidArgument if any is far from unit norm.
  explicit SphericalCurve(ParamCurve curve);

  const ParamCurve& curve() const { return curve_; }
  const Domain& domain() const { return curve_.domain(); }
  int dim() const { return curve_.dim(); }

  Vec eval(double t) const;
  /// Point and first two derivatives of the renormalized reconstruction.
  NormalizedDerivs eval_derivs(double t, int order = 2) const;
  double speed(double t) const { return eval_derivs(t, 1).dn.norm(); }

 private:
  ParamCurve curve_;
};

/// Monotone increasing map from `source` onto `target`, stored by samples on the source grid.
/// Circle diffeos store the periodic part phi(t) - t and have degree one.
class Diffeo {
 public:
  Diffeo() = default;
  Diffeo(Domain source, Domain target, Eigen::VectorXd values, int smoothness_order = 5);

  static Diffeo identity(Domain d, int intervals);

  const Domain& source() const { return source_; }
  const Domain& target() const { return target_; }
  double operator()(double t) const;
  double derivative(double t) const;
  /// Inverse by bracketed Newton iteration to 1e-12 in parameter.
  double inverse(double s) const;
  /// Node values phi(t_j) on the source grid.
  const Eigen::VectorXd& values() const { return values_; }
  int intervals() const { return spline_.intervals(); }
  /// Inverse map sampled on the target grid with the same resolution.
  Diffeo inverted() const;
  /// Minimum derivative over a dense sampling.
  double min_derivative() const;

 private:
  Domain source_, target_;
  Eigen::VectorXd values_;
  UniformSpline spline_;  // phi (interval) or phi - t scaled (circle)
  double slope_ = 1.0;    // circle: target length / source length
};

/// Curvature prescription on a domain.
class CurvatureSpec {
 public:
  enum class Kind { Constant, Expression, Samples };

  static CurvatureSpec constant(double value);
  static CurvatureSpec expression(std::string text);
  static CurvatureSpec samples(Domain domain, Eigen::VectorXd values);

  Kind kind() const { return kind_; }
  const std::string& text() const { return text_; }
  double constant_value() const { return value_; }
  double operator()(double t) const { return fn_(t); }
  /// Human-readable form, used in manifests.
  std::string describe() const;

 private:
  Kind kind_ = Kind::Constant;
  double value_ = 0.0;
  std::string text_;
  ScalarFn fn_;
};

}  // namespace prescurv
