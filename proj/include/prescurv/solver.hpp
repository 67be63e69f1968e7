#pragma once

#include "prescurv/types.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

namespace prescurv {

/// {x : |W (x - x0)| <= R}; W defaults to the identity (Euclidean ball).
struct BallSpec {
  Vec x0;
  double R = 0.0;
  Eigen::MatrixXd metric;  // W, m x n; empty for the identity

  double norm(const Vec& dx) const;
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double omega0 = 1.0;
  double R_min = 1e-5;
  bool throw_on_failure = true;
};

struct SolveReport {
  Vec x_star;
  double residual = 0.0;
  int iterations = 0;
  int evaluations = 0;
  std::vector<double> R_history;
  std::vector<std::string> condition_flags;
  std::string method;  // stage that produced x_star
  bool converged = false;
};

/// x -> ave(T~_x). May throw RTooLarge, NegativeCoefficient, OutsideBall or SpeedMarginViolated,
/// which make the solver shrink the ball.
using AverageMap = std::function<Vec(const Vec&)>;

/// Halves R and records the reason; throws RUnderflow below R_min.
BallSpec shrink_R(const BallSpec& ball, const std::string& reason, SolveReport& report,
                  double R_min = 1e-5);

/// Finds x in the ball with F(x) = target. Damped fixed-point iteration x <- x + w (target - F(x))
/// with backtracking, then finite-difference Newton with Broyden updates, then Nelder-Mead on
/// |F - target|^2; iterates are kept inside the ball. Throws NoConvergence (unless disabled)
/// when the residual stays above tol.
SolveReport solve_average_constraint(const AverageMap& F, BallSpec ball, const Vec& target,
                                     const SolveOptions& opt = {});

}  // namespace prescurv
