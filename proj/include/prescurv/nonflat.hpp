#pragma once

#include "prescurv/curve.hpp"

#include <vector>

namespace prescurv {

struct HullReport {
  double thickness = 0.0;            // radius of a ball about x0 inside the hull of the samples
  std::vector<int> witness_simplex;  // n + 1 sample indices whose simplex contains x0
};

/// Certified lower bound for the inradius about x0 of the hull of `points` (one per row).
HullReport hull_thickness(const Eigen::MatrixXd& points, const Vec& x0);

/// Same, for up to `max_samples` equally spaced samples of T.
HullReport hull_thickness(const SphericalCurve& T, const Vec& x0, int max_samples = 720);

struct NonflatResult {
  ParamCurve curve;
  double thickness = 0.0;
  double amplitude = 0.0;     // bump amplitude used (0 when unchanged)
  double c2_distance = 0.0;   // consumed budget
  bool perturbed = false;
};

/// Returns f unchanged when its tantrix is already thicker than flat_tol; otherwise adds an
/// interior bump (length preserving, then arclength resampling) with growing amplitude.
/// Throws PerturbationFailed when the budget is exhausted first.
NonflatResult ensure_nonflat(const ParamCurve& f, double budget, double flat_tol = 1e-4);

/// sup|f-g| + sup|f'-g'| + sup|f''-g''|.
double c2_distance(const ParamCurve& f, const ParamCurve& g);

}  // namespace prescurv
