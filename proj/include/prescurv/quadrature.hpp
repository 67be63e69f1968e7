#pragma once

#include <span>
#include <vector>

namespace prescurv {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached Gauss-Legendre rule with `order` points (1 <= order <= 64).
const GaussRule& gauss_legendre(int order);

/// Composite Gauss-Legendre over [a, b] split into `panels` equal pieces.
template <class F, class Acc>
void composite_gauss(F&& f, double a, double b, int panels, int order, Acc& acc) {
  const GaussRule& rule = gauss_legendre(order);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = mid + 0.5 * h * rule.nodes[q];
      acc(t, 0.5 * h * rule.weights[q], f(t));
    }
  }
}

/// Scalar composite Gauss-Legendre integral.
template <class F>
double integrate(F&& f, double a, double b, int panels = 1, int order = 8) {
  double sum = 0.0;
  auto acc = [&](double, double w, double v) { sum += w * v; };
  composite_gauss(f, a, b, panels, order, acc);
  return sum;
}

/// Integral over [a, b] with panels split at the sorted interior breakpoints.
template <class F>
double integrate_piecewise(F&& f, double a, double b, std::span<const double> breaks,
                           int order = 8) {
  double sum = 0.0;
  double lo = a;
  for (double c : breaks) {
    if (c <= lo || c >= b) continue;
    sum += integrate(f, lo, c, 1, order);
    lo = c;
  }
  sum += integrate(f, lo, b, 1, order);
  return sum;
}

}  // namespace prescurv
