#include "prescurv/calculus.hpp"
#include "prescurv/nonflat.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace prescurv;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

ParamCurve trefoil(int n = 1024) {
  return ParamCurve::from_function(Domain::circle(0, 2 * kPi), n, [](double t) {
    return v3((2 + std::cos(3 * t)) * std::cos(2 * t), (2 + std::cos(3 * t)) * std::sin(2 * t), std::sin(3 * t));
  });
}

}  // namespace

TEST(HullThickness, GreatCircleIsFlat) {
  auto c = ParamCurve::from_function(Domain::circle(0, 2 * kPi), 256,
                                     [](double t) { return v3(std::cos(t), std::sin(t), 0); });
  const SphericalCurve T = tantrix(c);
  const HullReport r = hull_thickness(T, average(T.curve()));
  EXPECT_LT(r.thickness, 1e-12);
  EXPECT_TRUE(r.witness_simplex.empty());
}

TEST(HullThickness, TorusKnotTantrixIsThick) {
  const SphericalCurve T = tantrix(trefoil());
  const HullReport r = hull_thickness(T, average(T.curve()));
  EXPECT_GT(r.thickness, 0.1);
  EXPECT_EQ(r.witness_simplex.size(), 4u);
}

TEST(HullThickness, SimplexInradiusAboutOrigin) {
  Eigen::MatrixXd p(4, 3);
  p << 1, 0, 0, 0, 1, 0, 0, 0, 1, -1, -1, -1;
  const HullReport r = hull_thickness(p, Vec::Zero(3));
  // facet e1,e2,e3 is at 1/sqrt(3); facets through (-1,-1,-1) are at 1/sqrt(11)
  EXPECT_NEAR(r.thickness, 1 / std::sqrt(11.0), 1e-14);
  EXPECT_EQ(r.witness_simplex.size(), 4u);
}

TEST(HullThickness, PointOutsideHullGivesZero) {
  Eigen::MatrixXd p(4, 3);
  p << 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1;
  EXPECT_EQ(hull_thickness(p, Vec::Zero(3)).thickness, 0.0);
}

TEST(HullThickness, FourDimensionalSimplex) {
  Eigen::MatrixXd p(5, 4);
  p.setZero();
  for (int i = 0; i < 4; ++i) p(i, i) = 1;
  p.row(4).setConstant(-1);
  const HullReport r = hull_thickness(p, Vec::Zero(4));
  // facet e1..e4 lies at 1/2; facets through (-1,-1,-1,-1) have normal (1,1,1,-4) and lie at 1/sqrt(19)
  EXPECT_NEAR(r.thickness, 1 / std::sqrt(19.0), 1e-14);
  EXPECT_EQ(r.witness_simplex.size(), 5u);
}

TEST(HullThickness, ThinCloudScalesWithExcursion) {
  // Thin planar arc with small out-of-plane excursions; thickness scales with the excursion.
  auto cloud = [](double h) {
    Eigen::MatrixXd p(400, 3);
    for (int i = 0; i < 400; ++i) {
      const double t = 2.0 * i / 399;
      p.row(i) << std::cos(t), std::sin(t), h * std::sin(kPi * t) * std::exp(-4 * (t - 1) * (t - 1));
    }
    return p;
  };
  Vec x0 = v3(std::sin(2.0) / 2, (1 - std::cos(2.0)) / 2, 0);
  const double a = hull_thickness(cloud(1e-7), x0).thickness;
  const double b = hull_thickness(cloud(1e-4), x0).thickness;
  EXPECT_GT(a, 0.0);
  EXPECT_NEAR(b / a, 1000.0, 1e-3);
}

TEST(EnsureNonflat, AlreadyThickUnchanged) {
  const ParamCurve f = resample_unit_speed(trefoil()).g;
  const NonflatResult r = ensure_nonflat(f, 1e-2);
  EXPECT_FALSE(r.perturbed);
  EXPECT_EQ(r.curve.samples(), f.samples());
}

TEST(EnsureNonflat, PlanarCircleGetsBump) {
  auto c = ParamCurve::from_function(Domain::circle(0, 2 * kPi), 1024,
                                     [](double t) { return v3(std::cos(t), std::sin(t), 0); });
  const NonflatResult r = ensure_nonflat(c, 1e-2);
  EXPECT_TRUE(r.perturbed);
  EXPECT_GT(r.thickness, 1e-4);
  EXPECT_LE(c2_distance(r.curve, c), 1e-2);
  EXPECT_LT(speed_deviation(r.curve), 1e-6);
}

TEST(EnsureNonflat, PlanarArcKeepsEnds) {
  auto c = ParamCurve::from_function(Domain::interval(0, 2), 512,
                                     [](double t) { return v3(std::cos(t), std::sin(t), 0); });
  const NonflatResult r = ensure_nonflat(c, 1e-2, 1e-6);
  EXPECT_TRUE(r.perturbed);
  for (double t : {0.0, 2.0}) {
    EXPECT_LT((r.curve.eval(t) - c.eval(t)).norm(), 1e-9);
    EXPECT_LT((r.curve.eval(t, 1) - c.eval(t, 1)).norm(), 1e-6);
  }
  EXPECT_LT(speed_deviation(r.curve), 1e-6);
}

TEST(EnsureNonflat, ZeroBudgetFails) {
  auto c = ParamCurve::from_function(Domain::circle(0, 2 * kPi), 256,
                                     [](double t) { return v3(std::cos(t), std::sin(t), 0); });
  try {
    ensure_nonflat(c, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PerturbationFailed);
  }
}

TEST(EnsureNonflat, LargerBudgetNeverThinner) {
  auto c = ParamCurve::from_function(Domain::circle(0, 2 * kPi), 512,
                                     [](double t) { return v3(std::cos(t), std::sin(t), 0); });
  double prev = 0;
  for (double b : {3e-3, 1e-2, 3e-2}) {
    const double th = ensure_nonflat(c, b).thickness;
    EXPECT_GE(th, prev);
    prev = th;
  }
}
