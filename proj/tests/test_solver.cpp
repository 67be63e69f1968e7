#include "prescurv/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace prescurv;

namespace {

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST(Solver, IdentitySolvesWithoutIterating) {
  const Vec x0 = v3(0.1, 0.2, 0.3);
  const auto rep = solve_average_constraint([](const Vec& x) { return x; }, {x0, 0.5}, x0, {1e-12});
  EXPECT_EQ(rep.iterations, 0);
  EXPECT_LE(rep.residual, 1e-12);
  EXPECT_EQ((rep.x_star - x0).norm(), 0.0);
}

TEST(Solver, TranslationIsOneStep) {
  const Vec x0 = v3(0.0, 0.0, 1.0), d = v3(0.01, -0.02, 0.005);
  const auto rep =
      solve_average_constraint([&](const Vec& x) { return Vec(x + d); }, {x0, 0.1}, x0, {1e-12});
  EXPECT_LE(rep.iterations, 3);
  EXPECT_LE(rep.residual, 1e-12);
  EXPECT_NEAR((rep.x_star - (x0 - d)).norm(), 0.0, 1e-14);
}

TEST(Solver, NonlinearContraction) {
  const Vec x0 = v3(0.3, -0.1, 0.5);
  auto F = [&](const Vec& x) {
    Vec y = x;
    for (int i = 0; i < 3; ++i) y[i] += 0.02 + 0.1 * std::sin(3 * x[i]);
    return y;
  };
  const auto rep = solve_average_constraint(F, {x0, 0.3}, x0, {1e-12});
  EXPECT_LE(rep.residual, 1e-12);
  EXPECT_NEAR((F(rep.x_star) - x0).norm(), 0.0, 1e-12);
}

TEST(Solver, RotatingMapNeedsNewton) {
  // F(x) = x0 + A (x - x0) + d with A far from the identity: plain fixed point diverges.
  const Vec x0 = v3(0.0, 0.0, 0.0), d = v3(0.01, 0.02, -0.01);
  Eigen::Matrix3d A;
  A << -1.5, 0.3, 0.0, -0.4, 2.0, 0.1, 0.0, 0.2, 0.7;
  auto F = [&](const Vec& x) {
    const Eigen::Vector3d y = A * Eigen::Vector3d(x[0], x[1], x[2]);
    return Vec(v3(y[0], y[1], y[2]) + d);
  };
  const auto rep = solve_average_constraint(F, {x0, 0.2}, x0, {1e-12});
  EXPECT_LE(rep.residual, 1e-12);
  EXPECT_EQ(rep.method, "newton");
}

TEST(Solver, StaysInBall) {
  const Vec x0 = v3(0, 0, 0), d = v3(0.05, 0, 0);
  double worst = 0.0;
  auto F = [&](const Vec& x) {
    worst = std::max(worst, x.norm());
    return Vec(x + d);
  };
  SolveOptions opt;
  opt.throw_on_failure = false;
  const auto rep = solve_average_constraint(F, {x0, 0.02}, x0, opt);
  EXPECT_FALSE(rep.converged);
  EXPECT_LE(worst, 0.02);
  EXPECT_THROW(solve_average_constraint(F, {x0, 0.02}, x0), Error);
}

TEST(Solver, ShrinksOnNegativeCoefficient) {
  // The first fixed-point step lands where F is undefined; the ball shrinks until it is not.
  const Vec x0 = v3(0, 0, 0), d = v3(0.05, 0, 0);
  auto F = [&](const Vec& x) {
    if (x.norm() > 0.03) throw Error(ErrorKind::NegativeCoefficient, "outside");
    return Vec(2.5 * x + d);
  };
  const auto rep = solve_average_constraint(F, {x0, 0.4}, x0, {1e-12});
  EXPECT_LE(rep.residual, 1e-12);
  ASSERT_GE(rep.R_history.size(), 2u);
  for (std::size_t i = 1; i < rep.R_history.size(); ++i) EXPECT_LT(rep.R_history[i], rep.R_history[i - 1]);
  EXPECT_LE(rep.R_history.back(), 0.03);
  EXPECT_NEAR(rep.x_star[0], -0.02, 1e-12);
}

TEST(ShrinkR, HalvesAndUnderflows) {
  SolveReport rep;
  BallSpec b{v3(0, 0, 0), 0.2};
  b = shrink_R(b, "test", rep);
  EXPECT_DOUBLE_EQ(b.R, 0.1);
  b = shrink_R(b, "test", rep);
  EXPECT_DOUBLE_EQ(b.R, 0.05);
  EXPECT_EQ(rep.R_history, (std::vector<double>{0.2, 0.1, 0.05}));
  BallSpec tiny{v3(0, 0, 0), 1.5e-5};
  try {
    shrink_R(tiny, "test", rep);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RUnderflow);
  }
}
