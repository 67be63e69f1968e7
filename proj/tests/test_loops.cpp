#include "prescurv/loops.hpp"
#include "prescurv/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace prescurv;

namespace {

constexpr double kPi = std::numbers::pi;

// Circle of latitude at height z traversed `turns` times over [0, 1].
TantrixFn latitude(double z, double turns) {
  return [z, turns](double t) {
    const double r = std::sqrt(1 - z * z), w = 2 * kPi * turns;
    NormalizedDerivs d;
    d.n = Vec(3);
    d.dn = Vec(3);
    d.ddn = Vec(3);
    d.n << r * std::cos(w * t), r * std::sin(w * t), z;
    d.dn << -r * w * std::sin(w * t), r * w * std::cos(w * t), 0;
    d.ddn << -r * w * w * std::cos(w * t), -r * w * w * std::sin(w * t), 0;
    return d;
  };
}

// Brute-force integral of T~ over [0, 1] by pointwise evaluation.
Vec brute_integral(const TildeTantrix& tt, int panels) {
  Vec sum = Vec::Zero(3);
  for (const auto& p : tt.pieces()) {
    auto acc = [&](double, double w, const Vec& v) { sum += w * v; };
    composite_gauss([&](double u) { return tt.eval(u); }, p.u_a, p.u_b, panels, 10, acc);
  }
  return sum;
}

}  // namespace

TEST(BasePath, GreatCircleIsArclength) {
  const BasePath bp(latitude(0.0, 1.0 / kPi), 0.0, 1.0, 32);  // |T'| = 2
  EXPECT_NEAR(bp.length(), 2.0, 1e-13);
  EXPECT_NEAR(bp.s_of_tau(0.3), 0.6, 1e-12);
  EXPECT_NEAR(bp.tau_of_s(1.1), 0.55, 1e-12);
  for (double s : {0.0, 0.37, 1.2, 2.0}) {
    Vec g[3];
    bp.eval(s, 2, g);
    EXPECT_NEAR(g[0][0], std::cos(s), 1e-12);
    EXPECT_NEAR(g[0][1], std::sin(s), 1e-12);
    EXPECT_NEAR(g[1].norm(), 1.0, 1e-10);
    EXPECT_NEAR(g[2].norm(), 1.0, 1e-8);
  }
}

TEST(BasePath, LatitudeSpeedStaysUnit) {
  const BasePath bp(latitude(0.6, 0.3), 0.0, 1.0, 16);
  EXPECT_NEAR(bp.length(), 2 * kPi * 0.8 * 0.3, 1e-12);
  for (int j = 0; j <= 50; ++j) {
    Vec g[3];
    bp.eval(bp.length() * j / 50, 1, g);
    EXPECT_NEAR(g[1].norm(), 1.0, 1e-9);
    EXPECT_NEAR(g[0].norm(), 1.0, 1e-14);
  }
}

TEST(SpeedProfile, IntegralAndInverse) {
  const SpeedProfile v([](double u) { return 1 + u; });
  EXPECT_NEAR(v.total(), 1.5, 1e-14);
  EXPECT_NEAR(v.S(0.4), 0.48, 1e-14);
  EXPECT_NEAR(v.U(0.48), 0.4, 1e-13);
  const SpeedProfile c(2.0);
  EXPECT_DOUBLE_EQ(c.S(0.25), 0.5);
  EXPECT_DOUBLE_EQ(c.U(0.5), 0.25);
}

TEST(SegmentForLoops, FullGreatCircle) {
  const BasePath bp(latitude(0.0, 1.0), 0.0, 1.0, 64);
  const auto u = segment_for_loops(bp, 0.5);
  EXPECT_GE(static_cast<int>(u.size()) - 1, 13);
  for (std::size_t i = 1; i < u.size(); ++i) {
    const double len = bp.s_of_tau(u[i]) - bp.s_of_tau(u[i - 1]);
    EXPECT_LT(len, 0.5);
  }
  EXPECT_THROW(segment_for_loops(bp, 1e-3, 1, 100), Error);
}

TEST(LoopBudget, WorkedExample) {
  const SpeedProfile v(2.0);
  EXPECT_NEAR(loop_budget(v, 0.2, 0.5, 1.0, 1.3), 0.3, 1e-14);
  try {
    loop_budget(v, 0.2, 0.5, 1.0, 1.6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SpeedMarginViolated);
  }
}

TEST(BalanceBudgets, EqualBudgetsOnVaryingSpeed) {
  const BasePath bp(latitude(0.3, 0.5), 0.0, 1.0, 32);
  const SpeedProfile v([&](double u) { return 4.0 * bp.length() * (1.0 + 0.5 * u); }, 64);
  const std::vector<double> ub = balance_budgets(bp, v, 4);
  ASSERT_EQ(ub.size(), 5u);
  EXPECT_EQ(ub.front(), 0.0);
  EXPECT_EQ(ub.back(), 1.0);
  // The latitude path has constant speed, so s(u) = L u.
  const double L = bp.length();
  const double total = v.total() - L;
  for (int i = 0; i < 4; ++i) {
    EXPECT_LT(ub[i], ub[i + 1]);
    const double b = loop_budget(v, ub[i], ub[i + 1], L * ub[i], L * ub[i + 1]);
    EXPECT_NEAR(b, total / 4, 1e-9 * total);
  }
}

TEST(LoopFamily, SmallLoopLengthAndClosure) {
  const BasePath bp(latitude(0.3, 0.5), 0.0, 1.0, 32);
  const LoopFamily fam(&bp, 0.5 * bp.length(), 1, 0.05);
  const double r = fam.max_radius(0.5 * bp.length());
  EXPECT_NEAR(r, 0.45 * 0.05, 1e-15);
  // Small loops are close to the planar curve (r sin t, r (1 - cos t) exp(-a / sin(t / 2))),
  // whose length is measured here by a plain Riemann sum of finite differences.
  double planar = 0.0;
  const int M = 200000;
  auto b = [](double t) {
    const double h = std::sin(0.5 * t);
    return h > 0 ? (1 - std::cos(t)) * std::exp(-0.3 / h) : 0.0;
  };
  for (int i = 0; i < M; ++i) {
    const double t0 = 2 * kPi * i / M, t1 = 2 * kPi * (i + 1) / M;
    planar += std::hypot(std::sin(t1) - std::sin(t0), b(t1) - b(t0));
  }
  EXPECT_NEAR(fam.length(r) / (planar * r), 1.0, 0.01);
  EXPECT_NEAR(fam.length(r) / r, 2 * fam.length(0.5 * r) / r, 0.01 * fam.length(r) / r);
  EXPECT_LT(fam.max_distance(r), 0.05);
  Vec p0, d0, p1, d1;
  fam.eval(r, 0.0, p0, &d0);
  fam.eval(r, 2 * kPi, p1, &d1);
  EXPECT_NEAR((p0 - fam.q()).norm(), 0.0, 1e-14);
  EXPECT_NEAR((p1 - fam.q()).norm(), 0.0, 1e-12);
  EXPECT_NEAR((d0 / d0.norm() - fam.u()).norm(), 0.0, 1e-9);
  EXPECT_NEAR((d1 / d1.norm() - fam.u()).norm(), 0.0, 1e-9);
  const double target = 0.6 * fam.length(r);
  EXPECT_NEAR(fam.length(fam.radius_for_length(target, r)), target, 1e-12);
}

TEST(LoopFamily, SidesMirror) {
  const BasePath bp(latitude(0.0, 0.5), 0.0, 1.0, 32);
  const LoopFamily a(&bp, 1.0, 1, 0.1), b(&bp, 1.0, -1, 0.1);
  Vec pa, pb;
  a.eval(0.02, kPi, pa, nullptr);
  b.eval(0.02, kPi, pb, nullptr);
  EXPECT_NEAR(pa[2], -pb[2], 1e-14);
  EXPECT_NEAR(std::abs(pa[2]), 2 * 0.02 * std::exp(-0.3), 1e-3);
}

TEST(CompositeLoop, EqualLaps) {
  const BasePath bp(latitude(0.3, 0.5), 0.0, 1.0, 32);
  const LoopFamily fam(&bp, 0.5 * bp.length(), 1, 0.05);
  const double r = 0.02;
  const double len = fam.length(r);
  const CompositeLoop c = composite_loop(fam, 3, 3 * len, r);
  EXPECT_EQ(c.laps, 3);
  EXPECT_NEAR(c.radius, r, 1e-12);
  EXPECT_NEAR(c.laps * c.lap_length, 3 * len, 1e-12);
  const CompositeLoop half = composite_loop(fam, 2, len, r);
  EXPECT_NEAR(half.lap_length, 0.5 * len, 1e-12);
  EXPECT_LT(half.radius, r);
  try {
    composite_loop(fam, 1, 3 * len, r);
    FAIL() << "expected RTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RTooLarge);
  }
}

TEST(TildeTantrix, SpeedLengthAndEnds) {
  const BasePath bp(latitude(0.4, 0.2), 0.0, 1.0, 32);
  const double base_speed = bp.length();
  for (int variant = 0; variant < 2; ++variant) {
    const SpeedProfile v = variant == 0 ? SpeedProfile(2.0 * base_speed)
                                        : SpeedProfile([&](double u) { return base_speed * (1.8 + 0.5 * u * u); });
    std::vector<double> ub = {0.0, 0.25, 0.5, 0.75, 1.0};
    const LoopPlan plan = plan_loops(bp, v, ub, 0.1);
    std::vector<double> sb;
    for (double u : ub) sb.push_back(bp.s_of_tau(u));
    const TildeTantrix tt(&bp, &v, plan, sb);
    for (int i = 0; i < 4; ++i) {
      const auto& p = tt.pieces()[i];
      EXPECT_NEAR(tt.piece_length(i), v.S(p.u_b) - v.S(p.u_a), 1e-8);
      EXPECT_NEAR((tt.eval(p.u_b - 1e-9) - tt.eval(p.u_b + 1e-9)).norm(), 0.0, 1e-6);
    }
    ASSERT_EQ(tt.sites().size(), 2u);
    for (const auto& st : tt.sites()) {
      EXPECT_EQ(st.loop.laps, plan.laps);
      EXPECT_NEAR(st.loop.laps * st.loop.lap_length, st.loop.total, 1e-10);
      EXPECT_LE(st.loop.radius, 2 * plan.max_radius[&st - &tt.sites()[0]]);
    }
    EXPECT_LT(tt.speed_error(100), 1e-6);
    EXPECT_NEAR((tt.eval(0.0) - bp.eval(0.0)).norm(), 0.0, 1e-14);
    EXPECT_NEAR((tt.eval(1.0) - bp.eval(bp.length())).norm(), 0.0, 1e-10);
    const Vec fast = tt.integral();
    const Vec slow = brute_integral(tt, 64);
    EXPECT_NEAR((fast - slow).norm(), 0.0, 1e-10);
  }
}

TEST(TildeTantrix, StaysNearBase) {
  const BasePath bp(latitude(0.2, 0.25), 0.0, 1.0, 32);
  const SpeedProfile v(3.0 * bp.length());
  const auto ub = segment_for_loops(bp, 0.2, 4);
  const double cap = 0.05;
  const LoopPlan plan = plan_loops(bp, v, ub, cap);
  std::vector<double> sb;
  for (double u : ub) sb.push_back(bp.s_of_tau(u));
  const TildeTantrix tt(&bp, &v, plan, sb);
  double worst = 0.0;
  for (int j = 0; j <= 2000; ++j) {
    const double u = j / 2000.0;
    worst = std::max(worst, (tt.eval(u) - bp.eval(bp.s_of_tau(u))).norm());
  }
  EXPECT_LT(worst, 0.2 + cap);
}
