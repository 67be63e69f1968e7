#include "prescurv/calculus.hpp"
#include "prescurv/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace prescurv;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

ParamCurve unit_circle(int n = 256) {
  return ParamCurve::from_function(Domain::circle(0, 2 * kPi), n,
                                   [](double t) { return v3(std::cos(t), std::sin(t), 0); });
}

}  // namespace

TEST(C1Norm, Trivial) {
  EXPECT_NEAR(c1_norm(ParamCurve::from_function(Domain::interval(0, 1), 8, [](double) { return v3(2, 0, 0); })),
              2.0, 1e-12);
  EXPECT_NEAR(c1_norm(ParamCurve::from_function(Domain::interval(0, 1), 8, [](double t) { return v3(t, 0, 0); })),
              2.0, 1e-12);
  EXPECT_NEAR(c1_norm(unit_circle()), 2.0, 1e-9);
}

TEST(UnitSpeed, LinearScaling) {
  auto f = ParamCurve::from_function(Domain::interval(0, 1), 16, [](double t) { return v3(2 * t, 0, 0); });
  const UnitSpeed u = resample_unit_speed(f);
  EXPECT_NEAR(u.lambda, 0.5, 1e-14);
  for (int k = 0; k <= 10; ++k) {
    EXPECT_NEAR(u.phi(k / 10.0), k / 10.0, 1e-12);
    EXPECT_NEAR(u.g.eval(k / 10.0)[0], k / 10.0, 1e-12);
  }
}

TEST(UnitSpeed, AlreadyUnitSpeed) {
  const UnitSpeed u = resample_unit_speed(unit_circle());
  EXPECT_NEAR(u.lambda, 1.0, 1e-10);
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(u.phi(0.6 * k), 0.6 * k, 1e-9);
}

TEST(UnitSpeed, QuadraticPhase) {
  const double b = std::sqrt(2 * kPi);
  auto f = ParamCurve::from_function(Domain::interval(0, b), 2048,
                                     [](double t) { return v3(std::cos(t * t), std::sin(t * t), 0); });
  const UnitSpeed u = resample_unit_speed(f);
  // length is 2 pi, so lambda = b / (2 pi)
  EXPECT_NEAR(u.lambda, b / (2 * kPi), 1e-10);
  EXPECT_LT(speed_deviation(u.g), 1e-8);
}

TEST(Tantrix, CircleAndHelix) {
  const SphericalCurve T = tantrix(unit_circle());
  for (int k = 0; k < 10; ++k) {
    const double t = 0.6 * k;
    EXPECT_LT((T.eval(t) - v3(-std::sin(t), std::cos(t), 0)).norm(), 1e-9);
  }
  auto helix = ParamCurve::from_function(Domain::interval(0, 6), 512,
                                         [](double t) { return v3(std::cos(t), std::sin(t), t); });
  const SphericalCurve H = tantrix(helix);
  for (int k = 0; k <= 12; ++k) EXPECT_NEAR(H.eval(0.5 * k)[2], 1 / std::sqrt(2.0), 1e-9);
}

TEST(Curvature, Oracles) {
  auto circle_r = ParamCurve::from_function(Domain::circle(0, 2 * kPi), 256,
                                            [](double t) { return v3(3 * std::cos(t), 3 * std::sin(t), 0); });
  auto helix = ParamCurve::from_function(Domain::interval(0, 6), 512,
                                         [](double t) { return v3(std::cos(t), std::sin(t), t); });
  auto line = ParamCurve::from_function(Domain::interval(0, 1), 16, [](double t) { return v3(t, 2 * t, -t); });
  for (int k = 0; k <= 12; ++k) {
    const double t = 0.5 * k;
    EXPECT_NEAR(curvature_at(circle_r, t), 1.0 / 3.0, 1e-8);
    EXPECT_NEAR(curvature_at(helix, t), 0.5, 1e-7);
    EXPECT_NEAR(curvature_at(line, t / 6), 0.0, 1e-9);
  }
}

TEST(Average, Oracles) {
  EXPECT_LT(average(unit_circle()).norm(), 1e-14);
  auto half = ParamCurve::from_function(Domain::interval(0, kPi), 512,
                                        [](double t) { return v3(std::cos(t), std::sin(t), 0); });
  EXPECT_LT((average(half) - v3(0, 2 / kPi, 0)).norm(), 1e-12);
  auto c = ParamCurve::from_function(Domain::interval(0, 1), 4, [](double) { return v3(1, 2, 3); });
  EXPECT_LT((average(c) - v3(1, 2, 3)).norm(), 1e-14);
}

TEST(MassCm, Oracles) {
  auto f = ParamCurve::from_function(Domain::interval(0, 2), 512,
                                     [](double t) { return v3(t * t, std::sin(t), 0); });
  const MassCm inv = mass_and_cm(f, [&](double t) { return 1.0 / f.eval(t, 1).norm(); });
  EXPECT_NEAR(inv.mass, 2.0, 1e-12);
  EXPECT_LT((inv.cm - average(f)).norm(), 1e-12);

  // Arc of the unit circle on [0, pi] with rho(t) = t: mass pi^2/2, cm = int t(cos t, sin t)/mass.
  auto half = ParamCurve::from_function(Domain::interval(0, kPi), 512,
                                        [](double t) { return v3(std::cos(t), std::sin(t), 0); });
  const MassCm m = mass_and_cm(half, [](double t) { return t; });
  EXPECT_NEAR(m.mass, kPi * kPi / 2, 1e-10);
  EXPECT_LT((m.cm - v3(-2.0, kPi, 0) / (kPi * kPi / 2)).norm(), 1e-10);
  EXPECT_THROW(mass_and_cm(half, [](double t) { return t - 1; }), Error);
}

TEST(MassReparam, UnitSpeedIdentityAndCmIdentity) {
  const Diffeo id = mass_reparam(unit_circle(), [](double) { return 1.0; });
  EXPECT_NEAR(id.source().length(), 2 * kPi, 1e-10);
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(id(0.6 * k), 0.6 * k, 1e-9);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  const double a1 = U(rng), a2 = U(rng), a3 = U(rng);
  auto f = ParamCurve::from_function(Domain::interval(0, 1), 1024, [&](double t) {
    return v3(std::cos(3 * t + a1), t * t + a2 * t, std::sin(2 * t) * a3);
  });
  auto rho = [](double t) { return 1.5 + std::sin(5 * t); };
  const MassCm m = mass_and_cm(f, rho);
  const Diffeo phi = mass_reparam(f, rho);
  EXPECT_LT((m.cm - average(compose(f, phi))).norm(), 1e-9);
}

TEST(IntegrateTantrix, LineAndCircle) {
  auto T = SphericalCurve(ParamCurve::from_function(Domain::interval(0, 1), 16, [](double) { return v3(1, 0, 0); }));
  const ParamCurve line = integrate_tantrix(T, v3(0, 0, 0));
  for (int k = 0; k <= 8; ++k) EXPECT_NEAR(line.eval(k / 8.0)[0], k / 8.0, 1e-14);

  auto Tc = SphericalCurve(ParamCurve::from_function(Domain::circle(0, 2 * kPi), 512, [](double t) {
    return v3(-std::sin(t), std::cos(t), 0);
  }));
  const ParamCurve c = integrate_tantrix(Tc, v3(1, 0, 0));
  for (int k = 0; k < 10; ++k) EXPECT_LT((c.eval(0.6 * k) - v3(std::cos(0.6 * k), std::sin(0.6 * k), 0)).norm(), 1e-10);
}

TEST(IntegrateTantrix, CurvatureIsTantrixSpeed) {
  auto Tc = SphericalCurve(ParamCurve::from_function(Domain::interval(0, 2), 1024, [](double t) {
    return normalized(v3(1, std::sin(2 * t), 0.5 * std::cos(t * t)));
  }));
  const ParamCurve f = integrate_tantrix(Tc, v3(0, 0, 0));
  EXPECT_LT(speed_deviation(f), 1e-9);
  for (int k = 1; k < 20; ++k) {
    const double t = 0.1 * k;
    EXPECT_NEAR(curvature_at(f, t), Tc.speed(t), 1e-6);
  }
  // tantrix o integrate_tantrix = identity, error shrinking with the grid
  auto err = [&](int n) {
    auto T = SphericalCurve(ParamCurve::from_function(Domain::interval(0, 2), n, [](double t) {
      return normalized(v3(1, std::sin(2 * t), 0.5 * std::cos(t * t)));
    }));
    const SphericalCurve back = tantrix(integrate_tantrix(T, v3(0, 0, 0)));
    double e = 0;
    for (int k = 0; k <= 200; ++k) e = std::max(e, (back.eval(0.01 * k) - T.eval(0.01 * k)).norm());
    return e;
  };
  const double e1 = err(64), e2 = err(128);
  EXPECT_LT(e2, e1 / 8);
}

TEST(C1Distance, Oracles) {
  const ParamCurve c = unit_circle();
  EXPECT_EQ(c1_distance(c, c), 0.0);
  auto shifted = ParamCurve::from_function(Domain::circle(0, 2 * kPi), 256,
                                           [](double t) { return v3(std::cos(t) + 0.3, std::sin(t), -0.4); });
  EXPECT_NEAR(c1_distance(c, shifted), 0.5, 1e-12);
  auto other = ParamCurve::from_function(Domain::interval(0, 1), 8, [](double t) { return v3(t, 0, 0); });
  EXPECT_THROW(c1_distance(c, other), Error);
}

TEST(Io, CsvRoundTripAndClosure) {
  const ParamCurve c = unit_circle(32);
  std::stringstream ss;
  write_curve_csv(ss, c);
  const ParamCurve back = read_curve_csv(ss);
  EXPECT_TRUE(back.domain().periodic());
  EXPECT_EQ(back.samples(), c.samples());
  EXPECT_EQ(back.domain(), c.domain());
}

TEST(Io, CsvErrorsCarryLineNumbers) {
  std::stringstream ss("t,x1,x2,x3\n0,1,2,3\n0.5,1,oops,3\n1,1,2,3\n");
  try {
    read_curve_csv(ss);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Io, ObjPolyline) {
  Eigen::MatrixXd s(3, 3);
  s << 0, 0, 0, 1, 0, 0, 1, 1, 0;
  std::ostringstream os;
  write_obj(os, ParamCurve(Domain::interval(0, 1), s));
  EXPECT_EQ(os.str(), "v 0 0 0\nv 1 0 0\nv 1 1 0\nl 1 2 3\n");
  std::ostringstream oc;
  write_obj(oc, unit_circle(4));
  EXPECT_NE(oc.str().find("l 1 2 3 4 1\n"), std::string::npos);
}

TEST(Io, JsonRoundTripBitwise) {
  const ParamCurve c = ParamCurve::from_function(Domain::interval(0, 1), 20, [](double t) {
    return v3(std::exp(t) / 3, std::sin(t) * 1e-7, 1.0 / 3.0 + t);
  });
  const auto j = nlohmann::json::parse(curve_to_json(c).dump());
  const ParamCurve back = curve_from_json(j);
  EXPECT_EQ(back.samples(), c.samples());
  std::stringstream a, b;
  write_curve_csv(a, c);
  write_curve_csv(b, back);
  EXPECT_EQ(a.str(), b.str());
}
