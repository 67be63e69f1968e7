#include "prescurv/calculus.hpp"
#include "prescurv/pipeline.hpp"
#include "prescurv/presets.hpp"

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

ParamCurve circle(int n, double radius = 1.0) {
  return ParamCurve::from_function(Domain::circle(0, 2 * kPi * radius), n, [radius](double t) {
    return v3(radius * std::cos(t / radius), radius * std::sin(t / radius), 0);
  });
}

// Unit-speed helix with curvature 1/2 on [a, b].
ParamCurve helix(double a, double b, int n) {
  const double c = 1 / std::sqrt(2.0);
  return ParamCurve::from_function(Domain::interval(a, b), n, [c](double t) {
    return v3(c * std::cos(t), c * std::sin(t), c * t);
  });
}

Vec unit_tangent(const ParamCurve& f, double t) { return normalized(f.eval(t, 1)); }

Error expect_error(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no error thrown";
  return Error(ErrorKind::InvalidArgument, "");
}

}  // namespace

TEST(SegmentGlobal, CoversDomainWithExactPins) {
  const ParamCurve f = helix(0, 2 * kPi, 512);
  const double pin = 1.2345;
  const auto segs = segment_global(f, 0.1, {pin});
  ASSERT_GE(segs.size(), 2u);
  EXPECT_EQ(segs.front().t0, 0.0);
  EXPECT_EQ(segs.back().t1, 2 * kPi);
  bool pinned_end = false;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& s = segs[i];
    EXPECT_LT(s.t0, s.t1);
    EXPECT_LE(s.t1 - s.t0, 1.0 + 1e-12);
    if (i + 1 < segs.size()) EXPECT_EQ(s.t1, segs[i + 1].t0);
    if (s.t1 == pin) pinned_end = true;
    // Every end other than the pin is a grid node, and j0..j1 are the nodes inside.
    for (double t : {s.t0, s.t1}) {
      if (t == pin) continue;
      const double j = (t - f.domain().a) / f.step();
      EXPECT_NEAR(j, std::round(j), 1e-9);
    }
    EXPECT_GE(f.param(s.j0), s.t0 - 1e-12);
    EXPECT_LE(f.param(s.j1), s.t1 + 1e-12);
    EXPECT_LT(f.param(s.j0) - f.step(), s.t0);
    EXPECT_GT(f.param(s.j1) + f.step(), s.t1);
    // Tantrix of every segment within epsilon / 2 of its midpoint value.
    const Vec c = unit_tangent(f, 0.5 * (s.t0 + s.t1));
    for (int q = 0; q <= 20; ++q) EXPECT_LE((unit_tangent(f, s.t0 + (s.t1 - s.t0) * q / 20) - c).norm(), 0.05);
  }
  EXPECT_TRUE(pinned_end);
}

TEST(SegmentGlobal, CircleGetsTwoSegments) {
  const auto segs = segment_global(circle(64, 10.0), 10.0, {});
  EXPECT_GE(segs.size(), 2u);
  EXPECT_EQ(segs.front().t0, 0.0);
  EXPECT_NEAR(segs.back().t1, 20 * kPi, 1e-12);
}

TEST(SegmentGlobal, RejectsCoarseGrid) {
  // 8 intervals on a unit circle: each turns the tangent by 0.785 > epsilon / 2.
  EXPECT_EQ(expect_error([&] { segment_global(circle(8), 0.5, {}); }).kind(), ErrorKind::CannotSegment);
  EXPECT_NO_THROW(segment_global(circle(16), 1.0, {}));
}

TEST(SegmentGlobal, RejectsPinOutsideDomain) {
  const ParamCurve f = helix(0, 1, 64);
  EXPECT_EQ(expect_error([&] { segment_global(f, 0.1, {2.0}); }).kind(), ErrorKind::InvalidArgument);
}

TEST(SolveLocal, HelixSegmentMeetsItsEnds) {
  const ParamCurve f = helix(0, 2 * kPi, 1024);
  const auto segs = segment_global(f, 0.1, {});
  const Segment& seg = segs[segs.size() / 2];
  const CurvatureSpec kappa = CurvatureSpec::constant(2.0);
  const SegmentSolution sol = solve_local(f, seg, kappa, 0.1);
  EXPECT_LE(sol.solve.residual, 1e-10);
  EXPECT_LE(sol.endpoint_gap, 1e-8);
  EXPECT_LE(sol.speed_error, 1e-6);
  EXPECT_LE(sol.tantrix_deviation, 0.5 * 0.1 + 0.35 * 0.1 * 2);
  EXPECT_LT((sol.tangent_start - unit_tangent(f, seg.t0)).norm(), 1e-6);
  EXPECT_LT((sol.tangent_end - unit_tangent(f, seg.t1)).norm(), 1e-6);
  ASSERT_EQ(sol.samples.rows(), seg.j1 - seg.j0 + 1);
  if (f.param(seg.j0) == seg.t0) EXPECT_LT((sol.samples.row(0).transpose() - f.eval(seg.t0)).norm(), 1e-14);
  if (f.param(seg.j1) == seg.t1) EXPECT_LT((sol.samples.bottomRows(1).transpose() - f.eval(seg.t1)).norm(), 1e-12);
  // Consecutive samples h apart on a curve with unit speed target times 4 (kappa~ / kappa).
  const double h = f.step();
  for (int j = 0; j + 1 < sol.samples.rows(); ++j)
    EXPECT_LE((sol.samples.row(j + 1) - sol.samples.row(j)).norm(), 4 * h * (1 + 1e-6));
}

TEST(SolveLocal, RefinedSamplesContainCoarseOnes) {
  const ParamCurve f = helix(0, 2, 256);
  const auto segs = segment_global(f, 0.1, {});
  const CurvatureSpec kappa = CurvatureSpec::constant(1.5);
  const SegmentSolution a = solve_local(f, segs[0], kappa, 0.1, {}, 1);
  const SegmentSolution b = solve_local(f, segs[0], kappa, 0.1, {}, 2);
  EXPECT_EQ(b.out_j0, 2 * a.out_j0);
  EXPECT_EQ(b.out_j1, 2 * a.out_j1);
  for (int j = 0; j < a.samples.rows(); ++j)
    EXPECT_LT((a.samples.row(j) - b.samples.row(2 * j)).norm(), 1e-9);
}

TEST(SolveLocal, ShortTrefoilSegmentsConverge) {
  // Short arcs of the trefoil tantrix have hulls ~1e-4 thick; loops alone push the average out of
  // the ball across that axis, and the tilt of the loop sides has to bring it back.
  const UnitSpeed us = resample_unit_speed(preset_torus_knot(1024), 1024);
  double kmax = 0.0;
  for (double t : us.g.dense_params(4)) kmax = std::max(kmax, curvature_at(us.g, t));
  const double s = 2 * kmax;
  const ParamCurve f(Domain::circle(s * us.g.domain().a, s * us.g.domain().b), s * us.g.samples());
  const auto segs = segment_global(f, 0.5, {});
  for (int i : {2, 3, 10}) {
    const SegmentSolution sol = solve_local(f, segs[i], CurvatureSpec::constant(1.0), 0.5);
    EXPECT_TRUE(sol.solve.converged) << "segment " << i;
    EXPECT_LE(sol.solve.residual, 1e-10);
    EXPECT_LT(std::abs(sol.tilt), 0.7);
    EXPECT_LT((sol.samples.bottomRows(1).transpose() - f.eval(segs[i].t1)).norm(), 1e-9);
  }
}

TEST(Stitch, RejectsTangentJump) {
  const ParamCurve f = helix(0, 1, 4);
  SegmentSolution a, b;
  a.seg = Segment{0, 2, 0.0, 0.5};
  b.seg = Segment{2, 4, 0.5, 1.0};
  a.out_j0 = 0, a.out_j1 = 2, b.out_j0 = 2, b.out_j1 = 4;
  a.samples = f.samples().topRows(3);
  b.samples = f.samples().bottomRows(3);
  a.value_start = f.eval(0.0), a.value_end = f.eval(0.5);
  b.value_start = f.eval(0.5), b.value_end = f.eval(1.0);
  a.tangent_start = a.tangent_end = b.tangent_start = b.tangent_end = v3(1, 0, 0);
  StitchReport rep;
  const ParamCurve g = stitch({a, b}, f, &rep);
  EXPECT_EQ(rep.max_value_jump, 0.0);
  EXPECT_EQ((g.samples() - f.samples()).norm(), 0.0);
  b.tangent_start = v3(0, 1, 0);
  EXPECT_EQ(expect_error([&] { stitch({a, b}, f); }).kind(), ErrorKind::JunctionMismatch);
  b.tangent_start = a.tangent_end;
  b.samples(0, 0) += 1e-3;
  EXPECT_EQ(expect_error([&] { stitch({a, b}, f); }).kind(), ErrorKind::JunctionMismatch);
}

TEST(OutputRefinement, PowerOfTwoForLapsAndEnds) {
  PipelineOptions opt;
  opt.max_output_refine = 8;
  std::vector<SegmentSolution> parts(3);
  for (auto& p : parts) {
    p.lap_nodes = 20;
    p.lead_nodes_start = p.lead_nodes_end = 30;
  }
  const Domain open = Domain::interval(0, 1), closed = Domain::circle(0, 1);
  EXPECT_EQ(output_refinement(parts, open, opt), 1);
  parts[1].lap_nodes = 16;
  EXPECT_EQ(output_refinement(parts, open, opt), 1);
  parts[1].lap_nodes = 7;
  EXPECT_EQ(output_refinement(parts, open, opt), 4);
  parts[1].lap_nodes = 20;
  parts[0].lead_nodes_start = 5;
  EXPECT_EQ(output_refinement(parts, open, opt), 4);
  EXPECT_EQ(output_refinement(parts, closed, opt), 1);
  parts[1].lap_nodes = 2;
  EXPECT_EQ(output_refinement(parts, closed, opt), opt.max_output_refine);
  parts[1].lap_nodes = 1.9;
  EXPECT_EQ(expect_error([&] { output_refinement(parts, closed, opt); }).kind(), ErrorKind::CannotSegment);
  opt.output_refine = 3;
  EXPECT_EQ(output_refinement(parts, closed, opt), 3);
}

TEST(Prescribe, InfeasibleMargin) {
  ProblemSpec spec{circle(128), CurvatureSpec::constant(0.9), 0.1, {}};
  EXPECT_EQ(expect_error([&] { prescribe_curvature(spec); }).kind(), ErrorKind::InfeasibleMargin);
  spec.kappa = CurvatureSpec::expression("1.5 + sin(t)");
  EXPECT_EQ(expect_error([&] { prescribe_curvature(spec); }).kind(), ErrorKind::InfeasibleMargin);
}

TEST(Prescribe, NonUnitSpeedRoundTrip) {
  // Arc of the unit circle traversed at speed 2; target curvature 2 in the original parameter.
  const ParamCurve f = ParamCurve::from_function(Domain::interval(0, 1), 256, [](double t) {
    return v3(std::cos(2 * t), std::sin(2 * t), 0);
  });
  ProblemSpec spec{f, CurvatureSpec::constant(2.0), 0.6, {0.5}};
  const PrescribeResult r = prescribe_curvature(spec);
  EXPECT_TRUE(r.reduced);
  // Length 2 on a domain of length 1.
  EXPECT_NEAR(r.lambda, 0.5, 1e-9);
  EXPECT_LE(r.metrics.curvature_sup_rel, 0.01);
  EXPECT_LE(r.metrics.c1_distance, 0.6);
  EXPECT_LE(r.metrics.endpoint_residual, 1e-6);
  EXPECT_LE(r.metrics.pinned_value_residual, 1e-6);
  EXPECT_LE(r.metrics.pinned_tangent_residual, 1e-6);
  // Speed of the input is preserved (2 everywhere).
  for (double t : r.f_tilde.dense_params(2)) EXPECT_NEAR(r.f_tilde.eval(t, 1).norm(), 2.0, 1e-5);
}

TEST(Prescribe, UnresolvedLoopsAreReported) {
  const ParamCurve f = ParamCurve::from_function(Domain::interval(0, 1), 128, [](double t) {
    return v3(std::cos(2 * t), std::sin(2 * t), 0);
  });
  PipelineOptions opt;
  opt.max_output_refine = 2;
  ProblemSpec spec{f, CurvatureSpec::constant(2.0), 0.6, {}};
  EXPECT_EQ(expect_error([&] { prescribe_curvature(spec, opt); }).kind(), ErrorKind::CannotSegment);
}

TEST(MinSelfDistance, CircleChord) {
  const ParamCurve f = circle(720);
  const double window = 1.0;
  // Closest admissible pair: arclength separation just above the window.
  const double d = min_self_distance(f, window);
  EXPECT_GE(d, 2 * std::sin(window / 2) - 1e-12);
  EXPECT_LE(d, 2 * std::sin((window + f.step()) / 2) + 1e-12);
}

TEST(Homotopy, IdentityAndCollapse) {
  const ParamCurve f = circle(256);
  const IsotopyCertificate same = linear_homotopy_certificate(f, f, 1.0, 5);
  EXPECT_TRUE(same.passed);
  EXPECT_EQ(same.t_values.size(), 5u);
  EXPECT_NEAR(same.scale, 2.0, 1e-9);
  // Folding the circle onto a diameter makes h_1 hit itself.
  const ParamCurve g = ParamCurve::from_function(Domain::circle(0, 2 * kPi), 256,
                                                 [](double t) { return v3(std::cos(t), 0, 0); });
  EXPECT_FALSE(linear_homotopy_certificate(f, g, 1.0, 5).passed);
}
