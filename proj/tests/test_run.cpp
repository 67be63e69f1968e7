#include "prescurv/run.hpp"

#include <gtest/gtest.h>

using namespace prescurv;

namespace {

RunConfig small_circle() {
  RunConfig cfg;
  cfg.preset = "circle";
  cfg.intervals = 512;
  cfg.kappa = "2";
  cfg.epsilon = 0.3;
  cfg.pinned = {0.5};
  return cfg;
}

}  // namespace

TEST(Run, KappaParsing) {
  EXPECT_EQ(parse_kappa("2.5").kind(), CurvatureSpec::Kind::Constant);
  EXPECT_DOUBLE_EQ(parse_kappa(" 3 ").constant_value(), 3.0);
  const CurvatureSpec e = parse_kappa("2 + sin(t)");
  EXPECT_EQ(e.kind(), CurvatureSpec::Kind::Expression);
  EXPECT_DOUBLE_EQ(e(0.0), 2.0);
}

TEST(Run, ValidationRejectsBadConfigs) {
  RunConfig cfg = small_circle();
  cfg.epsilon = 0.0;
  EXPECT_THROW(validate(cfg), Error);
  cfg = small_circle();
  cfg.knot = true;
  EXPECT_THROW(validate(cfg), Error);  // pinned points with knot mode
  cfg.pinned.clear();
  cfg.kappa = "1 + t";
  EXPECT_THROW(validate(cfg), Error);  // knot mode needs a constant
}

TEST(Run, SmallCirclePassesAndIsDeterministic) {
  const RunConfig cfg = small_circle();
  const RunOutcome a = run(cfg);
  ASSERT_FALSE(a.error) << a.message;
  EXPECT_TRUE(a.passed());
  EXPECT_EQ(exit_code(a), kExitOk);
  const nlohmann::json m = manifest(cfg, a);
  EXPECT_TRUE(m.at("passed").get<bool>());
  EXPECT_FALSE(m.at("result").at("segments").empty());
  EXPECT_EQ(manifest(cfg, run(cfg)).dump(), m.dump());
}

TEST(Run, FailureClassesMapToExitCodes) {
  RunConfig cfg = small_circle();
  cfg.kappa = "0.5";
  const RunOutcome low = run(cfg);
  ASSERT_TRUE(low.error);
  EXPECT_EQ(*low.error, ErrorKind::InfeasibleMargin);
  EXPECT_EQ(exit_code(low), kExitInfeasible);
  EXPECT_EQ(manifest(cfg, low).at("error").at("kind"), "InfeasibleMargin");

  cfg = small_circle();
  cfg.preset = "lemniscate";
  EXPECT_EQ(exit_code(run(cfg)), kExitUsage);

  cfg = small_circle();
  cfg.input_csv = "/nonexistent/curve.csv";
  EXPECT_EQ(exit_code(run(cfg)), kExitIo);
}

TEST(Run, ChecksFollowThresholds) {
  Metrics m;
  m.curvature_sup_rel = 0.02;
  RunConfig cfg;
  const auto checks = acceptance_checks(m, cfg, true);
  ASSERT_FALSE(checks.empty());
  EXPECT_EQ(checks[0].name, "curvature_sup_rel");
  EXPECT_FALSE(checks[0].passed);
  for (std::size_t i = 1; i < checks.size(); ++i) EXPECT_TRUE(checks[i].passed) << checks[i].name;
}
