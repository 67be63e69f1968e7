#include "prescurv/run.hpp"

#include "prescurv/io.hpp"
#include "prescurv/presets.hpp"

#include <cmath>
#include <sstream>

namespace prescurv {

namespace {

bool parse_number(const std::string& text, double& out) {
  std::istringstream is(text);
  is >> out;
  return !is.fail() && (is >> std::ws).eof();
}

}  // namespace

CurvatureSpec parse_kappa(const std::string& text) {
  double c = 0.0;
  if (parse_number(text, c)) return CurvatureSpec::constant(c);
  return CurvatureSpec::expression(text);
}

void validate(const RunConfig& cfg) {
  if (cfg.input_csv.empty() && cfg.preset.empty())
    throw Error(ErrorKind::InvalidArgument, "need a preset or an input CSV");
  if (cfg.intervals < 16) throw Error(ErrorKind::InvalidArgument, "grid size must be at least 16");
  if (!(cfg.epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  if (!(cfg.curvature_tol > 0.0) || !(cfg.speed_tol > 0.0) || !(cfg.tangency_tol > 0.0))
    throw Error(ErrorKind::InvalidArgument, "tolerances must be positive");
  if (cfg.knot && !(cfg.knot_margin > 1.0)) throw Error(ErrorKind::InvalidArgument, "knot margin must exceed 1");
  if (cfg.knot && !cfg.pinned.empty())
    throw Error(ErrorKind::InvalidArgument, "knot mode rescales the curve; pinned points are not supported");
  const CurvatureSpec k = parse_kappa(cfg.kappa);
  if (cfg.knot && k.kind() != CurvatureSpec::Kind::Constant)
    throw Error(ErrorKind::InvalidArgument, "knot mode needs a constant curvature");
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  const PipelineOptions& o = cfg.options;
  nlohmann::json input;
  if (cfg.input_csv.empty()) input = {{"preset", cfg.preset}, {"params", cfg.params}, {"seed", cfg.seed}};
  else input = {{"csv", cfg.input_csv}};
  return {{"input", input},
          {"intervals", cfg.intervals},
          {"kappa", cfg.kappa},
          {"epsilon", cfg.epsilon},
          {"pinned", cfg.pinned},
          {"knot", cfg.knot},
          {"knot_margin", cfg.knot_margin},
          {"options",
           {{"k", o.k},
            {"solver_tol", o.solver_tol},
            {"max_iter", o.max_iter},
            {"R_min", o.R_min},
            {"flat_tol", o.flat_tol},
            {"min_pieces", o.min_pieces},
            {"loop_cap_fraction", o.loop_cap_fraction},
            {"output_refine", o.output_refine},
            {"max_output_refine", o.max_output_refine}}},
          {"thresholds",
           {{"curvature", cfg.curvature_tol},
            {"speed", cfg.speed_tol},
            {"tangency", cfg.tangency_tol},
            {"embed_fraction", cfg.embed_fraction}}}};
}

ParamCurve load_input(const RunConfig& cfg) {
  if (!cfg.input_csv.empty()) return read_curve_csv(cfg.input_csv);
  auto params = cfg.params;
  if (cfg.preset == "fourier_knot" && !params.count("seed")) params["seed"] = std::to_string(cfg.seed);
  return make_preset(cfg.preset, cfg.intervals, params);
}

std::vector<Check> acceptance_checks(const Metrics& m, const RunConfig& cfg, bool closed,
                                     const IsotopyCertificate* cert) {
  std::vector<Check> out;
  auto add = [&](std::string name, double value, double limit) {
    out.push_back({std::move(name), value, limit, value <= limit});
  };
  add("curvature_sup_rel", m.curvature_sup_rel, cfg.curvature_tol);
  add("speed_deviation", m.speed_deviation, cfg.speed_tol);
  add("c1_distance", m.c1_distance, cfg.epsilon);
  if (closed) add("closure_residual", m.closure_residual, cfg.tangency_tol);
  else add("endpoint_residual", m.endpoint_residual, cfg.tangency_tol);
  add("pinned_value_residual", m.pinned_value_residual, cfg.tangency_tol);
  add("pinned_tangent_residual", m.pinned_tangent_residual, cfg.tangency_tol);
  if (cert) {
    out.push_back({"min_self_distance", m.min_self_distance, cfg.embed_fraction * m.scale,
                   m.min_self_distance > cfg.embed_fraction * m.scale});
    double worst = 1e300;
    for (double d : cert->min_distance) worst = std::min(worst, d);
    out.push_back({"homotopy_min_distance", worst, 0.0, cert->passed});
  }
  return out;
}

bool RunOutcome::passed() const {
  if (error) return false;
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

RunOutcome run(const RunConfig& cfg) {
  RunOutcome out;
  try {
    validate(cfg);
    const ParamCurve f = load_input(cfg);
    const CurvatureSpec kappa = parse_kappa(cfg.kappa);
    if (cfg.knot) {
      KnotResult k = constant_curvature_knot(f, kappa.constant_value(), cfg.intervals, cfg.knot_margin,
                                             cfg.epsilon, cfg.options);
      RunConfig scaled = cfg;
      scaled.epsilon = k.epsilon;
      out.checks = acceptance_checks(k.run.metrics, scaled, f.domain().periodic(), &k.certificate);
      out.output = k.knot;
      out.certificate = std::move(k.certificate);
      out.result = std::move(k.run);
    } else {
      ProblemSpec spec{f, kappa, cfg.epsilon, cfg.pinned};
      PrescribeResult r = prescribe_curvature(spec, cfg.options);
      out.checks = acceptance_checks(r.metrics, cfg, f.domain().periodic());
      out.output = r.f_tilde;
      out.result = std::move(r);
    }
  } catch (const Error& e) {
    out.error = e.kind();
    out.message = e.what();
  }
  return out;
}

nlohmann::json manifest(const RunConfig& cfg, const RunOutcome& out) {
  nlohmann::json j;
  j["config"] = config_to_json(cfg);
  if (out.result) j["result"] = to_json(*out.result);
  if (out.certificate) {
    j["certificate"] = {{"t_values", out.certificate->t_values},
                        {"min_distance", out.certificate->min_distance},
                        {"window", out.certificate->window},
                        {"scale", out.certificate->scale},
                        {"passed", out.certificate->passed}};
  }
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : out.checks)
    checks.push_back({{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"passed", c.passed}});
  j["checks"] = checks;
  if (out.error) j["error"] = {{"kind", std::string(to_string(*out.error))}, {"message", out.message}};
  j["passed"] = out.passed();
  j["exit_code"] = exit_code(out);
  return j;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InfeasibleMargin:
    case ErrorKind::SpeedMarginViolated:
      return kExitInfeasible;
    case ErrorKind::NoConvergence:
    case ErrorKind::RUnderflow:
    case ErrorKind::RTooLarge:
    case ErrorKind::CannotSegment:
    case ErrorKind::CapTooSmall:
    case ErrorKind::PerturbationFailed:
    case ErrorKind::JunctionMismatch:
    case ErrorKind::OutsideBall:
    case ErrorKind::NegativeCoefficient:
    case ErrorKind::NonpositiveDensity:
      return kExitNoConvergence;
    case ErrorKind::Io:
    case ErrorKind::ParseError:
    case ErrorKind::UnsupportedFormat:
      return kExitIo;
    case ErrorKind::DegenerateCurve:
    case ErrorKind::NotEmbedded:
    case ErrorKind::CertificateFailed:
    case ErrorKind::DomainMismatch:
      return kExitGeometry;
    case ErrorKind::BadK:
    case ErrorKind::BadPreset:
    case ErrorKind::InvalidArgument:
      return kExitUsage;
  }
  return kExitUsage;
}

int exit_code(const RunOutcome& out) {
  if (out.error) return exit_code(*out.error);
  return out.passed() ? kExitOk : kExitChecksFailed;
}

}  // namespace prescurv
