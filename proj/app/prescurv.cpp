#include "prescurv/calculus.hpp"
#include "prescurv/io.hpp"
#include "prescurv/presets.hpp"
#include "prescurv/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace prescurv;

namespace {

std::map<std::string, std::string> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorKind::InvalidArgument, "parameter '" + item + "' is not key=value");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

ParamCurve read_any(const std::string& path) {
  if (ends_with(path, ".json")) return curve_from_json(nlohmann::json::parse(read_text(path)));
  return read_curve_csv(path);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else write_text(path, text);
}

void print_checks(const std::vector<Check>& checks) {
  std::cout << std::left << std::setw(26) << "check" << std::setw(14) << "value" << std::setw(14) << "limit"
            << "status\n";
  for (const auto& c : checks) {
    std::cout << std::setw(26) << c.name << std::setw(14) << std::setprecision(6) << c.value << std::setw(14)
              << c.limit << (c.passed ? "pass" : "FAIL") << '\n';
  }
}

int report_error(const Error& e) {
  std::cerr << "error: " << e.what() << '\n';
  return exit_code(e.kind());
}

int cmd_generate(const std::string& preset, int intervals, const std::vector<std::string>& params,
                 std::uint64_t seed, bool seed_set, const std::string& out) {
  auto p = parse_params(params);
  if (seed_set) p["seed"] = std::to_string(seed);
  const ParamCurve f = make_preset(preset, intervals, p);
  std::ostringstream os;
  write_curve_csv(os, f);
  emit(out, os.str());
  return kExitOk;
}

int cmd_prescribe(RunConfig cfg, const std::vector<std::string>& params) {
  cfg.params = parse_params(params);
  const RunOutcome out = run(cfg);
  const nlohmann::json man = manifest(cfg, out);
  if (!cfg.manifest.empty()) write_text(cfg.manifest, man.dump(2) + "\n");
  if (out.output) {
    if (!cfg.output_csv.empty()) write_curve_csv(cfg.output_csv, *out.output);
    if (!cfg.obj.empty()) {
      std::ostringstream os;
      write_obj(os, *out.output);
      write_text(cfg.obj, os.str());
    }
  }
  if (out.error) std::cerr << "error: " << out.message << '\n';
  if (out.result) {
    std::cout << "segments " << out.result->segments.size() << ", output refinement " << out.result->refine
              << ", lambda " << out.result->lambda << "\n";
    print_checks(out.checks);
  }
  return exit_code(out);
}

int cmd_verify(const std::string& input, const std::string& output, const std::string& kappa_text,
               const std::vector<double>& pinned, double epsilon, bool homotopy, const std::string& json_out) {
  const ParamCurve f = read_any(input), g = read_any(output);
  const Domain& a = f.domain();
  const Domain& b = g.domain();
  if (a.periodic() != b.periodic() || std::abs(a.a - b.a) > 1e-12 * std::max(1.0, std::abs(a.a)) ||
      std::abs(a.b - b.b) > 1e-12 * std::max(1.0, std::abs(a.b)) || f.dim() != g.dim())
    throw Error(ErrorKind::DomainMismatch, "input and output curves have different domains or dimensions");
  CurvatureSpec kappa;
  if (kappa_text.empty()) {
    const ScalarFn k = curvature(f);
    Eigen::VectorXd values(f.node_count());
    for (int j = 0; j < f.node_count(); ++j) values[j] = k(f.param(j));
    kappa = CurvatureSpec::samples(a, values);
  } else {
    kappa = parse_kappa(kappa_text);
  }
  const Metrics m = verify(f, g, kappa, pinned);
  RunConfig cfg;
  cfg.epsilon = epsilon;
  IsotopyCertificate cert;
  if (homotopy) {
    double kmax = 0.0;
    for (double t : f.dense_params(4)) kmax = std::max(kmax, curvature_at(f, t));
    cert = linear_homotopy_certificate(f, g, 1.0 / kmax);
  }
  const auto checks = acceptance_checks(m, cfg, a.periodic(), homotopy ? &cert : nullptr);
  print_checks(checks);
  nlohmann::json j = {{"metrics", to_json(m)}};
  if (homotopy) j["homotopy"] = {{"t_values", cert.t_values}, {"min_distance", cert.min_distance}, {"passed", cert.passed}};
  bool ok = true;
  for (const auto& c : checks) ok = ok && c.passed;
  j["passed"] = ok;
  if (!json_out.empty()) write_text(json_out, j.dump(2) + "\n");
  return ok ? kExitOk : kExitChecksFailed;
}

int cmd_export(const std::string& input, const std::string& format, const std::string& out) {
  const ParamCurve f = read_any(input);
  std::ostringstream os;
  if (format == "obj") write_obj(os, f);
  else if (format == "json") os << curve_to_json(f).dump(2) << '\n';
  else if (format == "csv") write_curve_csv(os, f);
  else throw Error(ErrorKind::UnsupportedFormat, "unknown export format '" + format + "' (obj, json, csv)");
  emit(out, os.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prescribe the curvature of a space curve while staying C1-close to it"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Write a preset curve as CSV");
  std::string gen_preset, gen_out;
  int gen_n = 1024;
  std::vector<std::string> gen_params;
  std::uint64_t gen_seed = 0;
  gen->add_option("preset", gen_preset, "circle, helix, torus_knot or fourier_knot")->required();
  gen->add_option("-n,--intervals", gen_n, "Grid intervals")->check(CLI::PositiveNumber);
  gen->add_option("-p,--param", gen_params, "Preset parameter key=value (repeatable)");
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "fourier_knot seed");
  gen->add_option("-o,--output", gen_out, "Output CSV (default stdout)");

  auto* pre = app.add_subcommand("prescribe", "Build a curve with the prescribed curvature");
  RunConfig cfg;
  std::vector<std::string> pre_params;
  pre->add_option("--preset", cfg.preset, "Input preset")->capture_default_str();
  pre->add_option("-i,--input", cfg.input_csv, "Input curve CSV (overrides --preset)");
  pre->add_option("-p,--param", pre_params, "Preset parameter key=value (repeatable)");
  pre->add_option("-n,--intervals", cfg.intervals, "Grid intervals")->capture_default_str();
  pre->add_option("--seed", cfg.seed, "fourier_knot seed")->capture_default_str();
  pre->add_option("-k,--kappa", cfg.kappa, "Target curvature: number or expression in t")->capture_default_str();
  pre->add_option("-e,--epsilon", cfg.epsilon, "C1 distance budget")->capture_default_str();
  pre->add_option("--pin", cfg.pinned, "Parameter where value and tangent are kept (repeatable)");
  pre->add_flag("--knot", cfg.knot, "Constant-curvature representative of a closed curve");
  pre->add_option("--knot-margin", cfg.knot_margin, "Knot mode: target over rescaled max curvature")
      ->capture_default_str();
  pre->add_option("--partition", cfg.options.k, "Partition size k (0: automatic)")->capture_default_str();
  pre->add_option("--solver-tol", cfg.options.solver_tol)->capture_default_str();
  pre->add_option("--max-iter", cfg.options.max_iter)->capture_default_str();
  pre->add_option("--r-min", cfg.options.R_min)->capture_default_str();
  pre->add_option("--flat-tol", cfg.options.flat_tol)->capture_default_str();
  pre->add_option("--min-pieces", cfg.options.min_pieces, "Loop pieces per segment (0: n + 1)")
      ->capture_default_str();
  pre->add_option("--loop-cap", cfg.options.loop_cap_fraction, "Loop cap radius over epsilon")
      ->capture_default_str();
  pre->add_option("--refine", cfg.options.output_refine, "Output grid refinement (0: automatic)")
      ->capture_default_str();
  pre->add_option("--max-refine", cfg.options.max_output_refine)->capture_default_str();
  pre->add_option("--threads", cfg.options.threads, "Worker count (0: PRESCURV_THREADS or all cores)")
      ->capture_default_str();
  pre->add_option("--curvature-tol", cfg.curvature_tol)->capture_default_str();
  pre->add_option("--speed-tol", cfg.speed_tol)->capture_default_str();
  pre->add_option("--tangency-tol", cfg.tangency_tol)->capture_default_str();
  pre->add_option("-o,--output", cfg.output_csv, "Output curve CSV");
  pre->add_option("-m,--manifest", cfg.manifest, "Run manifest JSON");
  pre->add_option("--obj", cfg.obj, "Output curve as OBJ polyline");

  auto* ver = app.add_subcommand("verify", "Check an output curve against its input");
  std::string ver_in, ver_out, ver_kappa, ver_json;
  std::vector<double> ver_pins;
  double ver_eps = 0.1;
  bool ver_homotopy = false;
  ver->add_option("input", ver_in, "Input curve (CSV or JSON)")->required();
  ver->add_option("output", ver_out, "Output curve (CSV or JSON)")->required();
  ver->add_option("-k,--kappa", ver_kappa, "Target curvature (default: curvature of the input)");
  ver->add_option("--pin", ver_pins, "Pinned parameter (repeatable)");
  ver->add_option("-e,--epsilon", ver_eps, "C1 distance budget")->capture_default_str();
  ver->add_flag("--homotopy", ver_homotopy, "Also sample injectivity of the linear homotopy");
  ver->add_option("--json", ver_json, "Write the report as JSON");

  auto* exp = app.add_subcommand("export", "Convert a curve to OBJ, JSON or CSV");
  std::string exp_in, exp_format = "obj", exp_out;
  exp->add_option("input", exp_in, "Curve (CSV or JSON)")->required();
  exp->add_option("-f,--format", exp_format, "obj, json or csv")->capture_default_str();
  exp->add_option("-o,--output", exp_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(gen_preset, gen_n, gen_params, gen_seed, gen_seed_opt->count() > 0, gen_out);
    if (*pre) return cmd_prescribe(cfg, pre_params);
    if (*ver) return cmd_verify(ver_in, ver_out, ver_kappa, ver_pins, ver_eps, ver_homotopy, ver_json);
    if (*exp) return cmd_export(exp_in, exp_format, exp_out);
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
