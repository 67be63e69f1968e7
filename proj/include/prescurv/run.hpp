#pragma once

#include "prescurv/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prescurv {

/// One batch run. Defaults reproduce the circle acceptance run.
struct RunConfig {
  std::string preset = "circle";              // used when input_csv is empty
  std::map<std::string, std::string> params;  // preset parameters
  std::string input_csv;
  int intervals = 4096;                       // grid size for presets and resampling
  std::uint64_t seed = 0;                     // fourier_knot seed
  std::string kappa = "2";                    // number or expression in t
  double epsilon = 0.1;
  std::vector<double> pinned;
  bool knot = false;                          // constant-curvature representative of a closed curve
  double knot_margin = 2.0;
  PipelineOptions options;

  // Acceptance thresholds.
  double curvature_tol = 0.01;  // sup relative curvature error
  double speed_tol = 1e-6;
  double tangency_tol = 1e-6;   // endpoint, pinned and closure residuals
  double embed_fraction = 0.01; // knot mode: min self distance over scale

  std::string output_csv;
  std::string manifest;
  std::string obj;
};

/// Throws InvalidArgument or BadPreset for inconsistent fields.
void validate(const RunConfig& cfg);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Input curve of the run (preset or CSV).
ParamCurve load_input(const RunConfig& cfg);
CurvatureSpec parse_kappa(const std::string& text);

struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool passed = false;
};

struct RunOutcome {
  std::optional<PrescribeResult> result;
  std::optional<IsotopyCertificate> certificate;
  std::optional<ParamCurve> output;
  std::vector<Check> checks;
  std::optional<ErrorKind> error;
  std::string message;
  bool passed() const;
};

/// Runs the pipeline; library errors are captured in the outcome, never thrown.
RunOutcome run(const RunConfig& cfg);

/// Everything that determines and describes the run; contains no timings.
nlohmann::json manifest(const RunConfig& cfg, const RunOutcome& out);

/// Process exit status for an error class.
enum ExitCode : int {
  kExitOk = 0,
  kExitChecksFailed = 1,
  kExitUsage = 2,
  kExitInfeasible = 3,
  kExitNoConvergence = 4,
  kExitIo = 5,
  kExitGeometry = 6,
};
int exit_code(const RunOutcome& out);
int exit_code(ErrorKind kind);

/// Checks of a metrics report against the thresholds of cfg.
std::vector<Check> acceptance_checks(const Metrics& m, const RunConfig& cfg, bool closed,
                                     const IsotopyCertificate* cert = nullptr);

}  // namespace prescurv
