#pragma once

#include "prescurv/curve.hpp"
#include "prescurv/solver.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace prescurv {

struct PipelineOptions {
  int k = 0;                       // 0: max(n + 5, 8)
  double solver_tol = 1e-10;
  int max_iter = 200;
  double R_min = 1e-5;
  double flat_tol = 1e-4;
  double speed_tol = 1e-6;
  double quad_tol = 1e-9;
  int min_pieces = 0;              // 0: n + 1
  double loop_cap_fraction = 0.35; // loop cap radius as a fraction of epsilon
  int output_subpanels = 4;
  int output_refine = 0;           // output grid = input grid * this; 0: automatic
  double min_lap_nodes = 16.0;     // automatic refinement: output intervals per loop lap
  double min_lead_nodes = 12.0;    // and loop-free intervals at the ends of an open domain
  int max_output_refine = 32;
  int threads = 0;                 // 0: PRESCURV_THREADS or hardware concurrency
};

struct ProblemSpec {
  ParamCurve f;
  CurvatureSpec kappa;
  double epsilon = 0.1;
  std::vector<double> pinned;
};

/// Parameter interval [t0, t1] and the global nodes j0..j1 inside it (none when j1 < j0).
struct Segment {
  int j0 = 0, j1 = 0;
  double t0 = 0.0, t1 = 0.0;
};

/// Greedy segmentation: every T(I_i) lies within epsilon/2 of the tantrix at the segment
/// midpoint, |I_i| <= 1, pinned parameters are segment ends, other ends are grid nodes, and
/// circle domains get at least two segments. f must have unit speed. Throws CannotSegment when a
/// single grid interval already turns too far.
std::vector<Segment> segment_global(const ParamCurve& f, double epsilon,
                                    const std::vector<double>& pinned);

struct SegmentSolution {
  Segment seg;
  int refine = 1;           // output grid = input grid * refine
  int out_j0 = 0, out_j1 = -1;
  Eigen::MatrixXd samples;  // f~ at the output nodes out_j0..out_j1
  Vec value_start, value_end;
  Vec tangent_start, tangent_end;
  SolveReport solve;
  int k = 0;
  int pieces = 0;
  double thickness = 0.0;
  double nonflat_amplitude = 0.0;
  double R = 0.0;
  double endpoint_gap = 0.0;       // |f~(t1) - f(t1)| before the linear closure correction
  double tantrix_deviation = 0.0;  // sup |T~ - T| on the output nodes
  double speed_error = 0.0;        // relative |T~'| vs target speed on samples
  double max_loop_radius = 0.0;
  double tilt = 0.0;
  double lap_nodes = 0.0;          // input grid intervals per shortest loop lap
  double lead_nodes_start = 0.0;   // input grid intervals before the first loop
  double lead_nodes_end = 0.0;     // and after the last one
};

/// Local problem on one segment: nonflat perturbation, density family, loop plan, solve for
/// ave(T~_x) = chord / |I| and integrate T~ on the nodes of the input grid refined `refine` times.
SegmentSolution solve_local(const ParamCurve& f, const Segment& seg, const CurvatureSpec& kappa,
                            double epsilon, const PipelineOptions& opt = {}, int refine = 1);

/// Smallest power of two that resolves every loop lap and the loop-free ends of an open domain
/// (opt.output_refine when set). Throws CannotSegment beyond opt.max_output_refine.
int output_refinement(const std::vector<SegmentSolution>& parts, const Domain& domain,
                      const PipelineOptions& opt);

struct StitchReport {
  double max_value_jump = 0.0;
  double max_tangent_jump = 0.0;
};

/// Global curve on the refined output grid from per-segment samples; throws JunctionMismatch when neighbouring solutions
/// disagree in value or tangent by more than 1e-6.
ParamCurve stitch(const std::vector<SegmentSolution>& parts, const ParamCurve& f,
                  StitchReport* report = nullptr);

struct Metrics {
  double curvature_sup_rel = 0.0;
  double curvature_l2_rel = 0.0;
  double speed_deviation = 0.0;
  double c1_distance = 0.0;
  double endpoint_residual = 0.0;  // value and tangent at the domain ends (0 for circles)
  double pinned_value_residual = 0.0;
  double pinned_tangent_residual = 0.0;
  double closure_residual = 0.0;   // circles: |f~(b) - f~(a)| of the reconstruction
  double min_self_distance = 0.0;  // non-adjacent samples of f~
  double scale = 0.0;              // diameter estimate of f~
};

/// Checks of the output against the input and the prescription.
Metrics verify(const ParamCurve& f, const ParamCurve& ft, const CurvatureSpec& kappa,
               const std::vector<double>& pinned, int sub = 4);

/// Smallest distance between samples whose arclength separation exceeds `window`.
double min_self_distance(const ParamCurve& f, double window, int sub = 1);

struct PrescribeResult {
  ParamCurve f_tilde;
  std::vector<SegmentSolution> segments;
  StitchReport stitch;
  Metrics metrics;
  bool reduced = false;  // input was routed through the unit-speed reduction
  int refine = 1;        // output grid intervals per input grid interval
  double lambda = 1.0;
};

/// Whole-curve construction. Non-unit-speed inputs are resampled by arclength and scaled,
/// solved with the correspondingly scaled target and mapped back.
PrescribeResult prescribe_curvature(const ProblemSpec& spec, const PipelineOptions& opt = {});

struct IsotopyCertificate {
  std::vector<double> t_values;
  std::vector<double> min_distance;
  double window = 0.0;
  double scale = 0.0;
  bool passed = false;
};

struct KnotResult {
  ParamCurve knot;
  ParamCurve scaled_input;
  double scale = 1.0;
  double epsilon = 0.0;
  PrescribeResult run;
  IsotopyCertificate certificate;
};

/// Constant-curvature representative of a closed embedded curve: scales f by arclength so its
/// curvature is below kappa / margin, runs prescribe_curvature with the constant target and
/// certifies the linear homotopy between input and output.
KnotResult constant_curvature_knot(const ParamCurve& f, double kappa, int intervals,
                                   double margin = 2.0, double epsilon_fraction = 0.5,
                                   const PipelineOptions& opt = {});

/// Samples injectivity of h_t = (1 - t) f + t g at `count` values of t, on the finer grid.
IsotopyCertificate linear_homotopy_certificate(const ParamCurve& f, const ParamCurve& g,
                                               double window, int count = 20);

nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const PrescribeResult& r);

/// Worker count: opt.threads, else PRESCURV_THREADS, else hardware concurrency.
int worker_count(const PipelineOptions& opt);

}  // namespace prescurv
