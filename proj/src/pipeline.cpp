#include "prescurv/pipeline.hpp"

#include "prescurv/calculus.hpp"
#include "prescurv/density.hpp"
#include "prescurv/loops.hpp"
#include "prescurv/nonflat.hpp"
#include "prescurv/quadrature.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>

namespace prescurv {

namespace {

Vec unit_tangent(const ParamCurve& f, double t) { return normalized(f.eval(t, 1)); }

bool segment_ok(const ParamCurve& f, double t0, double t1, double epsilon) {
  if (t1 - t0 > 1.0 + 1e-12) return false;
  const Vec c = unit_tangent(f, 0.5 * (t0 + t1));
  // Two samples per grid interval.
  const int q = std::max(2, static_cast<int>(std::ceil(2.0 * (t1 - t0) / f.step())));
  for (int i = 0; i <= q; ++i)
    if ((unit_tangent(f, t0 + (t1 - t0) * i / q) - c).norm() > 0.5 * epsilon) return false;
  return true;
}

Segment make_segment(const Grid& g, double t0, double t1) {
  const double a = g.domain.a, h = g.step();
  Segment s;
  s.t0 = t0;
  s.t1 = t1;
  s.j0 = static_cast<int>(std::ceil((t0 - a) / h - 1e-9));
  s.j1 = static_cast<int>(std::floor((t1 - a) / h + 1e-9));
  return s;
}

template <class Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto run = [&] {
    for (int i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

int worker_count(const PipelineOptions& opt) {
  if (opt.threads > 0) return opt.threads;
  if (const char* env = std::getenv("PRESCURV_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------

std::vector<Segment> segment_global(const ParamCurve& f, double epsilon,
                                    const std::vector<double>& pinned) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  const Domain& dom = f.domain();
  const int N = f.intervals();
  const double h = f.step();
  std::vector<double> breaks = {dom.a, dom.b};
  for (double p : pinned) {
    if (p < dom.a - 1e-12 || p > dom.b + 1e-12)
      throw Error(ErrorKind::InvalidArgument, "pinned point outside the domain");
    p = std::clamp(dom.wrap(p), dom.a, dom.b);
    const double j = std::round((p - dom.a) / h);
    if (std::abs((p - dom.a) / h - j) < 1e-9) p = f.param(static_cast<int>(j));
    breaks.push_back(p);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::vector<Segment> segs;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double lo = breaks[b], hi = breaks[b + 1];
    // Candidate ends: the break points and the grid nodes strictly between them.
    std::vector<double> pts = {lo};
    for (int j = static_cast<int>(std::floor((lo - dom.a) / h)) + 1; j < N + 1; ++j) {
      const double t = f.param(j);
      if (t >= hi - 1e-9 * h) break;
      if (t > lo + 1e-9 * h) pts.push_back(t);
    }
    pts.push_back(hi);
    const int last = static_cast<int>(pts.size()) - 1;
    // Greedy count, then the most even split with that many parts that passes the test.
    int count = 0;
    for (int i = 0; i < last; ++count) {
      int e = i + 1;
      if (!segment_ok(f, pts[i], pts[e], epsilon))
        throw Error(ErrorKind::CannotSegment, "grid too coarse for epsilon: one interval turns more than epsilon / 2");
      while (e < last && segment_ok(f, pts[i], pts[e + 1], epsilon)) ++e;
      i = e;
    }
    if (dom.periodic() && breaks.size() == 2) count = std::max(count, 2);
    count = std::min(count, last);
    for (;; ++count) {
      std::vector<Segment> part;
      bool ok = true;
      for (int i = 0; i < count && ok; ++i) {
        const int e0 = static_cast<int>(std::llround(static_cast<double>(last) * i / count));
        const int e1 = static_cast<int>(std::llround(static_cast<double>(last) * (i + 1) / count));
        if (e1 <= e0 || (e1 - e0 > 1 && !segment_ok(f, pts[e0], pts[e1], epsilon))) ok = false;
        part.push_back(make_segment(f.grid(), pts[e0], pts[e1]));
      }
      if (ok || count >= last) {
        segs.insert(segs.end(), part.begin(), part.end());
        break;
      }
    }
  }
  return segs;
}

// ---------------------------------------------------------------------------

namespace {

// Solved local problem, kept alive between the solve and the output sampling.
constexpr double kMaxTilt = 0.7;

struct LocalState {
  SegmentSolution sol;
  double t0 = 0.0, I = 1.0;
  int m = 1;
  Vec chord_start, chord_end;
  NonflatResult nf;
  BasePath bp;
  SpeedProfile v;
  DensityFamily fam;
  std::vector<double> ub;
  LoopPlan plan;
  std::unique_ptr<TildeTantrix> tt;
  double tilt0 = 0.0, tilt_gain = 0.0;
  Vec tilt_axis;

  LoopPlan plan_for(const Vec& x) const {
    LoopPlan p = plan;
    p.tilt = tilt0;
    if (tilt_gain != 0.0) p.tilt += tilt_gain * tilt_axis.dot(x - fam.x0);
    p.tilt = std::clamp(p.tilt, -kMaxTilt, kMaxTilt);
    return p;
  }

  std::vector<double> breaks_for(const Vec& x) const {
    const Density rho = density(fam, x);
    std::vector<double> sb(ub.size());
    for (std::size_t i = 0; i < ub.size(); ++i) sb[i] = bp.s_of_tau(t0 + I * rho.inverse_mass(ub[i]));
    sb.front() = 0.0;
    sb.back() = bp.length();
    return sb;
  }
};

// Loops pull the average of the path off the base path's hull, mostly across its thinnest axis,
// where the ball is narrowest, and moving x along the hull barely changes that. The loop tilt
// therefore follows the thin coordinate of x: tilt(x) = tilt0 + gain * w.(x - x0), with tilt0
// cancelling the offset at the centre and the gain making the thin row of the Jacobian dominant.
void steer_tilt(LocalState& st, const AverageMap& F, const BallSpec& ball, const Vec& target) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(ball.metric, Eigen::ComputeThinV);
  const Eigen::MatrixXd V = svd.matrixV();
  const Vec sv = svd.singularValues();
  st.tilt_axis = V.col(0) * (sv[0] / ball.R);
  st.tilt_gain = 0.0;
  auto offset = [&](double tilt, const Vec& x) {
    st.tilt0 = tilt;
    return st.tilt_axis.dot(F(x) - target);
  };
  double a = 0.0, fa = offset(a, ball.x0);
  double b = 0.05, fb = offset(b, ball.x0);
  for (int it = 0; it < 12 && std::abs(fb) > 1e-6 && fb != fa; ++it) {
    const double c = std::clamp(b - fb * (b - a) / (fb - fa), -kMaxTilt, kMaxTilt);
    a = b;
    fa = fb;
    b = c;
    fb = offset(b, ball.x0);
  }
  const double tilt0 = b;
  const double dt = 1e-2;
  const double slope = (offset(tilt0 + dt, ball.x0) - offset(tilt0 - dt, ball.x0)) / (2 * dt);
  const double h = 1e-3;
  Vec row(V.cols());
  for (int j = 0; j < V.cols(); ++j) {
    const Vec step = V.col(j) * (h * ball.R / sv[j]);
    row[j] = (offset(tilt0, ball.x0 + step) - offset(tilt0, ball.x0 - step)) / (2 * h);
  }
  st.tilt0 = tilt0;
  if (std::abs(slope) > 0.0) st.tilt_gain = (2.0 * row.norm() - row[0]) / slope * (sv[0] / ball.R);
  st.tilt_axis = V.col(0);
}

std::unique_ptr<LocalState> solve_state(const ParamCurve& f, const Segment& seg, const CurvatureSpec& kappa,
                                        double epsilon, const PipelineOptions& opt) {
  auto st = std::make_unique<LocalState>();
  SegmentSolution& sol = st->sol;
  sol.seg = seg;
  const int n = f.dim();
  const double t0 = seg.t0, t1 = seg.t1, I = t1 - t0;
  st->t0 = t0;
  st->I = I;
  const int m = st->m = std::max(1, static_cast<int>(std::lround(I / f.step())));
  const int local = std::max(32, 4 * m);
  const ParamCurve fi = ParamCurve::from_function(Domain::interval(t0, t1), local,
                                                  [&](double t) { return f.eval(t); }, f.smoothness_order());

  // Hull thickness of a short tantrix arc scales with the square of its length.
  const double turning = BasePath(tantrix_of(fi), t0, t1, std::max(8, m)).length();
  st->nf = ensure_nonflat(fi, 0.25 * epsilon, opt.flat_tol * std::min(1.0, turning * turning));
  sol.nonflat_amplitude = st->nf.amplitude;
  const TantrixFn Tfn = tantrix_of(st->nf.curve);
  st->bp = BasePath(Tfn, t0, t1, std::max(32, 2 * m));

  const SphericalCurve Tu(ParamCurve::from_function(
      Domain::interval(0.0, 1.0), local, [&](double u) { return Tfn(t0 + I * u).n; }, f.smoothness_order()));
  sol.k = opt.k > 0 ? opt.k : std::max(n + 5, 8);
  st->fam = make_density_family(Tu, sol.k);
  sol.thickness = hull_thickness(Tu, st->fam.x0).thickness;
  sol.R = initial_radius(st->fam, sol.thickness);
  // The solver works in the ball |k G (x - x0)| <= 0.9, which keeps every coefficient positive
  // and follows the shape of the node cloud; its Euclidean inradius is sol.R.
  BallSpec ball{st->fam.x0, 0.9, sol.k * st->fam.gradient};
  st->fam.R = 1e300;

  st->v = kappa.kind() == CurvatureSpec::Kind::Constant
              ? SpeedProfile(I * kappa.constant_value())
              : SpeedProfile([kappa, t0, I](double u) { return I * kappa(t0 + I * u); }, 64);
  const int P = opt.min_pieces > 0 ? opt.min_pieces : n + 1;
  // Equal loop budgets at x0 make the two sides' loops congruent, so their offsets cancel.
  st->ub = balance_budgets(st->bp, st->v, P);
  sol.pieces = P;
  st->plan = plan_loops(st->bp, st->v, st->ub, opt.loop_cap_fraction * epsilon);

  const LocalState& cs = *st;
  const AverageMap F = [&cs](const Vec& x) {
    const TildeTantrix tt(&cs.bp, &cs.v, cs.plan_for(x), cs.breaks_for(x));
    return tt.integral();
  };
  st->chord_start = f.eval(t0);
  st->chord_end = f.eval(t1);
  const Vec target = (st->chord_end - st->chord_start) / I;
  steer_tilt(*st, F, ball, target);
  SolveOptions so;
  so.tol = opt.solver_tol;
  so.max_iter = opt.max_iter;
  so.R_min = opt.R_min;
  sol.solve = solve_average_constraint(F, ball, target, so);

  st->plan = st->plan_for(sol.solve.x_star);
  sol.tilt = st->plan.tilt;
  st->tt = std::make_unique<TildeTantrix>(&st->bp, &st->v, st->plan, st->breaks_for(sol.solve.x_star));
  const TildeTantrix& tt = *st->tt;
  for (const auto& site : tt.sites()) sol.max_loop_radius = std::max(sol.max_loop_radius, site.loop.radius);
  sol.speed_error = tt.speed_error(50);
  sol.lap_nodes = tt.min_loop_period() * I / f.step();
  const TildeTantrix::Piece& first = tt.pieces().front();
  const TildeTantrix::Piece& last = tt.pieces().back();
  const SpeedProfile& v = st->v;
  sol.lead_nodes_start = (v.U(v.S(first.u_a) + first.pre) - first.u_a) * I / f.step();
  sol.lead_nodes_end = (last.u_b - v.U(v.S(last.u_b) - last.post)) * I / f.step();
  sol.tangent_start = tt.eval(0.0);
  sol.tangent_end = tt.eval(1.0);
  sol.value_start = st->chord_start;
  sol.value_end = st->chord_end;
  return st;
}

// f~ at the output nodes inside the segment, then a linear correction of the endpoint gap.
void sample_state(LocalState& st, const ParamCurve& f, int refine, const PipelineOptions& opt) {
  SegmentSolution& sol = st.sol;
  const TildeTantrix& tt = *st.tt;
  const int n = f.dim();
  const Grid out{f.domain(), f.intervals() * refine};
  const Segment os = make_segment(out, sol.seg.t0, sol.seg.t1);
  sol.refine = refine;
  sol.out_j0 = os.j0;
  sol.out_j1 = os.j1;
  std::vector<double> us;
  for (int j = os.j0; j <= os.j1; ++j) us.push_back(std::clamp((out.param(j) - st.t0) / st.I, 0.0, 1.0));
  us.push_back(1.0);
  const int count = static_cast<int>(us.size()) - 1;
  Eigen::MatrixXd vals(count + 1, n);
  Vec cum = Vec::Zero(n);
  double prev = 0.0;
  const int sub = std::max(1, opt.output_subpanels);
  auto acc = [&](double, double w, const Vec& val) { cum += w * val; };
  for (int j = 0; j <= count; ++j) {
    if (us[j] > prev) {
      const int panels = std::max(1, static_cast<int>(std::ceil(sub * (us[j] - prev) * st.m - 1e-9)));
      composite_gauss([&](double u) { return tt.eval(u); }, prev, us[j], panels, 10, acc);
      prev = us[j];
    }
    vals.row(j) = (st.chord_start + st.I * cum).transpose();
  }
  const Vec gap = vals.row(count).transpose() - st.chord_end;
  sol.endpoint_gap = gap.norm();
  sol.samples.resize(count, n);
  sol.tantrix_deviation = 0.0;
  for (int j = 0; j < count; ++j) {
    sol.samples.row(j) = vals.row(j) - us[j] * gap.transpose();
    sol.tantrix_deviation =
        std::max(sol.tantrix_deviation, (tt.eval(us[j]) - unit_tangent(f, st.t0 + st.I * us[j])).norm());
  }
}

}  // namespace

int output_refinement(const std::vector<SegmentSolution>& parts, const Domain& domain,
                      const PipelineOptions& opt) {
  if (opt.output_refine > 0) return opt.output_refine;
  double need = 1.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    need = std::max(need, opt.min_lap_nodes / parts[i].lap_nodes);
    if (domain.periodic()) continue;
    if (i == 0) need = std::max(need, opt.min_lead_nodes / parts[i].lead_nodes_start);
    if (i + 1 == parts.size()) need = std::max(need, opt.min_lead_nodes / parts[i].lead_nodes_end);
  }
  int r = 1;
  while (r < need * (1.0 - 1e-6) && r < opt.max_output_refine) r *= 2;
  if (r < need * (1.0 - 1e-6)) {
    std::ostringstream os;
    os << "loops need output refinement " << need << " > " << opt.max_output_refine << "; increase N or epsilon";
    throw Error(ErrorKind::CannotSegment, os.str());
  }
  return r;
}

SegmentSolution solve_local(const ParamCurve& f, const Segment& seg, const CurvatureSpec& kappa,
                            double epsilon, const PipelineOptions& opt, int refine) {
  auto st = solve_state(f, seg, kappa, epsilon, opt);
  sample_state(*st, f, refine, opt);
  return st->sol;
}

// ---------------------------------------------------------------------------

ParamCurve stitch(const std::vector<SegmentSolution>& parts, const ParamCurve& f, StitchReport* report) {
  if (parts.empty()) throw Error(ErrorKind::InvalidArgument, "nothing to stitch");
  const int refine = parts.front().refine;
  for (const SegmentSolution& p : parts)
    if (p.refine != refine) throw Error(ErrorKind::InvalidArgument, "segments sampled on different grids");
  const Grid out{f.domain(), f.intervals() * refine};
  const int N = out.intervals;
  const bool periodic = f.domain().periodic();
  Eigen::MatrixXd s(out.nodes(), f.dim());
  StitchReport rep;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const SegmentSolution& p = parts[i];
    for (int j = p.out_j0; j <= p.out_j1; ++j) {
      const int row = periodic ? j % N : j;
      s.row(row) = p.samples.row(j - p.out_j0);
    }
    const bool has_next = i + 1 < parts.size() || periodic;
    if (!has_next) continue;
    const SegmentSolution& q = parts[(i + 1) % parts.size()];
    rep.max_value_jump = std::max(rep.max_value_jump, (p.value_end - q.value_start).norm());
    // A shared grid node is produced by both neighbours.
    if (p.out_j1 >= p.out_j0 && q.out_j1 >= q.out_j0 &&
        (periodic ? p.out_j1 % N == q.out_j0 % N : p.out_j1 == q.out_j0))
      rep.max_value_jump = std::max(rep.max_value_jump, (p.samples.bottomRows(1) - q.samples.topRows(1)).norm());
    rep.max_tangent_jump = std::max(rep.max_tangent_jump, (p.tangent_end - q.tangent_start).norm());
  }
  if (report) *report = rep;
  if (rep.max_value_jump > 1e-6 || rep.max_tangent_jump > 1e-6) {
    std::ostringstream os;
    os << "value jump " << rep.max_value_jump << ", tangent jump " << rep.max_tangent_jump;
    throw Error(ErrorKind::JunctionMismatch, os.str());
  }
  return ParamCurve(f.domain(), std::move(s), f.smoothness_order());
}

// ---------------------------------------------------------------------------

double min_self_distance(const ParamCurve& f, double window, int sub) {
  const std::vector<double> ts = f.dense_params(sub);
  const int M = static_cast<int>(ts.size());
  std::vector<Vec> pts(M);
  std::vector<double> s(M, 0.0);
  for (int i = 0; i < M; ++i) pts[i] = f.eval(ts[i]);
  for (int i = 1; i < M; ++i) s[i] = s[i - 1] + (pts[i] - pts[i - 1]).norm();
  const double L = f.domain().periodic() ? s.back() + (pts.front() - pts.back()).norm() : s.back();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j) {
      double sep = s[j] - s[i];
      if (f.domain().periodic()) sep = std::min(sep, L - sep);
      if (sep < window) continue;
      best = std::min(best, (pts[i] - pts[j]).norm());
    }
  return best;
}

Metrics verify(const ParamCurve& f, const ParamCurve& ft, const CurvatureSpec& kappa,
               const std::vector<double>& pinned, int sub) {
  if (!(f.domain() == ft.domain()) || f.dim() != ft.dim())
    throw Error(ErrorKind::DomainMismatch, "input and output curves live on different domains");
  Metrics m;
  double num = 0.0, den = 0.0, kmax = 0.0;
  for (double t : ft.dense_params(sub)) {
    const double want = kappa(t), got = curvature_at(ft, t);
    m.curvature_sup_rel = std::max(m.curvature_sup_rel, std::abs(got - want) / std::abs(want));
    num += (got - want) * (got - want);
    den += want * want;
    kmax = std::max(kmax, std::abs(want));
  }
  m.curvature_l2_rel = std::sqrt(num / den);
  m.speed_deviation = speed_deviation(ft);
  m.c1_distance = c1_distance(ft, f);
  const Domain& d = f.domain();
  auto gap = [&](double t) {
    return std::make_pair((ft.eval(t) - f.eval(t)).norm(), (ft.eval(t, 1) - f.eval(t, 1)).norm());
  };
  if (!d.periodic()) {
    for (double t : {d.a, d.b}) {
      const auto [v, g] = gap(t);
      m.endpoint_residual = std::max({m.endpoint_residual, v, g});
    }
  } else {
    m.closure_residual = (ft.eval(d.a) - ft.eval(d.b)).norm() + (ft.eval(d.a, 1) - ft.eval(d.b, 1)).norm();
  }
  for (double p : pinned) {
    const auto [v, g] = gap(p);
    m.pinned_value_residual = std::max(m.pinned_value_residual, v);
    m.pinned_tangent_residual = std::max(m.pinned_tangent_residual, g);
  }
  Vec c = Vec::Zero(ft.dim());
  for (int j = 0; j < ft.node_count(); ++j) c += ft.sample(j);
  c /= ft.node_count();
  for (int j = 0; j < ft.node_count(); ++j) m.scale = std::max(m.scale, 2.0 * (ft.sample(j) - c).norm());
  m.min_self_distance = min_self_distance(ft, std::numbers::pi / kmax);
  return m;
}

// ---------------------------------------------------------------------------

PrescribeResult prescribe_curvature(const ProblemSpec& spec, const PipelineOptions& opt) {
  if (!(spec.epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  PrescribeResult res;
  const ParamCurve& f = spec.f;
  const Domain& dom = f.domain();

  ParamCurve g = f;
  CurvatureSpec kg = spec.kappa;
  double eps = spec.epsilon;
  std::vector<double> pins = spec.pinned;
  Diffeo phi;
  if (speed_deviation(f) > opt.speed_tol) {
    const UnitSpeed us = resample_unit_speed(f);
    res.reduced = true;
    res.lambda = us.lambda;
    phi = us.phi;
    g = us.g;
    const Grid grid = g.grid();
    Eigen::VectorXd vals(grid.nodes());
    for (int j = 0; j < grid.nodes(); ++j) vals[j] = spec.kappa(phi(grid.param(j))) / us.lambda;
    kg = CurvatureSpec::samples(dom, vals);
    eps = spec.epsilon * us.lambda / (1.0 + c1_norm(phi.inverted()));
    for (double& p : pins) p = phi.inverse(p);
  }

  for (double t : g.dense_params(4)) {
    const double have = curvature_at(g, t), want = kg(t);
    if (!(have > 0.0)) throw Error(ErrorKind::DegenerateCurve, "input curvature vanishes");
    if (!(want > have)) {
      std::ostringstream os;
      os << "target curvature " << want << " does not exceed curvature " << have << " at t = " << t;
      throw Error(ErrorKind::InfeasibleMargin, os.str());
    }
  }

  const std::vector<Segment> segs = segment_global(g, eps, pins);
  const int count = static_cast<int>(segs.size());
  std::vector<std::unique_ptr<LocalState>> states(count);
  const int workers = worker_count(opt);
  parallel_for(count, workers, [&](int i) { states[i] = solve_state(g, segs[i], kg, eps, opt); });
  res.segments.resize(count);
  for (int i = 0; i < count; ++i) res.segments[i] = states[i]->sol;
  res.refine = output_refinement(res.segments, dom, opt);
  parallel_for(count, workers, [&](int i) {
    sample_state(*states[i], g, res.refine, opt);
    res.segments[i] = std::move(states[i]->sol);
    states[i].reset();
  });
  ParamCurve gt = stitch(res.segments, g, &res.stitch);

  if (res.reduced) {
    const Grid grid{dom, f.intervals() * res.refine};
    Eigen::MatrixXd s(grid.nodes(), f.dim());
    for (int j = 0; j < grid.nodes(); ++j) s.row(j) = (gt.eval(phi.inverse(grid.param(j))) / res.lambda).transpose();
    res.f_tilde = ParamCurve(dom, std::move(s), f.smoothness_order());
  } else {
    res.f_tilde = std::move(gt);
  }
  res.metrics = verify(f, res.f_tilde, spec.kappa, spec.pinned);
  return res;
}

// ---------------------------------------------------------------------------

IsotopyCertificate linear_homotopy_certificate(const ParamCurve& f, const ParamCurve& g, double window,
                                               int count) {
  if (!(f.domain() == g.domain()) || f.dim() != g.dim())
    throw Error(ErrorKind::DomainMismatch, "homotopy ends live on different domains");
  // Both ends on the finer of the two grids.
  const Grid grid = f.intervals() >= g.intervals() ? f.grid() : g.grid();
  Eigen::MatrixXd fs(grid.nodes(), f.dim()), gs(grid.nodes(), f.dim());
  for (int j = 0; j < grid.nodes(); ++j) {
    fs.row(j) = f.eval(grid.param(j)).transpose();
    gs.row(j) = g.eval(grid.param(j)).transpose();
  }
  IsotopyCertificate cert;
  cert.window = window;
  Vec c = Vec::Zero(f.dim());
  for (int j = 0; j < fs.rows(); ++j) c += fs.row(j).transpose();
  c /= static_cast<double>(fs.rows());
  for (int j = 0; j < fs.rows(); ++j) cert.scale = std::max(cert.scale, 2.0 * (fs.row(j).transpose() - c).norm());
  cert.passed = true;
  for (int i = 0; i < count; ++i) {
    const double t = count > 1 ? static_cast<double>(i) / (count - 1) : 0.0;
    const ParamCurve h(f.domain(), (1.0 - t) * fs + t * gs, f.smoothness_order());
    const double d = min_self_distance(h, window);
    cert.t_values.push_back(t);
    cert.min_distance.push_back(d);
    if (!(d > 0.01 * cert.scale)) cert.passed = false;
  }
  return cert;
}

KnotResult constant_curvature_knot(const ParamCurve& f, double kappa, int intervals, double margin,
                                   double epsilon_fraction, const PipelineOptions& opt) {
  if (!(kappa > 0.0) || !(margin > 1.0)) throw Error(ErrorKind::InvalidArgument, "need kappa > 0 and margin > 1");
  const UnitSpeed us = resample_unit_speed(f, intervals);
  double kmax = 0.0;
  for (double t : us.g.dense_params(4)) kmax = std::max(kmax, curvature_at(us.g, t));
  KnotResult out;
  out.scale = margin * kmax / kappa;
  const Domain& d = us.g.domain();
  const Domain hd = d.periodic() ? Domain::circle(out.scale * d.a, out.scale * d.b)
                                 : Domain::interval(out.scale * d.a, out.scale * d.b);
  out.scaled_input = ParamCurve(hd, out.scale * us.g.samples(), us.g.smoothness_order());

  const double hk = kmax / out.scale;
  const double dmin = min_self_distance(out.scaled_input, std::numbers::pi / hk);
  if (!(dmin > 1e-9 * out.scale))
    throw Error(ErrorKind::NotEmbedded, "input curve is not embedded at this resolution");
  out.epsilon = std::min(epsilon_fraction, 0.25 * dmin);

  ProblemSpec spec{out.scaled_input, CurvatureSpec::constant(kappa), out.epsilon, {}};
  out.run = prescribe_curvature(spec, opt);
  out.knot = out.run.f_tilde;
  out.certificate = linear_homotopy_certificate(out.scaled_input, out.knot, 1.0 / hk);
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const SolveReport& r) {
  nlohmann::json j;
  j["x_star"] = std::vector<double>(r.x_star.data(), r.x_star.data() + r.x_star.size());
  j["residual"] = r.residual;
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["R_history"] = r.R_history;
  j["condition_flags"] = r.condition_flags;
  j["method"] = r.method;
  j["converged"] = r.converged;
  return j;
}

nlohmann::json to_json(const Metrics& m) {
  return {{"curvature_sup_rel", m.curvature_sup_rel},
          {"curvature_l2_rel", m.curvature_l2_rel},
          {"speed_deviation", m.speed_deviation},
          {"c1_distance", m.c1_distance},
          {"endpoint_residual", m.endpoint_residual},
          {"pinned_value_residual", m.pinned_value_residual},
          {"pinned_tangent_residual", m.pinned_tangent_residual},
          {"closure_residual", m.closure_residual},
          {"min_self_distance", m.min_self_distance},
          {"scale", m.scale}};
}

nlohmann::json to_json(const PrescribeResult& r) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : r.segments) {
    segs.push_back({{"t0", s.seg.t0},
                    {"t1", s.seg.t1},
                    {"k", s.k},
                    {"pieces", s.pieces},
                    {"lap_nodes", s.lap_nodes},
                    {"lead_nodes", {s.lead_nodes_start, s.lead_nodes_end}},
                    {"R", s.R},
                    {"thickness", s.thickness},
                    {"nonflat_amplitude", s.nonflat_amplitude},
                    {"endpoint_gap", s.endpoint_gap},
                    {"tantrix_deviation", s.tantrix_deviation},
                    {"speed_error", s.speed_error},
                    {"max_loop_radius", s.max_loop_radius},
                    {"tilt", s.tilt},
                    {"solve", to_json(s.solve)}});
  }
  return {{"segments", segs},
          {"stitch", {{"max_value_jump", r.stitch.max_value_jump}, {"max_tangent_jump", r.stitch.max_tangent_jump}}},
          {"metrics", to_json(r.metrics)},
          {"reduced", r.reduced},
          {"refine", r.refine},
          {"lambda", r.lambda}};
}

}  // namespace prescurv
