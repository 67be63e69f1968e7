#include "prescurv/presets.hpp"

#include "prescurv/calculus.hpp"
#include "prescurv/pipeline.hpp"

#include <cmath>
#include <numeric>
#include <numbers>
#include <random>
#include <set>

namespace prescurv {

namespace {

constexpr double kPi = std::numbers::pi;

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

void check_intervals(int n) {
  if (n < 8) throw Error(ErrorKind::BadPreset, "presets need at least 8 intervals");
}

// Uniform in [-1, 1) from the raw generator output, independent of the standard library's
// distribution implementations.
double unit_uniform(std::mt19937_64& g) { return 2.0 * static_cast<double>(g() >> 11) * 0x1.0p-53 - 1.0; }

ParamCurve torus_knot(int n, int p, int q, double R, double r, const std::vector<double>& coef, int modes,
                      double scale) {
  return ParamCurve::from_function(Domain::circle(0, 2 * kPi), n, [&](double t) {
    const double w = R + r * std::cos(q * t);
    Vec x = v3(w * std::cos(p * t), w * std::sin(p * t), r * std::sin(q * t));
    for (int m = 1; m <= modes; ++m)
      for (int c = 0; c < 3; ++c) {
        const std::size_t i = static_cast<std::size_t>(6 * (m - 1) + 2 * c);
        x[c] += scale * (coef[i] * std::cos(m * t) + coef[i + 1] * std::sin(m * t));
      }
    return x;
  });
}

bool embedded_and_curved(const ParamCurve& f) {
  double kmax = 0.0;
  for (double t : f.dense_params(2)) {
    const double k = curvature_at(f, t);
    if (!(k > 1e-6)) return false;
    kmax = std::max(kmax, k);
  }
  // Non-adjacent points: arclength separation above a half turn at the largest curvature.
  return min_self_distance(f, kPi / kmax) > 1e-3;
}

}  // namespace

ParamCurve preset_circle(int n, double radius) {
  check_intervals(n);
  if (!(radius > 0.0)) throw Error(ErrorKind::BadPreset, "circle radius must be positive");
  return ParamCurve::from_function(Domain::circle(0, 2 * kPi), n, [radius](double t) {
    return v3(radius * std::cos(t), radius * std::sin(t), 0.0);
  });
}

ParamCurve preset_helix(int n, double radius, double pitch, double turns) {
  check_intervals(n);
  if (!(radius > 0.0) || !(turns > 0.0)) throw Error(ErrorKind::BadPreset, "helix needs radius > 0 and turns > 0");
  const double c = std::hypot(radius, pitch);
  return ParamCurve::from_function(Domain::interval(0, 2 * kPi * turns * c), n, [=](double s) {
    const double t = s / c;
    return v3(radius * std::cos(t), radius * std::sin(t), pitch * t);
  });
}

ParamCurve preset_torus_knot(int n, int p, int q, double R, double r) {
  check_intervals(n);
  if (p < 1 || q < 1 || std::gcd(p, q) != 1) throw Error(ErrorKind::BadPreset, "torus knot needs coprime p, q >= 1");
  if (!(R > r) || !(r > 0.0)) throw Error(ErrorKind::BadPreset, "torus knot needs R > r > 0");
  return torus_knot(n, p, q, R, r, {}, 0, 0.0);
}

ParamCurve preset_fourier_knot(int n, std::uint64_t seed, int modes, double amplitude) {
  check_intervals(n);
  if (modes < 1 || modes > 64) throw Error(ErrorKind::BadPreset, "fourier knot needs 1 <= modes <= 64");
  if (!(amplitude >= 0.0)) throw Error(ErrorKind::BadPreset, "fourier knot amplitude must be non-negative");
  std::mt19937_64 gen(seed);
  std::vector<double> coef(static_cast<std::size_t>(6 * modes));
  for (int m = 1; m <= modes; ++m)
    for (int c = 0; c < 6; ++c) coef[static_cast<std::size_t>(6 * (m - 1) + c)] = unit_uniform(gen) / (m * m);
  for (double scale = amplitude; scale > 1e-3 * amplitude; scale *= 0.5) {
    ParamCurve f = torus_knot(n, 2, 3, 2.0, 1.0, coef, modes, scale);
    if (embedded_and_curved(f)) return f;
  }
  return preset_torus_knot(n);
}

ParamCurve make_preset(const std::string& name, int n, const std::map<std::string, std::string>& params) {
  static const std::map<std::string, std::set<std::string>> known = {
      {"circle", {"r"}},
      {"helix", {"radius", "pitch", "turns"}},
      {"torus_knot", {"p", "q", "R", "r"}},
      {"fourier_knot", {"seed", "modes", "amplitude"}},
  };
  const auto it = known.find(name);
  if (it == known.end()) throw Error(ErrorKind::BadPreset, "unknown preset '" + name + "'");
  for (const auto& [key, value] : params)
    if (!it->second.count(key)) throw Error(ErrorKind::BadPreset, "preset " + name + " has no parameter '" + key + "'");
  auto num = [&](const std::string& key, double fallback) {
    const auto p = params.find(key);
    if (p == params.end()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(p->second, &used);
      if (used != p->second.size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadPreset, "bad value '" + p->second + "' for " + key);
    }
  };
  auto integer = [&](const std::string& key, long long fallback) {
    const double v = num(key, static_cast<double>(fallback));
    if (v != std::floor(v)) throw Error(ErrorKind::BadPreset, key + " must be an integer");
    return static_cast<long long>(v);
  };
  if (name == "circle") return preset_circle(n, num("r", 1.0));
  if (name == "helix") return preset_helix(n, num("radius", std::sqrt(0.5)), num("pitch", std::sqrt(0.5)), num("turns", 1.0));
  if (name == "torus_knot")
    return preset_torus_knot(n, static_cast<int>(integer("p", 2)), static_cast<int>(integer("q", 3)), num("R", 2.0), num("r", 1.0));
  std::uint64_t seed = 0;
  if (const auto p = params.find("seed"); p != params.end()) {
    try {
      std::size_t used = 0;
      seed = std::stoull(p->second, &used);
      if (used != p->second.size() || p->second.front() == '-') throw std::invalid_argument("seed");
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadPreset, "bad value '" + p->second + "' for seed");
    }
  }
  return preset_fourier_knot(n, seed, static_cast<int>(integer("modes", 4)),
                             num("amplitude", 0.3));
}

}  // namespace prescurv
