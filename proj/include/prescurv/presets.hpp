#pragma once

#include "prescurv/curve.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace prescurv {

/// Circle of radius r in the xy-plane, t in [0, 2 pi).
ParamCurve preset_circle(int intervals, double radius = 1.0);

/// Unit-speed helix of the given radius and pitch (height per radian), `turns` turns.
ParamCurve preset_helix(int intervals, double radius = 0.70710678118654752, double pitch = 0.70710678118654752,
                        double turns = 1.0);

/// (p, q) torus knot on the torus with radii R > r, t in [0, 2 pi).
ParamCurve preset_torus_knot(int intervals, int p = 2, int q = 3, double R = 2.0, double r = 1.0);

/// Trefoil with a seeded Fourier perturbation of the given number of modes. The amplitude is
/// halved until the curve is embedded with positive curvature.
ParamCurve preset_fourier_knot(int intervals, std::uint64_t seed, int modes = 4, double amplitude = 0.3);

/// Preset by name with string parameters; throws BadPreset for unknown names or parameters.
ParamCurve make_preset(const std::string& name, int intervals, const std::map<std::string, std::string>& params);

}  // namespace prescurv
