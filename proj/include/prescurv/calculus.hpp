#pragma once

#include "prescurv/curve.hpp"

namespace prescurv {

/// sup|f| + sup|f'| over a dense sampling of the reconstruction.
double c1_norm(const ParamCurve& f);
double c1_norm(const Diffeo& phi);

struct UnitSpeed {
  ParamCurve g;  // lambda * f o phi, unit speed on the domain of f
  double lambda = 1.0;
  Diffeo phi;
};

/// Arclength reparametrization scaled so the result has unit speed on the same domain.
/// With scale = false lambda is fixed to 1 and only the parametrization changes.
UnitSpeed resample_unit_speed(const ParamCurve& f, int intervals = 0, bool scale = true);

/// Length of f by composite Gauss-Legendre on the grid intervals.
double length(const ParamCurve& f);

/// Cumulative arclength at the grid nodes (first entry 0, last entry the length).
std::vector<double> cumulative_length(const ParamCurve& f);

SphericalCurve tantrix(const ParamCurve& f);

double curvature_at(const ParamCurve& f, double t);
ScalarFn curvature(const ParamCurve& f);

/// sup over a dense sampling of | |f'| - 1 |.
double speed_deviation(const ParamCurve& f, double speed = 1.0);
double min_speed(const ParamCurve& f);

Vec average(const ParamCurve& f);

struct MassCm {
  double mass = 0.0;
  Vec cm;
};

MassCm mass_and_cm(const ParamCurve& f, const ScalarFn& rho);

/// Inverse of t -> int_a^t rho |f'|, as a diffeo from [0, mass] onto the domain of f.
Diffeo mass_reparam(const ParamCurve& f, const ScalarFn& rho, int intervals = 0);

/// f o phi sampled on the source grid of phi.
ParamCurve compose(const ParamCurve& f, const Diffeo& phi);

/// base + int_a^t T, sampled on the grid of T.
ParamCurve integrate_tantrix(const SphericalCurve& T, const Vec& base);

/// c1_norm(f - g); throws DomainMismatch if the domains differ.
double c1_distance(const ParamCurve& f, const ParamCurve& g);

}  // namespace prescurv
