#include "prescurv/types.hpp"

#include <cmath>

namespace prescurv {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateCurve: return "DegenerateCurve";
    case ErrorKind::NonpositiveDensity: return "NonpositiveDensity";
    case ErrorKind::DomainMismatch: return "DomainMismatch";
    case ErrorKind::BadK: return "BadK";
    case ErrorKind::OutsideBall: return "OutsideBall";
    case ErrorKind::NegativeCoefficient: return "NegativeCoefficient";
    case ErrorKind::RTooLarge: return "RTooLarge";
    case ErrorKind::CannotSegment: return "CannotSegment";
    case ErrorKind::SpeedMarginViolated: return "SpeedMarginViolated";
    case ErrorKind::CapTooSmall: return "CapTooSmall";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::RUnderflow: return "RUnderflow";
    case ErrorKind::PerturbationFailed: return "PerturbationFailed";
    case ErrorKind::JunctionMismatch: return "JunctionMismatch";
    case ErrorKind::InfeasibleMargin: return "InfeasibleMargin";
    case ErrorKind::NotEmbedded: return "NotEmbedded";
    case ErrorKind::CertificateFailed: return "CertificateFailed";
    case ErrorKind::BadPreset: return "BadPreset";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::Io: return "Io";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Vec normalized(const Vec& v) {
  const double r = v.norm();
  if (!(r > 1e-300)) throw Error(ErrorKind::DegenerateCurve, "cannot normalize a zero vector");
  return v / r;
}

NormalizedDerivs normalize_with_derivs(const Vec& h, const Vec& dh, const Vec& ddh, int order) {
  NormalizedDerivs out;
  const double r = h.norm();
  if (!(r > 1e-300)) throw Error(ErrorKind::DegenerateCurve, "vanishing derivative");
  out.n = h / r;
  if (order < 1) return out;
  const double dr = out.n.dot(dh);
  out.dn = (dh - out.n * dr) / r;
  if (order < 2) return out;
  const double ddr = out.dn.dot(dh) + out.n.dot(ddh);
  out.ddn = (ddh - 2.0 * out.dn * dr - out.n * ddr) / r;
  return out;
}

}  // namespace prescurv
