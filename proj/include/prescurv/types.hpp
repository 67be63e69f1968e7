#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>

namespace prescurv {

/// Largest supported ambient dimension. Points live on the stack up to this size.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

enum class ErrorKind {
  DegenerateCurve,
  NonpositiveDensity,
  DomainMismatch,
  BadK,
  OutsideBall,
  NegativeCoefficient,
  RTooLarge,
  CannotSegment,
  SpeedMarginViolated,
  CapTooSmall,
  NoConvergence,
  RUnderflow,
  PerturbationFailed,
  JunctionMismatch,
  InfeasibleMargin,
  NotEmbedded,
  CertificateFailed,
  BadPreset,
  UnsupportedFormat,
  ParseError,
  Io,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Unit vector along v; throws DegenerateCurve on (near) zero input.
Vec normalized(const Vec& v);

/// Component of w orthogonal to the unit vector n.
inline Vec project_out(const Vec& w, const Vec& n) { return w - n * n.dot(w); }

/// Derivatives of n(t) = h(t)/|h(t)| from derivatives of h. Entries past `order` are left empty.
struct NormalizedDerivs {
  Vec n, dn, ddn;
};
NormalizedDerivs normalize_with_derivs(const Vec& h, const Vec& dh, const Vec& ddh, int order);

}  // namespace prescurv
