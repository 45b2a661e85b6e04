#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace levisim {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using Complex = std::complex<double>;

namespace phys {
inline constexpr double pi = std::numbers::pi;
inline constexpr double kB = 1.380649e-23;          // J/K
inline constexpr double eps0 = 8.8541878128e-12;    // F/m
inline constexpr double c = 2.99792458e8;           // m/s
inline constexpr double g = 9.80665;                // m/s^2
inline constexpr double pa_per_torr = 101325.0 / 760.0;
}  // namespace phys

/// Gas pressure. Figures quote Torr; the physics works in Pa.
class Pressure {
public:
  constexpr Pressure() = default;
  static constexpr Pressure torr(double p) { return Pressure(p * phys::pa_per_torr); }
  static constexpr Pressure pascal(double p) { return Pressure(p); }

  constexpr double in_pa() const { return pa_; }
  constexpr double in_torr() const { return pa_ / phys::pa_per_torr; }

  constexpr Pressure operator*(double s) const { return Pressure(pa_ * s); }
  constexpr auto operator<=>(const Pressure&) const = default;

private:
  constexpr explicit Pressure(double pa) : pa_(pa) {}
  double pa_ = 0.0;
};

enum class ErrorKind {
  InvalidBeam,
  NoSurface,
  CouplingDivergence,
  NoWellFound,
  UnstableWell,
  RegimeViolation,
  QuadratureNonConvergence,
  ParticleLost,
  NonFinite,
  TooShort,
  NoConvergence,
  NoPeak,
  PropagatingOrder,
  MeshNotConverged,
  Interpenetration,
  InvalidArgument,
  ConfigError,
  IoError,
};

const char* to_string(ErrorKind kind);

/// Every failure surfaced by the library carries a kind so the CLI can map
/// it onto an exit status and a machine-readable error record.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline double sq(double x) { return x * x; }

}  // namespace levisim
