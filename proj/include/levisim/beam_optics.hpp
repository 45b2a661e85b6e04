#pragma once

// Paraxial Gaussian beam at normal incidence on a planar reflector.
//
// The beam propagates along +z; the reflecting plane sits at z = z_s with its
// normal facing the incoming beam. The reflected wave is the mirror image of
// the incident paraxial beam, optionally multiplied by a laterally periodic
// response (used for sub-wavelength gratings).

#include "levisim/core.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace levisim {

using Jones = Eigen::Vector2cd;

struct BeamParams {
  double wavelength = 1550e-9;  // m
  double power = 0.200;         // W
  double waist = 1.0e-6;        // w0, m
  Vec3 focus = Vec3::Zero();    // m
  Jones polarization = Jones(1.0, 0.0);

  double wavenumber() const { return 2.0 * phys::pi / wavelength; }
  double rayleigh_range() const { return phys::pi * waist * waist / wavelength; }
  /// On-axis intensity at the focus, 2P / (pi w0^2).
  double peak_intensity() const { return 2.0 * power / (phys::pi * waist * waist); }
  /// Field amplitude |E| at the focus.
  double peak_amplitude() const;

  /// Throws InvalidBeam when the paraxial model does not apply.
  void validate() const;
};

/// Jones vector after a quarter-wave plate at angle eta (0 = linear x,
/// pi/4 = circular) acting on x-polarised input.
Jones waveplate_jones(double eta);

enum class SurfaceKind { None, FlatDielectric, FlatMetal };

struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::FlatDielectric;
  Complex index{1.746, 0.0};  // n + i kappa at the beam wavelength
  double z = 0.0;             // plane position, m

  static SurfaceSpec none() { return {SurfaceKind::None, {1.0, 0.0}, 0.0}; }
  static SurfaceSpec sapphire(double z) { return {SurfaceKind::FlatDielectric, {1.746, 0.0}, z}; }
  static SurfaceSpec gold(double z) { return {SurfaceKind::FlatMetal, {0.52, 10.7}, z}; }
};

inline constexpr double sapphire_index = 1.746;
inline const Complex gold_index{0.52, 10.7};

/// One term of the reflected-field expansion r(x) = sum_n c_n exp(i q_n x).
/// kappa == 0 marks the specular order, which rides on the mirror-image beam;
/// kappa > 0 orders are evanescent and decay as exp(-kappa d) from the plane.
struct ReflectionOrder {
  Complex amplitude;
  double kx = 0.0;
  double kappa = 0.0;
};

struct PlanarReflector {
  double z = 0.0;
  std::vector<ReflectionOrder> orders;

  /// Uniform reflector with a single specular order.
  static PlanarReflector flat(double z, Complex r) { return {z, {{r, 0.0, 0.0}}}; }

  /// Response seen by a beam whose axis sits at lateral coordinate x0 of the
  /// reflector's own frame.
  PlanarReflector seen_from(double x0) const;

  Complex specular_amplitude() const;
};

struct ComplexField {
  CVec3 E = CVec3::Zero();  // V/m
  double k = 0.0;           // 1/m

  /// Cycle-averaged intensity (c eps0 / 2) |E|^2, W/m^2.
  double intensity() const { return 0.5 * phys::c * phys::eps0 * E.squaredNorm(); }
};

/// Normal-incidence Fresnel amplitude r = (1 - n) / (1 + n).
Complex fresnel_reflection(const SurfaceSpec& surface, double wavelength);

/// Reflector for a flat surface; std::nullopt when surface.kind == None.
std::optional<PlanarReflector> make_reflector(const SurfaceSpec& surface, double wavelength);

ComplexField focused_field(const BeamParams& beam, const Vec3& point);
ComplexField total_field(const BeamParams& beam, const SurfaceSpec& surface, const Vec3& point);
ComplexField total_field(const BeamParams& beam, const PlanarReflector* reflector,
                         const Vec3& point);

/// Scalar envelope value and its gradient. The vector field is
/// polarization * value in the transverse plane.
struct ScalarSample {
  Complex value;
  Eigen::Vector3cd grad;

  /// |value|^2 and its gradient.
  double norm2() const { return std::norm(value); }
  Vec3 norm2_grad() const { return 2.0 * (std::conj(value) * grad).real(); }
};

/// Incident beam only. No validity checks; callers validate once up front.
ScalarSample incident_scalar(const BeamParams& beam, const Vec3& point);
/// Incident plus reflected (reflector may be null).
ScalarSample standing_scalar(const BeamParams& beam, const PlanarReflector* reflector,
                             const Vec3& point);

}  // namespace levisim
