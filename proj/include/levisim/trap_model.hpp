#pragma once

// Optical potential of a silica nanodumbbell in a (partial) standing wave.

#include "levisim/beam_optics.hpp"
#include "levisim/core.hpp"

#include <optional>
#include <vector>

namespace levisim {

/// Two touching dielectric spheres.
struct DumbbellGeom {
  double sphere_diameter = 144e-9;  // m
  double density = 2200.0;          // kg/m^3
  double permittivity = 2.1;        // silica near 1550 nm

  double radius() const { return 0.5 * sphere_diameter; }
  double sphere_mass() const;
  double mass() const { return 2.0 * sphere_mass(); }
  /// Centre-to-centre distance; equals the tip radius L/2 for touching spheres.
  double center_separation() const { return sphere_diameter; }
  double half_length() const { return sphere_diameter; }
  /// Moment of inertia about a transverse axis through the centre of mass.
  double moment_of_inertia() const;
  /// Moment of inertia about the long axis.
  double spin_inertia() const;
};

struct RigidInertia {
  double mass;
  double transverse;
  double spin;
};

/// Inertia of two spheres of radius a with masses m1, m2 whose centres are a
/// distance D apart, about their common centre of mass.
RigidInertia two_sphere_inertia(double m1, double m2, double radius, double separation);

struct PolarizabilityTensor {
  Complex parallel;       // along the dumbbell axis, C m^2 / V
  Complex perpendicular;  // transverse
  Complex sphere;         // isolated-sphere value

  /// Re(e^dagger alpha e) for unit axis and polarization e, total tensor.
  double effective(const Vec3& axis, const CVec3& e) const;
  Complex anisotropy() const { return parallel - perpendicular; }
};

/// Clausius-Mossotti point-dipole polarizability 4 pi eps0 a^3 (eps-1)/(eps+2).
/// With radiation_reaction the standard correction alpha / (1 - i k^3 alpha / (6 pi eps0))
/// is applied at wavenumber k.
Complex sphere_polarizability(double radius, double permittivity, bool radiation_reaction = false,
                              double wavenumber = 0.0);

/// Static coupled-dipole polarizability of the touching pair.
PolarizabilityTensor dumbbell_polarizability(const DumbbellGeom& geom);

struct Pose {
  Vec3 com = Vec3::Zero();
  Vec3 axis = Vec3::UnitX();
};

struct PotentialSample {
  double energy = 0.0;  // J
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

/// Time-averaged dipole potential U = -1/4 sum_i Re(alpha_i) |E(r_i)|^2 over
/// the two sphere centres, with each sphere carrying half the pair tensor.
class TrapPotential {
public:
  TrapPotential(BeamParams beam, std::optional<PlanarReflector> reflector, DumbbellGeom geom,
                bool gravity = false);

  double energy(const Pose& pose) const;
  PotentialSample evaluate(const Pose& pose) const;

  /// |E|^2 (V^2/m^2) at a point, polarization included.
  double field_norm2(const Vec3& point) const;

  const BeamParams& beam() const { return beam_; }
  const PlanarReflector* reflector() const { return reflector_ ? &*reflector_ : nullptr; }
  const DumbbellGeom& geom() const { return geom_; }
  const PolarizabilityTensor& tensor() const { return tensor_; }
  CVec3 polarization() const { return pol_; }

private:
  BeamParams beam_;
  std::optional<PlanarReflector> reflector_;
  DumbbellGeom geom_;
  PolarizabilityTensor tensor_;
  CVec3 pol_;
  bool gravity_;
};

struct TrapFrequencies {
  double fx = 0.0;
  double fy = 0.0;
  double fz = 0.0;
  double ftorsion = 0.0;
  Vec3 stiffness = Vec3::Zero();  // N/m
  double torsional_stiffness = 0.0;  // N m / rad
};

struct TrapWell {
  int index = 0;               // 1 = closest to the surface
  double z = 0.0;              // absolute equilibrium position, m
  double separation = 0.0;     // surface - z, m (distance from focus without a surface)
  double depth_kbt = 0.0;      // barrier height in units of kB * 300 K
  TrapFrequencies freqs;
};

struct WellScan {
  double z_min;
  double z_max;
  double step;
};

/// Real unit vector along the major axis of a polarization ellipse (xy plane).
Vec3 polarization_axis(const Jones& polarization);

/// Default scan: 3 lambda back from the surface (or +-3 lambda about the focus).
WellScan default_scan(const TrapPotential& potential);

/// Local minima of U along the beam axis, axis-aligned with the polarization.
std::vector<TrapWell> find_wells(const TrapPotential& potential, const WellScan& scan);
std::vector<TrapWell> find_wells(const TrapPotential& potential);

/// Curvatures at an equilibrium by Richardson-extrapolated central differences.
TrapFrequencies trap_frequencies(const TrapPotential& potential, const Pose& equilibrium,
                                 double step = 1e-9, double angle_step = 1e-3);

/// Frequencies of the well nearest the focus.
TrapWell well_near_focus(const TrapPotential& potential);

struct EnhancementRow {
  int well_index;
  double separation;  // m
  double rx;
  double ry;
  double rz;
  TrapFrequencies freqs;
};

/// Enhancement f(d)/f_free for wells loaded one at a time: the surface is
/// placed so that the focus sits on the nominal N-th antinode.
std::vector<EnhancementRow> enhancement_ratio(const BeamParams& beam, const SurfaceSpec& surface,
                                              const DumbbellGeom& geom,
                                              const std::vector<int>& well_indices);

/// Surface plane position that puts the focus on the nominal N-th antinode.
double loading_surface_position(const BeamParams& beam, int well_index);

enum class DriveMode { Linear, Circular };

/// Torque about the beam axis for a dumbbell at angle theta from the linear
/// polarization direction. field_norm2 is |E|^2 at the particle.
double optical_torque(const PolarizabilityTensor& tensor, double field_norm2, double theta,
                      DriveMode mode, double eta_cal = 1.0);

struct WaistCalibration {
  double waist;
  double residual;
  TrapFrequencies free_space;
};

struct FrequencyTargets {
  std::optional<double> fx;
  std::optional<double> fy;
  std::optional<double> fz;
};

/// Least-squares choice of the beam waist so the free-space trap frequencies
/// match the targets (relative residuals).
WaistCalibration calibrate_waist(const BeamParams& beam, const DumbbellGeom& geom,
                                 const FrequencyTargets& targets, double w_lo = 0.5e-6,
                                 double w_hi = 3e-6);

}  // namespace levisim
