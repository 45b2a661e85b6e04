#pragma once

// Free-molecular gas damping of spheres and touching-sphere dumbbells.

#include "levisim/core.hpp"
#include "levisim/trap_model.hpp"

namespace levisim {

struct Environment {
  Pressure pressure = Pressure::torr(1.5);
  double temperature = 300.0;        // K
  double gas_mass = 4.81e-26;        // kg, mean molecular mass of air
  double molecule_diameter = 3.7e-10;  // m, kinetic diameter of air
  double accommodation = 1.0;        // 1 = fully diffuse, 0 = specular

  /// Mean thermal speed sqrt(8 kB T / (pi m_gas)).
  double mean_speed() const;
  double number_density() const;
  /// Hard-sphere mean free path kB T / (sqrt(2) pi d_m^2 P).
  double mean_free_path() const;
  void validate() const;

  Environment at(Pressure p) const {
    Environment e = *this;
    e.pressure = p;
    return e;
  }
};

/// True when the mean free path exceeds ten times the given length.
bool free_molecular(const Environment& env, double length);

/// Dimensionless drag coefficients of a body made of unit spheres, in units
/// of n m_gas vbar a^2 (force per velocity) and n m_gas vbar a^4 (torque per
/// angular velocity).
struct ShapeFactors {
  double parallel = 0.0;       // translation along the body axis
  double perpendicular = 0.0;  // translation across it
  double rotation = 0.0;       // rotation about a transverse axis through the centre
};

struct QuadratureOptions {
  int n_theta = 32;
  int n_phi = 64;
  int cap_mu = 8;      // Gauss points across the shadowing cap
  int cap_phi = 16;    // azimuthal points around the cap
  double tolerance = 5e-3;  // allowed relative change on refinement
};

/// Drag of one sphere (pair = false) or two touching spheres (pair = true).
/// Flux is integrated over the surface with diffuse re-emission; molecules
/// re-emitted by one sphere towards the other are followed to first order in
/// the body velocity. Specularly reflected molecules are not re-traced.
/// Throws QuadratureNonConvergence if refining the surface sampling (about
/// twice as many samples) moves any coefficient by more than the tolerance.
ShapeFactors shape_factors(bool pair, double accommodation,
                           const QuadratureOptions& options = QuadratureOptions{});

/// Single evaluation at a fixed resolution, no convergence check.
ShapeFactors shape_factors_at(bool pair, double accommodation, const QuadratureOptions& options);

struct DampingRates {
  double parallel = 0.0;       // CoM along the dumbbell axis, 1/s
  double perpendicular = 0.0;  // CoM across the axis, 1/s
  double rotational = 0.0;     // about a transverse axis, 1/s

  double tau() const { return 1.0 / rotational; }
  /// Per lab axis rates for a dumbbell whose axis is the given unit vector.
  Vec3 lab_rates(const Vec3& axis) const;
};

/// Epstein drag rate (8/pi) P / (rho a vbar) (1 + pi alpha / 8).
double sphere_com_damping(const Environment& env, double radius, double density);

/// Spin damping of a single sphere, 10 alpha P / (pi rho a vbar).
double sphere_rotational_damping(const Environment& env, double radius, double density);

DampingRates dumbbell_damping(const Environment& env, const DumbbellGeom& geom,
                              const QuadratureOptions& options = QuadratureOptions{});

struct RotationalDamping {
  double gamma;  // 1/s
  double tau;    // s
};
RotationalDamping rotational_damping(const Environment& env, const DumbbellGeom& geom);

/// Multiplicative correction for a surface at distance d. Exactly 1 while
/// the mean free path exceeds both ten particle sizes and d; otherwise the
/// leading continuum wall correction 1 + (9/8)(a/d) for a sphere of radius a.
double proximity_correction(const Environment& env, double separation, double particle_radius);

}  // namespace levisim
