#pragma once

// Pairwise-summation estimate of the Casimir interaction between a
// nanodumbbell and a gold-stripe grating, with a retarded r^-7 pair kernel
// and a single calibrated coefficient.

#include "levisim/trap_model.hpp"

#include <vector>

namespace levisim {

struct CasimirMesh {
  int sphere_radial = 6;    // Gauss-Legendre nodes in r per sphere
  int sphere_polar = 8;     // Gauss-Legendre nodes in cos(polar angle)
  int sphere_azimuth = 16;  // uniform nodes in azimuth (even)
  int stripe_x = 12;        // Gauss-Legendre nodes across one stripe
  int stripe_z = 6;         // Gauss-Legendre nodes through the stripe thickness

  CasimirMesh refined() const;
};

/// Stripes run along y (treated as infinitely long) and repeat along x with
/// their top faces at z = 0; the dumbbell centre sits at height `separation`.
/// theta is the angle between the long axis and the stripe direction.
struct CasimirConfig {
  double separation = 370e-9;       // m, centre of dumbbell to grating top
  double theta_deg = 135.0;
  double stripe_width = 300e-9;     // m
  double period = 600e-9;           // m
  double stripe_thickness = 100e-9; // m
  double lateral_offset = 0.0;      // dumbbell centre relative to a stripe centre, m
  int periods = 15;                 // stripes kept (odd, >= 7)
  double c_cal = 1.0;               // pair coefficient, J m
  double substrate_weight = 0.0;    // half-space below the stripes, relative to gold
  double mesh_tolerance = 0.02;     // relative energy change allowed under refinement
  CasimirMesh mesh;
  std::vector<double> widths;       // width sweep, m

  void validate(const DumbbellGeom& geom) const;
};

enum class CasimirBody { Dumbbell, Sphere };

/// The sphere control has the dumbbell's total volume.
double body_radius(const DumbbellGeom& geom, CasimirBody body);

/// E = -C sum_ij dV_i dV_j / |r_i - r_j|^7, J. The sum along the stripes is
/// done in closed form. Bit-identical for any thread count.
double pairwise_energy(const CasimirConfig& cfg, const DumbbellGeom& geom,
                       CasimirBody body = CasimirBody::Dumbbell, unsigned threads = 1);

struct MeshReport {
  double energy;
  double refined_energy;
  double mesh_change;    // relative
  double period_change;  // relative, doubling the stripe count
};

/// Throws MeshNotConverged when doubling every node count or the number of
/// stripes moves the energy by more than cfg.mesh_tolerance.
MeshReport check_mesh_convergence(const CasimirConfig& cfg, const DumbbellGeom& geom,
                                  CasimirBody body = CasimirBody::Dumbbell, unsigned threads = 1);

/// -dE/dtheta at cfg.theta_deg by a two-sided virtual rotation, N m/rad.
double casimir_torque_at(const CasimirConfig& cfg, const DumbbellGeom& geom,
                         CasimirBody body = CasimirBody::Dumbbell, unsigned threads = 1,
                         double delta_deg = 0.05);

struct TorqueRow {
  double theta_deg;
  double energy;
  double torque;
};

/// Energy and torque on a theta grid (steps of at most 5 degrees).
std::vector<TorqueRow> casimir_torque_sweep(const CasimirConfig& cfg, const DumbbellGeom& geom,
                                            const std::vector<double>& thetas_deg,
                                            CasimirBody body = CasimirBody::Dumbbell,
                                            unsigned threads = 1);

/// Angle in [lo, hi] degrees where |T| is largest.
double torque_extremum(const CasimirConfig& cfg, const DumbbellGeom& geom, double lo_deg,
                       double hi_deg, unsigned threads = 1);

/// F = -dE/dd at cfg.separation, N. Negative means attraction.
double casimir_force_at(const CasimirConfig& cfg, const DumbbellGeom& geom, unsigned threads = 1);

struct ForceRow {
  double separation;
  double force;
  double torque;
};

/// Force and torque (at cfg.theta_deg) on a separation grid (steps of at most 10 nm).
std::vector<ForceRow> casimir_force_sweep(const CasimirConfig& cfg, const DumbbellGeom& geom,
                                          const std::vector<double>& separations,
                                          unsigned threads = 1);

/// Coefficient giving |F(cfg.separation)| = target_force.
double calibrate_casimir(const CasimirConfig& cfg, const DumbbellGeom& geom, double target_force,
                         unsigned threads = 1);

struct WidthRow {
  double width;
  double torque;
};

struct WidthSweep {
  std::vector<WidthRow> rows;
  double argmax_width = 0.0;  // parabolic refinement around the largest |T|
  bool interior = false;      // largest |T| is not at either end of the grid
};

WidthSweep width_sweep(const CasimirConfig& cfg, const DumbbellGeom& geom,
                       const std::vector<double>& widths, unsigned threads = 1);

}  // namespace levisim
