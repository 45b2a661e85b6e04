#pragma once

// Binary gold-stripe grating on a substrate: scalar Rayleigh expansion of the
// reflected field and its effect on the trap.

#include "levisim/beam_optics.hpp"
#include "levisim/gas_damping.hpp"
#include "levisim/trap_model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace levisim {

/// Stripes run along y and repeat along x; a stripe is centred on x = 0.
struct GratingSpec {
  double period = 600e-9;        // m
  double stripe_width = 300e-9;  // m
  Complex r_stripe = fresnel_reflection(SurfaceSpec::gold(0.0), 1550e-9);
  Complex r_groove = fresnel_reflection(SurfaceSpec::sapphire(0.0), 1550e-9);
  double z = 0.0;     // plane position, m
  int max_order = 20;  // orders -max_order..max_order are kept

  void validate() const;
};

struct GratingOrder {
  int n = 0;
  Complex amplitude;
  double kx = 0.0;     // 2 pi n / period, 1/m
  double kappa = 0.0;  // evanescent decay, 1/m (0 for propagating)
  double kz = 0.0;     // axial wavenumber of a propagating order, 1/m
};

/// Fourier coefficients of the square-wave reflection profile. Throws
/// PropagatingOrder when period >= wavelength.
std::vector<GratingOrder> reflection_orders(const GratingSpec& grating, double wavelength);

/// Reflector in the grating frame, ready for the standing-wave model.
PlanarReflector grating_reflector(const GratingSpec& grating, double wavelength);

/// Intensity (W/m^2) on the beam axis at the given height above the grating
/// when the axis sits at lateral grating coordinate x.
double nearfield_intensity(const GratingSpec& grating, const BeamParams& beam, double x,
                           double height);

struct ScanPoint {
  double x = 0.0;           // beam-axis position over the grating, m
  double fx = 0.0;          // Hz, NaN when no well was found
  double separation = 0.0;  // well to grating plane, m
  Vec3 equilibrium = Vec3::Zero();
  std::string error;        // empty on success
};

/// Lateral trap frequency of well N while the grating moves under the beam.
/// The grating plane is placed so that the focus sits on the nominal N-th
/// antinode (grating.z is ignored). Per-point failures are reported in
/// ScanPoint::error rather than thrown.
std::vector<ScanPoint> scan_trap_frequency(const GratingSpec& grating, const BeamParams& beam,
                                           const DumbbellGeom& geom, int well_index,
                                           const std::vector<double>& xs, unsigned threads = 1);

/// Period of the strongest Fourier component of a sampled profile (mean
/// removed), refined between the sampled resolution and the record length.
double dominant_period(const std::vector<double>& xs, const std::vector<double>& ys);

/// Peak-to-peak excursion of the successful scan points.
double modulation_depth(const std::vector<ScanPoint>& scan);

enum class RotationSurface { FreeSpace, Sapphire, Grating };
const char* to_string(RotationSurface s);

struct RotationCurve {
  RotationSurface surface;
  double field_norm2 = 0.0;  // |E|^2 at the first well (grating: averaged over x)
  double torque = 0.0;       // optical torque at eta = 1, N m
  std::vector<double> pressure_torr;
  std::vector<double> frequency;  // f_rot at eta = 1, Hz
};

/// Driven rotation frequency f = M / (2 pi I gamma) versus pressure in the
/// first well of each surface, with a circularly polarised beam.
std::vector<RotationCurve> grating_rotation_curve(const BeamParams& beam, const DumbbellGeom& geom,
                                                  const Environment& env,
                                                  const GratingSpec& grating,
                                                  const std::vector<double>& pressures_torr,
                                                  const std::vector<RotationSurface>& surfaces);

/// f_rot at eta = 1 for one curve at an arbitrary pressure.
double rotation_frequency_at(const RotationCurve& curve, const DumbbellGeom& geom,
                             const Environment& env, double pressure_torr);

/// Torque efficiency that makes the curve pass through (p_torr, f_target).
double calibrate_rotation(const RotationCurve& curve, const DumbbellGeom& geom,
                          const Environment& env, double p_torr, double f_target);

/// Least-squares slope of log f against log P.
double loglog_slope(const std::vector<double>& p, const std::vector<double>& f);

}  // namespace levisim
