#pragma once

// Spectral estimation and the sensitivity figures derived from it.

#include "levisim/gas_damping.hpp"
#include "levisim/langevin.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace levisim {

enum class Window { Hann, Rectangular };
const char* to_string(Window w);

struct PsdEstimate {
  std::vector<double> frequency;  // Hz, 0 .. Nyquist
  std::vector<double> density;    // single-sided, unit^2 / Hz
  std::size_t segments = 0;
  std::size_t segment_length = 0;
  Window window = Window::Hann;

  double df() const { return frequency.size() > 1 ? frequency[1] - frequency[0] : 0.0; }
  /// Sum of density * df over [f_lo, f_hi].
  double integrate(double f_lo = 0.0, double f_hi = 1e300) const;
};

/// Welch estimate with per-segment mean removal. segment_length must be a
/// power of two no longer than the series (TooShort otherwise).
PsdEstimate welch_psd(const std::vector<double>& x, double dt, std::size_t segment_length,
                      double overlap = 0.5, Window window = Window::Hann);
PsdEstimate welch_psd(const TimeSeries& ts, const std::string& channel,
                      std::size_t segment_length, double overlap = 0.5,
                      Window window = Window::Hann);

/// Thermal damped-oscillator line shape, single-sided, normalised so that
/// its integral over f > 0 equals `area`:
///   S(f) = area * (gamma f0^2 / pi^2) / ((f^2 - f0^2)^2 + f^2 gamma^2 / (4 pi^2))
/// with f0 in Hz and gamma the energy-independent amplitude damping rate in 1/s.
double lorentzian(double f, double f0, double gamma, double area);

struct LorentzianFit {
  double f0 = 0.0;     // Hz
  double gamma = 0.0;  // 1/s
  double area = 0.0;   // unit^2
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();  // of (f0, gamma, area)
  double rms_log_residual = 0.0;
  int evaluations = 0;
  bool flagged = false;  // residual too large for a single resonance
};

/// Fit in log space over [f_lo, f_hi]. Throws NoConvergence if the
/// minimiser fails within 200 iterations.
LorentzianFit lorentzian_fit(const PsdEstimate& psd, double f_lo, double f_hi);

struct RotationPeak {
  double signal_frequency;    // Hz, where the detector sees the line
  double rotation_frequency;  // Hz, half of it
  double prominence;          // peak over median density
};

/// Largest line in the spectrum; the optical signal of a dumbbell appears at
/// twice the mechanical rotation frequency. NoPeak below min_prominence.
RotationPeak detect_rotation_peak(const PsdEstimate& psd, double min_prominence = 20.0);

/// Detector record for a dumbbell spinning at f_rot: sin(2 phi(t)) plus
/// white noise of the given standard deviation.
std::vector<double> rotation_signal(double f_rot, double sample_rate, std::size_t n,
                                    double noise_sigma, std::uint64_t seed);

/// sqrt(4 kB T I gamma), N m / sqrt(Hz).
double thermal_torque_sensitivity(double temperature, double inertia, double gamma);

/// I sqrt(gamma^2 + Omega^2) S_noise^{1/2}(Omega).
double torque_sensitivity(double inertia, double gamma, double omega, double sqrt_s_noise);

struct TorqueSpectrum {
  std::vector<double> frequency;    // Hz
  std::vector<double> sensitivity;  // N m / sqrt(Hz)
  double band_average = 0.0;        // mean over [f_lo, f_hi]
};
/// Frequency-resolved sensitivity from the PSD of the angular velocity.
TorqueSpectrum torque_sensitivity_spectrum(const PsdEstimate& omega_psd, double inertia,
                                           double gamma, double f_lo, double f_hi);

/// sqrt(4 kB T m Gamma_i) per axis.
Vec3 force_sensitivity(double mass, double temperature, const Vec3& rates);

struct SensitivityPoint {
  double pressure_torr;
  double gamma;
  double torque;  // thermal limit, N m / sqrt(Hz)
};
/// Thermal torque sensitivity of the dumbbell from the gas model at each pressure.
std::vector<SensitivityPoint> torque_sensitivity_curve(const Environment& env,
                                                       const DumbbellGeom& geom,
                                                       const std::vector<double>& pressures_torr);

struct DistanceRow {
  int well_index;        // 0 = free space
  double separation;     // m (0 in free space)
  Vec3 force;            // N / sqrt(Hz), lab x, y, z
};
/// Force sensitivity in successive wells near the surface plus the free-space
/// reference (first row). The dumbbell axis follows the x polarization.
std::vector<DistanceRow> sensitivity_vs_distance(const BeamParams& beam,
                                                 const SurfaceSpec& surface,
                                                 const DumbbellGeom& geom,
                                                 const Environment& env,
                                                 const std::vector<int>& wells);

}  // namespace levisim
