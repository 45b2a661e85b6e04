#pragma once

// Underdamped Langevin dynamics of the dumbbell: centre of mass plus the
// orientation of its long axis (linear rotor; spin about the axis is not
// tracked).

#include "levisim/gas_damping.hpp"
#include "levisim/trap_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace levisim {

struct RotorState {
  Vec3 position = Vec3::Zero();  // m
  Vec3 velocity = Vec3::Zero();  // m/s
  Vec3 axis = Vec3::UnitX();     // unit
  Vec3 omega = Vec3::Zero();     // rad/s, kept perpendicular to axis
  double t = 0.0;                // s

  Pose pose() const { return {position, axis}; }
};

/// Conservative forces and torques acting on the dumbbell.
class ForceField {
public:
  virtual ~ForceField() = default;
  virtual PotentialSample evaluate(const Pose& pose) const = 0;
  /// Highest natural frequency (Hz) of the field, for step-size checks.
  virtual double max_frequency() const = 0;
};

/// U = 1/2 sum_i k_i (x_i - c_i)^2 + 1/2 k_theta sin^2(angle to rest axis).
class HarmonicField final : public ForceField {
public:
  HarmonicField(Vec3 stiffness, double mass, double torsional_stiffness = 0.0,
                double inertia = 1.0, Vec3 centre = Vec3::Zero(), Vec3 rest_axis = Vec3::UnitX());
  PotentialSample evaluate(const Pose& pose) const override;
  double max_frequency() const override { return fmax_; }

private:
  Vec3 k_;
  double k_theta_;
  Vec3 centre_;
  Vec3 rest_;
  double fmax_;
};

/// Optical potential; the frequency scale is taken from the well at `equilibrium`.
class OpticalField final : public ForceField {
public:
  OpticalField(std::shared_ptr<const TrapPotential> potential, const Pose& equilibrium);
  PotentialSample evaluate(const Pose& pose) const override { return potential_->evaluate(pose); }
  double max_frequency() const override { return fmax_; }
  const TrapFrequencies& frequencies() const { return freqs_; }
  const TrapPotential& potential() const { return *potential_; }

private:
  std::shared_ptr<const TrapPotential> potential_;
  TrapFrequencies freqs_;
  double fmax_;
};

/// Field that applies nothing (free particle).
class FreeField final : public ForceField {
public:
  PotentialSample evaluate(const Pose&) const override { return {}; }
  double max_frequency() const override { return 0.0; }
};

struct SimConfig {
  double dt = 1e-8;               // s
  std::uint64_t n_steps = 0;
  std::uint64_t seed = 7;
  std::uint32_t stride = 1;       // record every stride-th step
  bool thermal_noise = true;
  bool damping = true;
  Vec3 drive_torque = Vec3::Zero();  // constant torque, N m (circular drive)
  Environment environment;
  DumbbellGeom geom;
  /// Rates override the gas model (tests, calibration studies).
  std::optional<DampingRates> rates;
  Vec3 box_centre = Vec3::Zero();
  Vec3 box_half = Vec3::Constant(1e300);  // half extents, m

  /// Box of 3 w0 transverse and 3 lambda axial about a centre.
  void set_trap_box(const BeamParams& beam, const Vec3& centre);
  /// Canonical text used for the config hash.
  std::string canonical() const;
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t value);

struct TimeSeries {
  double dt = 0.0;  // spacing of recorded samples, s
  std::vector<std::string> names;
  std::vector<std::vector<double>> channels;
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return channels.empty() ? 0 : channels.front().size(); }
  const std::vector<double>& channel(const std::string& name) const;
  void write_csv(std::ostream& os) const;
  std::string to_json() const;
};

class LangevinSimulator {
public:
  LangevinSimulator(std::shared_ptr<const ForceField> field, SimConfig config);

  /// One BAOAB step; `index` selects the random numbers.
  RotorState step(const RotorState& state, std::uint64_t index) const;

  /// Channels t, x, y, z, vx, vy, vz, theta (azimuth of the axis in the xy
  /// plane), tilt (axis z component), omega_z.
  TimeSeries simulate(const RotorState& initial) const;

  const DampingRates& rates() const { return rates_; }
  double mass() const { return mass_; }
  double inertia() const { return inertia_; }

private:
  std::shared_ptr<const ForceField> field_;
  SimConfig cfg_;
  DampingRates rates_;
  double mass_;
  double inertia_;
};

/// Simulate several independent configurations in parallel.
std::vector<TimeSeries> simulate_batch(const std::vector<LangevinSimulator>& sims,
                                       const std::vector<RotorState>& initial, unsigned threads);

/// Drive/damping balance M_o / (I gamma), rad/s.
double steady_state_rotation(double drive_torque, double inertia, double gamma);

/// Omega(t) = (M_o / (I gamma)) (1 - exp(-gamma t)).
double ring_up(double drive_torque, double inertia, double gamma, double t);
/// Omega(t) = Omega_0 exp(-gamma t).
double ring_down(double omega0, double gamma, double t);

struct RingFit {
  double omega_ss;  // rad/s
  double tau;       // s
  double tau_sigma;
};
/// Least-squares fit of the ring-up form to a measured Omega(t).
RingFit fit_ring_up(const std::vector<double>& t, const std::vector<double>& omega);

/// Linear speed of the dumbbell tip, Omega times the tip radius (one sphere diameter).
double tip_speed(const DumbbellGeom& geom, double omega_rot);

}  // namespace levisim
