#include "levisim/langevin.hpp"

#include "levisim/least_squares.hpp"
#include "levisim/parallel.hpp"
#include "levisim/random.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <ostream>

namespace levisim {

namespace {

Vec3 rotate(const Vec3& v, const Vec3& omega, double dt) {
  const double w = omega.norm();
  if (w * dt == 0.0) return v;
  const Vec3 k = omega / w;
  const double a = w * dt;
  return v * std::cos(a) + k.cross(v) * std::sin(a) + k * k.dot(v) * (1.0 - std::cos(a));
}

Vec3 perpendicular_to(const Vec3& v, const Vec3& axis) { return v - v.dot(axis) * axis; }

bool finite(const RotorState& s) {
  return s.position.allFinite() && s.velocity.allFinite() && s.axis.allFinite() &&
         s.omega.allFinite();
}

}  // namespace

HarmonicField::HarmonicField(Vec3 stiffness, double mass, double torsional_stiffness,
                             double inertia, Vec3 centre, Vec3 rest_axis)
    : k_(stiffness),
      k_theta_(torsional_stiffness),
      centre_(centre),
      rest_(rest_axis.normalized()) {
  fmax_ = std::sqrt(stiffness.maxCoeff() / mass) / (2.0 * phys::pi);
  if (torsional_stiffness > 0.0) {
    fmax_ = std::max(fmax_, std::sqrt(torsional_stiffness / inertia) / (2.0 * phys::pi));
  }
}

PotentialSample HarmonicField::evaluate(const Pose& pose) const {
  PotentialSample s;
  const Vec3 dx = pose.com - centre_;
  s.energy = 0.5 * dx.dot(k_.cwiseProduct(dx));
  s.force = -k_.cwiseProduct(dx);
  if (k_theta_ != 0.0) {
    const double c = pose.axis.dot(rest_);
    s.energy += 0.5 * k_theta_ * (1.0 - c * c);
    s.torque = pose.axis.cross(k_theta_ * c * rest_);
  }
  return s;
}

OpticalField::OpticalField(std::shared_ptr<const TrapPotential> potential, const Pose& equilibrium)
    : potential_(std::move(potential)), freqs_(trap_frequencies(*potential_, equilibrium)) {
  fmax_ = std::max({freqs_.fx, freqs_.fy, freqs_.fz, freqs_.ftorsion});
}

void SimConfig::set_trap_box(const BeamParams& beam, const Vec3& centre) {
  box_centre = centre;
  box_half = Vec3(1.5 * beam.waist, 1.5 * beam.waist, 1.5 * beam.wavelength);
}

std::string SimConfig::canonical() const {
  std::string s = fmt::format(
      "dt={:.17g};n_steps={};seed={};stride={};noise={};damping={};drive={:.17g},{:.17g},{:.17g};"
      "P={:.17g};T={:.17g};m_gas={:.17g};d_m={:.17g};alpha={:.17g};"
      "diameter={:.17g};density={:.17g};eps={:.17g};"
      "box={:.17g},{:.17g},{:.17g}/{:.17g},{:.17g},{:.17g}",
      dt, n_steps, seed, stride, thermal_noise, damping, drive_torque.x(), drive_torque.y(),
      drive_torque.z(), environment.pressure.in_pa(), environment.temperature,
      environment.gas_mass, environment.molecule_diameter, environment.accommodation,
      geom.sphere_diameter, geom.density, geom.permittivity, box_centre.x(), box_centre.y(),
      box_centre.z(), box_half.x(), box_half.y(), box_half.z());
  if (rates) {
    s += fmt::format(";rates={:.17g},{:.17g},{:.17g}", rates->parallel, rates->perpendicular,
                     rates->rotational);
  }
  return s;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

const std::vector<double>& TimeSeries::channel(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("no channel named '{}'", name));
  }
  return channels[static_cast<std::size_t>(it - names.begin())];
}

void TimeSeries::write_csv(std::ostream& os) const {
  for (const auto& [k, v] : metadata) os << "# " << k << ": " << v << '\n';
  for (std::size_t c = 0; c < names.size(); ++c) os << (c ? "," : "") << names[c];
  os << '\n';
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t c = 0; c < channels.size(); ++c) {
      os << (c ? "," : "") << fmt::format("{:.17g}", channels[c][i]);
    }
    os << '\n';
  }
}

std::string TimeSeries::to_json() const {
  nlohmann::ordered_json j;
  j["metadata"] = metadata;
  j["dt"] = dt;
  for (std::size_t c = 0; c < names.size(); ++c) j["channels"][names[c]] = channels[c];
  return j.dump();
}

LangevinSimulator::LangevinSimulator(std::shared_ptr<const ForceField> field, SimConfig config)
    : field_(std::move(field)),
      cfg_(std::move(config)),
      mass_(cfg_.geom.mass()),
      inertia_(cfg_.geom.moment_of_inertia()) {
  if (!(cfg_.dt > 0.0) || cfg_.stride == 0) {
    throw Error(ErrorKind::InvalidArgument, "dt must be positive and stride at least 1");
  }
  if (cfg_.damping) {
    rates_ = cfg_.rates ? *cfg_.rates : dumbbell_damping(cfg_.environment, cfg_.geom);
  }
  double fmax = field_->max_frequency();
  if (cfg_.drive_torque.norm() > 0.0 && rates_.rotational > 0.0) {
    fmax = std::max(fmax, steady_state_rotation(cfg_.drive_torque.norm(), inertia_,
                                                rates_.rotational) /
                              (2.0 * phys::pi));
  }
  if (fmax > 0.0 && cfg_.dt > 1.0 / (50.0 * fmax) * (1.0 + 1e-12)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("dt = {:.3e} s exceeds 1/(50 f_max) = {:.3e} s", cfg_.dt,
                            1.0 / (50.0 * fmax)));
  }
}

RotorState LangevinSimulator::step(const RotorState& s0, std::uint64_t index) const {
  const double dt = cfg_.dt;
  const double h = 0.5 * dt;
  const double kt = phys::kB * cfg_.environment.temperature;
  const CounterRng rng(cfg_.seed);

  const auto torque_of = [&](const PotentialSample& f, const Vec3& axis) {
    return perpendicular_to(f.torque + cfg_.drive_torque, axis);
  };

  RotorState s = s0;
  PotentialSample f = field_->evaluate(s.pose());

  // B
  s.velocity += h * f.force / mass_;
  s.omega += h * torque_of(f, s.axis) / inertia_;
  // A
  s.position += h * s.velocity;
  s.axis = rotate(s.axis, s.omega, h).normalized();
  s.omega = perpendicular_to(s.omega, s.axis);
  // O
  {
    const Vec3& a = s.axis;
    const double c_par = std::exp(-rates_.parallel * dt);
    const double c_perp = std::exp(-rates_.perpendicular * dt);
    const double c_rot = std::exp(-rates_.rotational * dt);
    const Vec3 v_par = s.velocity.dot(a) * a;
    const Vec3 v_perp = s.velocity - v_par;
    s.velocity = c_par * v_par + c_perp * v_perp;
    s.omega *= c_rot;
    if (cfg_.thermal_noise) {
      const auto [n0, n1] = rng.normal_pair(index, 0);
      const auto [n2, n3] = rng.normal_pair(index, 1);
      const auto [n4, n5] = rng.normal_pair(index, 2);
      const Vec3 xi(n0, n1, n2);
      const Vec3 xi_par = xi.dot(a) * a;
      const double sv = std::sqrt(kt / mass_);
      s.velocity += sv * (std::sqrt(1.0 - c_par * c_par) * xi_par +
                          std::sqrt(1.0 - c_perp * c_perp) * (xi - xi_par));
      s.omega += std::sqrt(kt / inertia_ * (1.0 - c_rot * c_rot)) *
                 perpendicular_to(Vec3(n3, n4, n5), a);
    }
  }
  // A
  s.position += h * s.velocity;
  s.axis = rotate(s.axis, s.omega, h).normalized();
  s.omega = perpendicular_to(s.omega, s.axis);
  // B
  f = field_->evaluate(s.pose());
  s.velocity += h * f.force / mass_;
  s.omega += h * torque_of(f, s.axis) / inertia_;
  s.t = s0.t + dt;

  if (!finite(s)) {
    throw Error(ErrorKind::NonFinite, fmt::format("non-finite state at step {}", index));
  }
  if (((s.position - cfg_.box_centre).cwiseAbs() - cfg_.box_half).maxCoeff() > 0.0) {
    throw Error(ErrorKind::ParticleLost,
                fmt::format("particle left the box at step {} (t = {:.4e} s, r = ({:.3e}, "
                            "{:.3e}, {:.3e}) m)",
                            index, s.t, s.position.x(), s.position.y(), s.position.z()));
  }
  return s;
}

TimeSeries LangevinSimulator::simulate(const RotorState& initial) const {
  TimeSeries ts;
  ts.dt = cfg_.dt * cfg_.stride;
  ts.names = {"t", "x", "y", "z", "vx", "vy", "vz", "theta", "tilt", "omega_z"};
  ts.channels.assign(ts.names.size(), {});
  const std::size_t n_rec = static_cast<std::size_t>(cfg_.n_steps / cfg_.stride) + 1;
  for (auto& c : ts.channels) c.reserve(n_rec);
  ts.metadata["seed"] = std::to_string(cfg_.seed);
  ts.metadata["config_hash"] = hex64(fnv1a64(cfg_.canonical()));
  ts.metadata["dt_s"] = fmt::format("{:.17g}", ts.dt);

  const auto record = [&](const RotorState& s) {
    const double vals[] = {s.t,          s.position.x(), s.position.y(),
                           s.position.z(), s.velocity.x(), s.velocity.y(),
                           s.velocity.z(), std::atan2(s.axis.y(), s.axis.x()),
                           s.axis.z(),   s.omega.z()};
    for (std::size_t c = 0; c < ts.channels.size(); ++c) ts.channels[c].push_back(vals[c]);
  };

  RotorState s = initial;
  s.axis.normalize();
  s.omega = perpendicular_to(s.omega, s.axis);
  record(s);
  for (std::uint64_t i = 0; i < cfg_.n_steps; ++i) {
    s = step(s, i);
    if ((i + 1) % cfg_.stride == 0) record(s);
  }
  return ts;
}

std::vector<TimeSeries> simulate_batch(const std::vector<LangevinSimulator>& sims,
                                       const std::vector<RotorState>& initial, unsigned threads) {
  if (sims.size() != initial.size()) {
    throw Error(ErrorKind::InvalidArgument, "one initial state per simulator is required");
  }
  std::vector<TimeSeries> out(sims.size());
  parallel_for(sims.size(), threads, [&](std::size_t i) { out[i] = sims[i].simulate(initial[i]); });
  return out;
}

double steady_state_rotation(double drive_torque, double inertia, double gamma) {
  if (!(inertia > 0.0) || !(gamma > 0.0) || drive_torque < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "steady rotation needs I, gamma > 0 and M_o >= 0");
  }
  return drive_torque / (inertia * gamma);
}

double ring_up(double drive_torque, double inertia, double gamma, double t) {
  return steady_state_rotation(drive_torque, inertia, gamma) * -std::expm1(-gamma * t);
}

double ring_down(double omega0, double gamma, double t) { return omega0 * std::exp(-gamma * t); }

RingFit fit_ring_up(const std::vector<double>& t, const std::vector<double>& omega) {
  const std::size_t n = t.size();
  if (n < 8 || omega.size() != n) {
    throw Error(ErrorKind::TooShort, "ring-up fit needs at least 8 matching samples");
  }
  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  double w_ss = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) w_ss += omega[i];
  w_ss /= static_cast<double>(tail);
  double tau0 = t.back() / 3.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (omega[i] >= (1.0 - std::exp(-1.0)) * w_ss) {
      tau0 = std::max(t[i], t.back() / static_cast<double>(n));
      break;
    }
  }
  const double sign = w_ss < 0.0 ? -1.0 : 1.0;
  const auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    const double ws = sign * std::exp(p(0));
    const double tau = std::exp(p(1));
    for (std::size_t i = 0; i < n; ++i) {
      r(static_cast<Eigen::Index>(i)) = ws * -std::expm1(-t[i] / tau) - omega[i];
    }
  };
  const LeastSquaresResult fit = levenberg_marquardt(
      residual, static_cast<int>(n), Eigen::Vector2d(std::log(std::abs(w_ss)), std::log(tau0)));
  if (!fit.converged) throw Error(ErrorKind::NoConvergence, "ring-up fit did not converge");
  const double tau = std::exp(fit.params(1));
  return {sign * std::exp(fit.params(0)), tau, tau * std::sqrt(fit.covariance(1, 1))};
}

double tip_speed(const DumbbellGeom& geom, double omega_rot) {
  if (omega_rot < 0.0) throw Error(ErrorKind::InvalidArgument, "rotation rate must be >= 0");
  return omega_rot * geom.half_length();
}

}  // namespace levisim
