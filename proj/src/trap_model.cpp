#include "levisim/trap_model.hpp"

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <limits>

namespace levisim {

namespace {

constexpr double kT300 = phys::kB * 300.0;

double golden_section(const auto& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tol) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

Vec3 rotate_about_z(const Vec3& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return Vec3(c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z());
}

}  // namespace

Vec3 polarization_axis(const Jones& e) {
  // Maximise |a . e|^2 over real unit a in the xy plane.
  const double xx = std::norm(e(0));
  const double yy = std::norm(e(1));
  const double xy = (std::conj(e(0)) * e(1)).real();
  const double phi = 0.5 * std::atan2(2.0 * xy, xx - yy);
  return Vec3(std::cos(phi), std::sin(phi), 0.0);
}

double DumbbellGeom::sphere_mass() const {
  const double a = radius();
  return density * (4.0 / 3.0) * phys::pi * a * a * a;
}

double DumbbellGeom::moment_of_inertia() const {
  const double ms = sphere_mass();
  return two_sphere_inertia(ms, ms, radius(), center_separation()).transverse;
}

double DumbbellGeom::spin_inertia() const {
  const double ms = sphere_mass();
  return two_sphere_inertia(ms, ms, radius(), center_separation()).spin;
}

RigidInertia two_sphere_inertia(double m1, double m2, double radius, double separation) {
  const double m = m1 + m2;
  const double d1 = separation * m2 / m;
  const double d2 = separation * m1 / m;
  const double own = 0.4 * m * radius * radius;
  return {m, own + m1 * d1 * d1 + m2 * d2 * d2, own};
}

double PolarizabilityTensor::effective(const Vec3& axis, const CVec3& e) const {
  const double along = std::norm(axis(0) * e(0) + axis(1) * e(1) + axis(2) * e(2));
  return parallel.real() * along + perpendicular.real() * (e.squaredNorm() - along);
}

Complex sphere_polarizability(double radius, double permittivity, bool radiation_reaction,
                              double wavenumber) {
  if (!(radius > 0.0) || permittivity < 1.0) {
    throw Error(ErrorKind::InvalidArgument, "sphere_polarizability needs radius > 0 and eps >= 1");
  }
  Complex alpha = 4.0 * phys::pi * phys::eps0 * radius * radius * radius * (permittivity - 1.0) /
                  (permittivity + 2.0);
  if (radiation_reaction) {
    const double k3 = wavenumber * wavenumber * wavenumber;
    alpha /= 1.0 - Complex(0.0, k3 / (6.0 * phys::pi * phys::eps0)) * alpha;
  }
  return alpha;
}

PolarizabilityTensor dumbbell_polarizability(const DumbbellGeom& geom) {
  const Complex a0 = sphere_polarizability(geom.radius(), geom.permittivity);
  const double d3 = std::pow(geom.center_separation(), 3);
  const Complex coupling = a0 / (2.0 * phys::pi * phys::eps0 * d3);
  if (coupling.real() >= 1.0) {
    throw Error(ErrorKind::CouplingDivergence,
                fmt::format("dipole coupling {:.3f} >= 1: pair polarizability diverges",
                            coupling.real()));
  }
  return {2.0 * a0 / (1.0 - coupling), 2.0 * a0 / (1.0 + 0.5 * coupling), a0};
}

TrapPotential::TrapPotential(BeamParams beam, std::optional<PlanarReflector> reflector,
                             DumbbellGeom geom, bool gravity)
    : beam_(std::move(beam)),
      reflector_(std::move(reflector)),
      geom_(geom),
      tensor_(dumbbell_polarizability(geom)),
      pol_(beam_.polarization(0), beam_.polarization(1), 0.0),
      gravity_(gravity) {
  beam_.validate();
}

double TrapPotential::field_norm2(const Vec3& point) const {
  return standing_scalar(beam_, reflector(), point).norm2() * pol_.squaredNorm();
}

double TrapPotential::energy(const Pose& pose) const {
  const Vec3 arm = 0.5 * geom_.center_separation() * pose.axis;
  const double alpha_half = 0.5 * tensor_.effective(pose.axis, pol_);
  const double s2 = standing_scalar(beam_, reflector(), pose.com + arm).norm2() +
                    standing_scalar(beam_, reflector(), pose.com - arm).norm2();
  double u = -0.25 * alpha_half * s2;
  if (gravity_) u += geom_.mass() * phys::g * pose.com.z();
  return u;
}

PotentialSample TrapPotential::evaluate(const Pose& pose) const {
  const Vec3 arm = 0.5 * geom_.center_separation() * pose.axis;
  const double alpha_half = 0.5 * tensor_.effective(pose.axis, pol_);

  PotentialSample out;
  double s2_total = 0.0;
  for (const double sign : {1.0, -1.0}) {
    const ScalarSample s = standing_scalar(beam_, reflector(), pose.com + sign * arm);
    const double s2 = s.norm2();
    const Vec3 f = 0.25 * alpha_half * s.norm2_grad();
    out.energy += -0.25 * alpha_half * s2;
    out.force += f;
    out.torque += (sign * arm).cross(f);
    s2_total += s2;
  }

  // Orientation dependence of the tensor itself.
  const Complex along = pose.axis(0) * pol_(0) + pose.axis(1) * pol_(1) + pose.axis(2) * pol_(2);
  const Vec3 d_along = 2.0 * (pol_.conjugate() * along).real();
  const double dalpha = tensor_.anisotropy().real();
  const Vec3 minus_grad_axis = 0.25 * 0.5 * dalpha * d_along * s2_total;
  out.torque += pose.axis.cross(minus_grad_axis);

  if (gravity_) {
    out.energy += geom_.mass() * phys::g * pose.com.z();
    out.force.z() -= geom_.mass() * phys::g;
  }
  return out;
}

WellScan default_scan(const TrapPotential& potential) {
  const BeamParams& b = potential.beam();
  const double lambda = b.wavelength;
  if (const auto* r = potential.reflector()) {
    return {std::min(r->z - 3.05 * lambda, b.focus.z() - lambda), r->z - lambda / 400.0,
            lambda / 400.0};
  }
  return {b.focus.z() - 3.0 * lambda, b.focus.z() + 3.0 * lambda, lambda / 400.0};
}

TrapFrequencies trap_frequencies(const TrapPotential& potential, const Pose& eq, double step,
                                 double angle_step) {
  const auto curvature = [&](auto&& shifted, double h) {
    const auto d2 = [&](double hh) {
      return (potential.energy(shifted(hh)) - 2.0 * potential.energy(shifted(0.0)) +
              potential.energy(shifted(-hh))) /
             (hh * hh);
    };
    return (4.0 * d2(0.5 * h) - d2(h)) / 3.0;
  };

  TrapFrequencies f;
  for (int i = 0; i < 3; ++i) {
    f.stiffness(i) = curvature(
        [&](double h) {
          Pose p = eq;
          p.com(i) += h;
          return p;
        },
        step);
  }
  f.torsional_stiffness = curvature(
      [&](double h) {
        Pose p = eq;
        p.axis = rotate_about_z(eq.axis, h);
        return p;
      },
      angle_step);

  if ((f.stiffness.array() <= 0.0).any() || !(f.torsional_stiffness > 0.0)) {
    throw Error(ErrorKind::UnstableWell,
                fmt::format("non-positive curvature at z = {:.4e} m (k = {:.3e}, {:.3e}, {:.3e}; "
                            "k_theta = {:.3e})",
                            eq.com.z(), f.stiffness(0), f.stiffness(1), f.stiffness(2),
                            f.torsional_stiffness));
  }
  const double m = potential.geom().mass();
  const auto freq = [](double k, double inertia) {
    return std::sqrt(k / inertia) / (2.0 * phys::pi);
  };
  f.fx = freq(f.stiffness(0), m);
  f.fy = freq(f.stiffness(1), m);
  f.fz = freq(f.stiffness(2), m);
  f.ftorsion = freq(f.torsional_stiffness, potential.geom().moment_of_inertia());
  return f;
}

std::vector<TrapWell> find_wells(const TrapPotential& potential, const WellScan& scan) {
  const double lambda = potential.beam().wavelength;
  if (!(scan.step > 0.0) || scan.step > lambda / 200.0 * (1.0 + 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "well scan step must be in (0, lambda/200]");
  }
  if (scan.z_max - scan.z_min < 3.0 * lambda * (1.0 - 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "well scan must cover at least 3 lambda");
  }

  const Vec3 axis = polarization_axis(potential.beam().polarization);
  const Vec3 focus = potential.beam().focus;
  const auto pose_at = [&](double z) { return Pose{Vec3(focus.x(), focus.y(), z), axis}; };
  const auto u_at = [&](double z) { return potential.energy(pose_at(z)); };

  const auto n = static_cast<std::size_t>(std::floor((scan.z_max - scan.z_min) / scan.step)) + 1;
  std::vector<double> zs(n);
  std::vector<double> us(n);
  for (std::size_t i = 0; i < n; ++i) {
    zs[i] = scan.z_min + static_cast<double>(i) * scan.step;
    us[i] = u_at(zs[i]);
  }

  std::vector<std::size_t> minima;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (us[i] < us[i - 1] && us[i] <= us[i + 1]) minima.push_back(i);
  }
  if (minima.empty()) {
    throw Error(ErrorKind::NoWellFound,
                fmt::format("no local minimum of U in z = [{:.4e}, {:.4e}] m", scan.z_min,
                            scan.z_max));
  }

  std::vector<TrapWell> wells;
  for (std::size_t w = 0; w < minima.size(); ++w) {
    const std::size_t i = minima[w];
    double z = golden_section(u_at, zs[i - 1], zs[i + 1], 1e-10);

    // Polish on the analytic force so the gradient vanishes to rounding.
    for (int it = 0; it < 4; ++it) {
      const double h = 1e-11;
      const double fz = potential.evaluate(pose_at(z)).force.z();
      const double k = -(potential.evaluate(pose_at(z + h)).force.z() -
                         potential.evaluate(pose_at(z - h)).force.z()) /
                       (2.0 * h);
      if (!(k > 0.0)) break;
      const double dz = fz / k;
      if (std::abs(dz) > 1e-10) break;
      z += dz;
    }

    const std::size_t left_start = w == 0 ? 0 : minima[w - 1];
    const std::size_t right_end = w + 1 == minima.size() ? n - 1 : minima[w + 1];
    const double left = *std::max_element(us.begin() + left_start, us.begin() + i + 1);
    const double right = *std::max_element(us.begin() + i, us.begin() + right_end + 1);
    const double umin = u_at(z);

    TrapWell well;
    well.z = z;
    well.separation = potential.reflector() ? potential.reflector()->z - z : z - focus.z();
    well.depth_kbt = (std::min(left, right) - umin) / kT300;
    well.freqs = trap_frequencies(potential, pose_at(z));
    wells.push_back(well);
  }

  if (potential.reflector()) {
    std::sort(wells.begin(), wells.end(),
              [](const TrapWell& a, const TrapWell& b) { return a.separation < b.separation; });
  }
  for (std::size_t i = 0; i < wells.size(); ++i) wells[i].index = static_cast<int>(i) + 1;
  return wells;
}

std::vector<TrapWell> find_wells(const TrapPotential& potential) {
  return find_wells(potential, default_scan(potential));
}

TrapWell well_near_focus(const TrapPotential& potential) {
  const auto wells = find_wells(potential);
  const double zf = potential.beam().focus.z();
  return *std::min_element(wells.begin(), wells.end(), [&](const auto& a, const auto& b) {
    return std::abs(a.z - zf) < std::abs(b.z - zf);
  });
}

double loading_surface_position(const BeamParams& beam, int well_index) {
  return beam.focus.z() + (2.0 * well_index - 1.0) * beam.wavelength / 4.0;
}

std::vector<EnhancementRow> enhancement_ratio(const BeamParams& beam, const SurfaceSpec& surface,
                                              const DumbbellGeom& geom,
                                              const std::vector<int>& well_indices) {
  const TrapWell free = well_near_focus(TrapPotential(beam, std::nullopt, geom));
  std::vector<EnhancementRow> rows;
  for (const int n : well_indices) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "well indices start at 1");
    SurfaceSpec s = surface;
    s.z = loading_surface_position(beam, n);
    const auto reflector = make_reflector(s, beam.wavelength);
    const TrapWell w = well_near_focus(TrapPotential(beam, reflector, geom));
    rows.push_back({reflector ? w.index : n, w.separation, w.freqs.fx / free.freqs.fx,
                    w.freqs.fy / free.freqs.fy, w.freqs.fz / free.freqs.fz, w.freqs});
  }
  return rows;
}

double optical_torque(const PolarizabilityTensor& tensor, double field_norm2, double theta,
                      DriveMode mode, double eta_cal) {
  const Complex d = tensor.anisotropy();
  if (mode == DriveMode::Linear) return -0.25 * d.real() * field_norm2 * std::sin(2.0 * theta);
  return eta_cal * 0.25 * std::abs(d) * field_norm2;
}

WaistCalibration calibrate_waist(const BeamParams& beam, const DumbbellGeom& geom,
                                 const FrequencyTargets& targets, double w_lo, double w_hi) {
  if (!targets.fx && !targets.fy && !targets.fz) {
    throw Error(ErrorKind::InvalidArgument, "waist calibration needs at least one target");
  }
  const auto free_freqs = [&](double w) {
    BeamParams b = beam;
    b.waist = w;
    const TrapPotential pot(b, std::nullopt, geom);
    return trap_frequencies(pot, Pose{b.focus, polarization_axis(b.polarization)});
  };
  const auto residuals = [&](double log_w) {
    const TrapFrequencies f = free_freqs(std::exp(log_w));
    Eigen::Vector3d r = Eigen::Vector3d::Zero();
    if (targets.fx) r(0) = f.fx / *targets.fx - 1.0;
    if (targets.fy) r(1) = f.fy / *targets.fy - 1.0;
    if (targets.fz) r(2) = f.fz / *targets.fz - 1.0;
    return r;
  };

  // Brent carries an absolute tolerance near eps^(1/4), so it only brackets;
  // Gauss-Newton on log(w) finishes the job.
  std::uintmax_t iters = 100;
  double x = boost::math::tools::brent_find_minima(
                 [&](double lw) { return residuals(lw).squaredNorm(); }, std::log(w_lo),
                 std::log(w_hi), 30, iters)
                 .first;
  for (int it = 0; it < 20; ++it) {
    const double h = 1e-4;
    const Eigen::Vector3d r = residuals(x);
    const Eigen::Vector3d j = (residuals(x + h) - residuals(x - h)) / (2.0 * h);
    const double dx = -j.dot(r) / j.squaredNorm();
    x += dx;
    if (std::abs(dx) < 1e-12) break;
  }
  const double w = std::exp(x);
  const double r = residuals(x).squaredNorm();
  spdlog::debug("waist calibration: w0 = {:.6e} m, residual {:.3e}", w, r);
  return {w, r, free_freqs(w)};
}

}  // namespace levisim
