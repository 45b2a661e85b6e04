#include "levisim/grating.hpp"

#include "levisim/parallel.hpp"

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <limits>

namespace levisim {

void GratingSpec::validate() const {
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw Error(ErrorKind::InvalidArgument, "grating period must be positive");
  }
  if (!(stripe_width >= 0.0 && stripe_width <= period)) {
    throw Error(ErrorKind::InvalidArgument, "stripe width must lie in [0, period]");
  }
  if (max_order < 0) throw Error(ErrorKind::InvalidArgument, "max_order must be non-negative");
  if (std::abs(r_stripe) > 1.0 || std::abs(r_groove) > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "reflection amplitudes must satisfy |r| <= 1");
  }
}

std::vector<GratingOrder> reflection_orders(const GratingSpec& grating, double wavelength) {
  grating.validate();
  if (grating.period >= wavelength) {
    throw Error(ErrorKind::PropagatingOrder,
                fmt::format("period {:.4g} m is not below the wavelength {:.4g} m; diffracted "
                            "orders would propagate",
                            grating.period, wavelength));
  }
  const double k = 2.0 * phys::pi / wavelength;
  const double duty = grating.stripe_width / grating.period;
  const Complex contrast = grating.r_stripe - grating.r_groove;
  std::vector<GratingOrder> orders;
  for (int n = -grating.max_order; n <= grating.max_order; ++n) {
    GratingOrder o;
    o.n = n;
    o.kx = 2.0 * phys::pi * n / grating.period;
    if (n == 0) {
      o.amplitude = grating.r_groove + contrast * duty;
      o.kz = k;
    } else {
      o.amplitude = contrast * std::sin(n * phys::pi * duty) / (n * phys::pi);
      o.kappa = std::sqrt(o.kx * o.kx - k * k);
    }
    orders.push_back(o);
  }
  return orders;
}

PlanarReflector grating_reflector(const GratingSpec& grating, double wavelength) {
  PlanarReflector r;
  r.z = grating.z;
  for (const auto& o : reflection_orders(grating, wavelength)) {
    if (o.amplitude == Complex(0.0, 0.0)) continue;
    r.orders.push_back({o.amplitude, o.kx, o.kappa});
  }
  return r;
}

double nearfield_intensity(const GratingSpec& grating, const BeamParams& beam, double x,
                           double height) {
  if (!(height > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "height above the grating must be positive");
  }
  const PlanarReflector r = grating_reflector(grating, beam.wavelength).seen_from(x);
  const Vec3 point(beam.focus.x(), beam.focus.y(), grating.z - height);
  return total_field(beam, &r, point).intensity();
}

namespace {

// Newton iteration on (F_x, F_z) = 0 in the xz plane; y = 0 by symmetry.
Pose lateral_equilibrium(const TrapPotential& pot, Pose pose) {
  const double h = 1e-10;
  const auto force = [&](double x, double z) {
    Pose p = pose;
    p.com.x() = x;
    p.com.z() = z;
    const Vec3 f = pot.evaluate(p).force;
    return Eigen::Vector2d(f.x(), f.z());
  };
  for (int it = 0; it < 40; ++it) {
    const double x = pose.com.x();
    const double z = pose.com.z();
    const Eigen::Vector2d f = force(x, z);
    Eigen::Matrix2d j;
    j.col(0) = (force(x + h, z) - force(x - h, z)) / (2.0 * h);
    j.col(1) = (force(x, z + h) - force(x, z - h)) / (2.0 * h);
    const Eigen::Vector2d step = j.fullPivLu().solve(-f);
    if (!step.allFinite()) throw Error(ErrorKind::NoWellFound, "singular lateral Hessian");
    const double limit = 20e-9;
    const double scale = std::min(1.0, limit / std::max(step.norm(), 1e-300));
    pose.com.x() += scale * step(0);
    pose.com.z() += scale * step(1);
    if (step.norm() < 1e-15) return pose;
  }
  throw Error(ErrorKind::NoWellFound, "lateral equilibrium did not converge");
}

}  // namespace

std::vector<ScanPoint> scan_trap_frequency(const GratingSpec& grating, const BeamParams& beam,
                                           const DumbbellGeom& geom, int well_index,
                                           const std::vector<double>& xs, unsigned threads) {
  if (well_index < 1) throw Error(ErrorKind::InvalidArgument, "well indices start at 1");
  beam.validate();
  GratingSpec g = grating;
  g.z = loading_surface_position(beam, well_index);
  const PlanarReflector base = grating_reflector(g, beam.wavelength);

  std::vector<ScanPoint> out(xs.size());
  parallel_for(xs.size(), threads, [&](std::size_t i) {
    ScanPoint& sp = out[i];
    sp.x = xs[i];
    sp.fx = std::numeric_limits<double>::quiet_NaN();
    try {
      const TrapPotential pot(beam, base.seen_from(xs[i]), geom);
      const TrapWell w = well_near_focus(pot);
      const Pose eq = lateral_equilibrium(
          pot, Pose{Vec3(beam.focus.x(), beam.focus.y(), w.z), polarization_axis(beam.polarization)});
      sp.fx = trap_frequencies(pot, eq).fx;
      sp.equilibrium = eq.com;
      sp.separation = g.z - eq.com.z();
    } catch (const Error& e) {
      sp.error = fmt::format("{}: {}", to_string(e.kind()), e.what());
      spdlog::warn("grating scan x = {:.4g} m: {}", xs[i], sp.error);
    }
  });
  return out;
}

double dominant_period(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 4) {
    throw Error(ErrorKind::TooShort, "need at least four samples to find a period");
  }
  const double span = xs.back() - xs.front();
  if (!(span > 0.0)) throw Error(ErrorKind::InvalidArgument, "sample positions must increase");
  const double dx = span / static_cast<double>(xs.size() - 1);

  // Variance explained by a least-squares fit of a + b cos(qx) + c sin(qx).
  const Eigen::Map<const Eigen::VectorXd> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
  const auto power = [&](double q) {
    Eigen::MatrixXd a(y.size(), 3);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      a(i, 0) = 1.0;
      a(i, 1) = std::cos(q * xs[i]);
      a(i, 2) = std::sin(q * xs[i]);
    }
    const Eigen::VectorXd fit = a * a.colPivHouseholderQr().solve(y);
    return (fit.array() - fit.mean()).square().sum();
  };
  const double q_lo = 2.0 * phys::pi / span;
  const double q_hi = phys::pi / dx;
  const double dq = q_lo / 8.0;
  double best_q = q_lo;
  double best_p = -1.0;
  for (double q = q_lo; q <= q_hi; q += dq) {
    const double p = power(q);
    if (p > best_p) {
      best_p = p;
      best_q = q;
    }
  }
  const auto r = boost::math::tools::brent_find_minima([&](double q) { return -power(q); },
                                                       best_q - dq, best_q + dq, 40);
  return 2.0 * phys::pi / r.first;
}

double modulation_depth(const std::vector<ScanPoint>& scan) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : scan) {
    if (!p.error.empty()) continue;
    lo = std::min(lo, p.fx);
    hi = std::max(hi, p.fx);
  }
  if (!(hi >= lo)) throw Error(ErrorKind::NoWellFound, "no successful scan points");
  return hi - lo;
}

const char* to_string(RotationSurface s) {
  switch (s) {
    case RotationSurface::FreeSpace: return "free_space";
    case RotationSurface::Sapphire: return "sapphire";
    case RotationSurface::Grating: return "grating";
  }
  return "unknown";
}

namespace {

// The well position does not depend on polarization in the scalar model, but
// a circular beam has no torsional confinement, so the well is located with
// a linearly polarised copy.
double first_well_field(const BeamParams& beam, const DumbbellGeom& geom,
                        const std::optional<PlanarReflector>& reflector) {
  BeamParams linear = beam;
  linear.polarization = Jones(1.0, 0.0);
  const TrapWell w = well_near_focus(TrapPotential(linear, reflector, geom));
  return TrapPotential(beam, reflector, geom)
      .field_norm2(Vec3(beam.focus.x(), beam.focus.y(), w.z));
}

}  // namespace

std::vector<RotationCurve> grating_rotation_curve(const BeamParams& beam_in,
                                                  const DumbbellGeom& geom,
                                                  const Environment& env,
                                                  const GratingSpec& grating,
                                                  const std::vector<double>& pressures_torr,
                                                  const std::vector<RotationSurface>& surfaces) {
  BeamParams beam = beam_in;
  beam.polarization = waveplate_jones(phys::pi / 4.0);
  const PolarizabilityTensor tensor = dumbbell_polarizability(geom);
  const double z1 = loading_surface_position(beam, 1);

  std::vector<RotationCurve> curves;
  for (const RotationSurface s : surfaces) {
    RotationCurve c;
    c.surface = s;
    switch (s) {
      case RotationSurface::FreeSpace:
        c.field_norm2 = first_well_field(beam, geom, std::nullopt);
        break;
      case RotationSurface::Sapphire:
        c.field_norm2 = first_well_field(beam, geom, make_reflector(SurfaceSpec::sapphire(z1), beam.wavelength));
        break;
      case RotationSurface::Grating: {
        GratingSpec g = grating;
        g.z = z1;
        const PlanarReflector base = grating_reflector(g, beam.wavelength);
        const int samples = 16;
        for (int i = 0; i < samples; ++i) {
          c.field_norm2 += first_well_field(beam, geom, base.seen_from(g.period * i / samples));
        }
        c.field_norm2 /= samples;
        break;
      }
    }
    c.torque = optical_torque(tensor, c.field_norm2, 0.0, DriveMode::Circular);
    for (const double p : pressures_torr) {
      c.pressure_torr.push_back(p);
      c.frequency.push_back(rotation_frequency_at(c, geom, env, p));
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

double rotation_frequency_at(const RotationCurve& curve, const DumbbellGeom& geom,
                             const Environment& env, double pressure_torr) {
  const double gamma = rotational_damping(env.at(Pressure::torr(pressure_torr)), geom).gamma;
  return curve.torque / (2.0 * phys::pi * geom.moment_of_inertia() * gamma);
}

double calibrate_rotation(const RotationCurve& curve, const DumbbellGeom& geom,
                          const Environment& env, double p_torr, double f_target) {
  return f_target / rotation_frequency_at(curve, geom, env, p_torr);
}

double loglog_slope(const std::vector<double>& p, const std::vector<double>& f) {
  if (p.size() != f.size() || p.size() < 2) {
    throw Error(ErrorKind::TooShort, "slope needs at least two points");
  }
  const double n = static_cast<double>(p.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = std::log(p[i]);
    const double y = std::log(f[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace levisim
