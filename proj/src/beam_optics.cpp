#include "levisim/beam_optics.hpp"

#include <fmt/format.h>

namespace levisim {

namespace {

constexpr double validity_window = 20e-6;

void check_window(const BeamParams& beam, const Vec3& point) {
  if ((point - beam.focus).cwiseAbs().maxCoeff() > validity_window) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("query point ({:.3e}, {:.3e}, {:.3e}) m is outside the +-20 um "
                            "paraxial validity window",
                            point.x(), point.y(), point.z()));
  }
}

ComplexField to_vector_field(const BeamParams& beam, Complex u) {
  ComplexField f;
  f.E = CVec3(beam.polarization(0) * u, beam.polarization(1) * u, 0.0);
  f.k = beam.wavenumber();
  return f;
}

}  // namespace

double BeamParams::peak_amplitude() const {
  return std::sqrt(2.0 * peak_intensity() / (phys::c * phys::eps0));
}

void BeamParams::validate() const {
  if (!(wavelength > 0.0) || !(power > 0.0)) {
    throw Error(ErrorKind::InvalidBeam, "wavelength and power must be positive");
  }
  if (!(waist >= wavelength / phys::pi)) {
    throw Error(ErrorKind::InvalidBeam,
                fmt::format("waist {:.4g} m is below the paraxial bound lambda/pi = {:.4g} m",
                            waist, wavelength / phys::pi));
  }
  if (std::abs(polarization.norm() - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidBeam, "Jones vector must have unit norm");
  }
}

Jones waveplate_jones(double eta) {
  const double c = std::cos(eta);
  const double s = std::sin(eta);
  return Jones(Complex(c * c, s * s), Complex(1.0, -1.0) * (s * c));
}

PlanarReflector PlanarReflector::seen_from(double x0) const {
  PlanarReflector out = *this;
  for (auto& o : out.orders) o.amplitude *= std::polar(1.0, o.kx * x0);
  return out;
}

Complex PlanarReflector::specular_amplitude() const {
  Complex r{0.0, 0.0};
  for (const auto& o : orders) {
    if (o.kappa == 0.0) r += o.amplitude;
  }
  return r;
}

Complex fresnel_reflection(const SurfaceSpec& surface, double wavelength) {
  (void)wavelength;  // indices are supplied at the beam wavelength
  if (surface.kind == SurfaceKind::None) {
    throw Error(ErrorKind::NoSurface, "no reflecting surface configured");
  }
  if (surface.index.imag() < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "surface index must be passive (Im >= 0)");
  }
  return (1.0 - surface.index) / (1.0 + surface.index);
}

std::optional<PlanarReflector> make_reflector(const SurfaceSpec& surface, double wavelength) {
  if (surface.kind == SurfaceKind::None) return std::nullopt;
  return PlanarReflector::flat(surface.z, fresnel_reflection(surface, wavelength));
}

ScalarSample incident_scalar(const BeamParams& beam, const Vec3& point) {
  const double k = beam.wavenumber();
  const double zr = beam.rayleigh_range();
  const Vec3 rel = point - beam.focus;
  const Complex q(rel.z(), -zr);
  const double rho2 = rel.x() * rel.x() + rel.y() * rel.y();
  const Complex ik(0.0, k);

  const Complex u = beam.peak_amplitude() * (Complex(0.0, -zr) / q) *
                    std::exp(ik * rel.z() + ik * rho2 / (2.0 * q));

  ScalarSample s;
  s.value = u;
  s.grad(0) = u * ik * rel.x() / q;
  s.grad(1) = u * ik * rel.y() / q;
  s.grad(2) = u * (-1.0 / q + ik - ik * rho2 / (2.0 * q * q));
  return s;
}

ScalarSample standing_scalar(const BeamParams& beam, const PlanarReflector* reflector,
                             const Vec3& point) {
  ScalarSample s = incident_scalar(beam, point);
  if (reflector == nullptr || reflector->orders.empty()) return s;

  const double d = reflector->z - point.z();
  const Vec3 image(point.x(), point.y(), 2.0 * reflector->z - point.z());
  ScalarSample m = incident_scalar(beam, image);
  m.grad(2) = -m.grad(2);

  const Complex ik(0.0, beam.wavenumber());
  Complex resp{0.0, 0.0};
  Complex resp_dx{0.0, 0.0};
  Complex resp_dz{0.0, 0.0};
  for (const auto& o : reflector->orders) {
    Complex term = o.amplitude * std::polar(1.0, o.kx * point.x());
    if (o.kappa != 0.0) {
      const Complex decay = o.kappa + ik;
      term *= std::exp(-decay * d);
      resp_dz += term * decay;
    }
    resp += term;
    resp_dx += term * Complex(0.0, o.kx);
  }

  s.value += m.value * resp;
  s.grad(0) += m.grad(0) * resp + m.value * resp_dx;
  s.grad(1) += m.grad(1) * resp;
  s.grad(2) += m.grad(2) * resp + m.value * resp_dz;
  return s;
}

ComplexField focused_field(const BeamParams& beam, const Vec3& point) {
  beam.validate();
  check_window(beam, point);
  return to_vector_field(beam, incident_scalar(beam, point).value);
}

ComplexField total_field(const BeamParams& beam, const PlanarReflector* reflector,
                         const Vec3& point) {
  beam.validate();
  check_window(beam, point);
  if (reflector != nullptr && !(point.z() < reflector->z)) {
    throw Error(ErrorKind::InvalidArgument, "query point must lie on the vacuum side of the surface");
  }
  return to_vector_field(beam, standing_scalar(beam, reflector, point).value);
}

ComplexField total_field(const BeamParams& beam, const SurfaceSpec& surface, const Vec3& point) {
  const auto refl = make_reflector(surface, beam.wavelength);
  return total_field(beam, refl ? &*refl : nullptr, point);
}

}  // namespace levisim
