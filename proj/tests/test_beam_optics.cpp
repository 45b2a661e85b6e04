#include "approx.hpp"
#include "doctest.h"
#include "levisim/beam_optics.hpp"

#include <cmath>

using namespace levisim;

namespace {

BeamParams default_beam() { return BeamParams{}; }

double numeric_norm2(const BeamParams& b, const PlanarReflector* r, const Vec3& p) {
  return standing_scalar(b, r, p).norm2();
}

}  // namespace

TEST_CASE("focal intensity equals 2P / (pi w0^2)") {
  const BeamParams b = default_beam();
  const ComplexField f = focused_field(b, b.focus);
  const double expected = 2.0 * 0.2 / (M_PI * 1e-6 * 1e-6);
  CHECK(f.intensity() == rel(expected, 1e-12));
  CHECK(f.k == rel(2.0 * M_PI / 1550e-9));
}

TEST_CASE("transverse profile is exp(-2 rho^2 / w^2) at the focus and at z_R") {
  const BeamParams b = default_beam();
  const double i0 = focused_field(b, b.focus).intensity();
  const double rho = 0.7e-6;
  CHECK(focused_field(b, Vec3(rho, 0, 0)).intensity() / i0 ==
        rel(std::exp(-2.0 * rho * rho / 1e-12), 1e-10));

  const double zr = M_PI * 1e-12 / 1550e-9;
  const double w2 = 2e-12;  // w(z_R)^2 = 2 w0^2
  CHECK(focused_field(b, Vec3(0, 0, zr)).intensity() / i0 == rel(0.5, 1e-12));
  CHECK(focused_field(b, Vec3(0, rho, zr)).intensity() / i0 ==
        rel(0.5 * std::exp(-2.0 * rho * rho / w2), 1e-10));
}

TEST_CASE("on-axis phase advances by kz minus the Gouy phase") {
  const BeamParams b = default_beam();
  const double zr = b.rayleigh_range();
  const Complex u0 = focused_field(b, b.focus).E(0);
  const Complex u1 = focused_field(b, Vec3(0, 0, zr)).E(0);
  const double expected = std::remainder(b.wavenumber() * zr - M_PI / 4.0, 2.0 * M_PI);
  CHECK(std::abs(std::remainder(std::arg(u1 / u0) - expected, 2.0 * M_PI)) < 1e-10);
}

TEST_CASE("normal-incidence Fresnel amplitudes") {
  const Complex r_sapphire = fresnel_reflection(SurfaceSpec::sapphire(0.0), 1550e-9);
  CHECK(r_sapphire.real() == rel(-0.746 / 2.746, 1e-14));
  CHECK(r_sapphire.imag() == 0.0);

  // (1 - n)/(1 + n) for n = 0.52 + 10.7 i, multiplied out by hand.
  const double den = 1.52 * 1.52 + 10.7 * 10.7;
  const Complex r_gold = fresnel_reflection(SurfaceSpec::gold(0.0), 1550e-9);
  CHECK(r_gold.real() == rel((0.48 * 1.52 - 10.7 * 10.7) / den, 1e-12));
  CHECK(r_gold.imag() == rel((-10.7 * 1.52 - 0.48 * 10.7) / den, 1e-12));
  CHECK(std::abs(r_gold) < 1.0);
}

TEST_CASE("invalid inputs are rejected") {
  BeamParams b = default_beam();
  b.waist = 0.4e-6;
  CHECK_THROWS_AS(b.validate(), Error);
  try {
    b.validate();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidBeam);
  }
  b = default_beam();
  b.polarization = Jones(1.0, 1.0);
  CHECK_THROWS_AS(b.validate(), Error);

  CHECK_THROWS_AS(fresnel_reflection(SurfaceSpec::none(), 1550e-9), Error);
  CHECK_FALSE(make_reflector(SurfaceSpec::none(), 1550e-9).has_value());
  CHECK_THROWS_AS(focused_field(default_beam(), Vec3(0, 0, 30e-6)), Error);
  CHECK_THROWS_AS(total_field(default_beam(), SurfaceSpec::sapphire(0.5e-6), Vec3(0, 0, 1e-6)),
                  Error);
}

TEST_CASE("waveplate Jones vectors") {
  const Jones lin = waveplate_jones(0.0);
  CHECK(std::abs(lin(0) - 1.0) < 1e-15);
  CHECK(std::abs(lin(1)) < 1e-15);

  const Jones circ = waveplate_jones(M_PI / 4.0);
  CHECK(std::abs(circ(0)) == rel(std::sqrt(0.5)));
  CHECK(std::abs(circ(1)) == rel(std::sqrt(0.5)));
  CHECK(std::abs(std::remainder(std::arg(circ(1) / circ(0)), M_PI)) ==
        rel(M_PI / 2.0));

  for (double eta = 0.0; eta < M_PI; eta += 0.13) {
    CHECK(waveplate_jones(eta).norm() == rel(1.0, 1e-14));
  }
}

TEST_CASE("plane-wave limit of the standing wave") {
  BeamParams b = default_beam();
  b.waist = 1e-3;  // z_R of metres: curvature and Gouy terms vanish
  const double zs = 0.0;
  const Complex r = fresnel_reflection(SurfaceSpec::sapphire(zs), b.wavelength);
  const auto refl = PlanarReflector::flat(zs, r);
  const double k = b.wavenumber();
  const double e0 = b.peak_amplitude();
  for (double d = 50e-9; d < 3e-6; d += 97e-9) {
    const double expected = std::norm(1.0 + r * std::polar(1.0, 2.0 * k * d));
    CHECK(numeric_norm2(b, &refl, Vec3(0, 0, zs - d)) / (e0 * e0) == rel(expected, 1e-5));
  }
}

TEST_CASE("analytic field gradient matches central differences") {
  BeamParams b = default_beam();
  b.focus = Vec3(0.1e-6, -0.05e-6, -0.2e-6);
  const auto flat = PlanarReflector::flat(0.3e-6, Complex(-0.6, 0.2));
  PlanarReflector grating{0.3e-6, {{Complex(-0.5, 0.1), 0.0, 0.0},
                                   {Complex(0.2, 0.05), 1e7, 5e6},
                                   {Complex(0.2, 0.05), -1e7, 5e6}}};
  const double h = 1e-11;
  const PlanarReflector* reflectors[] = {nullptr, &flat, &grating};
  for (const PlanarReflector* r : reflectors) {
    const Vec3 p(0.23e-6, 0.11e-6, -0.41e-6);
    const ScalarSample s = standing_scalar(b, r, p);
    for (int i = 0; i < 3; ++i) {
      Vec3 dp = Vec3::Zero();
      dp(i) = h;
      const Complex fd =
          (standing_scalar(b, r, p + dp).value - standing_scalar(b, r, p - dp).value) / (2.0 * h);
      CHECK(std::abs(fd - s.grad(i)) < 1e-5 * s.grad.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("shifting a uniform reflector laterally leaves the field unchanged") {
  const BeamParams b = default_beam();
  const auto flat = PlanarReflector::flat(0.4e-6, Complex(-0.3, 0.0));
  const auto shifted = flat.seen_from(0.37e-6);
  const Vec3 p(0.1e-6, 0, -0.2e-6);
  CHECK(standing_scalar(b, &flat, p).value == standing_scalar(b, &shifted, p).value);
}
