#include "approx.hpp"
#include "doctest.h"
#include "levisim/grating.hpp"

#include <cmath>

using namespace levisim;

namespace {

std::vector<double> grid(double step, int n) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(step * i);
  return xs;
}

std::vector<double> fx_of(const std::vector<ScanPoint>& scan) {
  std::vector<double> out;
  for (const auto& p : scan) {
    REQUIRE(p.error.empty());
    out.push_back(p.fx);
  }
  return out;
}

BeamParams calibrated_beam() {
  BeamParams b;
  b.waist = 0.967449e-6;
  return b;
}

}  // namespace

TEST_CASE("first evanescent order decay constant") {
  const auto orders = reflection_orders(GratingSpec{}, 1550e-9);
  const double kappa1_per_um = 2.0 * M_PI * std::sqrt(1.0 / (0.6 * 0.6) - 1.0 / (1.55 * 1.55));
  for (const auto& o : orders) {
    if (std::abs(o.n) == 1) CHECK(o.kappa * 1e-6 == rel(kappa1_per_um, 1e-6));
    if (o.n == 0) {
      CHECK(o.kappa == 0.0);
      CHECK(o.kz == rel(2.0 * M_PI / 1550e-9, 1e-12));
    } else {
      CHECK(o.kappa > 0.0);
    }
  }
  CHECK(kappa1_per_um == rel(9.66, 1e-3));
}

TEST_CASE("square-wave Fourier coefficients") {
  GratingSpec g;
  const Complex contrast = g.r_stripe - g.r_groove;
  for (const auto& o : reflection_orders(g, 1550e-9)) {
    if (o.n == 0) {
      CHECK(std::abs(o.amplitude - 0.5 * (g.r_stripe + g.r_groove)) < 1e-15);
      CHECK(std::norm(o.amplitude) <= 1.0);
    } else if (o.n % 2 == 0) {
      CHECK(std::abs(o.amplitude) < 1e-16);
    } else {
      const double sign = ((std::abs(o.n) - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
      CHECK(std::abs(o.amplitude - sign * contrast / (std::abs(o.n) * M_PI)) < 1e-15);
    }
  }

  // Summing the series reproduces the profile away from the stripe edges.
  g.stripe_width = 200e-9;
  g.max_order = 2000;
  const auto orders = reflection_orders(g, 1550e-9);
  const auto profile = [&](double x) {
    Complex s{0.0, 0.0};
    for (const auto& o : orders) s += o.amplitude * std::polar(1.0, o.kx * x);
    return s;
  };
  CHECK(std::abs(profile(0.0) - g.r_stripe) < 2e-3);
  CHECK(std::abs(profile(0.3e-6) - g.r_groove) < 2e-3);
  CHECK(std::abs(profile(0.25e-6) - g.r_groove) < 2e-3);
}

TEST_CASE("uniform reflector has only the specular order") {
  GratingSpec g;
  g.r_groove = g.r_stripe;
  for (const auto& o : reflection_orders(g, 1550e-9)) {
    if (o.n == 0) {
      CHECK(std::abs(o.amplitude - g.r_stripe) < 1e-15);
    } else {
      CHECK(std::abs(o.amplitude) == 0.0);
    }
  }
  CHECK(grating_reflector(g, 1550e-9).orders.size() == 1);
}

TEST_CASE("grating validation") {
  GratingSpec g;
  g.period = 1600e-9;
  try {
    reflection_orders(g, 1550e-9);
    FAIL("expected PropagatingOrder");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PropagatingOrder);
  }
  g = GratingSpec{};
  g.stripe_width = 700e-9;
  CHECK_THROWS_AS(reflection_orders(g, 1550e-9), Error);
  g = GratingSpec{};
  CHECK_THROWS_AS(nearfield_intensity(g, BeamParams{}, 0.0, -1e-9), Error);
}

TEST_CASE("near-field intensity is periodic and decays with height") {
  GratingSpec g;
  BeamParams wide;
  wide.waist = 1e-3;
  wide.power = 20.0;
  wide.focus = Vec3(0, 0, -2e-6);
  g.z = 0.0;

  for (const double x : {0.0, 0.11e-6, 0.37e-6}) {
    const double a = nearfield_intensity(g, wide, x, 430e-9);
    const double b = nearfield_intensity(g, wide, x + g.period, 430e-9);
    CHECK(std::abs(a - b) <= 1e-12 * a);
  }

  const auto depth = [&](double h) {
    double lo = 1e300;
    double hi = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double v = nearfield_intensity(g, wide, g.period * i / 64.0, h);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return (hi - lo) / (0.5 * (hi + lo));
  };
  // Heights half a wavelength apart see the same standing-wave phase, so
  // the ratio isolates exp(-kappa_1 dh).
  const double kappa1 = reflection_orders(g, 1550e-9)[g.max_order + 1].kappa;
  const double ratio = depth(430e-9) / depth(430e-9 + 775e-9);
  CHECK(ratio == rel(std::exp(kappa1 * 775e-9), 0.01));
  CHECK(ratio > 1e3);
  CHECK(depth(6e-6) < 1e-20 * depth(430e-9) + 1e-12);
}

TEST_CASE("dominant period of a sampled profile") {
  std::vector<double> xs = grid(20e-9, 121);
  std::vector<double> ys;
  for (const double x : xs) ys.push_back(3.0 + std::cos(2.0 * M_PI * x / 600e-9 + 0.3));
  CHECK(dominant_period(xs, ys) == rel(600e-9, 1e-6));
  ys.clear();
  for (const double x : xs) ys.push_back(std::sin(2.0 * M_PI * x / 437e-9));
  CHECK(dominant_period(xs, ys) == rel(437e-9, 1e-6));
  CHECK_THROWS_AS(dominant_period({0.0, 1.0}, {0.0, 1.0}), Error);
}

TEST_CASE("lateral scan over the grating") {
  const BeamParams beam = calibrated_beam();
  const GratingSpec g;
  const auto xs = grid(40e-9, 61);
  const auto s1 = scan_trap_frequency(g, beam, DumbbellGeom{}, 1, xs, 1);
  const auto s2 = scan_trap_frequency(g, beam, DumbbellGeom{}, 2, xs, 1);
  const auto s3 = scan_trap_frequency(g, beam, DumbbellGeom{}, 3, xs, 1);
  const auto f1 = fx_of(s1);

  CHECK(std::abs(dominant_period(xs, f1) - 600e-9) < 2e-9);
  CHECK(std::abs(f1[15] - f1[0]) <= 1e-9 * f1[0]);  // x and x + period

  const double d1 = modulation_depth(s1);
  const double d2 = modulation_depth(s2);
  const double d3 = modulation_depth(s3);
  CHECK(d1 > 0.0);
  CHECK(d2 < 0.01 * d1);
  CHECK(d3 < d2);
  CHECK(s1[0].separation == doctest::Approx(430e-9).epsilon(0.1));
  CHECK(s2[0].separation == doctest::Approx(1.2e-6).epsilon(0.1));

  // Results do not depend on the worker count.
  const auto s1b = scan_trap_frequency(g, beam, DumbbellGeom{}, 1, xs, 3);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(s1b[i].fx == s1[i].fx);
}

TEST_CASE("uniform mirror gives a flat scan") {
  GratingSpec g;
  g.r_groove = g.r_stripe;
  const auto f = fx_of(scan_trap_frequency(g, calibrated_beam(), DumbbellGeom{}, 1, grid(75e-9, 9)));
  for (const double v : f) CHECK(std::abs(v - f[0]) <= 1e-10 * f[0]);
}

TEST_CASE("driven rotation near the grating") {
  const DumbbellGeom geom;
  const Environment env;
  const std::vector<double> p = {1e-5, 1e-4, 1e-3, 1e-2};
  const auto curves =
      grating_rotation_curve(calibrated_beam(), geom, env, GratingSpec{}, p,
                             {RotationSurface::FreeSpace, RotationSurface::Sapphire,
                              RotationSurface::Grating});
  REQUIRE(curves.size() == 3);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(curves[2].frequency[i] > curves[1].frequency[i]);
    CHECK(curves[1].frequency[i] > curves[0].frequency[i]);
  }
  for (const auto& c : curves) {
    CHECK(loglog_slope(c.pressure_torr, c.frequency) == rel(-1.0, 1e-9));
    const double eta = calibrate_rotation(c, geom, env, 1e-4, 2e7);
    CHECK(eta * rotation_frequency_at(c, geom, env, 1e-4) == rel(2e7, 1e-12));
    CHECK(eta * rotation_frequency_at(c, geom, env, 1e-3) == rel(2e6, 1e-9));
  }
  // Sapphire raises |E|^2 at an antinode by roughly (1 + |r|)^2.
  const double r = std::abs(fresnel_reflection(SurfaceSpec::sapphire(0.0), 1550e-9));
  CHECK(curves[1].field_norm2 / curves[0].field_norm2 == doctest::Approx(sq(1.0 + r)).epsilon(0.05));
}
