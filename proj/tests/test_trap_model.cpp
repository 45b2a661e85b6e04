#include "approx.hpp"
#include "doctest.h"
#include "levisim/trap_model.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace levisim;

namespace {

constexpr double eps0 = 8.8541878128e-12;

// Direct solve of the two coupled point dipoles in a uniform static field,
// using the full near-field dipole tensor (3 nn - I) / (4 pi eps0 D^3).
Eigen::Vector3d coupled_dipole_total(double alpha0, double D, const Eigen::Vector3d& axis,
                                     const Eigen::Vector3d& field) {
  const Eigen::Matrix3d g =
      (3.0 * axis * axis.transpose() - Eigen::Matrix3d::Identity()) / (4.0 * M_PI * eps0 * D * D * D);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(6, 6);
  a.block<3, 3>(0, 3) = -alpha0 * g;
  a.block<3, 3>(3, 0) = -alpha0 * g;
  Eigen::VectorXd rhs(6);
  rhs << alpha0 * field, alpha0 * field;
  const Eigen::VectorXd p = a.fullPivLu().solve(rhs);
  return p.head<3>() + p.tail<3>();
}

TrapPotential sapphire_potential(double zs) {
  BeamParams b;
  return TrapPotential(b, make_reflector(SurfaceSpec::sapphire(zs), b.wavelength), DumbbellGeom{});
}

}  // namespace

TEST_CASE("dumbbell mass and inertia") {
  const DumbbellGeom g;
  const double a = 72e-9;
  const double ms = 2200.0 * 4.0 / 3.0 * M_PI * a * a * a;
  CHECK(g.sphere_mass() == rel(ms));
  CHECK(g.sphere_mass() == rel(3.4397e-18, 1e-4));
  CHECK(g.mass() == rel(2.0 * ms));
  // Parallel-axis sum: 2 (2/5 m a^2 + m a^2).
  CHECK(g.moment_of_inertia() == rel(2.0 * (0.4 + 1.0) * ms * a * a));
  CHECK(g.spin_inertia() == rel(0.8 * ms * a * a));

  const RigidInertia single = two_sphere_inertia(ms, 0.0, a, 2.0 * a);
  CHECK(single.transverse == rel(0.4 * ms * a * a));
  CHECK(single.spin == rel(0.4 * ms * a * a));
}

TEST_CASE("pair polarizability agrees with a direct coupled-dipole solve") {
  const DumbbellGeom g;
  const PolarizabilityTensor t = dumbbell_polarizability(g);
  const double a0 = t.sphere.real();
  CHECK(a0 == rel(4.0 * M_PI * eps0 * std::pow(72e-9, 3) * 1.1 / 4.1));

  const Eigen::Vector3d axis(0, 0, 1);
  const Eigen::Vector3d along = coupled_dipole_total(a0, 144e-9, axis, Eigen::Vector3d(0, 0, 1));
  const Eigen::Vector3d across = coupled_dipole_total(a0, 144e-9, axis, Eigen::Vector3d(1, 0, 0));
  CHECK(t.parallel.real() == rel(along.z(), 1e-12));
  CHECK(t.perpendicular.real() == rel(across.x(), 1e-12));
  CHECK(t.parallel.real() > 2.0 * a0);
  CHECK(t.perpendicular.real() < 2.0 * a0);
  CHECK(t.anisotropy().real() > 0.0);
}

TEST_CASE("radiation reaction adds a small positive imaginary part") {
  const double k = 2.0 * M_PI / 1550e-9;
  const Complex a = sphere_polarizability(72e-9, 2.1, true, k);
  const double a0 = sphere_polarizability(72e-9, 2.1).real();
  CHECK(a.imag() > 0.0);
  CHECK(a.imag() == rel(std::pow(k, 3) * a0 * a0 / (6.0 * M_PI * eps0), 1e-3));
  CHECK_THROWS_AS(sphere_polarizability(-1.0, 2.1), Error);
}

TEST_CASE("free space has a single well at the focus") {
  const TrapPotential pot(BeamParams{}, std::nullopt, DumbbellGeom{});
  const auto wells = find_wells(pot);
  REQUIRE(wells.size() == 1);
  CHECK(std::abs(wells[0].z) < 1e-10);
  CHECK(wells[0].freqs.fx > wells[0].freqs.fz);
  CHECK(wells[0].freqs.fy > wells[0].freqs.fz);
  CHECK(wells[0].freqs.ftorsion > 0.0);
}

TEST_CASE("force and torque are consistent with the energy") {
  const TrapPotential pot = sapphire_potential(0.5e-6);
  const Pose pose{Vec3(0.12e-6, -0.07e-6, -0.31e-6), Vec3(0.9, 0.3, 0.2).normalized()};
  const PotentialSample s = pot.evaluate(pose);
  CHECK(s.energy == rel(pot.energy(pose), 1e-14));

  const double h = 1e-11;
  for (int i = 0; i < 3; ++i) {
    Pose a = pose;
    Pose b = pose;
    a.com(i) += h;
    b.com(i) -= h;
    const double fd = -(pot.energy(a) - pot.energy(b)) / (2.0 * h);
    CHECK(s.force(i) == doctest::Approx(fd).epsilon(1e-5).scale(s.force.norm()));
  }

  // Torque component along n is -dU/dphi for a rotation about n.
  const double dphi = 1e-6;
  for (int i = 0; i < 3; ++i) {
    const Vec3 n = Vec3::Unit(i);
    Pose a = pose;
    Pose b = pose;
    a.axis = Eigen::AngleAxisd(dphi, n) * pose.axis;
    b.axis = Eigen::AngleAxisd(-dphi, n) * pose.axis;
    const double fd = -(pot.energy(a) - pot.energy(b)) / (2.0 * dphi);
    CHECK(s.torque(i) == doctest::Approx(fd).epsilon(1e-5).scale(s.torque.norm()));
  }
}

TEST_CASE("standing-wave wells: ordering, spacing and equilibrium") {
  const double zs = loading_surface_position(BeamParams{}, 1);
  const TrapPotential pot = sapphire_potential(zs);
  const auto wells = find_wells(pot);
  REQUIRE(wells.size() >= 5);
  for (std::size_t i = 0; i < wells.size(); ++i) {
    CHECK(wells[i].index == static_cast<int>(i) + 1);
    CHECK(wells[i].separation > 0.0);
    CHECK(wells[i].depth_kbt > 0.0);
    const PotentialSample s = pot.evaluate(Pose{Vec3(0, 0, wells[i].z), Vec3::UnitX()});
    CHECK(s.force.norm() < 1e-25);
    if (i > 0) {
      const double spacing = wells[i].separation - wells[i - 1].separation;
      CHECK(spacing == rel(1550e-9 / 2.0, 0.15));
    }
  }
}

TEST_CASE("well positions approach the plane-wave antinodes for a wide beam") {
  BeamParams b;
  b.waist = 30e-6;
  b.power = 20.0;
  const TrapPotential pot(b, make_reflector(SurfaceSpec::sapphire(0.0), b.wavelength),
                          DumbbellGeom{});
  const auto wells = find_wells(pot);
  REQUIRE(wells.size() >= 3);
  for (int n = 1; n <= 3; ++n) {
    CHECK(wells[n - 1].separation ==
          rel((2 * n - 1) * 1550e-9 / 4.0, 2e-3));
  }
}

TEST_CASE("enhancement ratio decays towards one with well index") {
  const auto rows =
      enhancement_ratio(BeamParams{}, SurfaceSpec::sapphire(0.0), DumbbellGeom{}, {1, 2, 3, 4});
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].well_index == static_cast<int>(i) + 1);
    CHECK(rows[i].rx > 1.0);
    if (i > 0) CHECK(rows[i].rx < rows[i - 1].rx);
  }
}

TEST_CASE("linear-polarization torque is restoring and vanishes when aligned") {
  const PolarizabilityTensor t = dumbbell_polarizability(DumbbellGeom{});
  const double e2 = 1e14;
  CHECK(optical_torque(t, e2, 0.0, DriveMode::Linear) == 0.0);
  CHECK(optical_torque(t, e2, 0.3, DriveMode::Linear) < 0.0);
  CHECK(optical_torque(t, e2, -0.3, DriveMode::Linear) > 0.0);
  CHECK(std::abs(optical_torque(t, e2, M_PI / 4, DriveMode::Linear)) ==
        rel(0.25 * t.anisotropy().real() * e2));
  CHECK(optical_torque(t, e2, 1.0, DriveMode::Circular, 0.5) ==
        rel(0.5 * 0.25 * std::abs(t.anisotropy()) * e2));
}

TEST_CASE("waist calibration recovers the generating waist") {
  BeamParams b;
  b.waist = 1.2e-6;
  const TrapPotential pot(b, std::nullopt, DumbbellGeom{});
  const TrapFrequencies f = trap_frequencies(pot, Pose{});
  const WaistCalibration cal = calibrate_waist(BeamParams{}, DumbbellGeom{}, {std::nullopt, std::nullopt, f.fz});
  CHECK(cal.waist == rel(1.2e-6, 1e-6));
  CHECK(cal.free_space.fz == rel(f.fz, 1e-6));
}

TEST_CASE("unstable or missing wells are reported") {
  const TrapPotential pot(BeamParams{}, std::nullopt, DumbbellGeom{});
  CHECK_THROWS_AS(trap_frequencies(pot, Pose{Vec3(0, 0, 1.5e-6), Vec3::UnitX()}), Error);
  CHECK_THROWS_AS(find_wells(pot, WellScan{2e-6, 7e-6, 1550e-9 / 400}), Error);
}

TEST_CASE("index-matched particle has no polarizability") {
  DumbbellGeom g;
  g.permittivity = 1.0;
  const PolarizabilityTensor t = dumbbell_polarizability(g);
  CHECK(std::abs(t.parallel) == 0.0);
  CHECK(std::abs(t.perpendicular) == 0.0);
  CHECK(std::abs(sphere_polarizability(72e-9, 1.0)) == 0.0);
}

TEST_CASE("trap frequencies scale as the square root of power") {
  BeamParams b;
  const auto surface = make_reflector(SurfaceSpec::sapphire(loading_surface_position(b, 1)), b.wavelength);
  const TrapWell w1 = well_near_focus(TrapPotential(b, surface, DumbbellGeom{}));
  b.power *= 2.0;
  const TrapWell w2 = well_near_focus(TrapPotential(b, surface, DumbbellGeom{}));
  CHECK(w2.z == rel(w1.z, 1e-9));
  CHECK(w2.freqs.fx / w1.freqs.fx == rel(std::sqrt(2.0), 1e-6));
  CHECK(w2.freqs.fy / w1.freqs.fy == rel(std::sqrt(2.0), 1e-6));
  CHECK(w2.freqs.fz / w1.freqs.fz == rel(std::sqrt(2.0), 1e-6));
  CHECK(w2.freqs.ftorsion / w1.freqs.ftorsion == rel(std::sqrt(2.0), 1e-6));
}

TEST_CASE("linear-polarization torque does no work over a full turn") {
  const PolarizabilityTensor t = dumbbell_polarizability(DumbbellGeom{});
  const int n = 720;
  double work = 0.0;
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const double m = optical_torque(t, 1e14, 2.0 * M_PI * (i + 0.5) / n, DriveMode::Linear);
    work += m * 2.0 * M_PI / n;
    scale += std::abs(m) * 2.0 * M_PI / n;
  }
  CHECK(std::abs(work) < 1e-12 * scale);
}
