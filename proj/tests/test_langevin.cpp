#include "approx.hpp"
#include "doctest.h"
#include "levisim/langevin.hpp"
#include "levisim/random.hpp"

#include <cmath>
#include <numeric>

using namespace levisim;

namespace {

constexpr double kB = 1.380649e-23;

double mean_square(const std::vector<double>& v, std::size_t skip = 0) {
  double s = 0.0;
  for (std::size_t i = skip; i < v.size(); ++i) s += v[i] * v[i];
  return s / static_cast<double>(v.size() - skip);
}

SimConfig harmonic_config(double dt, std::uint64_t steps, double gamma) {
  SimConfig cfg;
  cfg.dt = dt;
  cfg.n_steps = steps;
  cfg.rates = DampingRates{gamma, gamma, gamma};
  return cfg;
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter RNG gives unit normals and is addressable") {
  const CounterRng rng(42);
  double s1 = 0.0;
  double s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = rng.normal_pair(static_cast<std::uint64_t>(i), 3);
    s1 += a + b;
    s2 += a * a + b * b;
  }
  CHECK(std::abs(s1 / (2 * n)) < 0.01);
  CHECK(s2 / (2 * n) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(rng.normal_pair(77, 1) == CounterRng(42).normal_pair(77, 1));
  CHECK(rng.normal_pair(77, 1) != CounterRng(43).normal_pair(77, 1));
  CHECK(rng.normal_pair(77, 1) != rng.normal_pair(77, 2));
}

TEST_CASE("without noise and damping the harmonic trap conserves energy") {
  const DumbbellGeom geom;
  const double m = geom.mass();
  const double inertia = geom.moment_of_inertia();
  const double w = 2.0 * M_PI * 1e5;
  const Vec3 k(m * w * w, 1.3 * m * w * w, 0.4 * m * w * w);
  const double ktheta = 2.0 * inertia * w * w;
  auto field = std::make_shared<HarmonicField>(k, m, ktheta, inertia);

  SimConfig cfg = harmonic_config(1e-3 / (std::sqrt(2.0) * w), 100000, 0.0);
  cfg.thermal_noise = false;
  cfg.damping = false;
  cfg.stride = 100;
  const LangevinSimulator sim(field, cfg);
  RotorState s0;
  s0.position = Vec3(20e-9, -10e-9, 35e-9);
  s0.axis = Vec3(std::cos(0.1), std::sin(0.1), 0.0);
  const TimeSeries ts = sim.simulate(s0);

  const auto energy = [&](std::size_t i) {
    const Vec3 x(ts.channel("x")[i], ts.channel("y")[i], ts.channel("z")[i]);
    const Vec3 v(ts.channel("vx")[i], ts.channel("vy")[i], ts.channel("vz")[i]);
    const double th = ts.channel("theta")[i];
    const double wz = ts.channel("omega_z")[i];
    return 0.5 * m * v.squaredNorm() + 0.5 * x.dot(k.cwiseProduct(x)) + 0.5 * inertia * wz * wz +
           0.5 * ktheta * std::sin(th) * std::sin(th);
  };
  const double e0 = energy(0);
  double worst = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) worst = std::max(worst, std::abs(energy(i) / e0 - 1.0));
  CHECK(worst < 1e-6);
}

TEST_CASE("damping alone gives exponential velocity decay") {
  const double gamma = 1e4;
  SimConfig cfg = harmonic_config(1e-7, 5000, gamma);  // 5 / gamma
  cfg.thermal_noise = false;
  cfg.stride = 50;
  const LangevinSimulator sim(std::make_shared<FreeField>(), cfg);
  RotorState s0;
  s0.velocity = Vec3(1e-3, 0.0, -2e-3);
  const TimeSeries ts = sim.simulate(s0);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double expect = std::exp(-gamma * ts.channel("t")[i]);
    CHECK(ts.channel("vx")[i] / 1e-3 == doctest::Approx(expect).epsilon(0.01));
    CHECK(ts.channel("vz")[i] / -2e-3 == doctest::Approx(expect).epsilon(0.01));
  }
}

TEST_CASE("thermal harmonic run obeys equipartition") {
  const DumbbellGeom geom;
  const double m = geom.mass();
  const double inertia = geom.moment_of_inertia();
  const double kt = kB * 300.0;
  const double w = 2.0 * M_PI * 3e5;
  const Vec3 k(m * w * w, 2.0 * m * w * w, 0.5 * m * w * w);
  // Stiff enough that the small-angle form holds to well under 1%.
  const double ktheta = 400.0 * kt;
  auto field = std::make_shared<HarmonicField>(k, m, ktheta, inertia);
  const double dt = 1.0 / (50.0 * std::sqrt(ktheta / inertia) / (2.0 * M_PI));
  SimConfig cfg = harmonic_config(dt, 4000000, 0.1 * w);
  cfg.stride = 20;
  const TimeSeries ts = LangevinSimulator(field, cfg).simulate(RotorState{});
  CHECK(k.x() * mean_square(ts.channel("x")) / kt == doctest::Approx(1.0).epsilon(0.05));
  CHECK(k.y() * mean_square(ts.channel("y")) / kt == doctest::Approx(1.0).epsilon(0.05));
  CHECK(k.z() * mean_square(ts.channel("z")) / kt == doctest::Approx(1.0).epsilon(0.05));
  CHECK(m * mean_square(ts.channel("vx")) / kt == doctest::Approx(1.0).epsilon(0.05));
  CHECK(ktheta * mean_square(ts.channel("theta")) / kt == doctest::Approx(1.0).epsilon(0.05));
  CHECK(ktheta * mean_square(ts.channel("tilt")) / kt == doctest::Approx(1.0).epsilon(0.05));
  CHECK(inertia * mean_square(ts.channel("omega_z")) / kt == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("halving dt leaves the thermal RMS unchanged") {
  const DumbbellGeom geom;
  const double m = geom.mass();
  const double w = 2.0 * M_PI * 1e5;
  auto field = std::make_shared<HarmonicField>(Vec3::Constant(m * w * w), m);
  const double dt = 0.05 / w;
  const std::uint64_t steps = 1000000;
  std::vector<LangevinSimulator> sims;
  std::vector<RotorState> init;
  for (std::uint64_t s = 0; s < 4; ++s) {
    SimConfig a = harmonic_config(dt, steps, 0.2 * w);
    a.seed = 100 + s;
    a.stride = 10;
    SimConfig b = a;
    b.dt = dt / 2;
    b.n_steps = 2 * steps;
    b.stride = 20;
    sims.emplace_back(field, a);
    sims.emplace_back(field, b);
    init.resize(init.size() + 2);
  }
  const auto out = simulate_batch(sims, init, 2);
  double ms_a = 0.0;
  double ms_b = 0.0;
  for (std::size_t i = 0; i < out.size(); i += 2) {
    for (const char* c : {"x", "y", "z"}) {
      ms_a += mean_square(out[i].channel(c));
      ms_b += mean_square(out[i + 1].channel(c));
    }
  }
  CHECK(std::sqrt(ms_b / ms_a) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("trajectories are reproducible and independent of batch threading") {
  const DumbbellGeom geom;
  const double m = geom.mass();
  const double w = 2.0 * M_PI * 1e5;
  auto field = std::make_shared<HarmonicField>(Vec3::Constant(m * w * w), m);
  std::vector<LangevinSimulator> sims;
  for (std::uint64_t seed : {1, 2, 3}) {
    SimConfig cfg = harmonic_config(0.05 / w, 20000, 0.1 * w);
    cfg.seed = seed;
    sims.emplace_back(field, cfg);
  }
  const std::vector<RotorState> init(3);
  const auto serial = simulate_batch(sims, init, 1);
  const auto threaded = simulate_batch(sims, init, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(serial[i].channels == threaded[i].channels);
    CHECK(serial[i].metadata == threaded[i].metadata);
  }
  CHECK(serial[0].channels != serial[1].channels);
  CHECK(serial[0].metadata.at("config_hash") != serial[1].metadata.at("config_hash"));
}

TEST_CASE("axis stays normalised and the step-size and box guards fire") {
  const DumbbellGeom geom;
  const double m = geom.mass();
  const double w = 2.0 * M_PI * 1e5;
  auto field = std::make_shared<HarmonicField>(Vec3::Constant(m * w * w), m, geom.moment_of_inertia() * w * w,
                                               geom.moment_of_inertia());
  SimConfig cfg = harmonic_config(0.05 / w, 5000, 0.1 * w);
  const LangevinSimulator sim(field, cfg);
  RotorState s;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    s = sim.step(s, i);
    REQUIRE(std::abs(s.axis.norm() - 1.0) < 1e-9);
    REQUIRE(std::abs(s.axis.dot(s.omega)) <= 1e-9 * s.omega.norm());
  }

  SimConfig coarse = cfg;
  coarse.dt = 1.0 / (40.0 * 1e5);
  CHECK_THROWS_AS(LangevinSimulator(field, coarse), Error);

  SimConfig boxed = cfg;
  boxed.box_half = Vec3::Constant(1e-9);
  try {
    LangevinSimulator(field, boxed).simulate(RotorState{});
    FAIL("expected ParticleLost");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParticleLost);
  }
}

TEST_CASE("ring-up, ring-down and steady rotation closed forms") {
  const double inertia = DumbbellGeom{}.moment_of_inertia();
  const double gamma = 2.5;
  const double mo = 1e-22;
  const double wss = steady_state_rotation(mo, inertia, gamma);
  CHECK(wss == rel(mo / (inertia * gamma)));
  CHECK(steady_state_rotation(0.0, inertia, gamma) == 0.0);
  CHECK(ring_up(mo, inertia, gamma, 0.0) == 0.0);
  CHECK(ring_up(mo, inertia, gamma, 1.0 / gamma) == rel((1.0 - std::exp(-1.0)) * wss, 1e-12));
  CHECK(ring_up(mo, inertia, gamma, 1e3) == rel(wss, 1e-12));
  CHECK(ring_down(5.0, gamma, 2.0 / gamma) == rel(5.0 * std::exp(-2.0), 1e-14));
}

TEST_CASE("tip speed") {
  CHECK(tip_speed(DumbbellGeom{}, 0.0) == 0.0);
  CHECK(tip_speed(DumbbellGeom{}, 2.0 * M_PI * 1.6e9) == rel(2.0 * M_PI * 1.6e9 * 144e-9));
  DumbbellGeom big;
  big.sphere_diameter = 288e-9;
  CHECK(tip_speed(big, 3.0) == rel(2.0 * tip_speed(DumbbellGeom{}, 3.0)));
}

TEST_CASE("stochastic driven rotation matches the balance and the ring-up fit") {
  const DumbbellGeom geom;
  const double inertia = geom.moment_of_inertia();
  const double gamma = 2000.0;
  const double wss = 2.0e7;  // rad/s; thermal spread sqrt(kT/I) is ~3e5
  SimConfig cfg;
  cfg.rates = DampingRates{1e5, 1e5, gamma};
  cfg.drive_torque = Vec3(0, 0, wss * inertia * gamma);
  cfg.dt = 1.0 / (60.0 * wss / (2.0 * M_PI));
  cfg.n_steps = static_cast<std::uint64_t>(6.0 / gamma / cfg.dt);
  cfg.stride = 200;
  const TimeSeries ts = LangevinSimulator(std::make_shared<FreeField>(), cfg).simulate(RotorState{});
  const auto& t = ts.channel("t");
  const auto& wz = ts.channel("omega_z");

  double tail = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 4.0 / gamma) {
      tail += wz[i];
      ++n;
    }
  }
  CHECK(tail / static_cast<double>(n) == doctest::Approx(wss).epsilon(0.01));

  const RingFit fit = fit_ring_up(t, wz);
  CHECK(fit.tau == doctest::Approx(1.0 / gamma).epsilon(0.03));
  CHECK(fit.omega_ss == doctest::Approx(wss).epsilon(0.01));
}
