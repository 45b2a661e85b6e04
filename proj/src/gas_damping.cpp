#include "levisim/gas_damping.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace levisim {

double Environment::mean_speed() const {
  return std::sqrt(8.0 * phys::kB * temperature / (phys::pi * gas_mass));
}

double Environment::number_density() const {
  return pressure.in_pa() / (phys::kB * temperature);
}

double Environment::mean_free_path() const {
  return phys::kB * temperature /
         (std::sqrt(2.0) * phys::pi * molecule_diameter * molecule_diameter * pressure.in_pa());
}

void Environment::validate() const {
  if (!(pressure.in_pa() > 0.0) || !(temperature > 0.0) || !(gas_mass > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "pressure, temperature and gas mass must be positive");
  }
  if (accommodation < 0.0 || accommodation > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "accommodation coefficient must lie in [0, 1]");
  }
}

bool free_molecular(const Environment& env, double length) {
  return env.mean_free_path() > 10.0 * length;
}

namespace {

void check_regime(const Environment& env, double length) {
  if (!free_molecular(env, length)) {
    spdlog::warn("{}: mean free path {:.3g} m is not >> particle size {:.3g} m at {:.3g} Torr",
                 to_string(ErrorKind::RegimeViolation), env.mean_free_path(), length,
                 env.pressure.in_torr());
  }
}

// Rigid motion of the body: surface velocity U + omega x r.
struct Motion {
  Vec3 translation = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  Vec3 at(const Vec3& r) const { return translation + omega.cross(r); }
};

// One ray from a surface point that lands on the other sphere, with the
// bilinear stencil of its landing point on that sphere's sample grid.
struct CapRay {
  std::array<std::uint32_t, 4> node;
  std::array<float, 4> weight;
  float w;                // (cos / pi) dOmega
  Eigen::Vector3f dir;
};

struct SurfacePoint {
  Vec3 normal;
  Vec3 position;
  double area;
  // Aggregates over the shadowing cap.
  double cap_w = 0.0;                  // sum (cos/pi) dOmega
  Vec3 cap_wy = Vec3::Zero();          // sum (cos/pi) dOmega y
  Vec3 cap_b = Vec3::Zero();           // sum cos dOmega s
  Mat3 cap_m = Mat3::Zero();           // sum cos dOmega s s^T
  std::size_t ray_begin = 0;
  std::size_t ray_end = 0;
};

struct Body {
  int n_theta;
  int n_phi;
  std::vector<Vec3> centres;
  std::vector<std::vector<SurfacePoint>> points;  // per sphere
  std::vector<CapRay> rays;
};

Body build_body(bool pair, const QuadratureOptions& o) {
  Body body{o.n_theta, o.n_phi, {}, {}, {}};
  if (pair) {
    body.centres = {Vec3(0, 0, -1), Vec3(0, 0, 1)};
  } else {
    body.centres = {Vec3::Zero()};
  }
  const double dth = phys::pi / o.n_theta;
  const double dph = 2.0 * phys::pi / o.n_phi;

  Eigen::VectorXd gx;
  Eigen::VectorXd gw;
  {
    // Gauss-Legendre nodes via the Golub-Welsch eigenproblem.
    const int n = o.cap_mu;
    Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
      const double b = i / std::sqrt(4.0 * i * i - 1.0);
      jm(i, i - 1) = b;
      jm(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jm);
    gx = es.eigenvalues();
    gw = 2.0 * es.eigenvectors().row(0).transpose().array().square();
  }

  for (std::size_t s = 0; s < body.centres.size(); ++s) {
    std::vector<SurfacePoint> pts;
    pts.reserve(static_cast<std::size_t>(o.n_theta) * o.n_phi);
    for (int i = 0; i < o.n_theta; ++i) {
      const double th = (i + 0.5) * dth;
      for (int j = 0; j < o.n_phi; ++j) {
        const double ph = j * dph;
        SurfacePoint p;
        p.normal = Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
        p.position = body.centres[s] + p.normal;
        p.area = std::sin(th) * dth * dph;
        pts.push_back(p);
      }
    }
    body.points.push_back(std::move(pts));
  }
  if (!pair) return body;

  for (std::size_t s = 0; s < 2; ++s) {
    const Vec3& other = body.centres[1 - s];
    for (SurfacePoint& p : body.points[s]) {
      p.ray_begin = body.rays.size();
      const Vec3 t = other - p.position;
      const double len = t.norm();
      const Vec3 axis = t / len;
      const double cos_edge = std::sqrt(1.0 - 1.0 / (len * len));
      const Vec3 e1 = axis.cross(Vec3(0.3, 0.5, 0.81)).normalized();
      const Vec3 e2 = axis.cross(e1);
      for (int a = 0; a < o.cap_mu; ++a) {
        const double mu = 0.5 * (1.0 + cos_edge) + 0.5 * (1.0 - cos_edge) * gx(a);
        const double wmu = 0.5 * (1.0 - cos_edge) * gw(a);
        const double sn = std::sqrt(1.0 - mu * mu);
        for (int b = 0; b < o.cap_phi; ++b) {
          const double ph = 2.0 * phys::pi * (b + 0.5) / o.cap_phi;
          const Vec3 dir = mu * axis + sn * (std::cos(ph) * e1 + std::sin(ph) * e2);
          const double cosx = dir.dot(p.normal);
          if (cosx <= 0.0) continue;
          const double wdir = wmu * 2.0 * phys::pi / o.cap_phi * cosx;

          const double bb = dir.dot(t);
          const double disc = std::max(bb * bb - (len * len - 1.0), 0.0);
          const Vec3 y = p.position + (bb - std::sqrt(disc)) * dir;
          const Vec3 yn = y - other;
          const double yth = std::acos(std::clamp(yn.z(), -1.0, 1.0));
          double yph = std::atan2(yn.y(), yn.x());
          if (yph < 0.0) yph += 2.0 * phys::pi;

          const double ft = yth / dth - 0.5;
          const int i0 = static_cast<int>(std::floor(ft));
          const double f = ft - i0;
          const int i0c = std::clamp(i0, 0, o.n_theta - 1);
          const int i1c = std::clamp(i0 + 1, 0, o.n_theta - 1);
          const double fp = yph / dph;
          int j0 = static_cast<int>(std::floor(fp));
          const double fq = fp - j0;
          j0 = ((j0 % o.n_phi) + o.n_phi) % o.n_phi;
          const int j1 = (j0 + 1) % o.n_phi;

          CapRay r;
          r.node = {static_cast<std::uint32_t>(i0c * o.n_phi + j0),
                    static_cast<std::uint32_t>(i0c * o.n_phi + j1),
                    static_cast<std::uint32_t>(i1c * o.n_phi + j0),
                    static_cast<std::uint32_t>(i1c * o.n_phi + j1)};
          r.weight = {static_cast<float>((1 - f) * (1 - fq)), static_cast<float>((1 - f) * fq),
                      static_cast<float>(f * (1 - fq)), static_cast<float>(f * fq)};
          r.w = static_cast<float>(wdir / phys::pi);
          r.dir = dir.cast<float>();
          body.rays.push_back(r);

          p.cap_w += wdir / phys::pi;
          p.cap_wy += wdir / phys::pi * y;
          p.cap_b += wdir * dir;
          p.cap_m += wdir * dir * dir.transpose();
        }
      }
      p.ray_end = body.rays.size();
    }
  }
  return body;
}

double sample(const CapRay& r, const std::vector<double>& g) {
  return r.weight[0] * g[r.node[0]] + r.weight[1] * g[r.node[1]] + r.weight[2] * g[r.node[2]] +
         r.weight[3] * g[r.node[3]];
}

// Net force and torque (about the origin) in units of n m vbar for unit radius.
std::pair<Vec3, Vec3> drag(const Body& body, const Motion& motion, double alpha) {
  const std::size_t ns = body.centres.size();

  // First-order arrival number flux: free-stream part plus re-emission from
  // the other sphere, solved by fixed-point iteration.
  std::vector<std::vector<double>> n1_inf(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    for (const SurfacePoint& p : body.points[s]) {
      const Vec3 b_vis = (2.0 * phys::pi / 3.0) * p.normal - p.cap_b;
      n1_inf[s].push_back(3.0 / (4.0 * phys::pi) * b_vis.dot(motion.at(p.position)));
    }
  }
  std::vector<std::vector<double>> n1 = n1_inf;
  if (ns == 2 && alpha > 0.0) {
    for (int it = 0; it < 200; ++it) {
      double change = 0.0;
      double scale = 0.0;
      for (std::size_t s = 0; s < 2; ++s) {
        const auto& other = n1[1 - s];
        for (std::size_t k = 0; k < body.points[s].size(); ++k) {
          const SurfacePoint& p = body.points[s][k];
          double acc = 0.0;
          for (std::size_t r = p.ray_begin; r < p.ray_end; ++r) {
            acc += body.rays[r].w * sample(body.rays[r], other);
          }
          const double v = n1_inf[s][k] + alpha * acc;
          change = std::max(change, std::abs(v - n1[s][k]));
          scale = std::max(scale, std::abs(v));
          n1[s][k] = v;
        }
      }
      if (change <= 1e-13 * scale) break;
    }
  }

  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& other = n1[ns == 2 ? 1 - s : s];
    for (std::size_t k = 0; k < body.points[s].size(); ++k) {
      const SurfacePoint& p = body.points[s][k];
      const Vec3 v = motion.at(p.position);
      const Mat3 nn = p.normal * p.normal.transpose();
      const Mat3 m_vis = (phys::pi / 2.0) * nn + (phys::pi / 4.0) * (Mat3::Identity() - nn) - p.cap_m;

      // Arriving momentum flux, lab frame, first order in the velocity.
      Vec3 from_cap = Vec3::Zero();
      for (std::size_t r = p.ray_begin; r < p.ray_end; ++r) {
        const CapRay& ray = body.rays[r];
        from_cap -= ray.w * sample(ray, other) * (3.0 * phys::pi / 8.0) * ray.dir.cast<double>();
      }
      from_cap += 0.25 * (motion.translation * p.cap_w + motion.omega.cross(p.cap_wy));
      const Vec3 arrive = -(1.0 / phys::pi) * m_vis * v + 0.25 * (1.0 - p.cap_w) * v +
                          alpha * from_cap;

      const Vec3 diffuse = arrive - n1[s][k] * (phys::pi / 4.0) * p.normal - 0.25 * v;
      const Vec3 specular = 2.0 * (arrive - 0.25 * v).dot(p.normal) * p.normal;
      const Vec3 f = p.area * (alpha * diffuse + (1.0 - alpha) * specular);
      force += f;
      torque += p.position.cross(f);
    }
  }
  return {force, torque};
}

QuadratureOptions refined(const QuadratureOptions& o) {
  const auto up = [](int n) { return static_cast<int>(std::lround(n * std::sqrt(2.0))); };
  return {up(o.n_theta), up(o.n_phi), up(o.cap_mu), up(o.cap_phi), o.tolerance};
}

}  // namespace

ShapeFactors shape_factors_at(bool pair, double accommodation, const QuadratureOptions& options) {
  if (options.n_theta < 4 || options.n_phi < 4 || options.cap_mu < 2 || options.cap_phi < 4) {
    throw Error(ErrorKind::InvalidArgument, "surface quadrature too coarse");
  }
  const Body body = build_body(pair, options);
  ShapeFactors out;
  out.parallel = -drag(body, {Vec3::UnitZ(), Vec3::Zero()}, accommodation).first.z();
  out.perpendicular = -drag(body, {Vec3::UnitX(), Vec3::Zero()}, accommodation).first.x();
  out.rotation = -drag(body, {Vec3::Zero(), Vec3::UnitX()}, accommodation).second.x();
  return out;
}

ShapeFactors shape_factors(bool pair, double accommodation, const QuadratureOptions& options) {
  using Key = std::tuple<bool, double, int, int, int, int, double>;
  static std::mutex mutex;
  static std::map<Key, ShapeFactors> cache;
  const Key key{pair,          accommodation, options.n_theta,  options.n_phi,
                options.cap_mu, options.cap_phi, options.tolerance};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  const ShapeFactors coarse = shape_factors_at(pair, accommodation, options);
  const ShapeFactors fine = shape_factors_at(pair, accommodation, refined(options));
  // Coefficients that vanish by symmetry are compared against the drag scale.
  const double floor = 1e-9 * std::abs(fine.parallel);
  const auto rel = [&](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), floor); };
  const double worst = std::max({rel(coarse.parallel, fine.parallel),
                                 rel(coarse.perpendicular, fine.perpendicular),
                                 rel(coarse.rotation, fine.rotation)});
  spdlog::debug("gas quadrature {}x{}: refinement change {:.2e}", options.n_theta, options.n_phi,
                worst);
  if (worst > options.tolerance) {
    throw Error(ErrorKind::QuadratureNonConvergence,
                fmt::format("surface quadrature changed by {:.3f}% on refinement (limit {:.3f}%)",
                            100.0 * worst, 100.0 * options.tolerance));
  }
  std::lock_guard lock(mutex);
  cache.emplace(key, fine);
  return fine;
}

Vec3 DampingRates::lab_rates(const Vec3& axis) const {
  const Vec3 a2 = axis.normalized().cwiseAbs2();
  return (perpendicular * Vec3::Ones() + (parallel - perpendicular) * a2);
}

double sphere_com_damping(const Environment& env, double radius, double density) {
  env.validate();
  check_regime(env, 2.0 * radius);
  return 8.0 / phys::pi * env.pressure.in_pa() / (density * radius * env.mean_speed()) *
         (1.0 + phys::pi * env.accommodation / 8.0);
}

double sphere_rotational_damping(const Environment& env, double radius, double density) {
  env.validate();
  check_regime(env, 2.0 * radius);
  return 10.0 * env.accommodation * env.pressure.in_pa() /
         (phys::pi * density * radius * env.mean_speed());
}

DampingRates dumbbell_damping(const Environment& env, const DumbbellGeom& geom,
                              const QuadratureOptions& options) {
  env.validate();
  check_regime(env, 2.0 * geom.sphere_diameter);
  const ShapeFactors c = shape_factors(true, env.accommodation, options);
  const double a = geom.radius();
  const double flux = env.number_density() * env.gas_mass * env.mean_speed();
  DampingRates r;
  r.parallel = c.parallel * flux * a * a / geom.mass();
  r.perpendicular = c.perpendicular * flux * a * a / geom.mass();
  r.rotational = c.rotation * flux * a * a * a * a / geom.moment_of_inertia();
  return r;
}

RotationalDamping rotational_damping(const Environment& env, const DumbbellGeom& geom) {
  const double g = dumbbell_damping(env, geom).rotational;
  return {g, 1.0 / g};
}

double proximity_correction(const Environment& env, double separation, double particle_radius) {
  if (!(separation > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "separation must be positive");
  }
  const double mfp = env.mean_free_path();
  if (mfp >= 10.0 * 2.0 * particle_radius && mfp >= separation) return 1.0;
  return 1.0 + 9.0 / 8.0 * particle_radius / separation;
}

}  // namespace levisim
