#include "levisim/casimir.hpp"

#include "levisim/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>

namespace levisim {

namespace {

constexpr double kStripeKernel = 16.0 / 15.0;  // integral of (1 + u^2)^(-7/2) over the real line

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Legendre rule on [-1, 1] from the Jacobi matrix (Golub-Welsch).
Rule gauss_legendre(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  Rule r;
  for (int k = 0; k < n; ++k) {
    r.x.push_back(es.eigenvalues()(k));
    r.w.push_back(2.0 * sq(es.eigenvectors()(0, k)));
  }
  return r;
}

struct BodyNode {
  Vec3 p;
  double w;
};

struct SlabNode {
  double x;
  double z;
  double w;
};

// Volume rule for a ball of radius a centred at the origin.
std::vector<BodyNode> ball_nodes(double a, const CasimirMesh& m) {
  const Rule rr = gauss_legendre(m.sphere_radial);
  const Rule rm = gauss_legendre(m.sphere_polar);
  std::vector<BodyNode> out;
  for (int i = 0; i < m.sphere_radial; ++i) {
    const double r = 0.5 * a * (1.0 + rr.x[i]);
    const double wr = 0.5 * a * rr.w[i] * r * r;
    for (int j = 0; j < m.sphere_polar; ++j) {
      const double mu = rm.x[j];
      const double s = std::sqrt(1.0 - mu * mu);
      for (int k = 0; k < m.sphere_azimuth; ++k) {
        const double phi = 2.0 * phys::pi * (k + 0.5) / m.sphere_azimuth;
        out.push_back({Vec3(r * s * std::cos(phi), r * s * std::sin(phi), r * mu),
                       wr * rm.w[j] * 2.0 * phys::pi / m.sphere_azimuth});
      }
    }
  }
  return out;
}

std::vector<BodyNode> body_nodes(const CasimirConfig& cfg, const DumbbellGeom& geom,
                                 CasimirBody body) {
  std::vector<BodyNode> local;
  if (body == CasimirBody::Sphere) {
    local = ball_nodes(body_radius(geom, body), cfg.mesh);
  } else {
    const auto ball = ball_nodes(geom.radius(), cfg.mesh);
    const double half = 0.5 * geom.center_separation();
    for (const double s : {-1.0, 1.0}) {
      for (const auto& n : ball) local.push_back({n.p + Vec3(0.0, s * half, 0.0), n.w});
    }
  }
  // The long axis is body y; rotating by -theta about z puts it at theta from
  // the stripe direction.
  const Eigen::AngleAxisd rot(-cfg.theta_deg * phys::pi / 180.0, Vec3::UnitZ());
  const Vec3 centre(cfg.lateral_offset, 0.0, cfg.separation);
  for (auto& n : local) n.p = rot * n.p + centre;
  return local;
}

std::vector<SlabNode> stripe_nodes(const CasimirConfig& cfg) {
  std::vector<SlabNode> out;
  if (cfg.stripe_width <= 0.0) return out;
  const Rule rx = gauss_legendre(cfg.mesh.stripe_x);
  const Rule rz = gauss_legendre(cfg.mesh.stripe_z);
  const int half = cfg.periods / 2;
  const double hw = 0.5 * cfg.stripe_width;
  const double ht = 0.5 * cfg.stripe_thickness;
  for (int s = -half; s <= half; ++s) {
    for (int i = 0; i < cfg.mesh.stripe_x; ++i) {
      for (int k = 0; k < cfg.mesh.stripe_z; ++k) {
        out.push_back({s * cfg.period + hw * rx.x[i], -ht + ht * rz.x[k],
                       hw * ht * rx.w[i] * rz.w[k] * kStripeKernel});
      }
    }
  }
  return out;
}

double tree_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return tree_sum(v, lo, mid) + tree_sum(v, mid, hi);
}

CasimirConfig at_theta(CasimirConfig cfg, double theta_deg) {
  cfg.theta_deg = theta_deg;
  return cfg;
}

void check_grid_step(const std::vector<double>& grid, double max_step, const char* what) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double step = std::abs(grid[i] - grid[i - 1]);
    if (step > max_step * (1.0 + 1e-12)) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("{} grid step {:.4g} exceeds {:.4g}", what, step, max_step));
    }
  }
}

}  // namespace

CasimirMesh CasimirMesh::refined() const {
  return {2 * sphere_radial, 2 * sphere_polar, 2 * sphere_azimuth, 2 * stripe_x, 2 * stripe_z};
}

void CasimirConfig::validate(const DumbbellGeom& geom) const {
  const auto bad = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); };
  if (!(period > 0.0)) bad("grating period must be positive");
  if (!(stripe_width >= 0.0 && stripe_width <= period)) bad("stripe width must lie in [0, period]");
  if (!(stripe_thickness > 0.0)) bad("stripe thickness must be positive");
  if (periods < 7 || periods % 2 == 0) bad("at least seven stripes, odd count, are required");
  if (mesh.sphere_radial < 2 || mesh.sphere_polar < 2 || mesh.stripe_x < 2 || mesh.stripe_z < 2 ||
      mesh.sphere_azimuth < 4 || mesh.sphere_azimuth % 2 != 0) {
    bad("mesh node counts are too small (azimuth must be even)");
  }
  if (!(mesh_tolerance > 0.0)) bad("mesh tolerance must be positive");
  if (!(substrate_weight >= 0.0)) bad("substrate weight must be non-negative");
  if (!std::isfinite(c_cal)) bad("calibration coefficient must be finite");
  const double reach = std::max(geom.radius(), body_radius(geom, CasimirBody::Sphere));
  if (!(separation > reach)) {
    throw Error(ErrorKind::Interpenetration,
                fmt::format("separation {:.4g} m does not clear the body (half-height {:.4g} m)",
                            separation, reach));
  }
}

double body_radius(const DumbbellGeom& geom, CasimirBody body) {
  return body == CasimirBody::Sphere ? geom.radius() * std::cbrt(2.0) : geom.radius();
}

double pairwise_energy(const CasimirConfig& cfg, const DumbbellGeom& geom, CasimirBody body,
                       unsigned threads) {
  cfg.validate(geom);
  const auto bn = body_nodes(cfg, geom, body);
  const auto sn = stripe_nodes(cfg);
  std::vector<double> partial(bn.size());
  parallel_for(bn.size(), threads, [&](std::size_t i) {
    const Vec3& p = bn[i].p;
    double s = 0.0;
    for (const auto& g : sn) {
      const double r2 = sq(p.x() - g.x) + sq(p.z() - g.z);
      s += g.w / (r2 * r2 * r2);
    }
    if (cfg.substrate_weight > 0.0) {
      // Half-space z < -t: integral of r^-7 over it is pi / (10 h^4).
      s += cfg.substrate_weight * phys::pi / (10.0 * sq(sq(p.z() + cfg.stripe_thickness)));
    }
    partial[i] = bn[i].w * s;
  });
  return -cfg.c_cal * tree_sum(partial, 0, partial.size());
}

MeshReport check_mesh_convergence(const CasimirConfig& cfg, const DumbbellGeom& geom,
                                  CasimirBody body, unsigned threads) {
  MeshReport r;
  r.energy = pairwise_energy(cfg, geom, body, threads);
  CasimirConfig fine = cfg;
  fine.mesh = cfg.mesh.refined();
  r.refined_energy = pairwise_energy(fine, geom, body, threads);
  CasimirConfig wide = cfg;
  wide.periods = 2 * cfg.periods + 1;
  const double wide_energy = pairwise_energy(wide, geom, body, threads);
  const double scale = std::abs(r.refined_energy);
  r.mesh_change = scale > 0.0 ? std::abs(r.energy - r.refined_energy) / scale : 0.0;
  r.period_change = scale > 0.0 ? std::abs(r.energy - wide_energy) / scale : 0.0;
  spdlog::debug("casimir mesh check: E = {:.6g}, refined {:.6g}, change {:.3g}, stripes {:.3g}",
                r.energy, r.refined_energy, r.mesh_change, r.period_change);
  if (r.mesh_change > cfg.mesh_tolerance || r.period_change > cfg.mesh_tolerance) {
    throw Error(ErrorKind::MeshNotConverged,
                fmt::format("energy moves by {:.3g} under mesh refinement and {:.3g} under "
                            "doubling the stripe count (tolerance {:.3g})",
                            r.mesh_change, r.period_change, cfg.mesh_tolerance));
  }
  return r;
}

double casimir_torque_at(const CasimirConfig& cfg, const DumbbellGeom& geom, CasimirBody body,
                         unsigned threads, double delta_deg) {
  const double ep = pairwise_energy(at_theta(cfg, cfg.theta_deg + delta_deg), geom, body, threads);
  const double em = pairwise_energy(at_theta(cfg, cfg.theta_deg - delta_deg), geom, body, threads);
  return -(ep - em) / (2.0 * delta_deg * phys::pi / 180.0);
}

std::vector<TorqueRow> casimir_torque_sweep(const CasimirConfig& cfg, const DumbbellGeom& geom,
                                            const std::vector<double>& thetas_deg,
                                            CasimirBody body, unsigned threads) {
  check_grid_step(thetas_deg, 5.0, "angle");
  std::vector<TorqueRow> rows;
  for (const double th : thetas_deg) {
    const CasimirConfig c = at_theta(cfg, th);
    rows.push_back({th, pairwise_energy(c, geom, body, threads),
                    casimir_torque_at(c, geom, body, threads)});
  }
  return rows;
}

double torque_extremum(const CasimirConfig& cfg, const DumbbellGeom& geom, double lo_deg,
                       double hi_deg, unsigned threads) {
  const auto neg_abs = [&](double th) {
    return -std::abs(casimir_torque_at(at_theta(cfg, th), geom, CasimirBody::Dumbbell, threads));
  };
  // Coarse 1-degree pass, then Brent inside the best bracket.
  double best = lo_deg;
  double best_v = neg_abs(lo_deg);
  for (double th = lo_deg + 1.0; th <= hi_deg; th += 1.0) {
    const double v = neg_abs(th);
    if (v < best_v) {
      best_v = v;
      best = th;
    }
  }
  const auto r = boost::math::tools::brent_find_minima(
      neg_abs, std::max(lo_deg, best - 1.0), std::min(hi_deg, best + 1.0), 30);
  return r.first;
}

double casimir_force_at(const CasimirConfig& cfg, const DumbbellGeom& geom, unsigned threads) {
  const double h = 0.5e-9;
  CasimirConfig up = cfg;
  up.separation += h;
  CasimirConfig down = cfg;
  down.separation -= h;
  return -(pairwise_energy(up, geom, CasimirBody::Dumbbell, threads) -
           pairwise_energy(down, geom, CasimirBody::Dumbbell, threads)) /
         (2.0 * h);
}

std::vector<ForceRow> casimir_force_sweep(const CasimirConfig& cfg, const DumbbellGeom& geom,
                                          const std::vector<double>& separations,
                                          unsigned threads) {
  check_grid_step(separations, 10e-9, "separation");
  std::vector<ForceRow> rows;
  for (const double d : separations) {
    CasimirConfig c = cfg;
    c.separation = d;
    rows.push_back({d, casimir_force_at(c, geom, threads),
                    casimir_torque_at(c, geom, CasimirBody::Dumbbell, threads)});
  }
  return rows;
}

double calibrate_casimir(const CasimirConfig& cfg, const DumbbellGeom& geom, double target_force,
                         unsigned threads) {
  CasimirConfig unit = cfg;
  unit.c_cal = 1.0;
  const double f = casimir_force_at(unit, geom, threads);
  if (!(std::abs(f) > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "no gold in the grating; cannot calibrate");
  }
  return target_force / std::abs(f);
}

WidthSweep width_sweep(const CasimirConfig& cfg, const DumbbellGeom& geom,
                       const std::vector<double>& widths, unsigned threads) {
  WidthSweep out;
  for (const double w : widths) {
    if (!(w > 0.0 && w < cfg.period)) {
      throw Error(ErrorKind::InvalidArgument, "sweep widths must lie strictly inside (0, period)");
    }
    CasimirConfig c = cfg;
    c.stripe_width = w;
    out.rows.push_back({w, casimir_torque_at(c, geom, CasimirBody::Dumbbell, threads)});
  }
  if (out.rows.empty()) return out;
  std::size_t k = 0;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    if (std::abs(out.rows[i].torque) > std::abs(out.rows[k].torque)) k = i;
  }
  out.argmax_width = out.rows[k].width;
  out.interior = k > 0 && k + 1 < out.rows.size();
  if (out.interior) {
    const double x0 = out.rows[k - 1].width, x1 = out.rows[k].width, x2 = out.rows[k + 1].width;
    const double y0 = std::abs(out.rows[k - 1].torque), y1 = std::abs(out.rows[k].torque),
                 y2 = std::abs(out.rows[k + 1].torque);
    const double num = sq(x1 - x0) * (y1 - y2) - sq(x1 - x2) * (y1 - y0);
    const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if (den != 0.0) out.argmax_width = x1 - 0.5 * num / den;
  }
  return out;
}

}  // namespace levisim
