#include "app.hpp"

#include "svg.hpp"

#include "levisim/casimir.hpp"
#include "levisim/gas_damping.hpp"
#include "levisim/grating.hpp"
#include "levisim/langevin.hpp"
#include "levisim/signal_analysis.hpp"
#include "levisim/trap_model.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#ifndef LEVISIM_VERSION
#define LEVISIM_VERSION "0.0.0"
#endif

namespace levisim::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kModules =
    "beam-optics/1 trap-model/1 gas-damping/1 langevin-sim/1 signal-analysis/1 "
    "grating-nearfield/1 casimir-estimator/1 cli/1";

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  std::vector<double> out;
  const int n = static_cast<int>(std::lround(std::log10(hi / lo) * per_decade));
  for (int i = 0; i <= n; ++i) out.push_back(lo * std::pow(10.0, static_cast<double>(i) / per_decade));
  return out;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Simulations {
  TimeSeries well;
  TimeSeries free;
  TrapFrequencies well_freqs;
  TrapFrequencies free_freqs;
  double well_dt;
  double free_dt;
};

class Runner {
public:
  explicit Runner(const AppOptions& options) : opt_(options), cfg_(options.config) {
    std::error_code ec;
    fs::create_directories(opt_.out_dir, ec);
    if (ec || !fs::is_directory(opt_.out_dir)) {
      throw Error(ErrorKind::IoError,
                  fmt::format("cannot create output directory '{}'", opt_.out_dir.string()));
    }
  }

  void run(const std::string& name) {
    command_ = name;
    if (name == "wells") return wells();
    if (name == "freqs") return freqs();
    if (name == "simulate") return simulate();
    if (name == "psd") return psd();
    if (name == "sensitivity") return sensitivity();
    if (name == "rotation") return rotation();
    if (name == "grating-scan") return grating_scan();
    if (name == "casimir") return casimir();
    if (name == "reproduce-all") {
      for (const auto& c : command_names()) {
        if (c == "reproduce-all") continue;
        spdlog::info("reproduce-all: {}", c);
        run(c);
      }
      command_ = name;
      json files = json::array();
      for (const auto& f : written_) files.push_back(f);
      write_json("manifest.json", json{{"files", files}});
      return;
    }
    throw Error(ErrorKind::ConfigError, fmt::format("unknown command '{}'", name));
  }

private:
  // ---- configuration --------------------------------------------------

  DumbbellGeom geom() const {
    DumbbellGeom g;
    g.sphere_diameter = cfg_.particle.sphere_diameter;
    g.density = cfg_.particle.density;
    g.permittivity = cfg_.particle.permittivity;
    return g;
  }

  Environment env() const {
    Environment e;
    e.pressure = Pressure::torr(cfg_.environment.pressure_torr);
    e.temperature = cfg_.environment.temperature;
    e.gas_mass = cfg_.environment.gas_mass;
    e.molecule_diameter = cfg_.environment.molecule_diameter;
    e.accommodation = cfg_.environment.accommodation;
    e.validate();
    return e;
  }

  SurfaceSpec surface(double z) const {
    SurfaceSpec s = SurfaceSpec::none();
    if (cfg_.surface.material == "sapphire") s = SurfaceSpec::sapphire(z);
    if (cfg_.surface.material == "gold") s = SurfaceSpec::gold(z);
    if (s.kind != SurfaceKind::None && cfg_.surface.index_re > 0.0) {
      s.index = Complex(cfg_.surface.index_re, cfg_.surface.index_im);
    }
    return s;
  }

  bool has_surface() const { return cfg_.surface.material != "none"; }

  GratingSpec grating_spec() const {
    GratingSpec g;
    g.period = cfg_.grating.period;
    g.stripe_width = cfg_.grating.stripe_width;
    g.max_order = static_cast<int>(cfg_.grating.max_order);
    return g;
  }

  const BeamParams& beam() {
    if (!beam_) {
      BeamParams b;
      b.wavelength = cfg_.beam.wavelength;
      b.power = cfg_.beam.power;
      if (cfg_.beam.waist > 0.0) {
        b.waist = cfg_.beam.waist;
      } else {
        b.waist = calibrate_waist(b, geom(), {std::nullopt, std::nullopt, cfg_.beam.target_fz}).waist;
      }
      b.validate();
      beam_ = b;
    }
    return *beam_;
  }

  int well_index() const {
    if (cfg_.sim.well < 1) throw Error(ErrorKind::ConfigError, "sim.well must be at least 1");
    return static_cast<int>(cfg_.sim.well);
  }

  // ---- output ---------------------------------------------------------

  std::string meta_lines() const {
    return fmt::format("# levisim: {}\n# command: {}\n# config_hash: {}\n# seed: {}\n# modules: {}\n",
                       LEVISIM_VERSION, command_, cfg_.hash(), cfg_.sim.seed, kModules);
  }

  json meta_json() const {
    return json{{"levisim", LEVISIM_VERSION},
                {"command", command_},
                {"config_hash", cfg_.hash()},
                {"seed", cfg_.sim.seed},
                {"modules", kModules}};
  }

  void write_text(const std::string& name, const std::string& content) {
    const fs::path p = opt_.out_dir / name;
    std::ofstream f(p, std::ios::binary);
    f << content;
    f.close();
    if (!f) throw Error(ErrorKind::IoError, fmt::format("cannot write '{}'", p.string()));
    written_.push_back(name);
  }

  void write_csv(const std::string& name, const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows) {
    std::string s = meta_lines();
    for (std::size_t c = 0; c < columns.size(); ++c) s += (c ? "," : "") + csv_field(columns[c]);
    s += '\n';
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) s += fmt::format("{}{:.17g}", c ? "," : "", r[c]);
      s += '\n';
    }
    write_text(name, s);
  }

  void write_json(const std::string& name, const json& body) {
    json j;
    j["meta"] = meta_json();
    for (const auto& [k, v] : body.items()) j[k] = v;
    write_text(name, j.dump(2) + "\n");
  }

  void write_svg(const std::string& name, const std::string& svg) {
    if (!opt_.plots) return;
    std::string comment = "<!--\n";
    std::istringstream in(meta_lines());
    for (std::string line; std::getline(in, line);) comment += line.substr(2) + "\n";
    write_text(name, comment + "-->\n" + svg);
  }

  // ---- commands -------------------------------------------------------

  void wells() {
    const BeamParams& b = beam();
    const DumbbellGeom g = geom();
    const double zs = loading_surface_position(b, well_index());
    const TrapPotential free(b, std::nullopt, g);
    const TrapPotential pot(b, make_reflector(surface(zs), b.wavelength), g);
    const auto found = find_wells(pot);

    std::vector<std::vector<double>> rows;
    for (const auto& w : found) {
      rows.push_back({static_cast<double>(w.index), w.separation * 1e9, w.z * 1e9, w.depth_kbt,
                      w.freqs.fx, w.freqs.fy, w.freqs.fz, w.freqs.ftorsion});
    }
    write_csv("wells.csv",
              {"well", "separation_nm", "z_nm", "depth_kBT", "fx_Hz", "fy_Hz", "fz_Hz", "ftorsion_Hz"},
              rows);

    const double kt = phys::kB * cfg_.environment.temperature;
    const Vec3 axis = polarization_axis(b.polarization);
    std::vector<std::vector<double>> prof;
    Series s_surf{has_surface() ? cfg_.surface.material : "no surface", {}, {}};
    Series s_free{"free space", {}, {}};
    const int n = 600;
    for (int i = 0; i <= n; ++i) {
      const double z = zs - 3.0 * b.wavelength + (3.0 * b.wavelength - 5e-9) * i / n;
      const double us = pot.energy(Pose{Vec3(b.focus.x(), b.focus.y(), z), axis}) / kt;
      const double uf = free.energy(Pose{Vec3(b.focus.x(), b.focus.y(), z), axis}) / kt;
      prof.push_back({(zs - z) * 1e9, us, uf});
      s_surf.x.push_back((zs - z) * 1e9);
      s_surf.y.push_back(us);
      s_free.x.push_back((zs - z) * 1e9);
      s_free.y.push_back(uf);
    }
    write_csv("potential.csv", {"d_nm", "U_surface_kBT", "U_free_kBT"}, prof);
    write_svg("potential.svg", LinePlot{"Trapping potential along the beam axis", "distance to surface (nm)",
                                        "U / kBT", false, false, {s_surf, s_free}}
                                   .render());
  }

  void freqs() {
    const BeamParams& b = beam();
    const DumbbellGeom g = geom();
    const TrapWell free = well_near_focus(TrapPotential(b, std::nullopt, g));
    json j;
    j["waist_m"] = b.waist;
    j["free_space"] = {{"fx_Hz", free.freqs.fx},
                       {"fy_Hz", free.freqs.fy},
                       {"fz_Hz", free.freqs.fz},
                       {"ftorsion_Hz", free.freqs.ftorsion}};
    if (!has_surface()) {
      write_json("freqs.json", j);
      return;
    }
    const auto rows = enhancement_ratio(b, surface(0.0), g, {1, 2, 3, 4, 5});
    std::vector<std::vector<double>> out;
    Series rx{"R_x", {}, {}, true};
    Series ry{"R_y", {}, {}, true};
    for (const auto& r : rows) {
      out.push_back({static_cast<double>(r.well_index), r.separation * 1e9, r.rx, r.ry, r.rz, r.freqs.fx,
                     r.freqs.fy, r.freqs.fz, r.freqs.ftorsion});
      rx.x.push_back(r.separation * 1e9);
      rx.y.push_back(r.rx);
      ry.x.push_back(r.separation * 1e9);
      ry.y.push_back(r.ry);
    }
    write_csv("enhancement.csv",
              {"well", "separation_nm", "R_x", "R_y", "R_z", "fx_Hz", "fy_Hz", "fz_Hz", "ftorsion_Hz"}, out);
    j["first_well"] = {{"separation_m", rows[0].separation},
                       {"fx_Hz", rows[0].freqs.fx},
                       {"fy_Hz", rows[0].freqs.fy},
                       {"fz_Hz", rows[0].freqs.fz},
                       {"ftorsion_Hz", rows[0].freqs.ftorsion},
                       {"fz_enhancement", rows[0].rz}};
    write_json("freqs.json", j);
    write_svg("enhancement.svg", LinePlot{"Trap-frequency enhancement near the surface", "separation (nm)",
                                          "f / f_free", false, false, {rx, ry}}
                                     .render());
  }

  const Simulations& simulations() {
    if (sims_) return *sims_;
    const BeamParams& b = beam();
    const DumbbellGeom g = geom();
    const Vec3 axis = polarization_axis(b.polarization);

    std::optional<PlanarReflector> refl;
    if (has_surface()) refl = make_reflector(surface(loading_surface_position(b, well_index())), b.wavelength);
    auto well_pot = std::make_shared<TrapPotential>(b, refl, g);
    const TrapWell w = well_near_focus(*well_pot);
    const Pose well_eq{Vec3(b.focus.x(), b.focus.y(), w.z), axis};
    auto free_pot = std::make_shared<TrapPotential>(b, std::nullopt, g);
    const TrapWell wf = well_near_focus(*free_pot);
    const Pose free_eq{Vec3(b.focus.x(), b.focus.y(), wf.z), axis};

    const auto well_field = std::make_shared<OpticalField>(well_pot, well_eq);
    const auto free_field = std::make_shared<OpticalField>(free_pot, free_eq);

    const auto make_cfg = [&](const OpticalField& f, const Pose& eq) {
      SimConfig c;
      c.dt = cfg_.sim.dt > 0.0 ? cfg_.sim.dt : 1.0 / (64.0 * f.max_frequency());
      c.n_steps = cfg_.sim.steps;
      c.seed = cfg_.sim.seed;
      c.stride = static_cast<std::uint32_t>(cfg_.sim.stride);
      c.environment = env();
      c.geom = g;
      c.set_trap_box(b, eq.com);
      return c;
    };
    const SimConfig cw = make_cfg(*well_field, well_eq);
    const SimConfig cf = make_cfg(*free_field, free_eq);
    const std::vector<LangevinSimulator> sims = {LangevinSimulator(well_field, cw),
                                                 LangevinSimulator(free_field, cf)};
    RotorState s0;
    s0.axis = axis;
    RotorState sw = s0;
    sw.position = well_eq.com;
    RotorState sf = s0;
    sf.position = free_eq.com;
    auto series = simulate_batch(sims, {sw, sf}, opt_.threads);
    sims_ = Simulations{std::move(series[0]), std::move(series[1]), well_field->frequencies(),
                        free_field->frequencies(), cw.dt, cf.dt};
    return *sims_;
  }

  static double rms_about_mean(const std::vector<double>& v) {
    double m = 0.0;
    for (const double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
  }

  void write_trajectory(const std::string& name, const TimeSeries& ts) {
    std::vector<std::vector<double>> rows;
    const std::size_t stride = std::max<std::uint64_t>(1, cfg_.sim.output_stride);
    for (std::size_t i = 0; i < ts.size(); i += stride) {
      std::vector<double> r;
      for (const auto& c : ts.channels) r.push_back(c[i]);
      rows.push_back(std::move(r));
    }
    write_csv(name, ts.names, rows);
  }

  void simulate() {
    const Simulations& s = simulations();
    write_trajectory("trajectory_well.csv", s.well);
    write_trajectory("trajectory_free.csv", s.free);
    const auto summary = [&](const TimeSeries& ts, double dt) {
      return json{{"dt_s", dt},
                  {"samples", ts.size()},
                  {"sample_spacing_s", ts.dt},
                  {"sim_config_hash", ts.metadata.at("config_hash")},
                  {"rms_x_m", rms_about_mean(ts.channel("x"))},
                  {"rms_y_m", rms_about_mean(ts.channel("y"))},
                  {"rms_z_m", rms_about_mean(ts.channel("z"))}};
    };
    json j;
    j["well"] = summary(s.well, s.well_dt);
    j["free_space"] = summary(s.free, s.free_dt);
    j["rms_z_ratio_well_over_free"] =
        rms_about_mean(s.well.channel("z")) / rms_about_mean(s.free.channel("z"));
    write_json("simulate.json", j);
  }

  json fit_axis(const PsdEstimate& p, double f_expected) {
    const double hi = std::min(3.0 * f_expected, 0.8 * p.frequency.back());
    try {
      const LorentzianFit f = lorentzian_fit(p, f_expected / 3.0, hi);
      return json{{"f0_Hz", f.f0},
                  {"gamma_per_s", f.gamma},
                  {"area_m2", f.area},
                  {"rms_log_residual", f.rms_log_residual},
                  {"flagged", f.flagged}};
    } catch (const Error& e) {
      spdlog::warn("Lorentzian fit near {:.4g} Hz failed: {}", f_expected, e.what());
      return json{{"error", fmt::format("{}: {}", to_string(e.kind()), e.what())}};
    }
  }

  void psd() {
    const Simulations& s = simulations();
    const std::size_t seg = cfg_.sim.psd_segment;
    json fits;
    LinePlot plot{"CoM displacement spectra", "frequency (Hz)", "PSD (m^2/Hz)", true, true, {}};
    for (const auto& [label, ts, fr] :
         {std::tuple<std::string, const TimeSeries*, const TrapFrequencies*>{"well", &s.well, &s.well_freqs},
          {"free", &s.free, &s.free_freqs}}) {
      const PsdEstimate px = welch_psd(*ts, "x", seg);
      const PsdEstimate py = welch_psd(*ts, "y", seg);
      const PsdEstimate pz = welch_psd(*ts, "z", seg);
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 1; i < px.frequency.size(); ++i) {
        rows.push_back({px.frequency[i], px.density[i], py.density[i], pz.density[i]});
      }
      write_csv(fmt::format("psd_{}.csv", label), {"f_Hz", "S_x_m2_per_Hz", "S_y_m2_per_Hz", "S_z_m2_per_Hz"},
                rows);
      fits[label] = {{"segments", px.segments},
                     {"x", fit_axis(px, fr->fx)},
                     {"y", fit_axis(py, fr->fy)},
                     {"z", fit_axis(pz, fr->fz)},
                     {"model_Hz", {{"fx", fr->fx}, {"fy", fr->fy}, {"fz", fr->fz}}}};
      Series sz{fmt::format("z, {}", label), {}, {}};
      for (std::size_t i = 1; i < pz.frequency.size(); ++i) {
        sz.x.push_back(pz.frequency[i]);
        sz.y.push_back(pz.density[i]);
      }
      plot.series.push_back(std::move(sz));
    }
    write_json("psd.json", fits);
    write_svg("psd.svg", plot.render());
  }

  void sensitivity() {
    const DumbbellGeom g = geom();
    const Environment e = env();
    const auto pressures = log_grid(1e-5, 1e-2, 4);
    const auto curve = torque_sensitivity_curve(e, g, pressures);
    std::vector<std::vector<double>> rows;
    Series st{"thermal limit", {}, {}};
    for (const auto& p : curve) {
      rows.push_back({p.pressure_torr, p.gamma, 1.0 / p.gamma, p.torque});
      st.x.push_back(p.pressure_torr);
      st.y.push_back(p.torque);
    }
    write_csv("torque_vs_pressure.csv", {"pressure_Torr", "gamma_per_s", "tau_s", "S_T_Nm_per_rtHz"}, rows);
    write_svg("torque_vs_pressure.svg",
              LinePlot{"Thermal torque sensitivity", "pressure (Torr)", "S_T^1/2 (N m / rtHz)", true, true, {st}}
                  .render());

    const auto at = torque_sensitivity_curve(e, g, {cfg_.sim.sensitivity_torr}).front();
    const DampingRates rates = dumbbell_damping(e, g);
    json j;
    j["torque"] = {{"pressure_Torr", at.pressure_torr},
                   {"gamma_per_s", at.gamma},
                   {"S_T_Nm_per_rtHz", at.torque},
                   {"reference_Nm_per_rtHz", 5.0e-26}};
    j["damping"] = {{"pressure_Torr", cfg_.environment.pressure_torr},
                    {"parallel_per_s", rates.parallel},
                    {"perpendicular_per_s", rates.perpendicular},
                    {"rotational_per_s", rates.rotational},
                    {"anisotropy", rates.perpendicular / rates.parallel}};

    if (has_surface()) {
      const auto dist = sensitivity_vs_distance(beam(), surface(0.0), g, e, {1, 2, 3, 4});
      std::vector<std::vector<double>> drows;
      Series sx{"x", {}, {}, true}, sy{"y", {}, {}, true}, sz{"z", {}, {}, true};
      double mean = 0.0;
      for (const auto& d : dist) {
        drows.push_back({static_cast<double>(d.well_index), d.separation * 1e9, d.force.x(), d.force.y(),
                         d.force.z()});
        if (d.well_index == 0) continue;
        for (auto* s : {&sx, &sy, &sz}) s->x.push_back(d.separation * 1e9);
        sx.y.push_back(d.force.x());
        sy.y.push_back(d.force.y());
        sz.y.push_back(d.force.z());
        mean += d.force.sum() / 3.0;
      }
      mean /= static_cast<double>(dist.size() - 1);
      write_csv("force_vs_distance.csv",
                {"well", "separation_nm", "S_Fx_N_per_rtHz", "S_Fy_N_per_rtHz", "S_Fz_N_per_rtHz"}, drows);
      write_svg("force_vs_distance.svg", LinePlot{"Thermal force sensitivity by well", "separation (nm)",
                                                  "S_F^1/2 (N / rtHz)", false, false, {sx, sy, sz}}
                                             .render());
      j["force"] = {{"pressure_Torr", cfg_.environment.pressure_torr},
                    {"mean_S_F_N_per_rtHz", mean},
                    {"reference_N_per_rtHz", 2.5e-17}};
    }
    write_json("sensitivity.json", j);
  }

  void rotation() {
    const DumbbellGeom g = geom();
    const Environment e = env();
    const auto pressures = log_grid(1e-5, 1e-2, 4);
    const auto curves = grating_rotation_curve(
        beam(), g, e, grating_spec(), pressures,
        {RotationSurface::FreeSpace, RotationSurface::Sapphire, RotationSurface::Grating});
    const auto& s = cfg_.sim;
    // Each datum is moved along its measured 1/P line to the calibration pressure.
    const double eta_s = calibrate_rotation(curves[1], g, e, s.rotation_cal_torr,
                                            s.rotation_sapphire_hz * s.rotation_sapphire_torr / s.rotation_cal_torr);
    const double eta_g = calibrate_rotation(curves[2], g, e, s.rotation_cal_torr,
                                            s.rotation_grating_hz * s.rotation_grating_torr / s.rotation_cal_torr);
    const double etas[] = {eta_s, eta_s, eta_g};

    std::vector<std::vector<double>> rows;
    LinePlot plot{"Driven rotation frequency", "pressure (Torr)", "f_rot (Hz)", true, true, {}};
    for (std::size_t c = 0; c < curves.size(); ++c) {
      Series sr{to_string(curves[c].surface), {}, {}};
      for (std::size_t i = 0; i < pressures.size(); ++i) {
        sr.x.push_back(pressures[i]);
        sr.y.push_back(etas[c] * curves[c].frequency[i]);
      }
      plot.series.push_back(std::move(sr));
    }
    for (std::size_t i = 0; i < pressures.size(); ++i) {
      rows.push_back({pressures[i], plot.series[0].y[i], plot.series[1].y[i], plot.series[2].y[i]});
    }
    write_csv("rotation.csv", {"pressure_Torr", "f_free_Hz", "f_sapphire_Hz", "f_grating_Hz"}, rows);
    write_svg("rotation.svg", plot.render());

    const double f_s = eta_s * rotation_frequency_at(curves[1], g, e, s.rotation_sapphire_torr);
    const double f_g = eta_g * rotation_frequency_at(curves[2], g, e, s.rotation_grating_torr);
    const double f_g_cross = eta_s * rotation_frequency_at(curves[2], g, e, s.rotation_grating_torr);
    json j;
    j["calibration_pressure_Torr"] = s.rotation_cal_torr;
    for (std::size_t c = 0; c < curves.size(); ++c) {
      j["curves"][to_string(curves[c].surface)] = {
          {"field_norm2_V2_per_m2", curves[c].field_norm2},
          {"eta", etas[c]},
          {"loglog_slope", loglog_slope(pressures, curves[c].frequency)}};
    }
    j["sapphire"] = {{"pressure_Torr", s.rotation_sapphire_torr},
                     {"f_rot_Hz", f_s},
                     {"signal_Hz", 2.0 * f_s},
                     {"reference_Hz", s.rotation_sapphire_hz},
                     {"tip_speed_m_per_s", tip_speed(g, 2.0 * phys::pi * f_s)}};
    j["grating"] = {{"pressure_Torr", s.rotation_grating_torr},
                    {"f_rot_Hz", f_g},
                    {"signal_Hz", 2.0 * f_g},
                    {"reference_Hz", s.rotation_grating_hz},
                    {"predicted_from_sapphire_eta_Hz", f_g_cross}};
    write_json("rotation.json", j);
  }

  void grating_scan() {
    const BeamParams& b = beam();
    const DumbbellGeom g = geom();
    const GratingSpec gs = grating_spec();
    const auto xs = linear_grid(0.0, cfg_.grating.scan_length, cfg_.grating.scan_step);
    const double gamma_x = dumbbell_damping(env(), g).parallel;
    json j;
    j["kappa1_per_m"] = reflection_orders(gs, b.wavelength)[gs.max_order + 1].kappa;
    double depth1 = 0.0;
    for (const int n : {1, 2}) {
      const auto scan = scan_trap_frequency(gs, b, g, n, xs, opt_.threads);
      std::vector<std::vector<double>> rows;
      std::vector<double> ok_x, ok_f;
      int failures = 0;
      double sep = 0.0;
      for (const auto& p : scan) {
        rows.push_back({p.x * 1e9, p.fx, p.separation * 1e9});
        if (p.error.empty()) {
          ok_x.push_back(p.x);
          ok_f.push_back(p.fx);
          sep = p.separation;
        } else {
          ++failures;
        }
      }
      write_csv(fmt::format("grating_scan_well{}.csv", n), {"x_nm", "f_x_Hz", "well_d_nm"}, rows);
      const double depth = modulation_depth(scan);
      if (n == 1) depth1 = depth;
      json w = {{"separation_m", sep}, {"modulation_pp_Hz", depth}, {"failed_points", failures}};
      if (ok_x.size() >= 4) w["dominant_period_m"] = dominant_period(ok_x, ok_f);
      j[fmt::format("well{}", n)] = w;

      // Lorentzian line at f_x(x) with the gas linewidth, as a PSD map.
      double mean = 0.0;
      for (const double f : ok_f) mean += f;
      mean /= static_cast<double>(std::max<std::size_t>(1, ok_f.size()));
      const double half = std::max(3.0 * depth1, 4.0 * gamma_x / (2.0 * phys::pi));
      HeatMap hm{fmt::format("PSD of x while scanning, well {}", n), "x (nm)", "frequency (kHz)", {}, {}, {}};
      const int nf = 80;
      for (int k = 0; k < nf; ++k) hm.y.push_back((mean - half + 2.0 * half * k / (nf - 1)) * 1e-3);
      for (const auto& p : scan) {
        hm.x.push_back(p.x * 1e9);
        std::vector<double> col;
        for (const double fk : hm.y) {
          col.push_back(p.error.empty() ? lorentzian(fk * 1e3, p.fx, gamma_x, 1.0) : 0.0);
        }
        hm.values.push_back(std::move(col));
      }
      write_svg(fmt::format("grating_scan_well{}.svg", n), hm.render());
    }
    j["modulation_ratio_well2_over_well1"] =
        depth1 > 0.0 ? j["well2"]["modulation_pp_Hz"].get<double>() / depth1 : 0.0;
    write_json("grating.json", j);
  }

  void casimir() {
    const DumbbellGeom g = geom();
    const auto& c = cfg_.casimir;
    CasimirConfig cc;
    cc.separation = c.separation;
    cc.theta_deg = c.theta_deg;
    cc.stripe_width = c.stripe_width;
    cc.period = cfg_.grating.period;
    cc.stripe_thickness = c.stripe_thickness;
    cc.periods = static_cast<int>(c.periods);
    cc.substrate_weight = c.substrate_weight;
    cc.mesh_tolerance = c.mesh_tolerance;
    const int k = static_cast<int>(std::max<std::uint64_t>(1, c.mesh_scale));
    cc.mesh = CasimirMesh{6 * k, 8 * k, 16 * k, 12 * k, 6 * k};
    const unsigned t = opt_.threads;

    const MeshReport mesh = check_mesh_convergence(cc, g, CasimirBody::Dumbbell, t);
    cc.c_cal = calibrate_casimir(cc, g, c.target_force, t);

    const auto thetas = linear_grid(0.0, 360.0, c.theta_step);
    const auto trows = casimir_torque_sweep(cc, g, thetas, CasimirBody::Dumbbell, t);
    std::vector<std::vector<double>> rows;
    Series st{"dumbbell", {}, {}};
    for (const auto& r : trows) {
      rows.push_back({r.theta_deg, r.torque});
      st.x.push_back(r.theta_deg);
      st.y.push_back(r.torque);
    }
    write_csv("casimir_theta.csv", {"theta_deg", "torque_Nm"}, rows);
    write_svg("casimir_theta.svg",
              LinePlot{"Casimir torque versus angle", "theta (deg)", "torque (N m)", false, false, {st}}.render());

    const auto drows = casimir_force_sweep(cc, g, linear_grid(c.d_min, c.d_max, c.d_step), t);
    rows.clear();
    std::vector<std::vector<double>> trows_d;
    Series sf{"|F|", {}, {}}, sd{"|T|", {}, {}};
    for (const auto& r : drows) {
      rows.push_back({r.separation * 1e9, r.force});
      trows_d.push_back({r.separation * 1e9, r.torque});
      sf.x.push_back(r.separation * 1e9);
      sf.y.push_back(std::abs(r.force));
      sd.x.push_back(r.separation * 1e9);
      sd.y.push_back(std::abs(r.torque));
    }
    write_csv("casimir_distance.csv", {"d_nm", "force_N"}, rows);
    write_csv("casimir_torque_distance.csv", {"d_nm", "torque_Nm"}, trows_d);
    write_svg("casimir_distance.svg",
              LinePlot{"Casimir force versus separation", "d (nm)", "|F| (N)", false, true, {sf}}.render());
    write_svg("casimir_torque_distance.svg",
              LinePlot{"Casimir torque versus separation", "d (nm)", "|T| (N m)", false, true, {sd}}.render());

    const auto widths = linear_grid(c.width_step, cc.period - 0.5 * c.width_step, c.width_step);
    const WidthSweep ws = width_sweep(cc, g, widths, t);
    rows.clear();
    Series sw{"dumbbell", {}, {}, true};
    for (const auto& r : ws.rows) {
      rows.push_back({r.width * 1e9, r.torque});
      sw.x.push_back(r.width * 1e9);
      sw.y.push_back(r.torque);
    }
    write_csv("casimir_width.csv", {"width_nm", "torque_Nm"}, rows);
    write_svg("casimir_width.svg",
              LinePlot{"Casimir torque versus stripe width", "width (nm)", "torque (N m)", false, false, {sw}}
                  .render());

    const double torque = casimir_torque_at(cc, g, CasimirBody::Dumbbell, t);
    json j;
    j["c_cal_J_m"] = cc.c_cal;
    j["mesh"] = {{"energy_J", mesh.energy * cc.c_cal},
                 {"mesh_change", mesh.mesh_change},
                 {"period_change", mesh.period_change},
                 {"tolerance", cc.mesh_tolerance}};
    j["operating_point"] = {{"separation_m", cc.separation},
                            {"theta_deg", cc.theta_deg},
                            {"stripe_width_m", cc.stripe_width},
                            {"force_N", casimir_force_at(cc, g, t)},
                            {"torque_Nm", torque},
                            {"reference_torque_Nm", 1.4e-24},
                            {"sphere_control_torque_Nm", casimir_torque_at(cc, g, CasimirBody::Sphere, t)}};
    j["torque_extremum_deg"] = torque_extremum(cc, g, 90.0, 180.0, t);
    j["width_sweep"] = {{"argmax_width_m", ws.argmax_width},
                        {"interior_maximum", ws.interior},
                        {"reference_width_m", 300e-9}};
    write_json("casimir.json", j);
  }

  const AppOptions& opt_;
  const RunConfig& cfg_;
  std::string command_;
  std::optional<BeamParams> beam_;
  std::optional<Simulations> sims_;
  std::vector<std::string> written_;
};

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"wells",       "freqs",    "simulate",     "psd",
                                                 "sensitivity", "rotation", "grating-scan", "casimir",
                                                 "reproduce-all"};
  return names;
}

void run_command(const std::string& name, const AppOptions& options) { Runner(options).run(name); }

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError: return 2;
    case ErrorKind::IoError: return 4;
    default: return 3;
  }
}

std::string error_json(ErrorKind kind, const std::string& message) {
  return json{{"error", to_string(kind)}, {"message", message}, {"exit_code", exit_code(kind)}}.dump();
}

}  // namespace levisim::cli
