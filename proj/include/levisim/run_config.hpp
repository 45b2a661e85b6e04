#pragma once

// Flat INI run configuration: [section] headers and key = value lines.
// Unknown sections or keys are rejected with their line number.

#include <cstdint>
#include <string>
#include <vector>

namespace levisim {

struct RunConfig {
  struct Beam {
    double wavelength = 1550e-9;  // m
    double power = 0.200;         // W
    double waist = 0.0;           // m; 0 calibrates to target_fz
    double target_fz = 35e3;      // Hz, free-space axial frequency used for calibration
  } beam;
  struct Surface {
    std::string material = "sapphire";  // sapphire | gold | none
    double index_re = 0.0;              // 0 keeps the material default
    double index_im = 0.0;
  } surface;
  struct Particle {
    double sphere_diameter = 144e-9;
    double density = 2200.0;
    double permittivity = 2.1;
  } particle;
  struct Env {
    double pressure_torr = 1.5;
    double temperature = 300.0;
    double gas_mass = 4.81e-26;
    double molecule_diameter = 3.7e-10;
    double accommodation = 1.0;
  } environment;
  struct Sim {
    std::uint64_t seed = 7;
    std::uint64_t steps = 1 << 20;
    std::uint64_t stride = 4;
    std::uint64_t output_stride = 16;  // trajectory rows written every n-th sample
    std::uint64_t psd_segment = 1 << 13;
    std::uint64_t well = 1;
    double dt = 0.0;  // s; 0 picks 1/(64 f_max)
    double sensitivity_torr = 6.1e-5;
    double rotation_cal_torr = 1e-4;
    double rotation_sapphire_torr = 5.9e-5;
    double rotation_sapphire_hz = 1.6e9;
    double rotation_grating_torr = 1e-3;
    double rotation_grating_hz = 175e6;
  } sim;
  struct Grating {
    double period = 600e-9;
    double stripe_width = 300e-9;
    std::uint64_t max_order = 20;
    double scan_step = 20e-9;
    double scan_length = 2.4e-6;
  } grating;
  struct Casimir {
    double separation = 370e-9;
    double theta_deg = 135.0;
    double stripe_width = 300e-9;
    double stripe_thickness = 100e-9;
    std::uint64_t periods = 15;
    double target_force = 3.0e-16;
    double theta_step = 5.0;
    double width_step = 50e-9;
    double d_min = 300e-9;
    double d_max = 600e-9;
    double d_step = 10e-9;
    double substrate_weight = 0.0;
    std::uint64_t mesh_scale = 1;
    double mesh_tolerance = 0.02;
  } casimir;

  /// Every key as "section.key=value", one per line, in a fixed order.
  std::string canonical() const;
  /// 16 hex digits of FNV-1a over canonical().
  std::string hash() const;
  /// Section and key names in canonical order.
  static std::vector<std::string> keys();
};

/// Throws ConfigError naming `source` and the offending line.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
/// Throws IoError when the file cannot be read.
RunConfig load_run_config(const std::string& path);

}  // namespace levisim
