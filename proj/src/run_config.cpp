#include "levisim/run_config.hpp"

#include "levisim/core.hpp"
#include "levisim/langevin.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <variant>

namespace levisim {

namespace {

using Slot = std::variant<double*, std::uint64_t*, std::string*>;

struct Entry {
  const char* section;
  const char* key;
  Slot slot;
};

std::vector<Entry> entries(RunConfig& c) {
  return {
      {"beam", "wavelength", &c.beam.wavelength},
      {"beam", "power", &c.beam.power},
      {"beam", "waist", &c.beam.waist},
      {"beam", "target_fz", &c.beam.target_fz},
      {"surface", "material", &c.surface.material},
      {"surface", "index_re", &c.surface.index_re},
      {"surface", "index_im", &c.surface.index_im},
      {"particle", "sphere_diameter", &c.particle.sphere_diameter},
      {"particle", "density", &c.particle.density},
      {"particle", "permittivity", &c.particle.permittivity},
      {"environment", "pressure_torr", &c.environment.pressure_torr},
      {"environment", "temperature", &c.environment.temperature},
      {"environment", "gas_mass", &c.environment.gas_mass},
      {"environment", "molecule_diameter", &c.environment.molecule_diameter},
      {"environment", "accommodation", &c.environment.accommodation},
      {"sim", "seed", &c.sim.seed},
      {"sim", "steps", &c.sim.steps},
      {"sim", "stride", &c.sim.stride},
      {"sim", "output_stride", &c.sim.output_stride},
      {"sim", "psd_segment", &c.sim.psd_segment},
      {"sim", "well", &c.sim.well},
      {"sim", "dt", &c.sim.dt},
      {"sim", "sensitivity_torr", &c.sim.sensitivity_torr},
      {"sim", "rotation_cal_torr", &c.sim.rotation_cal_torr},
      {"sim", "rotation_sapphire_torr", &c.sim.rotation_sapphire_torr},
      {"sim", "rotation_sapphire_hz", &c.sim.rotation_sapphire_hz},
      {"sim", "rotation_grating_torr", &c.sim.rotation_grating_torr},
      {"sim", "rotation_grating_hz", &c.sim.rotation_grating_hz},
      {"grating", "period", &c.grating.period},
      {"grating", "stripe_width", &c.grating.stripe_width},
      {"grating", "max_order", &c.grating.max_order},
      {"grating", "scan_step", &c.grating.scan_step},
      {"grating", "scan_length", &c.grating.scan_length},
      {"casimir", "separation", &c.casimir.separation},
      {"casimir", "theta_deg", &c.casimir.theta_deg},
      {"casimir", "stripe_width", &c.casimir.stripe_width},
      {"casimir", "stripe_thickness", &c.casimir.stripe_thickness},
      {"casimir", "periods", &c.casimir.periods},
      {"casimir", "target_force", &c.casimir.target_force},
      {"casimir", "theta_step", &c.casimir.theta_step},
      {"casimir", "width_step", &c.casimir.width_step},
      {"casimir", "d_min", &c.casimir.d_min},
      {"casimir", "d_max", &c.casimir.d_max},
      {"casimir", "d_step", &c.casimir.d_step},
      {"casimir", "substrate_weight", &c.casimir.substrate_weight},
      {"casimir", "mesh_scale", &c.casimir.mesh_scale},
      {"casimir", "mesh_tolerance", &c.casimir.mesh_tolerance},
  };
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string RunConfig::canonical() const {
  RunConfig copy = *this;
  std::string out;
  for (const auto& e : entries(copy)) {
    out += fmt::format("{}.{}=", e.section, e.key);
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, double>) {
            out += fmt::format("{:.17g}", *p);
          } else {
            out += fmt::format("{}", *p);
          }
        },
        e.slot);
    out += '\n';
  }
  return out;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical())); }

std::vector<std::string> RunConfig::keys() {
  RunConfig c;
  std::vector<std::string> out;
  for (const auto& e : entries(c)) out.push_back(fmt::format("{}.{}", e.section, e.key));
  return out;
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  const auto table = entries(cfg);
  std::set<std::string> sections;
  for (const auto& e : table) sections.insert(e.section);

  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  const auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::ConfigError, fmt::format("{}:{}: {}", source, line_no, msg));
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(fmt::format("malformed section header '{}'", line));
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section)) fail(fmt::format("unknown section [{}]", section));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(fmt::format("expected key = value, got '{}'", line));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) fail(fmt::format("key '{}' appears before any section", key));
    const Entry* entry = nullptr;
    for (const auto& e : table) {
      if (section == e.section && key == e.key) entry = &e;
    }
    if (entry == nullptr) fail(fmt::format("unknown key '{}' in [{}]", key, section));
    if (!seen.insert(section + "." + key).second) {
      fail(fmt::format("duplicate key '{}' in [{}]", key, section));
    }
    if (value.empty()) fail(fmt::format("empty value for '{}'", key));
    std::visit(
        [&](auto* p) {
          using T = std::remove_pointer_t<decltype(p)>;
          if constexpr (std::is_same_v<T, std::string>) {
            if (p == &cfg.surface.material && value != "sapphire" && value != "gold" && value != "none") {
              fail(fmt::format("surface.material must be sapphire, gold or none, got '{}'", value));
            }
            *p = value;
          } else {
            T v{};
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || ptr != value.data() + value.size()) {
              fail(fmt::format("invalid {} value '{}' for '{}'",
                               std::is_same_v<T, double> ? "numeric" : "integer", value, key));
            }
            if constexpr (std::is_same_v<T, double>) {
              if (!std::isfinite(v)) fail(fmt::format("non-finite value for '{}'", key));
            }
            *p = v;
          }
        },
        entry->slot);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::IoError, fmt::format("cannot read config file '{}'", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str(), path);
}

}  // namespace levisim
