#include "app.hpp"

#include "levisim/run_config.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace levisim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("levisim_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

std::string config_error(const std::string& text) {
  try {
    parse_run_config(text, "t.ini");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    return e.what();
  }
  FAIL("no error raised");
  return {};
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(LEVISIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config: defaults round-trip through the canonical text") {
  const RunConfig d;
  std::string ini;
  std::string section;
  std::istringstream in(d.canonical());
  for (std::string line; std::getline(in, line);) {
    const auto dot = line.find('.');
    const std::string s = line.substr(0, dot);
    if (s != section) {
      ini += "[" + s + "]\n";
      section = s;
    }
    ini += line.substr(dot + 1) + "\n";
  }
  const RunConfig back = parse_run_config(ini);
  CHECK(back.hash() == d.hash());
  CHECK(back.canonical() == d.canonical());
  CHECK(d.hash().size() == 16);
  CHECK(RunConfig::keys().size() > 40);
}

TEST_CASE("config: comments, whitespace and overrides") {
  const RunConfig c = parse_run_config(
      "# leading comment\n"
      "[beam]\n"
      "  power = 0.5   ; trailing\n"
      "\n"
      "[sim]\n"
      "seed=42\n"
      "[surface]\n"
      "material = gold\n");
  CHECK(c.beam.power == 0.5);
  CHECK(c.sim.seed == 42);
  CHECK(c.surface.material == "gold");
  CHECK(c.hash() != RunConfig{}.hash());
}

TEST_CASE("config: errors carry the source line") {
  CHECK(config_error("[beam]\npower = 1\n[nope]\n").find("t.ini:3:") == 0);
  CHECK(config_error("power = 1\n").find("t.ini:1: key 'power' appears before any section") == 0);
  CHECK(config_error("[beam]\n\nwattage = 3\n").find("t.ini:3: unknown key 'wattage'") == 0);
  CHECK(config_error("[beam]\npower = 1\npower = 2\n").find("t.ini:3: duplicate key") == 0);
  CHECK(config_error("[beam]\npower =\n").find("t.ini:2: empty value") == 0);
  CHECK(config_error("[beam]\npower = 1 W\n").find("t.ini:2: invalid numeric value") == 0);
  CHECK(config_error("[beam]\npower = inf\n").find("t.ini:2: non-finite") == 0);
  CHECK(config_error("[sim]\nseed = -3\n").find("t.ini:2: invalid integer value") == 0);
  CHECK(config_error("[surface]\nmaterial = glass\n").find("t.ini:2: surface.material") == 0);
  CHECK(config_error("[beam\n").find("t.ini:1: malformed section header") == 0);
  CHECK(config_error("[beam]\njust words\n").find("t.ini:2: expected key = value") == 0);
}

TEST_CASE("config: missing file is an I/O error") {
  try {
    load_run_config("/nonexistent/levisim.ini");
    FAIL("no error raised");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
}

TEST_CASE("cli: exit codes and error kinds") {
  CHECK(cli::exit_code(ErrorKind::ConfigError) == 2);
  CHECK(cli::exit_code(ErrorKind::UnstableWell) == 3);
  CHECK(cli::exit_code(ErrorKind::IoError) == 4);
  CHECK(cli::error_json(ErrorKind::ConfigError, "bad") ==
        R"({"error":"ConfigError","message":"bad","exit_code":2})");

  const fs::path dir = scratch("exit");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.ini") << "[beam]\npower = -1 W\n";
  std::ofstream(dir / "unphysical.ini") << "[beam]\npower = -1\n";
  CHECK(run_binary("--help") == 0);
  CHECK(run_binary("") == 2);
  CHECK(run_binary("no-such-command") == 2);
  CHECK(run_binary("freqs --config " + (dir / "bad.ini").string()) == 2);
  CHECK(run_binary("freqs --config " + (dir / "missing.ini").string()) == 4);
  CHECK(run_binary("freqs --out /proc/levisim --config " + (dir / "unphysical.ini").string()) == 4);
  CHECK(run_binary("freqs --out " + (dir / "o").string() + " --config " + (dir / "unphysical.ini").string()) == 3);
}

TEST_CASE("cli: default wells and freqs outputs match the golden files") {
  const fs::path dir = scratch("golden");
  cli::AppOptions opt;
  opt.out_dir = dir;
  opt.plots = false;
  cli::run_command("wells", opt);
  cli::run_command("freqs", opt);
  for (const char* name : {"wells.csv", "enhancement.csv", "freqs.json"}) {
    CAPTURE(name);
    CHECK(slurp(dir / name) == slurp(fs::path(LEVISIM_GOLDEN_DIR) / name));
  }
  CHECK_FALSE(fs::exists(dir / "potential.svg"));
}

TEST_CASE("cli: output files carry provenance headers") {
  const fs::path dir = scratch("meta");
  cli::AppOptions opt;
  opt.out_dir = dir;
  opt.config.sim.seed = 99;
  cli::run_command("sensitivity", opt);
  const std::string csv = slurp(dir / "torque_vs_pressure.csv");
  CHECK(csv.find("# levisim: ") == 0);
  CHECK(csv.find("# command: sensitivity\n") != std::string::npos);
  CHECK(csv.find("# config_hash: " + opt.config.hash() + "\n") != std::string::npos);
  CHECK(csv.find("# seed: 99\n") != std::string::npos);
  CHECK(csv.find("pressure_Torr,gamma_per_s,tau_s,S_T_Nm_per_rtHz\n") != std::string::npos);
  CHECK(slurp(dir / "sensitivity.json").find("\"config_hash\": \"" + opt.config.hash() + "\"") !=
        std::string::npos);
  CHECK(fs::exists(dir / "torque_vs_pressure.svg"));
}

TEST_CASE("cli: outputs do not depend on the thread count") {
  RunConfig cfg;
  cfg.grating.scan_length = 0.6e-6;
  cfg.sim.steps = 1 << 14;
  cfg.sim.psd_segment = 1 << 10;
  std::map<std::string, std::string> first;
  for (const unsigned threads : {1u, 4u}) {
    const fs::path dir = scratch(fmt::format("threads{}", threads));
    cli::AppOptions opt;
    opt.config = cfg;
    opt.out_dir = dir;
    opt.threads = threads;
    for (const char* c : {"simulate", "grating-scan", "casimir"}) cli::run_command(c, opt);
    const auto files = tree(dir);
    if (first.empty()) {
      first = files;
      continue;
    }
    REQUIRE(files.size() == first.size());
    for (const auto& [name, content] : files) {
      CAPTURE(name);
      CHECK(content == first.at(name));
    }
  }
}

TEST_CASE("cli: the seed changes the trajectories") {
  RunConfig cfg;
  cfg.sim.steps = 1 << 12;
  std::string traj[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path dir = scratch(fmt::format("seed{}", k));
    cli::AppOptions opt;
    opt.config = cfg;
    opt.config.sim.seed = 7 + k;
    opt.out_dir = dir;
    cli::run_command("simulate", opt);
    const std::string t = slurp(dir / "trajectory_well.csv");
    traj[k] = t.substr(t.find("\nt"));
  }
  CHECK(traj[0] != traj[1]);
}
