#include "app.hpp"

#include "levisim/parallel.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>

using levisim::Error;
using levisim::ErrorKind;

namespace {

void setup_logging() {
  spdlog::set_default_logger(spdlog::stderr_color_mt("levisim"));
  spdlog::set_level(spdlog::level::warn);
  const char* env = std::getenv("LEVISIM_LOG");
  if (env == nullptr || *env == '\0') return;
  const std::string v = env;
  if (v == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (v == "warn") {
    spdlog::set_level(spdlog::level::warn);
  } else if (v == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (v == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    throw Error(ErrorKind::ConfigError, "LEVISIM_LOG must be one of error, warn, info, debug");
  }
}

int fail(ErrorKind kind, const std::string& message) {
  std::cerr << levisim::cli::error_json(kind, message) << '\n';
  return levisim::cli::exit_code(kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Levitated nanodumbbell near a surface: traps, dynamics, sensing and Casimir estimates"};
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  unsigned threads = levisim::default_threads();
  bool no_plots = false;

  app.add_option("--config", config_path, "INI configuration file (defaults when omitted)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Random seed (overrides sim.seed)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--no-plots", no_plots, "Skip SVG figures");
  app.require_subcommand(1);
  for (const auto& name : levisim::cli::command_names()) {
    app.add_subcommand(name)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(ErrorKind::ConfigError, e.what());
  }

  try {
    setup_logging();
    levisim::cli::AppOptions opt;
    opt.config = config_path.empty() ? levisim::RunConfig{} : levisim::load_run_config(config_path);
    if (seed) opt.config.sim.seed = *seed;
    opt.out_dir = out_dir;
    opt.threads = threads;
    opt.plots = !no_plots;
    const std::string command = app.get_subcommands().front()->get_name();
    spdlog::info("{} (config {})", command, opt.config.hash());
    levisim::cli::run_command(command, opt);
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail(ErrorKind::IoError, e.what());
  }
  return 0;
}
