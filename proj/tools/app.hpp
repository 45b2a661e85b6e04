#pragma once

// Subcommands of the levisim command-line tool.

#include "levisim/core.hpp"
#include "levisim/run_config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace levisim::cli {

struct AppOptions {
  RunConfig config;
  std::filesystem::path out_dir = "out";
  unsigned threads = 1;
  bool plots = true;
};

const std::vector<std::string>& command_names();

/// Runs one subcommand and writes its files under out_dir. Throws
/// levisim::Error on failure.
void run_command(const std::string& name, const AppOptions& options);

/// Process exit code for an error kind: 2 config, 3 model, 4 I/O.
int exit_code(ErrorKind kind);

/// {"error": kind, "message": ..., "exit_code": n}
std::string error_json(ErrorKind kind, const std::string& message);

}  // namespace levisim::cli
