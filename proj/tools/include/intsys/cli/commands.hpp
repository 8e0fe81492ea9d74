#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "intsys/cli/config.hpp"
#include "json.hpp"

namespace intsys::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitError = 2;

/// Flag overrides; anything unset falls back to the config defaults, then to
/// the built-in defaults.
struct Options {
  std::optional<std::vector<double>> value;
  std::optional<std::vector<double>> seed_point;
  std::optional<std::size_t> resolution;
  std::optional<double> atol;
  std::optional<double> tol;
  std::optional<double> rank_tol;
  std::optional<double> threshold;
  std::optional<std::size_t> budget;
  std::optional<std::string> lattice;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> count;
  std::optional<std::string> phi;
  std::optional<std::size_t> field;
  std::optional<double> t_final;
  std::optional<double> step;
  std::optional<std::size_t> trials;
  std::optional<double> horizon;
  std::optional<double> margin;
  bool moore = false;
};

/// A tabular or graph file written next to the report.
struct Artifact {
  std::string name;       // e.g. "scan", "edges"
  std::string extension;  // "csv" or "dot"
  std::string content;
};

struct RunResult {
  nlohmann::ordered_json report;
  int exit_code = kExitPass;
  std::vector<Artifact> artifacts;  // the first one is the primary table
};

const std::vector<std::string>& command_names();

/// Runs one command. Throws on invalid input or downstream module errors.
RunResult run_command(std::string_view command, std::span<const SystemConfig> configs,
                      const Options& options);

/// Full command line: parses argv, loads configs, runs, writes outputs.
/// Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string format_number(double v);

}  // namespace intsys::cli
