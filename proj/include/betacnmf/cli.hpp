#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "betacnmf/bench.hpp"

namespace betacnmf::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kParse = 3, kNumerical = 4 };

/// Effective settings after layering defaults, BETACNMF_SEED, the config
/// file and command-line flags (later layers win).
struct CliConfig {
  ExperimentConfig experiment;
  std::vector<double> betas{1.0};
  std::size_t jobs = 1;
  bool timing = false;
  std::filesystem::path output_dir = "out";
};

/// Applies flat `key = value` lines; `#` starts a comment line.
void apply_config_text(std::istream& in, CliConfig& config);

/// The effective config in the same `key = value` form apply_config_text reads.
void write_config_text(std::ostream& out, const CliConfig& config);

int cmd_gen(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_fit(const CliConfig& config, const std::filesystem::path& v_path, Method method,
            double beta, std::optional<double> rel_tol, std::ostream& out, std::ostream& err);
int cmd_bench(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_stats(const std::filesystem::path& trace_a, const std::filesystem::path& trace_b,
              std::size_t iteration, std::ostream& out, std::ostream& err);

/// Full command line entry point; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace betacnmf::cli
