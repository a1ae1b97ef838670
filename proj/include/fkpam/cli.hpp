#pragma once

// Subcommands behind the fkpam executable. Each returns the process exit code:
// 0 all verdicts PASS and no clamps, 1 a verdict FAIL or clamped exponents,
// 2 configuration error.

#include <ostream>
#include <string>

#include "fkpam/config.hpp"

namespace fkpam {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

struct CommandContext {
  RunConfig config;
  std::string out_dir = "out";
  unsigned workers = 1;
  std::ostream* log = nullptr;
};

/// Reads out/workers from the config, resolving workers = 0 to the available parallelism.
CommandContext make_context(const RunConfig& cfg, std::ostream& log);

int cmd_generate(const CommandContext& ctx);
int cmd_walk(const CommandContext& ctx);
int cmd_kernels(const CommandContext& ctx);
int cmd_solve(const CommandContext& ctx);
int cmd_experiment(const CommandContext& ctx);
int cmd_validate(const CommandContext& ctx);

/// Full command line entry point; never throws.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace fkpam
