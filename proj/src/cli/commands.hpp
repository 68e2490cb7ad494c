#pragma once

#include "cli/run_config.hpp"

namespace ssldyn::cli {

// Exit codes: 0 success, 2 validation, 3 numeric divergence, 4 I/O.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitIo = 4;

// Each command consumes a merged config document (file + overrides),
// validates it fully, computes, and only then writes output files.
void cmd_flow(const json& cfg);
void cmd_eigen(const json& cfg);
void cmd_regime(const json& cfg);
void cmd_sweep(const json& cfg);
void cmd_field(const json& cfg);
void cmd_nullclines(const json& cfg);
void cmd_basin(const json& cfg);
void cmd_align(const json& cfg);
void cmd_train(const json& cfg);

/// Full CLI entry point (argument parsing + exit-code mapping).
int run_main(int argc, const char* const* argv);

}  // namespace ssldyn::cli
