#ifndef EEOPT_COMMANDS_HPP
#define EEOPT_COMMANDS_HPP

#include <filesystem>

#include "eeopt/config.hpp"

namespace eeopt::cli {

// Subcommand bodies; they throw config_error / solver_error / io_error and
// write results only to files under cfg.out_dir (logs go to stderr).
void cmd_gen(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_transfer(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg, const std::filesystem::path& model_path);
void cmd_sweep(const RunConfig& cfg);

}  // namespace eeopt::cli

#endif
