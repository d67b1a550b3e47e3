#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "eeopt/commands.hpp"
#include "eeopt/common.hpp"

namespace {

// Exit codes: 0 ok, 2 config error, 3 solver non-convergence, 4 I/O failure.
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

struct GlobalArgs {
    std::optional<std::string> config;
    std::optional<std::string> preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::vector<std::string> sets;
};

eeopt::cli::RunConfig make_config(const GlobalArgs& g) {
    std::optional<std::filesystem::path> path;
    if (g.config) path = *g.config;
    return eeopt::cli::load_run_config(path, g.preset, g.seed, g.out, g.sets);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-aided learning for energy-efficient wireless resource allocation"};
    app.require_subcommand(1);

    GlobalArgs g;
    std::string model_path;
    app.add_option("--config", g.config, "JSON config file")->expected(1);
    app.add_option("--preset", g.preset, "Built-in parameter preset")
        ->check(CLI::IsMember({"desk", "paper"}));
    app.add_option("--seed", g.seed, "Master seed override");
    app.add_option("--out", g.out, "Output directory override");
    app.add_option("--set", g.sets, "Config override key=value (repeatable)")->take_all();

    CLI::App* gen = app.add_subcommand("gen", "Materialize the configured datasets");
    CLI::App* train = app.add_subcommand("train", "Protocol A: train on oracle-labeled data (case1)");
    CLI::App* transfer =
        app.add_subcommand("transfer", "Protocol B: pre-train on model data, fine-tune on empirical");
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a saved model on the held-out test set");
    eval->add_option("--model", model_path, "Model file to evaluate")->required();
    CLI::App* sweep = app.add_subcommand("sweep", "Architecture sweep for the transfer protocol");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        const eeopt::cli::RunConfig cfg = make_config(g);
        if (gen->parsed()) eeopt::cli::cmd_gen(cfg);
        if (train->parsed()) eeopt::cli::cmd_train(cfg);
        if (transfer->parsed()) eeopt::cli::cmd_transfer(cfg);
        if (eval->parsed()) eeopt::cli::cmd_eval(cfg, model_path);
        if (sweep->parsed()) eeopt::cli::cmd_sweep(cfg);
    } catch (const eeopt::config_error& e) {
        std::fprintf(stderr, "[eeopt] error=config detail=%s\n", e.what());
        return kExitConfig;
    } catch (const eeopt::solver_error& e) {
        std::fprintf(stderr, "[eeopt] error=solver detail=%s\n", e.what());
        return kExitSolver;
    } catch (const eeopt::io_error& e) {
        std::fprintf(stderr, "[eeopt] error=io detail=%s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "[eeopt] error=internal detail=%s\n", e.what());
        return 1;
    }
    return 0;
}
