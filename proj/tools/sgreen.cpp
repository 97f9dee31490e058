// Command-line driver: trains singularity-encoded kernels and runs the
// preconditioner / hybrid-solver / spectral experiments that reproduce the
// benchmark tables.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sgreen/config.hpp"
#include "sgreen/green_model.hpp"
#include "sgreen/io.hpp"
#include "sgreen/problems.hpp"

#include "cli_commands.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"Learned Green's-function kernels for elliptic solvers"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out_dir = "out";
    app.add_option("--seed", seed, "Override the config seed");
    app.add_option("--threads", threads, "Internal parallelism (1 = reproducibility mode)");
    app.add_option("--out-dir", out_dir, "Directory for generated artifacts");

    std::string config_path, model_path, table_id, problem_name;
    int eig_count = 0;

    CLI::App* cmd_train = app.add_subcommand("train", "Train a kernel from a config file");
    cmd_train->add_option("config", config_path, "Training config")->required();

    CLI::App* cmd_table = app.add_subcommand("table", "Reproduce a benchmark table (1|2|4|5)");
    cmd_table->add_option("id", table_id, "Table id")->required();
    cmd_table->add_option("model", model_path, "Trained model file");

    CLI::App* cmd_hybrid = app.add_subcommand("hybrid", "Hybrid vs Jacobi iteration traces");
    cmd_hybrid->add_option("config", config_path, "Hybrid run config")->required();

    CLI::App* cmd_spectrum = app.add_subcommand("spectrum", "Kernel eigenpair profiles");
    cmd_spectrum->add_option("model", model_path, "Trained model file")->required();
    cmd_spectrum->add_option("problem", problem_name, "poisson1d|poisson2d")->required();
    cmd_spectrum->add_option("--count", eig_count, "Number of eigenpairs");

    CLI::App* cmd_solve = app.add_subcommand("solve", "Quadrature fast solve of a benchmark");
    cmd_solve->add_option("config", config_path, "Solve config")->required();

    CLI::App* cmd_mg = app.add_subcommand("multigrid", "Multigrid cycles with hybrid smoothing");
    cmd_mg->add_option("config", config_path, "Multigrid config")->required();

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        fs::create_directories(out_dir);
        sgreen::cli::Context ctx{seed, threads, out_dir};
        if (cmd_train->parsed()) return sgreen::cli::run_train(config_path, ctx);
        if (cmd_table->parsed()) return sgreen::cli::run_table(table_id, model_path, ctx);
        if (cmd_hybrid->parsed()) return sgreen::cli::run_hybrid(config_path, ctx);
        if (cmd_spectrum->parsed())
            return sgreen::cli::run_spectrum(model_path, problem_name, eig_count, ctx);
        if (cmd_solve->parsed()) return sgreen::cli::run_solve(config_path, ctx);
        if (cmd_mg->parsed()) return sgreen::cli::run_multigrid(config_path, ctx);
    } catch (const sgreen::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 2;
}
