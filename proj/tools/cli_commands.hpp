#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace sgreen::cli {

struct Context {
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out_dir = "out";
};

int run_train(const std::string& config_path, const Context& ctx);
int run_table(const std::string& table_id, const std::string& model_path, const Context& ctx);
int run_hybrid(const std::string& config_path, const Context& ctx);
int run_spectrum(const std::string& model_path, const std::string& problem_name, int eig_count,
                 const Context& ctx);
int run_solve(const std::string& config_path, const Context& ctx);
int run_multigrid(const std::string& config_path, const Context& ctx);

}  // namespace sgreen::cli
