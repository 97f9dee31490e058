#include <iostream>

#include "cli_commands.hpp"

namespace sgreen::cli {

int run_table(const std::string&, const std::string&, const Context&) {
    std::cerr << "table: not implemented yet\n";
    return 2;
}
int run_hybrid(const std::string&, const Context&) {
    std::cerr << "hybrid: not implemented yet\n";
    return 2;
}
int run_spectrum(const std::string&, const std::string&, int, const Context&) {
    std::cerr << "spectrum: not implemented yet\n";
    return 2;
}
int run_solve(const std::string&, const Context&) {
    std::cerr << "solve: not implemented yet\n";
    return 2;
}
int run_multigrid(const std::string&, const Context&) {
    std::cerr << "multigrid: not implemented yet\n";
    return 2;
}

}  // namespace sgreen::cli
