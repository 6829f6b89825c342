#ifndef CHARPIC_RUN_HPP
#define CHARPIC_RUN_HPP

#include <optional>
#include <string>
#include <vector>

#include "charpic/config.hpp"

namespace charpic {

struct RunOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::string> out_dir;
    std::optional<std::string> against_path; // verify only
};

// Executes one CLI subcommand. Exit codes: 0 success, 2 validation error,
// 3 solver non-convergence (best-so-far results are still written).
int run_subcommand(const std::string& name, const RunOptions& opts);

const std::vector<std::string>& subcommand_names();

} // namespace charpic

#endif
