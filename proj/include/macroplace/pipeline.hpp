#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>

#include <nlohmann/json.hpp>

#include "macroplace/design.hpp"
#include "macroplace/ppo.hpp"
#include "macroplace/refine.hpp"

namespace macroplace {

struct RunConfig {
    std::filesystem::path netlist;
    std::filesystem::path out_dir = "out";
    std::filesystem::path checkpoint;   // policy to load
    std::filesystem::path groups_file;  // human-guided groups
    std::filesystem::path cells_file;   // standard cells to cluster
    std::filesystem::path placement_file;
    int clusters = 0;
    RewardWeights weights;
    std::optional<std::pair<int, int>> grid;  // rows, cols
    PPOConfig ppo;
    SASchedule sa;
    std::uint64_t seed = 0;
    int workers = 1;
    int updates = 0;
    int snapshot_every = 0;
    int eval_episodes = 32;
    bool post = false;
    bool use_sa = false;
    bool use_random = false;
};

// Fields present in the document override the defaults. Throws ValidationError
// for out-of-range values.
RunConfig run_config_from_json(const nlohmann::json& doc, RunConfig base = {});
void validate_run_config(const RunConfig& cfg);

// Netlist (clustered when cells are given), groups, and grid from the config.
Design load_design(const RunConfig& cfg);

void cmd_group(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_place(const RunConfig& cfg, std::ostream& log);
void cmd_eval(const RunConfig& cfg, std::ostream& log);
void cmd_render(const RunConfig& cfg, std::ostream& log);

// 0 success, 2 invalid input, 3 no legal action, 4 training divergence, 1 other.
int exit_code_for(const std::exception& e);

}  // namespace macroplace
