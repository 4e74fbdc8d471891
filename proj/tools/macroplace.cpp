#include <iostream>

#include <CLI11.hpp>

#include "macroplace/pipeline.hpp"
#include "macroplace/report.hpp"

using namespace macroplace;

namespace {

struct Flags {
    std::string netlist, config, out, checkpoint, groups, cells, placement;
    std::uint64_t seed = 0;
    int workers = 0, updates = -1, clusters = 0, snapshot_every = -1, episodes = 0;
    bool post = false, sa = false, random = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--netlist", f.netlist, "Netlist JSON");
    cmd->add_option("--config", f.config, "Run configuration JSON; flags override it");
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--groups", f.groups, "Group assignment JSON overriding the name tree");
    cmd->add_option("--cells", f.cells, "Standard-cell connectivity JSON to cluster");
    cmd->add_option("--clusters", f.clusters, "Number of standard-cell clusters");
}

RunConfig resolve(const Flags& f, const CLI::App& cmd) {
    RunConfig cfg;
    if (!f.config.empty()) cfg = run_config_from_json(read_json(f.config));
    if (!f.netlist.empty()) cfg.netlist = f.netlist;
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (!f.checkpoint.empty()) cfg.checkpoint = f.checkpoint;
    if (!f.groups.empty()) cfg.groups_file = f.groups;
    if (!f.cells.empty()) cfg.cells_file = f.cells;
    if (!f.placement.empty()) cfg.placement_file = f.placement;
    if (cmd.count("--seed")) cfg.seed = f.seed;
    if (f.clusters > 0) cfg.clusters = f.clusters;
    if (f.workers > 0) cfg.workers = f.workers;
    if (f.updates >= 0) cfg.updates = f.updates;
    if (f.snapshot_every >= 0) cfg.snapshot_every = f.snapshot_every;
    if (f.episodes > 0) cfg.eval_episodes = f.episodes;
    cfg.post = cfg.post || f.post;
    cfg.use_sa = f.sa;
    cfg.use_random = f.random;
    if (cfg.netlist.empty()) throw ValidationError("--netlist is required");
    validate_run_config(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rectilinear macro placement with hierarchy-aware masks"};
    app.require_subcommand(1);
    Flags f;

    auto* group = app.add_subcommand("group", "Group macros and cluster standard cells");
    add_common(group, f);

    auto* train = app.add_subcommand("train", "Train the placement policy");
    add_common(train, f);
    train->add_option("--workers", f.workers, "Rollout workers");
    train->add_option("--updates", f.updates, "PPO updates");
    train->add_option("--checkpoint", f.checkpoint, "Initial policy to fine-tune");
    train->add_option("--snapshot-every", f.snapshot_every, "Write a greedy SVG every N updates");

    auto* place = app.add_subcommand("place", "Place macros with a policy, SA, or at random");
    add_common(place, f);
    place->add_option("--checkpoint", f.checkpoint, "Policy checkpoint");
    place->add_flag("--post", f.post, "Refine with simulated annealing");
    auto* sa = place->add_flag("--sa", f.sa, "Simulated annealing from scratch");
    place->add_flag("--random", f.random, "Uniform random legal placement")->excludes(sa);

    auto* eval = app.add_subcommand("eval", "Evaluate a policy against the random baseline");
    add_common(eval, f);
    eval->add_option("--checkpoint", f.checkpoint, "Policy checkpoint");
    eval->add_option("--episodes", f.episodes, "Stochastic and random episodes");

    auto* render = app.add_subcommand("render", "Render a placement to SVG");
    add_common(render, f);
    render->add_option("--placement", f.placement, "placement.json (default: <out>/placement.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        const RunConfig cfg = resolve(f, *cmd);
        if (cmd == group) cmd_group(cfg, std::cout);
        if (cmd == train) cmd_train(cfg, std::cout);
        if (cmd == place) cmd_place(cfg, std::cout);
        if (cmd == eval) cmd_eval(cfg, std::cout);
        if (cmd == render) cmd_render(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 0;
}
