#include "macroplace/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "macroplace/grouping.hpp"
#include "macroplace/report.hpp"

namespace macroplace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
void take(const json& doc, const char* key, T& field) {
    if (doc.contains(key)) field = doc.at(key).get<T>();
}

ordered_json stats_json(const CostStats& s) {
    return {{"episodes", s.episodes},  {"mean_reward", s.mean_reward}, {"std_reward", s.std_reward},
            {"wl", s.mean_costs.wl},   {"cong", s.mean_costs.cong},    {"dens", s.mean_costs.dens},
            {"hier", s.mean_costs.hier}};
}

PolicyNet initial_policy(const RunConfig& cfg) {
    if (!cfg.checkpoint.empty()) return PolicyNet::load(cfg.checkpoint);
    return PolicyNet({}, cfg.seed);
}

Netlist load_clustered(const RunConfig& cfg, ClusteringResult* clustering) {
    Netlist n = load_netlist(cfg.netlist);
    if (cfg.cells_file.empty() || cfg.clusters <= 0) return n;
    int next_cluster = 0, next_net = 0;
    for (const auto& c : n.clusters) next_cluster = std::max(next_cluster, c.id + 1);
    for (const auto& net : n.nets) next_net = std::max(next_net, net.id + 1);
    ClusteringResult res =
        cluster_standard_cells(cells_from_json(read_json(cfg.cells_file)), cfg.clusters, next_cluster, next_net);
    n = apply_clustering(std::move(n), res);
    if (clustering) *clustering = std::move(res);
    return n;
}

}  // namespace

RunConfig run_config_from_json(const json& doc, RunConfig cfg) {
    try {
        if (!doc.is_object()) throw ValidationError("config must be a JSON object");
        if (doc.contains("netlist")) cfg.netlist = doc.at("netlist").get<std::string>();
        if (doc.contains("out")) cfg.out_dir = doc.at("out").get<std::string>();
        if (doc.contains("checkpoint")) cfg.checkpoint = doc.at("checkpoint").get<std::string>();
        if (doc.contains("groups")) cfg.groups_file = doc.at("groups").get<std::string>();
        if (doc.contains("cells")) cfg.cells_file = doc.at("cells").get<std::string>();
        take(doc, "clusters", cfg.clusters);
        take(doc, "seed", cfg.seed);
        take(doc, "workers", cfg.workers);
        take(doc, "updates", cfg.updates);
        take(doc, "snapshot_every", cfg.snapshot_every);
        take(doc, "eval_episodes", cfg.eval_episodes);
        take(doc, "post", cfg.post);
        if (doc.contains("grid")) {
            const auto& g = doc.at("grid");
            cfg.grid = std::make_pair(g.at(0).get<int>(), g.at(1).get<int>());
        }
        if (doc.contains("weights")) {
            const auto& w = doc.at("weights");
            take(w, "alpha", cfg.weights.alpha);
            take(w, "beta", cfg.weights.beta);
            take(w, "gamma", cfg.weights.gamma);
            take(w, "omega", cfg.weights.omega);
        }
        if (doc.contains("ppo")) {
            const auto& p = doc.at("ppo");
            take(p, "clip", cfg.ppo.clip);
            take(p, "epochs", cfg.ppo.epochs);
            take(p, "minibatch", cfg.ppo.minibatch);
            take(p, "lr", cfg.ppo.lr);
            take(p, "discount", cfg.ppo.discount);
            take(p, "entropy_coef", cfg.ppo.entropy_coef);
            take(p, "value_coef", cfg.ppo.value_coef);
            take(p, "max_grad_norm", cfg.ppo.max_grad_norm);
            take(p, "episodes_per_update", cfg.ppo.episodes_per_update);
            take(p, "normalize_advantages", cfg.ppo.normalize_advantages);
        }
        if (doc.contains("sa")) {
            const auto& s = doc.at("sa");
            take(s, "t0", cfg.sa.t0);
            take(s, "cooling", cfg.sa.cooling);
            take(s, "sweeps", cfg.sa.sweeps);
            take(s, "calibration_moves", cfg.sa.calibration_moves);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad config value: ") + e.what());
    }
    validate_run_config(cfg);
    return cfg;
}

void validate_run_config(const RunConfig& c) {
    const auto& w = c.weights;
    if (w.alpha < 0 || w.beta < 0 || w.gamma < 0 || w.omega < 0) throw ValidationError("weights must be non-negative");
    if (c.grid && (c.grid->first < 1 || c.grid->second < 1 || c.grid->first > kMaxGrid || c.grid->second > kMaxGrid)) {
        throw ValidationError("grid override must be within 1.." + std::to_string(kMaxGrid));
    }
    if (!(c.ppo.clip > 0.0 && c.ppo.clip < 1.0)) throw ValidationError("ppo.clip must be in (0, 1)");
    if (!(c.ppo.discount > 0.0 && c.ppo.discount <= 1.0)) throw ValidationError("ppo.discount must be in (0, 1]");
    if (c.ppo.epochs < 1 || c.ppo.minibatch < 1 || c.ppo.episodes_per_update < 1) {
        throw ValidationError("ppo epochs, minibatch and episodes_per_update must be positive");
    }
    if (!(c.sa.cooling > 0.0 && c.sa.cooling < 1.0)) throw ValidationError("sa.cooling must be in (0, 1)");
    if (c.sa.sweeps < 0) throw ValidationError("sa.sweeps must be non-negative");
    if (c.workers < 1) throw ValidationError("workers must be at least 1");
    if (c.updates < 0) throw ValidationError("updates must be non-negative");
    if (c.use_sa && c.use_random) throw ValidationError("--sa and --random are exclusive");
}

Design load_design(const RunConfig& cfg) {
    Netlist n = load_clustered(cfg, nullptr);
    std::optional<GroupAssignment> groups;
    if (!cfg.groups_file.empty()) {
        groups = groups_from_json(nlohmann::ordered_json(read_json(cfg.groups_file)), n);
    }
    std::optional<GridSpec> grid;
    if (cfg.grid) grid = GridSpec::covering(n.canvas, cfg.grid->first, cfg.grid->second);
    return Design::build(std::move(n), std::move(groups), std::move(grid));
}

void cmd_group(const RunConfig& cfg, std::ostream& log) {
    ClusteringResult clustering;
    Netlist n = load_clustered(cfg, &clustering);
    fs::create_directories(cfg.out_dir);
    ordered_json doc;
    GroupAssignment groups;
    if (!cfg.groups_file.empty()) {
        std::ifstream in(cfg.groups_file);
        if (!in) throw ParseError("cannot open " + cfg.groups_file.string());
        ordered_json given;
        try {
            given = ordered_json::parse(in);
        } catch (const json::parse_error& e) {
            throw ParseError(cfg.groups_file.string() + ": " + e.what());
        }
        groups = groups_from_json(given, n);
        doc["groups"] = given;
    } else {
        groups = n.macros.empty() ? GroupAssignment{} : group_macros(n);
        doc["groups"] = groups_to_json(groups);
    }
    if (!clustering.clusters.empty()) {
        const CellConnectivity cells = cells_from_json(read_json(cfg.cells_file));
        ordered_json mapping = ordered_json::object();
        for (std::size_t i = 0; i < cells.names.size(); ++i) mapping[cells.names[i]] = clustering.cell_to_cluster[i];
        doc["clusters"] = std::move(mapping);
        save_netlist(n, cfg.out_dir / "netlist_clustered.json");
    }
    write_json(cfg.out_dir / "groups.json", doc);
    log << "G=" << groups.count() << "\n";
    for (const Group& g : groups.groups) log << g.label << ": " << g.macro_names.size() << "\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
    const Design design = load_design(cfg);
    fs::create_directories(cfg.out_dir);
    if (cfg.snapshot_every > 0) fs::create_directories(cfg.out_dir / "snapshots");
    TrainConfig tc;
    tc.ppo = cfg.ppo;
    tc.weights = cfg.weights;
    tc.updates = cfg.updates;
    tc.workers = cfg.workers;
    tc.seed = cfg.seed;
    const FeatureEncoder encoder(design);
    tc.on_update = [&](const UpdateMetrics& m, const PolicyNet& policy) {
        char line[128];
        std::snprintf(line, sizeof line, "update %d mean_reward %.6f\n", m.update, m.mean_reward);
        log << line;
        if (cfg.snapshot_every > 0 && (m.update + 1) % cfg.snapshot_every == 0) {
            const Episode ep =
                run_episode(policy, design, encoder, cfg.weights, SampleMode::Greedy, cfg.seed, false);
            char name[64];
            std::snprintf(name, sizeof name, "update_%05d.svg", m.update + 1);
            write_text(cfg.out_dir / "snapshots" / name, render_svg(design, ep.record.placement));
        }
    };
    TrainResult res;
    try {
        res = train(design, initial_policy(cfg), tc);
    } catch (const NonFiniteLoss& e) {
        throw NonFiniteLoss(std::string(e.what()) + " while training on " + cfg.netlist.string());
    }
    res.policy.save(cfg.out_dir / "checkpoint.json");
    write_metrics_csv(res.metrics, cfg.out_dir / "metrics.csv");
    log << "wrote " << (cfg.out_dir / "checkpoint.json").string() << " and metrics.csv (" << res.metrics.size()
        << " updates)\n";
}

void cmd_place(const RunConfig& cfg, std::ostream& log) {
    validate_run_config(cfg);
    const Design design = load_design(cfg);
    fs::create_directories(cfg.out_dir);
    EpisodeRecord rec;
    if (cfg.use_random) {
        rec = random_episode(design, cfg.weights, cfg.seed);
    } else if (cfg.use_sa) {
        const AnnealResult sa = sa_place_from_scratch(design, cfg.sa, cfg.weights, cfg.seed);
        write_sa_trace(sa.trace, cfg.out_dir / "sa_trace.csv");
        rec = evaluate_placement(design, sa.best, cfg.weights);
    } else {
        const FeatureEncoder encoder(design);
        rec = run_episode(initial_policy(cfg), design, encoder, cfg.weights, SampleMode::Greedy, cfg.seed, false).record;
    }
    if (rec.aborted) throw NoLegalAction("placement aborted: no legal anchor for a macro");

    ordered_json costs;
    if (cfg.post) {
        const AnnealResult post = anneal(design, rec.placement, cfg.sa, cfg.weights, cfg.seed);
        write_sa_trace(post.trace, cfg.out_dir / "sa_trace.csv");
        const ordered_json before = costs_to_json(rec.costs, cfg.weights);
        rec = evaluate_placement(design, post.best, cfg.weights);
        costs = costs_to_json(rec.costs, cfg.weights);
        costs["pre_refine"] = before;
        costs["pin_violations"] = post.best_violations;
    } else {
        costs = costs_to_json(rec.costs, cfg.weights);
    }
    write_json(cfg.out_dir / "placement.json", placement_to_json(design, rec.placement));
    write_json(cfg.out_dir / "costs.json", costs);
    write_text(cfg.out_dir / "layout.svg", render_svg(design, rec.placement));
    char line[160];
    std::snprintf(line, sizeof line, "reward %.6f (wl %.6f cong %.6f dens %.6f hier %.6f)\n", rec.reward, rec.costs.wl,
                  rec.costs.cong, rec.costs.dens, rec.costs.hier);
    log << line;
}

void cmd_eval(const RunConfig& cfg, std::ostream& log) {
    const Design design = load_design(cfg);
    fs::create_directories(cfg.out_dir);
    const EvalResult ev = evaluate_policy(initial_policy(cfg), design, cfg.weights, cfg.eval_episodes, cfg.seed);
    const CostStats rnd = evaluate_random(design, cfg.weights, cfg.eval_episodes, cfg.seed);
    ordered_json doc{{"greedy", stats_json(ev.greedy)}, {"stochastic", stats_json(ev.stochastic)},
                     {"random", stats_json(rnd)}};
    write_json(cfg.out_dir / "eval.json", doc);
    char line[160];
    std::snprintf(line, sizeof line, "greedy %.6f stochastic %.6f random %.6f\n", ev.greedy.mean_reward,
                  ev.stochastic.mean_reward, rnd.mean_reward);
    log << line;
}

void cmd_render(const RunConfig& cfg, std::ostream& log) {
    const Design design = load_design(cfg);
    const fs::path src = cfg.placement_file.empty() ? cfg.out_dir / "placement.json" : cfg.placement_file;
    const Placement p = placement_from_json(design, read_json(src));
    fs::create_directories(cfg.out_dir);
    write_text(cfg.out_dir / "layout.svg", render_svg(design, p));
    log << "wrote " << (cfg.out_dir / "layout.svg").string() << "\n";
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NoLegalAction*>(&e)) return 3;
    if (dynamic_cast<const NonFiniteLoss*>(&e)) return 4;
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const EmptyInput*>(&e) || dynamic_cast<const KTooLarge*>(&e) ||
        dynamic_cast<const InconsistentPlacement*>(&e) || dynamic_cast<const GeometryError*>(&e)) {
        return 2;
    }
    return 1;
}

}  // namespace macroplace
