#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "macroplace/policy.hpp"
#include "macroplace/refine.hpp"
#include "macroplace/report.hpp"
#include "support.hpp"

namespace macroplace {
namespace {

namespace fs = std::filesystem;
using testing::fixture;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

CliRun cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string(MACROPLACE_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_netlist(const Netlist& n, const fs::path& dir, const std::string& name) {
    const fs::path p = dir / name;
    save_netlist(n, p);
    return p;
}

std::string quick_config(const fs::path& dir) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << R"({"ppo": {"episodes_per_update": 4, "minibatch": 16, "epochs": 1},
                           "sa": {"sweeps": 10}, "eval_episodes": 4})";
    return p.string();
}

TEST(Cli, GroupsThreeHierarchicalNamesIntoTwo) {
    const fs::path dir = testing::scratch_dir("cli_group2");
    const fs::path net =
        write_netlist(testing::box_netlist(10, 10, {{"top/a/x", 2, 2}, {"top/a/y", 2, 2}, {"top/b/z", 2, 2}}), dir, "n.json");
    const fs::path out = dir / "out";
    const CliRun r = cli("group --netlist " + net.string() + " --out " + out.string(), dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, 4), "G=2\n");
    const auto doc = read_json(out / "groups.json");
    EXPECT_EQ(doc.at("groups").size(), 2u);
}

TEST(Cli, GroupOverrideIsEchoedVerbatim) {
    const fs::path dir = testing::scratch_dir("cli_group_override");
    const CliRun r = cli("group --netlist " + fixture("toy6.json").string() + " --groups " +
                          fixture("groups3.json").string() + " --out " + (dir / "out").string(),
                      dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, 4), "G=3\n");
    const auto doc = nlohmann::ordered_json::parse(slurp(dir / "out" / "groups.json"));
    const auto given = nlohmann::ordered_json::parse(slurp(fixture("groups3.json")));
    EXPECT_EQ(doc.at("groups"), given);
    EXPECT_EQ(doc.at("groups").dump(), given.dump());
}

TEST(Cli, MalformedNetlistNamesTheViolation) {
    const fs::path dir = testing::scratch_dir("cli_malformed");
    auto doc = read_json(fixture("toy6.json"));
    doc["macros"][1]["name"] = doc["macros"][0]["name"];
    const fs::path bad = dir / "bad.json";
    std::ofstream(bad) << doc.dump();
    const CliRun r = cli("group --netlist " + bad.string() + " --out " + (dir / "out").string(), dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("duplicate macro name"), std::string::npos) << r.err;

    std::ofstream(dir / "broken.json") << "{\"name\": ";
    EXPECT_EQ(cli("group --netlist " + (dir / "broken.json").string(), dir).code, 2);
}

TEST(Cli, UsageErrorsExitWithTwo) {
    const fs::path dir = testing::scratch_dir("cli_usage");
    EXPECT_EQ(cli("place --random --sa --netlist " + fixture("toy6.json").string(), dir).code, 2);
    EXPECT_EQ(cli("place --random --out " + (dir / "o").string(), dir).code, 2);
    EXPECT_EQ(cli("frobnicate", dir).code, 2);
    EXPECT_FALSE(fs::exists(dir / "o"));
}

TEST(Cli, TrainWithZeroUpdatesWritesTheInitialPolicy) {
    const fs::path dir = testing::scratch_dir("cli_train0");
    const CliRun r = cli("train --netlist " + fixture("toy6.json").string() + " --updates 0 --seed 7 --out " +
                          (dir / "out").string(),
                      dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(PolicyNet::load(dir / "out" / "checkpoint.json"), PolicyNet({}, 7));
    EXPECT_EQ(slurp(dir / "out" / "metrics.csv"), "update,mean_reward,wl,cong,dens,hier\n");
}

TEST(Cli, TrainWritesOneMetricsRowPerUpdateAndIsReproducible) {
    const fs::path dir = testing::scratch_dir("cli_train");
    const std::string base = "train --netlist " + fixture("toy6.json").string() + " --config " + quick_config(dir) +
                             " --updates 3 --seed 5 --workers 1 --snapshot-every 2 --out ";
    const CliRun a = cli(base + (dir / "a").string(), dir);
    ASSERT_EQ(a.code, 0) << a.err;
    const CliRun b = cli(base + (dir / "b").string(), dir);
    ASSERT_EQ(b.code, 0) << b.err;
    const std::string metrics = slurp(dir / "a" / "metrics.csv");
    EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 4);
    EXPECT_EQ(metrics, slurp(dir / "b" / "metrics.csv"));
    EXPECT_EQ(slurp(dir / "a" / "checkpoint.json"), slurp(dir / "b" / "checkpoint.json"));
    EXPECT_TRUE(fs::exists(dir / "a" / "snapshots" / "update_00002.svg"));
    EXPECT_FALSE(fs::exists(dir / "a" / "snapshots" / "update_00003.svg"));
}

TEST(Cli, RandomPlacementIsLegalAndComplete) {
    const fs::path dir = testing::scratch_dir("cli_random");
    const fs::path out = dir / "out";
    const CliRun r = cli("place --random --seed 3 --netlist " + fixture("fixture10.json").string() + " --out " + out.string(), dir);
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"placement.json", "costs.json", "layout.svg"}) EXPECT_TRUE(fs::exists(out / f)) << f;
    const Design d = testing::fixture_design("fixture10.json");
    const Placement p = placement_from_json(d, read_json(out / "placement.json"));
    const RefineContext ctx(d);
    for (int m = 0; m < d.macro_count(); ++m) {
        EXPECT_TRUE(p.macros[m].placed);
        EXPECT_TRUE(ctx.legal(p, m)) << m;
    }
    const auto costs = read_json(out / "costs.json");
    EXPECT_NEAR(costs.at("reward").get<double>(), reward(compute_costs(d, p), {}), 1e-12);
}

TEST(Cli, PostRefinementDoesNotWorsenTheCost) {
    const fs::path dir = testing::scratch_dir("cli_post");
    const fs::path out = dir / "out";
    const CliRun r = cli("place --random --post --seed 1 --config " + quick_config(dir) + " --netlist " +
                          fixture("fixture10.json").string() + " --out " + out.string(),
                      dir);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto costs = read_json(out / "costs.json");
    EXPECT_LE(costs.at("weighted_total").get<double>(), costs.at("pre_refine").at("weighted_total").get<double>());
    EXPECT_EQ(costs.at("pin_violations").get<int>(), 0);
    EXPECT_TRUE(fs::exists(out / "sa_trace.csv"));
}

TEST(Cli, SaPlacementWritesItsTrace) {
    const fs::path dir = testing::scratch_dir("cli_sa");
    const fs::path out = dir / "out";
    const CliRun r = cli("place --sa --seed 2 --config " + quick_config(dir) + " --netlist " +
                          fixture("toy6.json").string() + " --out " + out.string(),
                      dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(out / "sa_trace.csv"));
    EXPECT_TRUE(fs::exists(out / "placement.json"));
}

TEST(Cli, PolicyPlacementEvalAndRender) {
    const fs::path dir = testing::scratch_dir("cli_policy");
    const fs::path out = dir / "out";
    const std::string net = " --netlist " + fixture("toy6.json").string();
    ASSERT_EQ(cli("train --updates 0 --seed 4" + net + " --out " + out.string(), dir).code, 0);
    const std::string ckpt = " --checkpoint " + (out / "checkpoint.json").string();
    CliRun r = cli("place" + ckpt + net + " --out " + out.string(), dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, 7), "reward ");
    r = cli("eval --episodes 3" + ckpt + net + " --out " + out.string(), dir);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ev = read_json(out / "eval.json");
    EXPECT_EQ(ev.at("stochastic").at("episodes").get<int>(), 3);
    EXPECT_EQ(ev.at("random").at("episodes").get<int>(), 3);
    EXPECT_EQ(ev.at("greedy").at("episodes").get<int>(), 1);

    const std::string svg = slurp(out / "layout.svg");
    fs::remove(out / "layout.svg");
    r = cli("render" + net + " --out " + out.string(), dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(out / "layout.svg"), svg);
}

TEST(Cli, NoLegalActionExitsWithThree) {
    const fs::path dir = testing::scratch_dir("cli_nolegal");
    const fs::path net = write_netlist(testing::box_netlist(10, 10, {{"big", 10, 6}, {"small", 10, 5}}), dir, "n.json");
    const CliRun r = cli("place --random --netlist " + net.string() + " --out " + (dir / "out").string(), dir);
    EXPECT_EQ(r.code, 3) << r.err;
}

}  // namespace
}  // namespace macroplace
