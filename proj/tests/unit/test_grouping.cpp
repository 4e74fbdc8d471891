#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

#include "macroplace/grouping.hpp"
#include "support.hpp"

namespace macroplace {
namespace {

std::vector<std::string> child_tokens(const NameTree& t, int node) {
    std::vector<std::string> out;
    for (int c : t.nodes[node].children) out.push_back(t.nodes[c].token);
    return out;
}

std::set<std::set<std::string>> group_sets(const GroupAssignment& g) {
    std::set<std::set<std::string>> out;
    for (const Group& grp : g.groups) out.insert({grp.macro_names.begin(), grp.macro_names.end()});
    return out;
}

TEST(NameTree, HierarchicalNames) {
    const std::vector<std::string> names{"top/cpu/ram0", "top/cpu/ram1", "top/dsp/rom0"};
    const NameTree t = build_name_tree(names);
    const int root = t.effective_root();
    EXPECT_EQ(t.nodes[root].token, "top");
    EXPECT_EQ(child_tokens(t, root), (std::vector<std::string>{"cpu", "dsp"}));
}

TEST(NameTree, SingleName) {
    const std::vector<std::string> names{"a"};
    const NameTree t = build_name_tree(names);
    ASSERT_EQ(t.nodes[0].children.size(), 1u);
    const int leaf = t.nodes[0].children[0];
    EXPECT_EQ(t.depth_of(leaf), 1);
    EXPECT_TRUE(t.nodes[leaf].children.empty());
}

TEST(NameTree, UnderscoreSplit) {
    const std::vector<std::string> names{"x_0", "x_1", "y_0"};
    const NameTree t = build_name_tree(names);
    EXPECT_EQ(child_tokens(t, t.effective_root()), (std::vector<std::string>{"x", "y"}));
}

TEST(NameTree, EmptyInputThrows) { EXPECT_THROW(build_name_tree(std::vector<std::string>{}), EmptyInput); }

TEST(Grouping, TwoGroupsFromHierarchy) {
    const std::vector<std::string> names{"top/cpu/ram0", "top/cpu/ram1", "top/dsp/rom0"};
    const GroupAssignment g = extract_groups(build_name_tree(names));
    EXPECT_EQ(group_sets(g), (std::set<std::set<std::string>>{{"top/cpu/ram0", "top/cpu/ram1"}, {"top/dsp/rom0"}}));
    EXPECT_EQ(g.group_of("top/cpu/ram1"), 0);
    EXPECT_EQ(g.group_of("top/dsp/rom0"), 1);
}

TEST(Grouping, SingleMacroSingleGroup) {
    const GroupAssignment g = extract_groups(build_name_tree(std::vector<std::string>{"solo"}));
    ASSERT_EQ(g.count(), 1);
    EXPECT_EQ(g.groups[0].macro_names.size(), 1u);
}

TEST(Grouping, SingleChildChainDefers) {
    const GroupAssignment g = extract_groups(build_name_tree(std::vector<std::string>{"a/b/c0", "a/b/c1"}));
    ASSERT_EQ(g.count(), 1);
    EXPECT_EQ(g.groups[0].macro_names, (std::vector<std::string>{"a/b/c0", "a/b/c1"}));
}

TEST(Grouping, ToyFixtureHasThreeGroups) {
    const Netlist n = load_netlist(testing::fixture("toy6.json"));
    const GroupAssignment g = group_macros(n);
    ASSERT_EQ(g.count(), 3);
    EXPECT_EQ(g.groups[0].macro_names.size(), 3u);
    EXPECT_EQ(g.groups[1].macro_names.size(), 2u);
    EXPECT_EQ(g.groups[2].macro_names.size(), 1u);
}

TEST(Grouping, Deterministic) {
    const Netlist n = load_netlist(testing::fixture("fixture10.json"));
    EXPECT_EQ(groups_to_json(group_macros(n)), groups_to_json(group_macros(n)));
}

TEST(Grouping, HumanGroupsMustPartition) {
    const Netlist n = load_netlist(testing::fixture("toy6.json"));
    std::ifstream in(testing::fixture("groups3.json"));
    nlohmann::ordered_json doc = nlohmann::ordered_json::parse(in);
    EXPECT_EQ(groups_from_json(doc, n).count(), 3);

    auto missing = doc;
    missing["io"] = nlohmann::ordered_json::array();
    EXPECT_THROW(groups_from_json(missing, n), ValidationError);
    auto twice = doc;
    twice["io"].push_back("top/cpu/ram0");
    EXPECT_THROW(groups_from_json(twice, n), ValidationError);
    auto unknown = doc;
    unknown["io"].push_back("top/ghost");
    EXPECT_THROW(groups_from_json(unknown, n), ValidationError);
}

// Independent oracle: the 2-partition minimizing cut / (|A| |B|) for unit areas.
std::set<int> best_ratio_side(int n, const std::vector<std::pair<int, int>>& edges) {
    double best = std::numeric_limits<double>::infinity();
    std::set<int> side;
    for (int mask = 1; mask < (1 << n) - 1; ++mask) {
        if (mask & 1) continue;  // fix cell 0 on the complement side
        double cut = 0.0;
        for (auto [a, b] : edges) cut += (((mask >> a) & 1) != ((mask >> b) & 1)) ? 1.0 : 0.0;
        const int k = __builtin_popcount(mask);
        const double ratio = cut / (k * (n - k));
        if (ratio < best - 1e-12) {
            best = ratio;
            side.clear();
            for (int i = 0; i < n; ++i) {
                if ((mask >> i) & 1) side.insert(i);
            }
        }
    }
    return side;
}

CellConnectivity unit_cells(int n, const std::vector<std::pair<int, int>>& edges) {
    CellConnectivity c;
    for (int i = 0; i < n; ++i) {
        c.names.push_back("c" + std::to_string(i));
        c.areas.push_back(1.0);
    }
    for (auto [a, b] : edges) {
        CellNet net;
        CellTerminal ta, tb;
        ta.cell = a;
        tb.cell = b;
        net.pins = {ta, tb};
        c.nets.push_back(net);
    }
    return c;
}

std::set<int> members_with(const ClusteringResult& r, int cluster) {
    std::set<int> out;
    for (std::size_t i = 0; i < r.cell_to_cluster.size(); ++i) {
        if (r.cell_to_cluster[i] == cluster) out.insert(static_cast<int>(i));
    }
    return out;
}

TEST(Clustering, TwoCliquesSeparate) {
    std::vector<std::pair<int, int>> edges;
    for (int base : {0, 5}) {
        for (int a = 0; a < 5; ++a) {
            for (int b = a + 1; b < 5; ++b) edges.emplace_back(base + a, base + b);
        }
    }
    edges.emplace_back(4, 5);
    const ClusteringResult r = cluster_standard_cells(unit_cells(10, edges), 2);
    ASSERT_EQ(r.clusters.size(), 2u);
    const std::set<int> other = best_ratio_side(10, edges);
    EXPECT_EQ(members_with(r, r.cell_to_cluster[5]), other);
    EXPECT_EQ(other, (std::set<int>{5, 6, 7, 8, 9}));
}

TEST(Clustering, IdentityWhenKEqualsCells) {
    const ClusteringResult r = cluster_standard_cells(unit_cells(4, {{0, 1}, {1, 2}, {2, 3}}), 4);
    EXPECT_EQ(r.clusters.size(), 4u);
    EXPECT_EQ(std::set<int>(r.cell_to_cluster.begin(), r.cell_to_cluster.end()).size(), 4u);
}

TEST(Clustering, ChainSplitsInTheMiddle) {
    const std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 3}};
    const ClusteringResult r = cluster_standard_cells(unit_cells(4, edges), 2);
    EXPECT_EQ(members_with(r, r.cell_to_cluster[3]), best_ratio_side(4, edges));
    EXPECT_EQ(members_with(r, r.cell_to_cluster[0]), (std::set<int>{0, 1}));
}

TEST(Clustering, KTooLargeThrows) {
    EXPECT_THROW(cluster_standard_cells(unit_cells(3, {{0, 1}}), 4), KTooLarge);
}

TEST(Clustering, NetsRewiredAndDeduplicated) {
    CellConnectivity c = unit_cells(4, {{0, 1}, {2, 3}, {1, 2}});
    CellNet ext;
    CellTerminal t0, t1, port;
    t0.cell = 0;
    t1.cell = 1;
    port.external = {PinOwner::Port, "p", ""};
    ext.pins = {t0, t1, port};
    c.nets.push_back(ext);
    const ClusteringResult r = cluster_standard_cells(c, 2, 10, 20);
    for (const Net& n : r.nets) {
        EXPECT_GE(n.pins.size(), 2u);
        std::set<std::pair<int, std::string>> seen;
        for (const PinRef& p : n.pins) EXPECT_TRUE(seen.insert({static_cast<int>(p.kind), p.owner}).second);
    }
    for (const StdCellCluster& k : r.clusters) EXPECT_GE(k.id, 10);
}

}  // namespace
}  // namespace macroplace
