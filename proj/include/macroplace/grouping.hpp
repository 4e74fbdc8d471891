#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "macroplace/netlist.hpp"

namespace macroplace {

struct NameTreeNode {
    std::string token;
    std::vector<int> children;  // sorted by token
    std::vector<int> macros;    // indices into NameTree::names of names ending here
};

// Tree of common sub-strings of macro names. Node 0 is a virtual root with an
// empty token; every name is one path from the root.
struct NameTree {
    std::vector<std::string> names;
    std::vector<NameTreeNode> nodes;
    char separator = '/';

    // First node reached from the virtual root that is not a single-child
    // link into an internal node, i.e. the deepest common prefix.
    int effective_root() const;
    std::string path_of(int node) const;
    int depth_of(int node) const;
    std::vector<int> macros_beneath(int node) const;

private:
    friend NameTree build_name_tree(std::span<const std::string> names);
    std::vector<int> parent_;
};

// Splits on '/' when any name contains one, otherwise on '_'.
// Throws EmptyInput for an empty name list.
NameTree build_name_tree(std::span<const std::string> names);

struct Group {
    int id = 0;
    std::string label;
    std::vector<std::string> macro_names;  // sorted
};

// Partition of macros into hierarchy groups. Ids are ordered by each group's
// lexicographically first macro name.
struct GroupAssignment {
    std::vector<Group> groups;

    int count() const { return static_cast<int>(groups.size()); }
    std::optional<int> group_of(const std::string& macro_name) const;
};

GroupAssignment make_assignment(std::vector<std::pair<std::string, std::vector<std::string>>> labelled);

GroupAssignment extract_groups(const NameTree& tree);

// Name-tree grouping over the netlist's macros.
GroupAssignment group_macros(const Netlist& netlist);

// Human-guided groups: {"group label": ["macro", ...], ...}. Throws
// ValidationError unless the lists partition the netlist's macros.
GroupAssignment groups_from_json(const nlohmann::ordered_json& doc, const Netlist& netlist);
nlohmann::ordered_json groups_to_json(const GroupAssignment& groups);

// Writes group ids into the macros.
void apply_groups(Netlist& netlist, const GroupAssignment& groups);

// Standard-cell connectivity before clustering. A terminal is either a cell
// index or an external pin (macro or port).
struct CellTerminal {
    int cell = -1;
    PinRef external;
};

struct CellNet {
    double weight = 1.0;
    std::vector<CellTerminal> pins;
};

struct CellConnectivity {
    std::vector<std::string> names;
    std::vector<double> areas;
    std::vector<CellNet> nets;
};

struct ClusteringResult {
    std::vector<StdCellCluster> clusters;
    std::vector<int> cell_to_cluster;  // cluster id per cell
    std::vector<Net> nets;             // rewired, deduplicated, nets with <2 pins dropped
};

// Greedy heavy-edge coarsening down to k clusters. The merge rating of two
// clusters is their connection weight divided by the product of their areas.
// Throws KTooLarge when k exceeds the cell count.
ClusteringResult cluster_standard_cells(const CellConnectivity& cells, int k, int first_cluster_id = 0,
                                        int first_net_id = 0);

CellConnectivity cells_from_json(const nlohmann::json& doc);

// Appends clusters and rewired nets; returns the merged netlist after validation.
Netlist apply_clustering(Netlist netlist, const ClusteringResult& clustering);

}  // namespace macroplace
