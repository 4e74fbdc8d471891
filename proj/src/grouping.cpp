#include "macroplace/grouping.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <set>

namespace macroplace {

namespace {

std::vector<std::string> tokenize(const std::string& name, char sep) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : name) {
        if (ch == sep) {
            if (!cur.empty()) tokens.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    if (tokens.empty()) tokens.push_back(name);
    return tokens;
}

}  // namespace

NameTree build_name_tree(std::span<const std::string> names) {
    if (names.empty()) throw EmptyInput("cannot build a name tree from zero macro names");
    NameTree tree;
    tree.names.assign(names.begin(), names.end());
    const bool hierarchical =
        std::any_of(names.begin(), names.end(), [](const std::string& n) { return n.find('/') != std::string::npos; });
    tree.separator = hierarchical ? '/' : '_';

    // Build with ordered child maps, then flatten into sorted child lists.
    std::vector<std::map<std::string, int>> kids(1);
    tree.nodes.push_back({});
    tree.parent_.push_back(-1);
    for (int i = 0; i < static_cast<int>(names.size()); ++i) {
        int node = 0;
        for (const std::string& tok : tokenize(names[i], tree.separator)) {
            auto it = kids[node].find(tok);
            if (it == kids[node].end()) {
                const int id = static_cast<int>(tree.nodes.size());
                tree.nodes.push_back({tok, {}, {}});
                tree.parent_.push_back(node);
                kids.emplace_back();
                kids[node].emplace(tok, id);
                node = id;
            } else {
                node = it->second;
            }
        }
        tree.nodes[node].macros.push_back(i);
    }
    for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
        for (const auto& [tok, id] : kids[n]) tree.nodes[n].children.push_back(id);
    }
    return tree;
}

int NameTree::effective_root() const {
    int node = 0;
    while (nodes[node].children.size() == 1 && nodes[node].macros.empty()) {
        const int child = nodes[node].children.front();
        if (nodes[child].children.empty()) break;
        node = child;
    }
    return node;
}

std::string NameTree::path_of(int node) const {
    std::vector<std::string> parts;
    for (int n = node; n > 0; n = parent_[n]) parts.push_back(nodes[n].token);
    std::string out;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
        if (!out.empty()) out.push_back(separator);
        out += *it;
    }
    return out;
}

int NameTree::depth_of(int node) const {
    int d = 0;
    for (int n = node; n > 0; n = parent_[n]) ++d;
    return d;
}

std::vector<int> NameTree::macros_beneath(int node) const {
    std::vector<int> out;
    std::vector<int> stack{node};
    while (!stack.empty()) {
        const int n = stack.back();
        stack.pop_back();
        out.insert(out.end(), nodes[n].macros.begin(), nodes[n].macros.end());
        for (int c : nodes[n].children) stack.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<int> GroupAssignment::group_of(const std::string& macro_name) const {
    for (const Group& g : groups) {
        if (std::binary_search(g.macro_names.begin(), g.macro_names.end(), macro_name)) return g.id;
    }
    return std::nullopt;
}

GroupAssignment make_assignment(std::vector<std::pair<std::string, std::vector<std::string>>> labelled) {
    GroupAssignment out;
    for (auto& [label, names] : labelled) {
        if (names.empty()) continue;
        std::sort(names.begin(), names.end());
        out.groups.push_back({0, std::move(label), std::move(names)});
    }
    std::sort(out.groups.begin(), out.groups.end(),
              [](const Group& a, const Group& b) { return a.macro_names.front() < b.macro_names.front(); });
    for (int i = 0; i < out.count(); ++i) out.groups[i].id = i;
    return out;
}

// Level-by-level search below the effective root: a node with more than one
// child becomes a group holding every macro beneath it; a single-child node
// defers to its child; a chain that ends in a leaf yields a singleton group.
// Leaves hanging directly off the effective root match no deeper level and are
// collected into one catch-all group.
GroupAssignment extract_groups(const NameTree& tree) {
    std::vector<std::pair<std::string, std::vector<std::string>>> found;
    auto names_of = [&](const std::vector<int>& idx) {
        std::vector<std::string> out;
        for (int i : idx) out.push_back(tree.names[i]);
        return out;
    };

    const int root = tree.effective_root();
    std::vector<int> loose = tree.nodes[root].macros;
    std::deque<int> frontier;
    for (int c : tree.nodes[root].children) {
        if (tree.nodes[c].children.empty()) {
            loose.insert(loose.end(), tree.nodes[c].macros.begin(), tree.nodes[c].macros.end());
        } else {
            frontier.push_back(c);
        }
    }
    while (!frontier.empty()) {
        const int node = frontier.front();
        frontier.pop_front();
        const auto& n = tree.nodes[node];
        if (n.children.size() > 1 || n.children.empty() || !n.macros.empty()) {
            found.emplace_back(tree.path_of(node), names_of(tree.macros_beneath(node)));
        } else {
            frontier.push_back(n.children.front());
        }
    }
    if (!loose.empty()) {
        std::string label = tree.path_of(root);
        found.emplace_back(label.empty() ? std::string("*") : label + tree.separator + "*", names_of(loose));
    }
    return make_assignment(std::move(found));
}

GroupAssignment group_macros(const Netlist& netlist) {
    std::vector<std::string> names;
    for (const Macro& m : netlist.macros) names.push_back(m.name);
    if (names.empty()) return {};
    return extract_groups(build_name_tree(names));
}

GroupAssignment groups_from_json(const nlohmann::ordered_json& doc, const Netlist& netlist) {
    if (!doc.is_object()) throw ValidationError("groups file must map group names to macro name lists");
    std::set<std::string> known;
    for (const Macro& m : netlist.macros) known.insert(m.name);
    std::set<std::string> seen;
    std::vector<std::pair<std::string, std::vector<std::string>>> labelled;
    for (const auto& [label, list] : doc.items()) {
        if (!list.is_array()) throw ValidationError("group '" + label + "': expected a list of macro names");
        std::vector<std::string> names;
        for (const auto& v : list) {
            if (!v.is_string()) throw ValidationError("group '" + label + "': macro names must be strings");
            const std::string name = v.get<std::string>();
            if (!known.count(name)) throw ValidationError("group '" + label + "': unknown macro '" + name + "'");
            if (!seen.insert(name).second) throw ValidationError("macro '" + name + "' appears in more than one group");
            names.push_back(name);
        }
        if (names.empty()) throw ValidationError("group '" + label + "' is empty");
        labelled.emplace_back(label, std::move(names));
    }
    for (const std::string& name : known) {
        if (!seen.count(name)) throw ValidationError("macro '" + name + "' is not assigned to any group");
    }
    return make_assignment(std::move(labelled));
}

nlohmann::ordered_json groups_to_json(const GroupAssignment& groups) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const Group& g : groups.groups) doc[g.label] = g.macro_names;
    return doc;
}

void apply_groups(Netlist& netlist, const GroupAssignment& groups) {
    for (Macro& m : netlist.macros) m.group_id = groups.group_of(m.name);
}

ClusteringResult cluster_standard_cells(const CellConnectivity& cells, int k, int first_cluster_id,
                                        int first_net_id) {
    const int n = static_cast<int>(cells.areas.size());
    if (k < 1) throw KTooLarge("cluster count must be at least 1");
    if (k > n) throw KTooLarge("requested " + std::to_string(k) + " clusters from " + std::to_string(n) + " cells");

    // Clique-expanded connection weights between cells.
    std::vector<std::map<int, double>> adj(n);
    for (const CellNet& net : cells.nets) {
        std::vector<int> members;
        std::size_t distinct_external = 0;
        std::vector<PinRef> externals;
        for (const CellTerminal& t : net.pins) {
            if (t.cell >= 0) {
                if (std::find(members.begin(), members.end(), t.cell) == members.end()) members.push_back(t.cell);
            } else if (std::find(externals.begin(), externals.end(), t.external) == externals.end()) {
                externals.push_back(t.external);
                ++distinct_external;
            }
        }
        const std::size_t p = members.size() + distinct_external;
        if (p < 2) continue;
        const double w = net.weight / static_cast<double>(p - 1);
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                adj[members[i]][members[j]] += w;
                adj[members[j]][members[i]] += w;
            }
        }
    }

    std::vector<int> leader(n);
    std::vector<double> area(cells.areas.begin(), cells.areas.end());
    std::vector<bool> alive(n, true);
    for (int i = 0; i < n; ++i) leader[i] = i;
    int remaining = n;

    while (remaining > k) {
        int best_a = -1, best_b = -1;
        double best = 0.0;
        for (int a = 0; a < n; ++a) {
            if (!alive[a]) continue;
            for (const auto& [b, w] : adj[a]) {
                if (b <= a) continue;
                const double rating = w / (area[a] * area[b]);
                if (rating > best) {
                    best = rating;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (best_a < 0) {
            // No connections left: merge the two smallest clusters.
            std::vector<int> live;
            for (int i = 0; i < n; ++i) {
                if (alive[i]) live.push_back(i);
            }
            std::stable_sort(live.begin(), live.end(), [&](int x, int y) { return area[x] < area[y]; });
            best_a = std::min(live[0], live[1]);
            best_b = std::max(live[0], live[1]);
        }
        for (const auto& [c, w] : adj[best_b]) {
            if (c == best_a) continue;
            adj[best_a][c] += w;
            adj[c].erase(best_b);
            adj[c][best_a] += w;
        }
        adj[best_a].erase(best_b);
        adj[best_b].clear();
        alive[best_b] = false;
        area[best_a] += area[best_b];
        for (int& l : leader) {
            if (l == best_b) l = best_a;
        }
        --remaining;
    }

    ClusteringResult out;
    std::map<int, int> id_of_leader;
    for (int i = 0; i < n; ++i) {
        if (!id_of_leader.count(leader[i])) {
            const int id = first_cluster_id + static_cast<int>(id_of_leader.size());
            id_of_leader.emplace(leader[i], id);
            out.clusters.push_back({id, 0.0, 0});
        }
    }
    out.cell_to_cluster.resize(n);
    for (int i = 0; i < n; ++i) {
        const int id = id_of_leader.at(leader[i]);
        out.cell_to_cluster[i] = id;
        out.clusters[id - first_cluster_id].area += cells.areas[i];
    }

    int net_id = first_net_id;
    for (const CellNet& net : cells.nets) {
        Net rewired;
        rewired.weight = net.weight;
        for (const CellTerminal& t : net.pins) {
            PinRef ref = t.external;
            if (t.cell >= 0) {
                const int id = out.cell_to_cluster[t.cell];
                out.clusters[id - first_cluster_id].pin_count += 1;
                ref = {PinOwner::Cluster, std::to_string(id), ""};
            }
            if (std::find(rewired.pins.begin(), rewired.pins.end(), ref) == rewired.pins.end()) {
                rewired.pins.push_back(std::move(ref));
            }
        }
        if (rewired.pins.size() < 2) continue;
        rewired.id = net_id++;
        out.nets.push_back(std::move(rewired));
    }
    return out;
}

CellConnectivity cells_from_json(const nlohmann::json& doc) {
    CellConnectivity cc;
    std::map<std::string, int> index;
    try {
        for (const auto& jc : doc.at("cells")) {
            index.emplace(jc.at("name").get<std::string>(), static_cast<int>(cc.names.size()));
            cc.names.push_back(jc.at("name").get<std::string>());
            cc.areas.push_back(jc.value("area", 1.0));
        }
        for (const auto& jn : doc.at("nets")) {
            CellNet net;
            net.weight = jn.value("weight", 1.0);
            for (const auto& jp : jn.at("pins")) {
                CellTerminal t;
                if (jp.contains("cell")) {
                    const auto name = jp.at("cell").get<std::string>();
                    auto it = index.find(name);
                    if (it == index.end()) throw ValidationError("cell net references unknown cell '" + name + "'");
                    t.cell = it->second;
                } else if (jp.contains("macro")) {
                    t.external = {PinOwner::Macro, jp.at("macro").get<std::string>(), jp.at("pin").get<std::string>()};
                } else {
                    t.external = {PinOwner::Port, jp.at("port").get<std::string>(), ""};
                }
                net.pins.push_back(std::move(t));
            }
            cc.nets.push_back(std::move(net));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed cell connectivity: ") + e.what());
    }
    return cc;
}

Netlist apply_clustering(Netlist netlist, const ClusteringResult& clustering) {
    netlist.clusters.insert(netlist.clusters.end(), clustering.clusters.begin(), clustering.clusters.end());
    netlist.nets.insert(netlist.nets.end(), clustering.nets.begin(), clustering.nets.end());
    const auto violations = validate_netlist(netlist);
    if (!violations.empty()) throw ValidationError(violations.front());
    return netlist;
}

}  // namespace macroplace
