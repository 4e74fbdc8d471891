#include "macroplace/design.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace macroplace {

Design::Design(Netlist netlist, GroupAssignment groups, GridSpec grid)
    : netlist_(std::move(netlist)), groups_(std::move(groups)), grid_(std::move(grid)) {
    const int n = macro_count();
    std::map<std::string, int> by_name;
    for (int i = 0; i < n; ++i) by_name[netlist_.macros[i].name] = i;

    group_index_.assign(n, -1);
    for (const Group& g : groups_.groups) {
        for (const std::string& name : g.macro_names) {
            auto it = by_name.find(name);
            if (it == by_name.end()) throw ValidationError("group '" + g.label + "' names unknown macro '" + name + "'");
            if (group_index_[it->second] >= 0) throw ValidationError("macro '" + name + "' is in two groups");
            group_index_[it->second] = g.id;
        }
    }
    for (int i = 0; i < n; ++i) {
        if (group_index_[i] < 0) throw ValidationError("macro '" + netlist_.macros[i].name + "' has no group");
        netlist_.macros[i].group_id = group_index_[i];
    }

    oriented_.resize(n);
    for (int i = 0; i < n; ++i) {
        const Macro& m = netlist_.macros[i];
        for (Orientation o : kAllOrientations) {
            OrientedMacro& om = oriented_[i][index_of(o)];
            om.shape = apply_orientation(m.shape, o);
            for (const MacroPin& p : m.pins) {
                om.pin_offsets.push_back(orient_point(p.offset, m.width(), m.height(), o));
                om.pin_sides.push_back(transform_side(p.side, o));
            }
            om.footprint = make_footprint(om.shape, grid_.cell_w(), grid_.cell_h());
        }
    }

    std::map<int, int> cluster_by_id;
    for (int i = 0; i < cluster_count(); ++i) cluster_by_id[netlist_.clusters[i].id] = i;
    std::map<std::string, int> port_by_name;
    for (int i = 0; i < port_count(); ++i) port_by_name[netlist_.ports[i].name] = i;
    for (const Net& net : netlist_.nets) {
        ResolvedNet rn{net.id, net.weight, {}};
        for (const PinRef& ref : net.pins) {
            Endpoint e;
            e.kind = ref.kind;
            switch (ref.kind) {
                case PinOwner::Macro: {
                    e.index = by_name.at(ref.owner);
                    const auto& pins = netlist_.macros[e.index].pins;
                    e.pin = static_cast<int>(std::find_if(pins.begin(), pins.end(),
                                                          [&](const MacroPin& p) { return p.name == ref.pin; }) -
                                             pins.begin());
                    if (e.pin == static_cast<int>(pins.size())) {
                        throw ValidationError("macro '" + ref.owner + "' has no pin '" + ref.pin + "'");
                    }
                    break;
                }
                case PinOwner::Cluster: e.index = cluster_by_id.at(std::stoi(ref.owner)); break;
                case PinOwner::Port: e.index = port_by_name.at(ref.owner); break;
            }
            rn.pins.push_back(e);
        }
        nets_.push_back(std::move(rn));
    }

    std::vector<double> group_area(groups_.count(), 0.0);
    for (int i = 0; i < n; ++i) group_area[group_index_[i]] += netlist_.macros[i].shape.area();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
        const int ga = group_index_[a], gb = group_index_[b];
        if (ga != gb) {
            if (group_area[ga] != group_area[gb]) return group_area[ga] > group_area[gb];
            return ga < gb;
        }
        return netlist_.macros[a].shape.area() > netlist_.macros[b].shape.area();
    });
}

Design Design::build(Netlist netlist, std::optional<GroupAssignment> groups, std::optional<GridSpec> grid) {
    if (!groups) groups = netlist.macros.empty() ? GroupAssignment{} : group_macros(netlist);
    if (!grid) grid = select_grid_dims(netlist);
    return Design(std::move(netlist), std::move(*groups), std::move(*grid));
}

std::optional<int> Design::macro_index(const std::string& name) const {
    for (int i = 0; i < macro_count(); ++i) {
        if (netlist_.macros[i].name == name) return i;
    }
    return std::nullopt;
}

Placement Placement::empty(const Design& design) {
    Placement p;
    p.macros.resize(design.macro_count());
    p.clusters.resize(design.cluster_count());
    return p;
}

MacroPlacement place_at_cell(const Design& design, CellIndex anchor, Orientation o) {
    return {true, anchor, design.grid().cell_origin(anchor), o};
}

std::vector<Rect> macro_rects(const Design& design, const Placement& placement, int macro) {
    const MacroPlacement& mp = placement.macros[macro];
    std::vector<Rect> out;
    for (const Rect& r : design.oriented(macro, mp.orientation).shape.rects()) {
        out.push_back(r.translated(mp.origin.x, mp.origin.y));
    }
    return out;
}

Rect macro_bbox(const Design& design, const Placement& placement, int macro) {
    const MacroPlacement& mp = placement.macros[macro];
    return design.oriented(macro, mp.orientation).shape.bbox().translated(mp.origin.x, mp.origin.y);
}

Point endpoint_position(const Design& design, const Placement& placement, const Endpoint& e) {
    switch (e.kind) {
        case PinOwner::Macro: {
            const MacroPlacement& mp = placement.macros[e.index];
            if (!mp.placed) throw UnplacedEndpoint("macro '" + design.netlist().macros[e.index].name + "' is not placed");
            const Point off = design.oriented(e.index, mp.orientation).pin_offsets[e.pin];
            return {mp.origin.x + off.x, mp.origin.y + off.y};
        }
        case PinOwner::Cluster:
            if (!placement.clusters_placed) {
                throw UnplacedEndpoint("cluster " + std::to_string(design.netlist().clusters[e.index].id) +
                                       " is not placed");
            }
            return placement.clusters[e.index];
        case PinOwner::Port: return design.netlist().ports[e.index].position;
    }
    return {};
}

}  // namespace macroplace
