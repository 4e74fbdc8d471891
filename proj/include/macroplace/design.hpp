#pragma once

#include <array>
#include <optional>
#include <vector>

#include "macroplace/canvas.hpp"
#include "macroplace/grouping.hpp"
#include "macroplace/netlist.hpp"

namespace macroplace {

// A macro's geometry under one orientation, in a frame whose bounding box
// starts at the origin.
struct OrientedMacro {
    RectilinearShape shape = RectilinearShape::rectangle(1.0, 1.0);
    std::vector<Point> pin_offsets;
    std::vector<Side> pin_sides;
    Footprint footprint;
};

struct Endpoint {
    PinOwner kind = PinOwner::Port;
    int index = 0;  // macro, cluster, or port index
    int pin = -1;   // macro pin index
};

struct ResolvedNet {
    int id = 0;
    double weight = 1.0;
    std::vector<Endpoint> pins;
};

// Netlist, grouping, and grid bundled with everything derived from them that
// stays fixed across episodes.
class Design {
public:
    Design(Netlist netlist, GroupAssignment groups, GridSpec grid);

    // Name-tree groups unless given; grid from the macro sizes unless given.
    static Design build(Netlist netlist, std::optional<GroupAssignment> groups = std::nullopt,
                        std::optional<GridSpec> grid = std::nullopt);

    const Netlist& netlist() const { return netlist_; }
    const GroupAssignment& groups() const { return groups_; }
    const GridSpec& grid() const { return grid_; }

    int macro_count() const { return static_cast<int>(netlist_.macros.size()); }
    int cluster_count() const { return static_cast<int>(netlist_.clusters.size()); }
    int port_count() const { return static_cast<int>(netlist_.ports.size()); }
    int group_count() const { return groups_.count(); }

    int group_of(int macro) const { return group_index_[macro]; }
    const OrientedMacro& oriented(int macro, Orientation o) const { return oriented_[macro][index_of(o)]; }
    const std::vector<ResolvedNet>& nets() const { return nets_; }
    // Groups by total area descending, then macros by area descending.
    const std::vector<int>& placement_order() const { return order_; }
    std::optional<int> macro_index(const std::string& name) const;

private:
    Netlist netlist_;
    GroupAssignment groups_;
    GridSpec grid_;
    std::vector<int> group_index_;
    std::vector<std::array<OrientedMacro, 4>> oriented_;
    std::vector<ResolvedNet> nets_;
    std::vector<int> order_;
};

struct MacroPlacement {
    bool placed = false;
    CellIndex anchor;  // coarse cell of the origin; informational once refined
    Point origin;      // microns, bounding-box min corner of the oriented shape
    Orientation orientation = Orientation::R0;
};

struct Placement {
    std::vector<MacroPlacement> macros;
    std::vector<Point> clusters;  // centers in microns
    bool clusters_placed = false;

    static Placement empty(const Design& design);
};

// Anchored at a coarse cell with the cell's min corner as origin.
MacroPlacement place_at_cell(const Design& design, CellIndex anchor, Orientation o);

// Oriented shape translated to its placed origin.
std::vector<Rect> macro_rects(const Design& design, const Placement& placement, int macro);
Rect macro_bbox(const Design& design, const Placement& placement, int macro);

// Throws UnplacedEndpoint when the owning macro or cluster is not placed.
Point endpoint_position(const Design& design, const Placement& placement, const Endpoint& endpoint);

}  // namespace macroplace
