#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "macroplace/geometry.hpp"

namespace macroplace {

// Nets wider than this are rejected at load; clique expansion downstream
// grows quadratically with fan-out.
inline constexpr int kMaxNetPins = 64;

struct MacroPin {
    std::string name;
    Point offset;  // microns from the shape origin (bounding-box min corner)
    Side side = Side::N;

    bool operator==(const MacroPin&) const = default;
};

struct Macro {
    std::string name;  // hierarchical path, e.g. "top/cpu/ram0"
    RectilinearShape shape = RectilinearShape::rectangle(1.0, 1.0);  // R0 frame, bbox min at origin
    std::vector<MacroPin> pins;
    std::optional<int> group_id;

    double width() const { return shape.bbox().width(); }
    double height() const { return shape.bbox().height(); }
    bool operator==(const Macro&) const = default;
};

struct StdCellCluster {
    int id = 0;
    double area = 0.0;
    int pin_count = 0;

    bool operator==(const StdCellCluster&) const = default;
};

// Zero-area IO terminal on the canvas boundary.
struct Port {
    std::string name;
    Point position;

    bool operator==(const Port&) const = default;
};

enum class PinOwner : std::uint8_t { Macro, Cluster, Port };

// `owner` is the macro name, the decimal cluster id, or the port name.
// `pin` is only meaningful for macro pins.
struct PinRef {
    PinOwner kind = PinOwner::Port;
    std::string owner;
    std::string pin;

    bool operator==(const PinRef&) const = default;
};

struct Net {
    int id = 0;
    double weight = 1.0;
    std::vector<PinRef> pins;

    bool operator==(const Net&) const = default;
};

struct Netlist {
    std::string name;
    RectilinearShape canvas = RectilinearShape::rectangle(1.0, 1.0);
    std::vector<Macro> macros;
    std::vector<StdCellCluster> clusters;
    std::vector<Port> ports;
    std::vector<Net> nets;

    bool operator==(const Netlist&) const = default;
};

// Every violated invariant, in a stable order; empty iff the netlist is valid.
std::vector<std::string> validate_netlist(const Netlist& netlist);

// Throws ParseError for malformed documents and ValidationError naming the
// first violated invariant.
Netlist netlist_from_json(const nlohmann::json& doc);
nlohmann::json netlist_to_json(const Netlist& netlist);

Netlist load_netlist(const std::filesystem::path& path);
void save_netlist(const Netlist& netlist, const std::filesystem::path& path);

struct NetlistStats {
    int macros = 0;
    int clusters = 0;
    int ports = 0;
    int nets = 0;
};

NetlistStats stats(const Netlist& netlist);

}  // namespace macroplace
