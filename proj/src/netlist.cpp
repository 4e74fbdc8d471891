#include "macroplace/netlist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace macroplace {

using nlohmann::json;

namespace {

std::string in_quotes(const std::string& s) { return "'" + s + "'"; }

Point point_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ParseError("expected [x, y] number pair, got " + j.dump());
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json point_to_json(Point p) { return json::array({p.x, p.y}); }

std::vector<Point> corners_from_json(const json& j) {
    if (!j.is_array()) throw ParseError("expected corner list, got " + j.dump());
    std::vector<Point> pts;
    for (const json& p : j) pts.push_back(point_from_json(p));
    return pts;
}

json corners_to_json(const RectilinearShape& shape) {
    json arr = json::array();
    for (const Point& p : shape.corners()) arr.push_back(point_to_json(p));
    return arr;
}

RectilinearShape shape_from_json(const json& j, const std::string& what) {
    auto result = validate_rectilinear(corners_from_json(j));
    if (auto* v = std::get_if<ShapeViolation>(&result)) {
        throw ValidationError(what + ": " + std::string(to_string(*v)));
    }
    return std::get<RectilinearShape>(std::move(result));
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ParseError(where + ": missing field '" + key + "'");
    }
    return obj.at(key);
}

template <typename T>
T require_as(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ParseError(where + ": field '" + key + "' has wrong type");
    }
}

PinRef pinref_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": pin reference must be an object");
    PinRef ref;
    if (j.contains("macro")) {
        ref.kind = PinOwner::Macro;
        ref.owner = require_as<std::string>(j, "macro", where);
        ref.pin = require_as<std::string>(j, "pin", where);
    } else if (j.contains("cluster")) {
        ref.kind = PinOwner::Cluster;
        ref.owner = std::to_string(require_as<int>(j, "cluster", where));
    } else if (j.contains("port")) {
        ref.kind = PinOwner::Port;
        ref.owner = require_as<std::string>(j, "port", where);
    } else {
        throw ParseError(where + ": pin reference needs one of 'macro', 'cluster', 'port'");
    }
    return ref;
}

json pinref_to_json(const PinRef& ref) {
    switch (ref.kind) {
        case PinOwner::Macro: return {{"macro", ref.owner}, {"pin", ref.pin}};
        case PinOwner::Cluster: return {{"cluster", std::stoi(ref.owner)}};
        case PinOwner::Port: return {{"port", ref.owner}};
    }
    return {};
}

}  // namespace

std::vector<std::string> validate_netlist(const Netlist& n) {
    std::vector<std::string> out;

    std::map<std::string, const Macro*> macros;
    for (const Macro& m : n.macros) {
        if (m.name.empty()) out.push_back("macro with empty name");
        if (!macros.emplace(m.name, &m).second) out.push_back("duplicate macro name " + in_quotes(m.name));
        if (m.shape.area() <= 0.0) out.push_back("macro " + in_quotes(m.name) + ": zero area");
        if (m.group_id && *m.group_id < 0) out.push_back("macro " + in_quotes(m.name) + ": negative group id");
        std::set<std::string> pin_names;
        for (const MacroPin& p : m.pins) {
            const std::string where = "macro " + in_quotes(m.name) + " pin " + in_quotes(p.name);
            if (!pin_names.insert(p.name).second) out.push_back(where + ": duplicate pin name");
            const auto sides = m.shape.sides_at(p.offset);
            if (sides.empty()) {
                out.push_back(where + ": offset not on shape boundary");
            } else if (std::find(sides.begin(), sides.end(), p.side) == sides.end()) {
                out.push_back(where + ": side " + std::string(to_string(p.side)) + " inconsistent with boundary edge");
            }
        }
    }

    std::set<int> cluster_ids;
    for (const StdCellCluster& c : n.clusters) {
        const std::string where = "cluster " + std::to_string(c.id);
        if (!cluster_ids.insert(c.id).second) out.push_back("duplicate cluster id " + std::to_string(c.id));
        if (!(c.area > 0.0) || !std::isfinite(c.area)) out.push_back(where + ": area must be positive");
        if (c.pin_count < 0) out.push_back(where + ": negative pin count");
    }

    std::set<std::string> port_names;
    for (const Port& p : n.ports) {
        if (!port_names.insert(p.name).second) out.push_back("duplicate port name " + in_quotes(p.name));
        if (!n.canvas.on_boundary(p.position)) out.push_back("port " + in_quotes(p.name) + ": not on canvas boundary");
    }

    std::set<int> net_ids;
    for (const Net& net : n.nets) {
        const std::string where = "net " + std::to_string(net.id);
        if (!net_ids.insert(net.id).second) out.push_back("duplicate net id " + std::to_string(net.id));
        if (!(net.weight > 0.0) || !std::isfinite(net.weight)) out.push_back(where + ": weight must be positive");
        if (net.pins.size() < 2) out.push_back(where + ": fewer than 2 pins");
        if (static_cast<int>(net.pins.size()) > kMaxNetPins) {
            out.push_back(where + ": more than " + std::to_string(kMaxNetPins) + " pins");
        }
        for (const PinRef& ref : net.pins) {
            switch (ref.kind) {
                case PinOwner::Macro: {
                    auto it = macros.find(ref.owner);
                    if (it == macros.end()) {
                        out.push_back(where + ": unknown macro " + in_quotes(ref.owner));
                    } else {
                        const auto& pins = it->second->pins;
                        const bool found = std::any_of(pins.begin(), pins.end(),
                                                       [&](const MacroPin& p) { return p.name == ref.pin; });
                        if (!found) out.push_back(where + ": macro " + in_quotes(ref.owner) + " has no pin " + in_quotes(ref.pin));
                    }
                    break;
                }
                case PinOwner::Cluster: {
                    int id = -1;
                    try {
                        id = std::stoi(ref.owner);
                    } catch (const std::exception&) {
                    }
                    if (!cluster_ids.count(id)) out.push_back(where + ": unknown cluster " + ref.owner);
                    break;
                }
                case PinOwner::Port:
                    if (!port_names.count(ref.owner)) out.push_back(where + ": unknown port " + in_quotes(ref.owner));
                    break;
            }
        }
    }
    return out;
}

namespace {

Netlist parse_netlist(const json& doc) {
    if (!doc.is_object()) throw ParseError("netlist document must be a JSON object");
    if (doc.contains("units") && doc.at("units") != "micron") {
        throw ParseError("unsupported units " + doc.at("units").dump() + " (expected \"micron\")");
    }
    Netlist n;
    n.name = doc.value("name", std::string("design"));
    n.canvas = shape_from_json(require(doc, "canvas", "netlist"), "canvas");

    for (const json& jm : doc.value("macros", json::array())) {
        Macro m;
        m.name = require_as<std::string>(jm, "name", "macro");
        const std::string where = "macro " + in_quotes(m.name);
        const RectilinearShape raw = shape_from_json(require(jm, "shape", where), where);
        const Point shift{-raw.bbox().xlo, -raw.bbox().ylo};
        m.shape = raw.at_origin();
        for (const json& jp : jm.value("pins", json::array())) {
            MacroPin p;
            p.name = require_as<std::string>(jp, "name", where + " pin");
            const Point off = point_from_json(require(jp, "offset", where + " pin"));
            p.offset = {off.x + shift.x, off.y + shift.y};
            const auto side = parse_side(require_as<std::string>(jp, "side", where + " pin"));
            if (!side) throw ParseError(where + " pin " + in_quotes(p.name) + ": side must be N, E, S or W");
            p.side = *side;
            m.pins.push_back(std::move(p));
        }
        if (jm.contains("group")) m.group_id = require_as<int>(jm, "group", where);
        n.macros.push_back(std::move(m));
    }

    for (const json& jc : doc.value("clusters", json::array())) {
        StdCellCluster c;
        c.id = require_as<int>(jc, "id", "cluster");
        c.area = require_as<double>(jc, "area", "cluster " + std::to_string(c.id));
        c.pin_count = jc.value("pin_count", 0);
        n.clusters.push_back(c);
    }

    for (const json& jp : doc.value("ports", json::array())) {
        Port p;
        p.name = require_as<std::string>(jp, "name", "port");
        p.position = point_from_json(require(jp, "position", "port " + in_quotes(p.name)));
        n.ports.push_back(std::move(p));
    }

    for (const json& jn : doc.value("nets", json::array())) {
        Net net;
        net.id = require_as<int>(jn, "id", "net");
        const std::string where = "net " + std::to_string(net.id);
        if (jn.contains("weight")) net.weight = require_as<double>(jn, "weight", where);
        const json& pins = require(jn, "pins", where);
        if (!pins.is_array()) throw ParseError(where + ": 'pins' must be an array");
        for (const json& jr : pins) net.pins.push_back(pinref_from_json(jr, where));
        n.nets.push_back(std::move(net));
    }

    return n;
}

}  // namespace

Netlist netlist_from_json(const json& doc) {
    Netlist n;
    try {
        n = parse_netlist(doc);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed netlist: ") + e.what());
    }
    const auto violations = validate_netlist(n);
    if (!violations.empty()) throw ValidationError(violations.front());
    return n;
}

json netlist_to_json(const Netlist& n) {
    json doc;
    doc["name"] = n.name;
    doc["units"] = "micron";
    doc["canvas"] = corners_to_json(n.canvas);
    doc["macros"] = json::array();
    for (const Macro& m : n.macros) {
        json jm;
        jm["name"] = m.name;
        jm["shape"] = corners_to_json(m.shape);
        jm["pins"] = json::array();
        for (const MacroPin& p : m.pins) {
            jm["pins"].push_back({{"name", p.name}, {"offset", point_to_json(p.offset)}, {"side", to_string(p.side)}});
        }
        if (m.group_id) jm["group"] = *m.group_id;
        doc["macros"].push_back(std::move(jm));
    }
    doc["clusters"] = json::array();
    for (const StdCellCluster& c : n.clusters) {
        doc["clusters"].push_back({{"id", c.id}, {"area", c.area}, {"pin_count", c.pin_count}});
    }
    doc["ports"] = json::array();
    for (const Port& p : n.ports) doc["ports"].push_back({{"name", p.name}, {"position", point_to_json(p.position)}});
    doc["nets"] = json::array();
    for (const Net& net : n.nets) {
        json jn{{"id", net.id}, {"weight", net.weight}, {"pins", json::array()}};
        for (const PinRef& r : net.pins) jn["pins"].push_back(pinref_to_json(r));
        doc["nets"].push_back(std::move(jn));
    }
    return doc;
}

Netlist load_netlist(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open netlist " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return netlist_from_json(doc);
}

void save_netlist(const Netlist& netlist, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << netlist_to_json(netlist).dump(2) << '\n';
}

NetlistStats stats(const Netlist& n) {
    return {static_cast<int>(n.macros.size()), static_cast<int>(n.clusters.size()),
            static_cast<int>(n.ports.size()), static_cast<int>(n.nets.size())};
}

}  // namespace macroplace
