#include "macroplace/report.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace macroplace {

using nlohmann::ordered_json;

namespace {

constexpr std::array<const char*, 10> kPalette = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
                                                  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s(buf);
    if (s == "-0.000") s = "0.000";
    return s;
}

void check_consistent(const Design& design, const Placement& placement) {
    if (static_cast<int>(placement.macros.size()) != design.macro_count()) {
        throw InconsistentPlacement("placement has " + std::to_string(placement.macros.size()) + " macros, design has " +
                                    std::to_string(design.macro_count()));
    }
    if (placement.clusters_placed && static_cast<int>(placement.clusters.size()) != design.cluster_count()) {
        throw InconsistentPlacement("placement has " + std::to_string(placement.clusters.size()) +
                                    " clusters, design has " + std::to_string(design.cluster_count()));
    }
}

}  // namespace

ordered_json placement_to_json(const Design& design, const Placement& placement) {
    check_consistent(design, placement);
    const GridSpec& g = design.grid();
    ordered_json doc;
    doc["design"] = design.netlist().name;
    doc["grid"] = {{"rows", g.rows()}, {"cols", g.cols()}, {"cell_w", g.cell_w()}, {"cell_h", g.cell_h()}};
    doc["macros"] = ordered_json::array();
    for (int m = 0; m < design.macro_count(); ++m) {
        const MacroPlacement& mp = placement.macros[m];
        ordered_json jm;
        jm["name"] = design.netlist().macros[m].name;
        jm["placed"] = mp.placed;
        if (mp.placed) {
            jm["anchor"] = {mp.anchor.row, mp.anchor.col};
            jm["orientation"] = to_string(mp.orientation);
            jm["origin"] = {mp.origin.x, mp.origin.y};
        }
        doc["macros"].push_back(std::move(jm));
    }
    doc["clusters"] = ordered_json::array();
    if (placement.clusters_placed) {
        for (int k = 0; k < design.cluster_count(); ++k) {
            doc["clusters"].push_back(
                {{"id", design.netlist().clusters[k].id}, {"position", {placement.clusters[k].x, placement.clusters[k].y}}});
        }
    }
    return doc;
}

Placement placement_from_json(const Design& design, const nlohmann::json& doc) {
    try {
        Placement p = Placement::empty(design);
        const auto& macros = doc.at("macros");
        if (static_cast<int>(macros.size()) != design.macro_count()) {
            throw InconsistentPlacement("placement lists " + std::to_string(macros.size()) + " macros, design has " +
                                        std::to_string(design.macro_count()));
        }
        for (const auto& jm : macros) {
            const auto name = jm.at("name").get<std::string>();
            const auto idx = design.macro_index(name);
            if (!idx) throw InconsistentPlacement("placement names unknown macro '" + name + "'");
            MacroPlacement& mp = p.macros[*idx];
            mp.placed = jm.at("placed").get<bool>();
            if (!mp.placed) continue;
            mp.anchor = {jm.at("anchor")[0].get<int>(), jm.at("anchor")[1].get<int>()};
            const auto o = parse_orientation(jm.at("orientation").get<std::string>());
            if (!o) throw ParseError("bad orientation for macro '" + name + "'");
            mp.orientation = *o;
            mp.origin = {jm.at("origin")[0].get<double>(), jm.at("origin")[1].get<double>()};
        }
        const auto& clusters = doc.at("clusters");
        if (!clusters.empty()) {
            if (static_cast<int>(clusters.size()) != design.cluster_count()) {
                throw InconsistentPlacement("placement cluster count disagrees with the design");
            }
            for (int k = 0; k < design.cluster_count(); ++k) {
                const auto& jc = clusters[k];
                if (jc.at("id").get<int>() != design.netlist().clusters[k].id) {
                    throw InconsistentPlacement("placement cluster order disagrees with the design");
                }
                p.clusters[k] = {jc.at("position")[0].get<double>(), jc.at("position")[1].get<double>()};
            }
            p.clusters_placed = true;
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed placement: ") + e.what());
    }
}

ordered_json costs_to_json(const ProxyCosts& c, const RewardWeights& w) {
    return {{"wl", c.wl},
            {"cong", c.cong},
            {"dens", c.dens},
            {"hier", c.hier},
            {"weighted_total", weighted_total(c, w)},
            {"reward", reward(c, w)}};
}

std::string render_svg(const Design& design, const Placement& placement) {
    check_consistent(design, placement);
    const RectilinearShape& canvas = design.grid().canvas();
    const Rect& bb = canvas.bbox();
    const double margin = 0.02 * std::max(bb.width(), bb.height());
    const double tick = 0.25 * std::min(design.grid().cell_w(), design.grid().cell_h());
    auto sx = [&](double x) { return num(x - bb.xlo + margin); };
    auto sy = [&](double y) { return num(bb.yhi - y + margin); };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(bb.width() + 2 * margin)
        << "\" height=\"" << num(bb.height() + 2 * margin) << "\" viewBox=\"0 0 " << num(bb.width() + 2 * margin)
        << " " << num(bb.height() + 2 * margin) << "\">\n";
    out << "<polygon class=\"canvas\" points=\"";
    for (std::size_t i = 0; i < canvas.corners().size(); ++i) {
        const Point& p = canvas.corners()[i];
        out << (i ? " " : "") << sx(p.x) << "," << sy(p.y);
    }
    out << "\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"" << num(tick / 2) << "\"/>\n";

    for (int m = 0; m < design.macro_count(); ++m) {
        if (!placement.macros[m].placed) continue;
        const char* color = kPalette[static_cast<std::size_t>(design.group_of(m)) % kPalette.size()];
        for (const Rect& r : macro_rects(design, placement, m)) {
            out << "<rect class=\"macro\" data-macro=\"" << design.netlist().macros[m].name << "\" x=\"" << sx(r.xlo)
                << "\" y=\"" << sy(r.yhi) << "\" width=\"" << num(r.width()) << "\" height=\"" << num(r.height())
                << "\" fill=\"" << color << "\" stroke=\"none\"/>\n";
        }
    }
    for (int m = 0; m < design.macro_count(); ++m) {
        const MacroPlacement& mp = placement.macros[m];
        if (!mp.placed) continue;
        const OrientedMacro& om = design.oriented(m, mp.orientation);
        for (std::size_t i = 0; i < om.pin_offsets.size(); ++i) {
            const Point p{mp.origin.x + om.pin_offsets[i].x, mp.origin.y + om.pin_offsets[i].y};
            Point q = p;
            switch (om.pin_sides[i]) {
                case Side::N: q.y += tick; break;
                case Side::S: q.y -= tick; break;
                case Side::E: q.x += tick; break;
                case Side::W: q.x -= tick; break;
            }
            out << "<line class=\"pin\" x1=\"" << sx(p.x) << "\" y1=\"" << sy(p.y) << "\" x2=\"" << sx(q.x)
                << "\" y2=\"" << sy(q.y) << "\" stroke=\"#000000\" stroke-width=\"" << num(tick / 2) << "\"/>\n";
        }
    }
    if (placement.clusters_placed) {
        for (const Point& c : placement.clusters) {
            out << "<circle class=\"cluster\" cx=\"" << sx(c.x) << "\" cy=\"" << sy(c.y) << "\" r=\"" << num(tick)
                << "\" fill=\"#555555\"/>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const ordered_json& doc) { write_text(path, doc.dump(2) + "\n"); }

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace macroplace
