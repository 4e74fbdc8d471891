#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "macroplace/design.hpp"
#include "macroplace/netlist.hpp"

namespace macroplace::testing {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(MACROPLACE_FIXTURES) / name; }
inline std::filesystem::path golden(const std::string& name) { return std::filesystem::path(MACROPLACE_GOLDEN) / name; }

inline Design fixture_design(const std::string& name) { return Design::build(load_netlist(fixture(name))); }

// Fresh empty directory under the system temp directory.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("macroplace_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

struct BoxSpec {
    std::string name;
    double w = 1.0;
    double h = 1.0;
};

// Rectangular canvas with rectangular macros and no nets.
inline Netlist box_netlist(double canvas_w, double canvas_h, const std::vector<BoxSpec>& boxes) {
    Netlist n;
    n.name = "boxes";
    n.canvas = RectilinearShape::rectangle(canvas_w, canvas_h);
    for (const BoxSpec& b : boxes) {
        Macro m;
        m.name = b.name;
        m.shape = RectilinearShape::rectangle(b.w, b.h);
        n.macros.push_back(std::move(m));
    }
    return n;
}

// Integer rectangle with up to four rectangular corner notches, each inside
// its own quadrant: a simple rectilinear polygon with 4 to 12 corners.
inline std::vector<Point> random_notched_polygon(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> side(4, 14);
    const int w = side(rng), h = side(rng);
    std::bernoulli_distribution cut(0.6);
    auto notch = [&](int extent) { return std::uniform_int_distribution<int>(1, (extent - 1) / 2)(rng); };
    std::vector<Point> ring;
    auto add = [&](double x, double y) { ring.push_back({x, y}); };
    // Clockwise from (0, 0): up the left edge, across the top, down the right.
    if (cut(rng)) {
        const int a = notch(w), b = notch(h);
        add(a, 0), add(a, b), add(0, b);
    } else {
        add(0, 0);
    }
    if (cut(rng)) {
        const int a = notch(w), b = notch(h);
        add(0, h - b), add(a, h - b), add(a, h);
    } else {
        add(0, h);
    }
    if (cut(rng)) {
        const int a = notch(w), b = notch(h);
        add(w - a, h), add(w - a, h - b), add(w, h - b);
    } else {
        add(w, h);
    }
    if (cut(rng)) {
        const int a = notch(w), b = notch(h);
        add(w, b), add(w - a, b), add(w - a, 0);
    } else {
        add(w, 0);
    }
    return ring;
}

// Even-odd ray cast; the point must not lie on the boundary.
inline bool point_in_ring(const std::vector<Point>& ring, Point p) {
    bool in = false;
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const Point& a = ring[i];
        const Point& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
}

}  // namespace macroplace::testing
