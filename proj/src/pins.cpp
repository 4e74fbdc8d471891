#include "macroplace/pins.hpp"

#include <algorithm>
#include <cmath>

namespace macroplace {

FineGrid FineGrid::of(const GridSpec& grid) {
    FineGrid f;
    f.k = std::max(1, kFineGridTarget / std::max(grid.rows(), grid.cols()));
    f.rows = grid.rows() * f.k;
    f.cols = grid.cols() * f.k;
    f.cell_w = grid.cell_w() / f.k;
    f.cell_h = grid.cell_h() / f.k;
    f.origin = grid.origin();
    return f;
}

double FineGrid::floor_x(double d) const { return std::floor(d / cell_w + 1e-7) * cell_w; }
double FineGrid::floor_y(double d) const { return std::floor(d / cell_h + 1e-7) * cell_h; }

bool FineGrid::on_lattice(Point p) const {
    const double fx = (p.x - origin.x) / cell_w, fy = (p.y - origin.y) / cell_h;
    return std::abs(fx - std::round(fx)) < 1e-6 && std::abs(fy - std::round(fy)) < 1e-6;
}

PinChecker::PinChecker(const Design& design)
    : design_(&design),
      fine_(FineGrid::of(design.grid())),
      holes_(complement_nonplaceable(design.grid().canvas(), design.grid().canvas().bbox())) {}

bool PinChecker::inside_canvas(const Rect& r) const {
    const Rect& bb = design_->grid().canvas().bbox();
    if (r.xlo < bb.xlo - kGeomEps || r.ylo < bb.ylo - kGeomEps || r.xhi > bb.xhi + kGeomEps ||
        r.yhi > bb.yhi + kGeomEps) {
        return false;
    }
    return std::none_of(holes_.begin(), holes_.end(), [&](const Rect& h) { return interiors_overlap(r, h); });
}

Rect PinChecker::strip(const MacroPlacement& mp, const OrientedMacro& om, std::size_t pin) const {
    const double fw = fine_.cell_w, fh = fine_.cell_h;
    const Point p{mp.origin.x + om.pin_offsets[pin].x, mp.origin.y + om.pin_offsets[pin].y};
    switch (om.pin_sides[pin]) {
        case Side::N: return {p.x - fw / 2, p.y, p.x + fw / 2, p.y + fh};
        case Side::S: return {p.x - fw / 2, p.y - fh, p.x + fw / 2, p.y};
        case Side::E: return {p.x, p.y - fh / 2, p.x + fw, p.y + fh / 2};
        case Side::W: return {p.x - fw, p.y - fh / 2, p.x, p.y + fh / 2};
    }
    return {};
}

std::vector<PinViolation> PinChecker::violations(const Placement& placement, int macro) const {
    std::vector<PinViolation> out;
    const MacroPlacement& mp = placement.macros[macro];
    if (!mp.placed) return out;
    const OrientedMacro& om = design_->oriented(macro, mp.orientation);
    for (std::size_t i = 0; i < om.pin_offsets.size(); ++i) {
        const Rect s = strip(mp, om, i);
        if (!inside_canvas(s)) {
            out.push_back({macro, static_cast<int>(i), true});
            continue;
        }
        bool covered = false;
        for (int j = 0; j < design_->macro_count() && !covered; ++j) {
            if (j == macro || !placement.macros[j].placed) continue;
            for (const Rect& o : macro_rects(*design_, placement, j)) {
                if (interiors_overlap(s, o)) {
                    covered = true;
                    break;
                }
            }
        }
        if (covered) out.push_back({macro, static_cast<int>(i), false});
    }
    return out;
}

int PinChecker::count(const Placement& placement) const {
    int n = 0;
    for (int m = 0; m < design_->macro_count(); ++m) n += static_cast<int>(violations(placement, m).size());
    return n;
}

int PinChecker::involving(const Placement& placement, int macro) const {
    int n = static_cast<int>(violations(placement, macro).size());
    const std::vector<Rect> body = macro_rects(*design_, placement, macro);
    for (int j = 0; j < design_->macro_count(); ++j) {
        const MacroPlacement& mp = placement.macros[j];
        if (j == macro || !mp.placed) continue;
        const OrientedMacro& om = design_->oriented(j, mp.orientation);
        for (std::size_t i = 0; i < om.pin_offsets.size(); ++i) {
            const Rect s = strip(mp, om, i);
            if (!inside_canvas(s)) continue;
            if (std::any_of(body.begin(), body.end(), [&](const Rect& r) { return interiors_overlap(s, r); })) ++n;
        }
    }
    return n;
}

}  // namespace macroplace
