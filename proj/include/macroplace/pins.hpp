#pragma once

#include <vector>

#include "macroplace/canvas.hpp"
#include "macroplace/design.hpp"

namespace macroplace {

inline constexpr int kFineGridTarget = 2000;

// Lattice refining every coarse cell into k x k fine cells, k chosen so the
// larger side has at most kFineGridTarget fine cells.
struct FineGrid {
    int k = 1;
    int rows = 0;
    int cols = 0;
    double cell_w = 0.0;
    double cell_h = 0.0;
    Point origin;

    static FineGrid of(const GridSpec& grid);
    // Largest lattice multiple not exceeding a non-negative distance.
    double floor_x(double d) const;
    double floor_y(double d) const;
    bool on_lattice(Point p) const;
};

struct PinViolation {
    int macro = 0;
    int pin = 0;
    bool outside_canvas = false;  // otherwise covered by another macro
};

// A pin is accessible when the one-fine-cell strip just outside its side lies
// inside the canvas and is not covered by another macro.
class PinChecker {
public:
    explicit PinChecker(const Design& design);

    const FineGrid& fine() const { return fine_; }
    const std::vector<Rect>& holes() const { return holes_; }
    bool inside_canvas(const Rect& r) const;

    Rect strip(const MacroPlacement& mp, const OrientedMacro& om, std::size_t pin) const;
    std::vector<PinViolation> violations(const Placement& placement, int macro) const;
    int count(const Placement& placement) const;
    // Violations involving a placed macro: its own blocked pins plus pins of
    // other placed macros its body covers.
    int involving(const Placement& placement, int macro) const;

private:
    const Design* design_;
    FineGrid fine_;
    std::vector<Rect> holes_;
};

}  // namespace macroplace
