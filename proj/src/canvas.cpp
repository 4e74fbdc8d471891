#include "macroplace/canvas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace macroplace {

namespace {

// Inclusive 2D prefix sums over a rows x cols indicator.
class PrefixSum {
public:
    template <typename Pred>
    PrefixSum(int rows, int cols, Pred pred) : rows_(rows), cols_(cols), sum_((rows + 1) * (cols + 1), 0) {
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                at(r + 1, c + 1) = (pred(r, c) ? 1 : 0) + at(r, c + 1) + at(r + 1, c) - at(r, c);
            }
        }
    }

    // Count over the cell rectangle offset by (dr, dc); caller guarantees bounds.
    int count(const CellRect& rect, int dr, int dc) const {
        const int r0 = rect.row + dr, c0 = rect.col + dc;
        const int r1 = r0 + rect.rows, c1 = c0 + rect.cols;
        return get(r1, c1) - get(r0, c1) - get(r1, c0) + get(r0, c0);
    }

private:
    int& at(int r, int c) { return sum_[r * (cols_ + 1) + c]; }
    int get(int r, int c) const { return sum_[r * (cols_ + 1) + c]; }

    int rows_;
    int cols_;
    std::vector<int> sum_;
};

int cells_needed(double extent, double cell) {
    return std::max(1, static_cast<int>(std::ceil(extent / cell - kGeomEps)));
}

}  // namespace

GridSpec::GridSpec(RectilinearShape canvas, int rows, int cols, double cell_w, double cell_h)
    : canvas_(std::move(canvas)), rows_(rows), cols_(cols), cell_w_(cell_w), cell_h_(cell_h) {
    if (rows < 1 || cols < 1 || rows > kMaxGrid || cols > kMaxGrid) {
        throw ValidationError("grid dimensions must be within 1.." + std::to_string(kMaxGrid) + ", got " +
                              std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!(cell_w > 0.0) || !(cell_h > 0.0)) throw ValidationError("grid cell size must be positive");
    const Rect& bb = canvas_.bbox();
    origin_ = {bb.xlo, bb.ylo};
    if (cols * cell_w < bb.width() * (1.0 - kGeomEps) || rows * cell_h < bb.height() * (1.0 - kGeomEps)) {
        throw ValidationError("grid does not cover the canvas bounding box");
    }

    // Everything outside the polygon: the complement within the bounding box
    // plus whatever part of the grid overhangs the bounding box.
    placeable_.assign(rows * cols, 1);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const Rect cell = cell_rect(r, c);
            if (cell.xhi > bb.xhi * (1.0 + kGeomEps) + kGeomEps || cell.yhi > bb.yhi * (1.0 + kGeomEps) + kGeomEps) {
                placeable_[r * cols + c] = 0;
            }
        }
    }
    for (const Rect& hole : complement_nonplaceable(canvas_, bb)) {
        const CellSpan cs = covered_span(hole.xlo - origin_.x, hole.xhi - origin_.x, cell_w_);
        const CellSpan rs = covered_span(hole.ylo - origin_.y, hole.yhi - origin_.y, cell_h_);
        for (int r = std::max(0, rs.first); r < std::min(rows, rs.last); ++r) {
            for (int c = std::max(0, cs.first); c < std::min(cols, cs.last); ++c) placeable_[r * cols + c] = 0;
        }
    }

    ring_.assign(rows * cols, 0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (!placeable(r, c)) continue;
            bool edge = false;
            for (int dr = -1; dr <= 1 && !edge; ++dr) {
                for (int dc = -1; dc <= 1 && !edge; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    edge = !in_grid(r + dr, c + dc) || !placeable(r + dr, c + dc);
                }
            }
            ring_[r * cols + c] = edge ? 1 : 0;
        }
    }
}

GridSpec GridSpec::covering(const RectilinearShape& canvas, int rows, int cols) {
    const Rect& bb = canvas.bbox();
    return GridSpec(canvas, rows, cols, bb.width() / cols, bb.height() / rows);
}

Rect GridSpec::cell_rect(int r, int c) const {
    return {origin_.x + c * cell_w_, origin_.y + r * cell_h_, origin_.x + (c + 1) * cell_w_,
            origin_.y + (r + 1) * cell_h_};
}

Point GridSpec::cell_origin(CellIndex cell) const {
    return {origin_.x + cell.col * cell_w_, origin_.y + cell.row * cell_h_};
}

CellIndex GridSpec::cell_of(Point p) const {
    const int c = static_cast<int>(std::floor((p.x - origin_.x) / cell_w_ + kGeomEps));
    const int r = static_cast<int>(std::floor((p.y - origin_.y) / cell_h_ + kGeomEps));
    return {std::clamp(r, 0, rows_ - 1), std::clamp(c, 0, cols_ - 1)};
}

GridSpec select_grid_dims(const Netlist& netlist) {
    const Rect& bb = netlist.canvas.bbox();
    double min_w = bb.width();
    double min_h = bb.height();
    for (const Macro& m : netlist.macros) {
        min_w = std::min(min_w, m.width());
        min_h = std::min(min_h, m.height());
    }
    int cols = cells_needed(bb.width(), min_w);
    int rows = cells_needed(bb.height(), min_h);
    if (cols > kMaxGrid) {
        cols = kMaxGrid;
        min_w = bb.width() / kMaxGrid;
    }
    if (rows > kMaxGrid) {
        rows = kMaxGrid;
        min_h = bb.height() / kMaxGrid;
    }
    return GridSpec(netlist.canvas, rows, cols, min_w, min_h);
}

Footprint make_footprint(const RectilinearShape& shape, double cell_w, double cell_h) {
    Footprint fp;
    const RectilinearShape base = shape.at_origin();
    fp.cells = rasterize_shape(base, cell_w, cell_h);
    for (const Rect& r : base.rects()) {
        const CellSpan cs = covered_span(r.xlo, r.xhi, cell_w);
        const CellSpan rs = covered_span(r.ylo, r.yhi, cell_h);
        fp.rects.push_back({rs.first, cs.first, rs.last - rs.first, cs.last - cs.first});
    }
    fp.cols = covered_span(0.0, base.bbox().width(), cell_w).last;
    fp.rows = covered_span(0.0, base.bbox().height(), cell_h).last;
    return fp;
}

std::vector<int> PositionMask::indices() const {
    std::vector<int> out;
    out.reserve(count());
    for (int i = bits_._Find_first(); i < kSize; i = bits_._Find_next(i)) out.push_back(i);
    return out;
}

Occupancy::Occupancy(const GridSpec& grid)
    : rows_(grid.rows()), cols_(grid.cols()), owner_(grid.cell_count(), kFreeCell), coverage_(grid.cell_count(), 0.0) {
    for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) {
            if (!grid.placeable(r, c)) owner_[r * cols_ + c] = kNonPlaceableCell;
        }
    }
}

int Occupancy::occupied_count() const {
    return static_cast<int>(std::count_if(owner_.begin(), owner_.end(), [](int o) { return o != kFreeCell; }));
}

bool Occupancy::is_committed(int macro) const {
    return std::find(committed_.begin(), committed_.end(), macro) != committed_.end();
}

void Occupancy::commit(int macro, const Footprint& footprint, CellIndex anchor, const RectilinearShape& oriented_shape,
                       const GridSpec& grid) {
    if (is_committed(macro)) throw IllegalPlacement("macro " + std::to_string(macro) + " is already placed");
    for (const CellIndex& off : footprint.cells) {
        const int r = anchor.row + off.row, c = anchor.col + off.col;
        if (r < 0 || c < 0 || r >= rows_ || c >= cols_ || !is_free(r, c)) {
            throw IllegalPlacement("macro " + std::to_string(macro) + " cannot be placed at cell (" +
                                   std::to_string(anchor.row) + ", " + std::to_string(anchor.col) + ")");
        }
    }
    const Point o = grid.cell_origin(anchor);
    std::vector<Rect> rects;
    const RectilinearShape local = oriented_shape.at_origin();
    for (const Rect& r : local.rects()) rects.push_back(r.translated(o.x, o.y));
    mark(macro, rects, grid);
}

void Occupancy::mark(int macro, std::span<const Rect> rects, const GridSpec& grid) {
    const double cell_area = grid.cell_w() * grid.cell_h();
    const Point origin = grid.origin();
    for (const Rect& rect : rects) {
        const CellSpan cs = covered_span(rect.xlo - origin.x, rect.xhi - origin.x, grid.cell_w());
        const CellSpan rs = covered_span(rect.ylo - origin.y, rect.yhi - origin.y, grid.cell_h());
        for (int r = std::max(0, rs.first); r < std::min(rows_, rs.last); ++r) {
            for (int c = std::max(0, cs.first); c < std::min(cols_, cs.last); ++c) {
                owner_[r * cols_ + c] = macro;
                coverage_[r * cols_ + c] += overlap_area(rect, grid.cell_rect(r, c)) / cell_area;
            }
        }
    }
    committed_.push_back(macro);
}

PositionMask overlap_free_mask(const Occupancy& occ, const Footprint& footprint) {
    PositionMask mask;
    const int rows = occ.rows(), cols = occ.cols();
    if (footprint.rows > rows || footprint.cols > cols) return mask;
    const PrefixSum blocked(rows, cols, [&](int r, int c) { return !occ.is_free(r, c); });
    for (int r = 0; r + footprint.rows <= rows; ++r) {
        for (int c = 0; c + footprint.cols <= cols; ++c) {
            const bool ok = std::all_of(footprint.rects.begin(), footprint.rects.end(),
                                        [&](const CellRect& cr) { return blocked.count(cr, r, c) == 0; });
            if (ok) mask.set(r, c);
        }
    }
    return mask;
}

PositionMask boundary_mask(const GridSpec& grid, const Footprint& footprint) {
    PositionMask mask;
    const int rows = grid.rows(), cols = grid.cols();
    if (footprint.rows > rows || footprint.cols > cols) return mask;
    const PrefixSum blocked(rows, cols, [&](int r, int c) { return !grid.placeable(r, c); });
    const PrefixSum ring(rows, cols, [&](int r, int c) { return grid.ring(r, c); });
    for (int r = 0; r + footprint.rows <= rows; ++r) {
        for (int c = 0; c + footprint.cols <= cols; ++c) {
            bool inside = true;
            bool touches = false;
            for (const CellRect& cr : footprint.rects) {
                if (blocked.count(cr, r, c) != 0) {
                    inside = false;
                    break;
                }
                touches = touches || ring.count(cr, r, c) > 0;
            }
            if (inside && touches) mask.set(r, c);
        }
    }
    return mask;
}

AlignmentCenters alignment_centers(int x_p, int y_p, int w_p, int h_p, int w_c, int h_c) {
    auto fl = [](int v) { return static_cast<int>(std::floor(v / 2.0)); };
    const int dx_lr = fl(w_p) + fl(w_c);
    const int dy_lr = fl(h_p - h_c);
    const int dx_tb = fl(w_p - w_c);
    const int dy_tb = fl(h_p) + fl(h_c);
    return {{x_p - dx_lr, x_p + dx_lr}, {y_p - dy_lr, y_p + dy_lr}, {x_p - dx_tb, x_p + dx_tb}, {y_p - dy_tb, y_p + dy_tb}};
}

std::vector<CellIndex> alignment_anchors(const PlacedBlock& p, int rows, int cols) {
    std::vector<CellIndex> out;
    // Left and right neighbours, bottom- or top-aligned.
    for (int col : {p.anchor.col - cols, p.anchor.col + p.cols}) {
        for (int row : {p.anchor.row, p.anchor.row + p.rows - rows}) out.push_back({row, col});
    }
    // Bottom and top neighbours, left- or right-aligned.
    for (int row : {p.anchor.row - rows, p.anchor.row + p.rows}) {
        for (int col : {p.anchor.col, p.anchor.col + p.cols - cols}) out.push_back({row, col});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

PositionMask anchors_mask(const std::vector<CellIndex>& anchors, const PositionMask& legal, int rows, int cols) {
    PositionMask mask;
    for (const CellIndex& a : anchors) {
        if (a.row >= 0 && a.col >= 0 && a.row < rows && a.col < cols && legal.test(a.row, a.col)) mask.set(a.row, a.col);
    }
    return mask;
}

std::vector<CellIndex> candidate_anchors(std::span<const PlacedBlock> placed, const Footprint& fp, int dilation) {
    std::vector<CellIndex> out;
    for (const PlacedBlock& p : placed) {
        for (const CellIndex& a : alignment_anchors(p, fp.rows, fp.cols)) {
            for (int dr = -dilation; dr <= dilation; ++dr) {
                for (int dc = -dilation; dc <= dilation; ++dc) out.push_back({a.row + dr, a.col + dc});
            }
        }
    }
    return out;
}

}  // namespace

PositionMask hierarchy_adjacency_mask(const Occupancy& occ, std::span<const PlacedBlock> placed,
                                      const Footprint& footprint) {
    const PositionMask legal = overlap_free_mask(occ, footprint);
    return anchors_mask(candidate_anchors(placed, footprint, 0), legal, occ.rows(), occ.cols());
}

MaskStack compose_position_mask(const MaskRequest& req) {
    const GridSpec& grid = *req.grid;
    const Occupancy& occ = *req.occupancy;

    // Orientations sharing a footprint share every mask.
    std::array<PositionMask, 4> free_masks;
    for (int o = 0; o < 4; ++o) {
        int same = o;
        for (int p = 0; p < o; ++p) {
            if (*req.footprints[p] == *req.footprints[o]) {
                same = p;
                break;
            }
        }
        free_masks[o] = same == o ? overlap_free_mask(occ, *req.footprints[o]) : free_masks[same];
    }

    auto attempt = [&](MaskLevel level) -> std::optional<MaskStack> {
        MaskStack stack;
        stack.level = level;
        for (int o = 0; o < 4; ++o) {
            const Footprint& fp = *req.footprints[o];
            switch (level) {
                case MaskLevel::Primary:
                    stack.per_orientation[o] =
                        req.same_group_placed.empty()
                            ? boundary_mask(grid, fp) & free_masks[o]
                            : anchors_mask(candidate_anchors(req.same_group_placed, fp, 0), free_masks[o], grid.rows(),
                                           grid.cols());
                    break;
                case MaskLevel::Dilated:
                    stack.per_orientation[o] = anchors_mask(candidate_anchors(req.same_group_placed, fp, 1),
                                                            free_masks[o], grid.rows(), grid.cols());
                    break;
                case MaskLevel::Boundary: stack.per_orientation[o] = boundary_mask(grid, fp) & free_masks[o]; break;
                case MaskLevel::OverlapFree: stack.per_orientation[o] = free_masks[o]; break;
            }
            stack.position |= stack.per_orientation[o];
        }
        if (stack.position.none()) return std::nullopt;
        return stack;
    };

    std::vector<MaskLevel> ladder{MaskLevel::Primary};
    if (!req.same_group_placed.empty()) {
        ladder.push_back(MaskLevel::Dilated);
        ladder.push_back(MaskLevel::Boundary);
    }
    ladder.push_back(MaskLevel::OverlapFree);
    std::optional<MaskStack> fallback;
    for (MaskLevel level : ladder) {
        auto stack = attempt(level);
        if (!stack) continue;
        if (!req.preferred) return *std::move(stack);
        // Overlap-free only competes when no earlier level was legal.
        if (level != MaskLevel::OverlapFree || !fallback) {
            MaskStack kept;
            kept.level = level;
            kept.preferred = true;
            for (int o = 0; o < 4; ++o) {
                for (int pos : stack->per_orientation[o].indices()) {
                    if (!req.preferred(pos, o)) continue;
                    const CellIndex cell = PositionMask::cell_at(pos);
                    kept.per_orientation[o].set(cell.row, cell.col);
                }
                kept.position |= kept.per_orientation[o];
            }
            if (kept.position.any()) return kept;
        }
        if (!fallback) fallback = std::move(stack);
    }
    if (fallback) return *std::move(fallback);
    throw NoLegalAction("no legal anchor for the current macro in any orientation");
}

std::string mask_to_pgm(const PositionMask& mask, int rows, int cols) {
    std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
    for (int r = rows - 1; r >= 0; --r) {
        for (int c = 0; c < cols; ++c) out.push_back(static_cast<char>(mask.test(r, c) ? 255 : 0));
    }
    return out;
}

}  // namespace macroplace
