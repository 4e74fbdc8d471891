#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "macroplace/geometry.hpp"
#include "macroplace/netlist.hpp"

namespace macroplace {

// Upper bound on grid rows and columns; also the side of the action space.
inline constexpr int kMaxGrid = 128;

// Rectangle of grid cells: rows [row, row + rows), cols [col, col + cols).
struct CellRect {
    int row = 0;
    int col = 0;
    int rows = 0;
    int cols = 0;
};

// Coarse placement grid over the canvas bounding box. Cell (r, c) spans
// [x0 + c*cell_w, x0 + (c+1)*cell_w] x [y0 + r*cell_h, y0 + (r+1)*cell_h].
class GridSpec {
public:
    // Cells of the given size anchored at the canvas bounding-box min corner.
    // Cells that are not entirely inside the canvas polygon are non-placeable.
    GridSpec(RectilinearShape canvas, int rows, int cols, double cell_w, double cell_h);

    // rows x cols cells exactly covering the canvas bounding box.
    static GridSpec covering(const RectilinearShape& canvas, int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double cell_w() const { return cell_w_; }
    double cell_h() const { return cell_h_; }
    Point origin() const { return origin_; }
    const RectilinearShape& canvas() const { return canvas_; }
    int cell_count() const { return rows_ * cols_; }

    bool in_grid(int r, int c) const { return r >= 0 && c >= 0 && r < rows_ && c < cols_; }
    Rect cell_rect(int r, int c) const;
    Point cell_origin(CellIndex cell) const;
    // Cell containing p, clamped into the grid.
    CellIndex cell_of(Point p) const;

    bool placeable(int r, int c) const { return placeable_[r * cols_ + c] != 0; }
    // Placeable cells with a non-placeable or off-grid 8-neighbour.
    bool ring(int r, int c) const { return ring_[r * cols_ + c] != 0; }

private:
    RectilinearShape canvas_;
    int rows_ = 0;
    int cols_ = 0;
    double cell_w_ = 0.0;
    double cell_h_ = 0.0;
    Point origin_;
    std::vector<std::uint8_t> placeable_;
    std::vector<std::uint8_t> ring_;
};

// Cell size = smallest macro bounding-box width/height; counts clamped to
// kMaxGrid, enlarging the cells when clamped.
GridSpec select_grid_dims(const Netlist& netlist);

// Conservative rasterization of a shape anchored at cell (0, 0).
struct Footprint {
    int rows = 0;  // bounding extent in cells
    int cols = 0;
    std::vector<CellIndex> cells;  // sorted offsets
    std::vector<CellRect> rects;   // one per decomposed rectangle; may overlap

    bool operator==(const Footprint& other) const { return cells == other.cells; }
};

Footprint make_footprint(const RectilinearShape& shape, double cell_w, double cell_h);

// N_max x N_max binary action mask; bit (r, c) lives at index r * kMaxGrid + c.
class PositionMask {
public:
    static constexpr int kSize = kMaxGrid * kMaxGrid;

    static constexpr int index_of(int r, int c) { return r * kMaxGrid + c; }
    static constexpr CellIndex cell_at(int index) { return {index / kMaxGrid, index % kMaxGrid}; }

    bool test(int r, int c) const { return bits_.test(index_of(r, c)); }
    bool test(int index) const { return index >= 0 && index < kSize && bits_.test(index); }
    void set(int r, int c, bool value = true) { bits_.set(index_of(r, c), value); }
    int count() const { return static_cast<int>(bits_.count()); }
    bool any() const { return bits_.any(); }
    bool none() const { return bits_.none(); }
    std::vector<int> indices() const;

    PositionMask& operator&=(const PositionMask& o) {
        bits_ &= o.bits_;
        return *this;
    }
    PositionMask& operator|=(const PositionMask& o) {
        bits_ |= o.bits_;
        return *this;
    }
    friend PositionMask operator&(PositionMask a, const PositionMask& b) { return a &= b; }
    friend PositionMask operator|(PositionMask a, const PositionMask& b) { return a |= b; }
    bool operator==(const PositionMask& o) const { return bits_ == o.bits_; }
    bool subset_of(const PositionMask& o) const { return (bits_ & ~o.bits_).none(); }

private:
    std::bitset<kSize> bits_;
};

inline constexpr int kFreeCell = -1;
inline constexpr int kNonPlaceableCell = -2;

// Per-cell owner (macro index, free, or non-placeable) plus the exact
// fraction of each cell covered by macro geometry.
class Occupancy {
public:
    explicit Occupancy(const GridSpec& grid);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int owner(int r, int c) const { return owner_[r * cols_ + c]; }
    bool is_free(int r, int c) const { return owner(r, c) == kFreeCell; }
    std::span<const double> coverage() const { return coverage_; }
    int occupied_count() const;
    bool is_committed(int macro) const;

    // Legal placement of the macro's oriented footprint; throws
    // IllegalPlacement on overlap, out-of-grid cells, or a repeated commit.
    void commit(int macro, const Footprint& footprint, CellIndex anchor, const RectilinearShape& oriented_shape,
                const GridSpec& grid);

    // Marks arbitrary (possibly off-grid) macro geometry in microns without
    // legality checks.
    void mark(int macro, std::span<const Rect> rects, const GridSpec& grid);

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> owner_;
    std::vector<double> coverage_;
    std::vector<int> committed_;
};

// Anchors where every footprint cell is inside the grid and free.
PositionMask overlap_free_mask(const Occupancy& occ, const Footprint& footprint);

// Anchors where the footprint lies on placeable cells and touches the
// outermost placeable ring of the canvas polygon.
PositionMask boundary_mask(const GridSpec& grid, const Footprint& footprint);

// A placed macro seen by the hierarchy mask: anchor cell and cell extents.
struct PlacedBlock {
    CellIndex anchor;
    int rows = 0;
    int cols = 0;
};

// Candidate centers of the edge-alignment rule, in grid cells, exactly as the
// formula reads: x/y are the placed macro's center, w/h sizes in cells.
struct AlignmentCenters {
    std::array<int, 2> x_lr{};
    std::array<int, 2> y_lr{};
    std::array<int, 2> x_tb{};
    std::array<int, 2> y_tb{};
};

AlignmentCenters alignment_centers(int x_p, int y_p, int w_p, int h_p, int w_c, int h_c);

// Anchors of the current block that put one of its edges flush against the
// placed block with a shared corner: left/right neighbours bottom- or
// top-aligned, top/bottom neighbours left- or right-aligned. For even sizes
// these are exactly the centers of alignment_centers() shifted by half extents.
std::vector<CellIndex> alignment_anchors(const PlacedBlock& placed, int rows, int cols);

PositionMask hierarchy_adjacency_mask(const Occupancy& occ, std::span<const PlacedBlock> placed,
                                      const Footprint& footprint);

struct MaskRequest {
    const GridSpec* grid = nullptr;
    const Occupancy* occupancy = nullptr;
    std::array<const Footprint*, 4> footprints{};  // per orientation
    std::vector<PlacedBlock> same_group_placed;     // empty for the first macro of a group
    // Optional preference over (position, orientation index).
    std::function<bool(int, int)> preferred;
};

enum class MaskLevel : std::uint8_t { Primary = 0, Dilated = 1, Boundary = 2, OverlapFree = 3 };

struct MaskStack {
    std::array<PositionMask, 4> per_orientation;
    PositionMask position;  // union over orientations
    MaskLevel level = MaskLevel::Primary;
    bool preferred = false;  // restricted to preferred choices
};

// Boundary mask for the first macro of a group, hierarchy mask otherwise, both
// intersected with the overlap-free mask. When that is empty the ladder falls
// back to a 1-cell dilation of the alignment anchors, then boundary-only, then
// overlap-free only. With a preference, the first level before overlap-free
// holding a preferred choice wins, restricted to those choices; otherwise the
// first non-empty level is returned unrestricted. Throws NoLegalAction when every level is
// empty.
MaskStack compose_position_mask(const MaskRequest& request);

// Binary PGM (P5), one byte per cell (255 = set), top grid row first.
std::string mask_to_pgm(const PositionMask& mask, int rows, int cols);

}  // namespace macroplace
