#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "macroplace/errors.hpp"

namespace macroplace {

// Tolerance for comparing micron coordinates that went through one or two
// arithmetic operations. Inputs are expected on a much coarser lattice.
inline constexpr double kGeomEps = 1e-9;

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

// Axis-aligned rectangle, closed on all sides; [xlo, xhi] x [ylo, yhi].
struct Rect {
    double xlo = 0.0;
    double ylo = 0.0;
    double xhi = 0.0;
    double yhi = 0.0;

    double width() const { return xhi - xlo; }
    double height() const { return yhi - ylo; }
    double area() const { return width() * height(); }
    Point center() const { return {(xlo + xhi) / 2.0, (ylo + yhi) / 2.0}; }
    Rect translated(double dx, double dy) const { return {xlo + dx, ylo + dy, xhi + dx, yhi + dy}; }

    bool operator==(const Rect&) const = default;
};

double overlap_area(const Rect& a, const Rect& b);

// True when the interiors intersect with positive area.
bool interiors_overlap(const Rect& a, const Rect& b);

// Sides of a macro outline, named by their outward normal.
enum class Side : std::uint8_t { N, E, S, W };

// The four placement transforms. The numeric values form the Klein four-group
// under XOR: bit 0 mirrors y (MX), bit 1 mirrors x (MY).
enum class Orientation : std::uint8_t { R0 = 0, MX = 1, MY = 2, R180 = 3 };

inline constexpr std::array<Orientation, 4> kAllOrientations = {
    Orientation::R0, Orientation::MX, Orientation::MY, Orientation::R180};

constexpr int index_of(Orientation o) { return static_cast<int>(o); }

// compose(a, b) applies b first, then a.
constexpr Orientation compose(Orientation a, Orientation b) {
    return static_cast<Orientation>(static_cast<int>(a) ^ static_cast<int>(b));
}

constexpr Orientation inverse(Orientation o) { return o; }

Side transform_side(Side side, Orientation o);

std::string_view to_string(Orientation o);
std::string_view to_string(Side s);
std::optional<Orientation> parse_orientation(std::string_view text);
std::optional<Side> parse_side(std::string_view text);

enum class ShapeViolation : std::uint8_t {
    NotAxisParallel,
    OddCornerCount,
    TooFewCorners,
    Degenerate,  // zero-length edge, collinear corner, or spike
    SelfIntersecting,
};

std::string_view to_string(ShapeViolation v);

class GeometryError : public Error {
public:
    explicit GeometryError(ShapeViolation kind);
    ShapeViolation kind() const { return kind_; }

private:
    ShapeViolation kind_;
};

// Signed shoelace area; negative for clockwise winding in a y-up frame.
double signed_area(std::span<const Point> ring);

class RectilinearShape;
enum class ShapeViolation : std::uint8_t;

// A simple axis-parallel polygon with clockwise winding (y-up), starting at its
// lexicographically smallest corner, together with its slab decomposition.
class RectilinearShape {
public:
    // Validates and normalizes; throws GeometryError on the first violation.
    static RectilinearShape from_corners(std::vector<Point> corners);
    static RectilinearShape rectangle(double width, double height);
    static RectilinearShape from_rect(const Rect& r);

    const std::vector<Point>& corners() const { return corners_; }
    const std::vector<Rect>& rects() const { return rects_; }
    const Rect& bbox() const { return bbox_; }
    double area() const { return area_; }
    bool is_rectangle() const { return corners_.size() == 4; }

    RectilinearShape translated(double dx, double dy) const;
    // Translation that puts the bounding-box min corner at the origin.
    RectilinearShape at_origin() const;

    // Strict point-on-boundary and point-in-closure tests.
    bool on_boundary(Point p) const;
    bool contains(Point p) const;
    // Outward side of every edge passing through p (one or two entries).
    std::vector<Side> sides_at(Point p) const;

    bool operator==(const RectilinearShape& other) const { return corners_ == other.corners_; }

private:
    friend std::variant<RectilinearShape, ShapeViolation> validate_rectilinear(std::span<const Point> corners);
    RectilinearShape() = default;
    static RectilinearShape build(std::vector<Point> normalized);

    std::vector<Point> corners_;
    std::vector<Rect> rects_;
    Rect bbox_;
    double area_ = 0.0;
};

// Returns the normalized shape, or the first violated invariant.
std::variant<RectilinearShape, ShapeViolation> validate_rectilinear(std::span<const Point> corners);

// Vertical slab sweep; adjacent slabs with identical y-intervals are merged.
// Output is sorted by (xlo, ylo).
std::vector<Rect> decompose_rectilinear(const RectilinearShape& shape);

// Rectangles exactly covering `bounding` minus the polygon.
std::vector<Rect> complement_nonplaceable(const RectilinearShape& canvas, const Rect& bounding);

// Maps a point of a shape whose bounding box is [0,w]x[0,h] into the
// transformed frame, which again has bounding box [0,w]x[0,h].
Point orient_point(Point p, double width, double height, Orientation o);

// Mirrors the shape and re-normalizes it to the origin and clockwise winding.
RectilinearShape apply_orientation(const RectilinearShape& shape, Orientation o);

struct CellIndex {
    int row = 0;
    int col = 0;

    bool operator==(const CellIndex&) const = default;
    auto operator<=>(const CellIndex&) const = default;
};

// Half-open range [first, last) of grid indices.
struct CellSpan {
    int first = 0;
    int last = 0;
};

// Indices of cells of size `cell` (origin 0) whose interior meets (lo, hi).
CellSpan covered_span(double lo, double hi, double cell);

// Conservative rasterization: a cell is covered iff its intersection with the
// shape, placed with its origin at the anchor cell's min corner, has positive
// area. Cells are returned sorted and unique.
std::vector<CellIndex> rasterize_shape(const RectilinearShape& shape, double cell_w, double cell_h,
                                       CellIndex anchor = {});

}  // namespace macroplace
