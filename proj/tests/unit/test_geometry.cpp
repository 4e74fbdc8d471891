#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "macroplace/geometry.hpp"
#include "support.hpp"

namespace macroplace {
namespace {

using testing::point_in_ring;
using testing::random_notched_polygon;

std::vector<Point> pts(std::initializer_list<std::pair<double, double>> list) {
    std::vector<Point> out;
    for (auto [x, y] : list) out.push_back({x, y});
    return out;
}

const auto kRect = pts({{0, 0}, {0, 4}, {6, 4}, {6, 0}});
const auto kL = pts({{0, 0}, {0, 4}, {2, 4}, {2, 2}, {4, 2}, {4, 0}});
const auto kT = pts({{0, 4}, {0, 6}, {6, 6}, {6, 4}, {4, 4}, {4, 0}, {2, 0}, {2, 4}});
const auto kU = pts({{0, 0}, {0, 6}, {2, 6}, {2, 2}, {4, 2}, {4, 6}, {6, 6}, {6, 0}});

// Unit cells of [0, n) whose center lies in the union of rects.
std::set<std::pair<int, int>> raster_rects(const std::vector<Rect>& rects, int n) {
    std::set<std::pair<int, int>> out;
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            const Point c{x + 0.5, y + 0.5};
            for (const Rect& r : rects) {
                if (c.x > r.xlo && c.x < r.xhi && c.y > r.ylo && c.y < r.yhi) {
                    out.insert({x, y});
                    break;
                }
            }
        }
    }
    return out;
}

std::set<std::pair<int, int>> raster_ring(const std::vector<Point>& ring, int n) {
    std::set<std::pair<int, int>> out;
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            if (point_in_ring(ring, {x + 0.5, y + 0.5})) out.insert({x, y});
        }
    }
    return out;
}

TEST(Geometry, RectangleIsValidWithFourCorners) {
    const auto s = RectilinearShape::from_corners(kRect);
    EXPECT_EQ(s.corners().size(), 4u);
    EXPECT_TRUE(s.is_rectangle());
    EXPECT_DOUBLE_EQ(s.area(), 24.0);
}

TEST(Geometry, LShapeIsValidWithSixCorners) {
    const auto s = RectilinearShape::from_corners(kL);
    EXPECT_EQ(s.corners().size(), 6u);
    EXPECT_DOUBLE_EQ(s.area(), 12.0);
}

TEST(Geometry, DiagonalEdgeIsRejected) {
    const auto r = validate_rectilinear(pts({{0, 0}, {1, 1}, {2, 0}}));
    ASSERT_TRUE(std::holds_alternative<ShapeViolation>(r));
    EXPECT_EQ(std::get<ShapeViolation>(r), ShapeViolation::NotAxisParallel);
    EXPECT_THROW(RectilinearShape::from_corners(pts({{0, 0}, {1, 1}, {2, 0}})), GeometryError);
}

TEST(Geometry, DegenerateAndSelfIntersectingRejected) {
    const auto collinear = validate_rectilinear(pts({{0, 0}, {0, 2}, {0, 4}, {3, 4}, {3, 0}, {1, 0}}));
    ASSERT_TRUE(std::holds_alternative<ShapeViolation>(collinear));
    EXPECT_EQ(std::get<ShapeViolation>(collinear), ShapeViolation::Degenerate);
    // Bow tie of two squares sharing only a crossing.
    const auto crossing = validate_rectilinear(pts({{0, 0}, {0, 2}, {4, 2}, {4, 4}, {2, 4}, {2, 0}}));
    ASSERT_TRUE(std::holds_alternative<ShapeViolation>(crossing));
    EXPECT_EQ(std::get<ShapeViolation>(crossing), ShapeViolation::SelfIntersecting);
}

TEST(Geometry, NormalizationIsClockwiseFromSmallestCorner) {
    std::vector<Point> ccw(kL.rbegin(), kL.rend());
    std::rotate(ccw.begin(), ccw.begin() + 2, ccw.end());
    const auto s = RectilinearShape::from_corners(ccw);
    EXPECT_EQ(s.corners(), RectilinearShape::from_corners(kL).corners());
    EXPECT_EQ(s.corners().front(), (Point{0, 0}));
    EXPECT_LT(signed_area(s.corners()), 0.0);
}

TEST(Geometry, RectangleDecomposesToItself) {
    const auto s = RectilinearShape::from_corners(kRect);
    const auto rects = decompose_rectilinear(s);
    ASSERT_EQ(rects.size(), 1u);
    EXPECT_EQ(rects[0], (Rect{0, 0, 6, 4}));
}

TEST(Geometry, LShapeDecomposition) {
    const auto rects = decompose_rectilinear(RectilinearShape::from_corners(kL));
    ASSERT_EQ(rects.size(), 2u);
    EXPECT_EQ(rects[0], (Rect{0, 0, 2, 4}));
    EXPECT_EQ(rects[1], (Rect{2, 0, 4, 2}));
    EXPECT_DOUBLE_EQ(rects[0].area() + rects[1].area(), 12.0);
}

TEST(Geometry, TShapeDecompositionMatchesRaster) {
    const auto s = RectilinearShape::from_corners(kT);
    const auto rects = decompose_rectilinear(s);
    EXPECT_GE(rects.size(), 2u);
    EXPECT_LE(rects.size(), 3u);
    EXPECT_EQ(raster_rects(rects, 8), raster_ring(kT, 8));
}

TEST(Geometry, ComplementOfRectangularCanvasIsEmpty) {
    const auto s = RectilinearShape::from_corners(kRect);
    EXPECT_TRUE(complement_nonplaceable(s, s.bbox()).empty());
}

TEST(Geometry, ComplementOfLCanvasIsTheNotch) {
    const auto s = RectilinearShape::from_corners(kL);
    const auto holes = complement_nonplaceable(s, s.bbox());
    ASSERT_EQ(holes.size(), 1u);
    EXPECT_EQ(holes[0], (Rect{2, 2, 4, 4}));
}

TEST(Geometry, ComplementOfUCanvasCoversBboxMinusPolygon) {
    const auto s = RectilinearShape::from_corners(kU);
    const auto holes = complement_nonplaceable(s, s.bbox());
    double area = 0.0;
    for (const Rect& h : holes) area += h.area();
    EXPECT_DOUBLE_EQ(area, s.bbox().area() - s.area());
    auto outside = raster_rects({s.bbox()}, 8);
    for (const auto& c : raster_ring(kU, 8)) outside.erase(c);
    EXPECT_EQ(raster_rects(holes, 8), outside);
}

TEST(Geometry, RectangleCongruentUnderEveryOrientation) {
    const auto s = RectilinearShape::rectangle(6, 4);
    for (Orientation o : kAllOrientations) EXPECT_EQ(apply_orientation(s, o), s);
}

TEST(Geometry, LShapeMirroredIsJShape) {
    const auto l = RectilinearShape::from_corners(kL);
    const auto j = apply_orientation(l, Orientation::MY);
    EXPECT_DOUBLE_EQ(j.area(), l.area());
    // Manual mirror x -> 4 - x.
    std::vector<Point> mirrored;
    for (const Point& p : kL) mirrored.push_back({4 - p.x, p.y});
    EXPECT_EQ(raster_rects(j.rects(), 6), raster_ring(mirrored, 6));
    EXPECT_NE(j, l);
}

TEST(Geometry, PinSideTransforms) {
    EXPECT_EQ(transform_side(Side::E, Orientation::MY), Side::W);
    EXPECT_EQ(transform_side(Side::N, Orientation::MX), Side::S);
    EXPECT_EQ(transform_side(Side::N, Orientation::MY), Side::N);
    EXPECT_EQ(transform_side(Side::E, Orientation::R180), Side::W);
    EXPECT_EQ(transform_side(Side::S, Orientation::R180), Side::N);
    for (Side s : {Side::N, Side::E, Side::S, Side::W}) EXPECT_EQ(transform_side(s, Orientation::R0), s);
}

TEST(Geometry, OrientationsFormKleinGroup) {
    for (Orientation a : kAllOrientations) {
        EXPECT_EQ(compose(a, a), Orientation::R0);
        for (Orientation b : kAllOrientations) {
            EXPECT_EQ(compose(a, b), compose(b, a));
            const auto l = RectilinearShape::from_corners(kL);
            EXPECT_EQ(apply_orientation(apply_orientation(l, b), a), apply_orientation(l, compose(a, b)));
        }
    }
}

TEST(Geometry, OrientPointStaysInBoundingBox) {
    EXPECT_EQ(orient_point({1, 3}, 4, 5, Orientation::MX), (Point{1, 2}));
    EXPECT_EQ(orient_point({1, 3}, 4, 5, Orientation::MY), (Point{3, 3}));
    EXPECT_EQ(orient_point({1, 3}, 4, 5, Orientation::R180), (Point{3, 2}));
}

TEST(Geometry, ParseAndPrintRoundTrip) {
    for (Orientation o : kAllOrientations) EXPECT_EQ(parse_orientation(to_string(o)), o);
    for (Side s : {Side::N, Side::E, Side::S, Side::W}) EXPECT_EQ(parse_side(to_string(s)), s);
    EXPECT_FALSE(parse_orientation("R90").has_value());
}

TEST(Geometry, UnitShapeOnUnitCellsCoversOneCell) {
    const auto cells = rasterize_shape(RectilinearShape::rectangle(1, 1), 1, 1);
    ASSERT_EQ(cells.size(), 1u);
    EXPECT_EQ(cells[0], (CellIndex{0, 0}));
}

TEST(Geometry, PartialCellIsCoveredConservatively) {
    const auto cells = rasterize_shape(RectilinearShape::rectangle(2.5, 1), 1, 1);
    EXPECT_EQ(cells, (std::vector<CellIndex>{{0, 0}, {0, 1}, {0, 2}}));
}

TEST(Geometry, LShapeRasterIsUnionOfRectRasters) {
    const auto l = RectilinearShape::from_corners(pts({{0, 0}, {0, 4.5}, {1.5, 4.5}, {1.5, 1.5}, {3.2, 1.5}, {3.2, 0}}));
    std::set<CellIndex> expect;
    for (const Rect& r : l.rects()) {
        const CellSpan cols = covered_span(r.xlo, r.xhi, 1), rows = covered_span(r.ylo, r.yhi, 1);
        for (int row = rows.first; row < rows.last; ++row) {
            for (int col = cols.first; col < cols.last; ++col) expect.insert({row, col});
        }
    }
    const auto got = rasterize_shape(l, 1, 1);
    EXPECT_EQ(std::vector<CellIndex>(expect.begin(), expect.end()), got);
}

TEST(Geometry, BoundaryQueries) {
    const auto l = RectilinearShape::from_corners(kL);
    EXPECT_TRUE(l.on_boundary({1, 4}));
    EXPECT_TRUE(l.on_boundary({3, 2}));
    EXPECT_FALSE(l.on_boundary({1, 1}));
    EXPECT_TRUE(l.contains({3, 1}));
    EXPECT_FALSE(l.contains({3, 3}));
    EXPECT_EQ(l.sides_at({1, 4}), std::vector<Side>{Side::N});
    EXPECT_EQ(l.sides_at({4, 1}), std::vector<Side>{Side::E});
}

TEST(GeometryProperty, RandomPolygonsDecomposeExactly) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const auto ring = random_notched_polygon(rng);
        const auto s = RectilinearShape::from_corners(ring);
        const auto rects = decompose_rectilinear(s);
        double sum = 0.0;
        for (const Rect& r : rects) sum += r.area();
        EXPECT_DOUBLE_EQ(sum, std::abs(signed_area(ring)));
        for (std::size_t i = 0; i < rects.size(); ++i) {
            for (std::size_t j = i + 1; j < rects.size(); ++j) EXPECT_FALSE(interiors_overlap(rects[i], rects[j]));
        }
        EXPECT_EQ(raster_rects(rects, 16), raster_ring(ring, 16));
    }
}

}  // namespace
}  // namespace macroplace
