#include "macroplace/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace macroplace {

namespace {

bool near(double a, double b) { return std::abs(a - b) <= kGeomEps * std::max(1.0, std::max(std::abs(a), std::abs(b))); }

struct Edge {
    Point a;
    Point b;

    bool horizontal() const { return a.y == b.y; }
};

std::vector<Edge> edges_of(std::span<const Point> ring) {
    std::vector<Edge> edges;
    edges.reserve(ring.size());
    for (std::size_t i = 0; i < ring.size(); ++i) {
        edges.push_back({ring[i], ring[(i + 1) % ring.size()]});
    }
    return edges;
}

// Closed-segment intersection for axis-parallel segments.
bool segments_touch(const Edge& e, const Edge& f) {
    const double exlo = std::min(e.a.x, e.b.x), exhi = std::max(e.a.x, e.b.x);
    const double eylo = std::min(e.a.y, e.b.y), eyhi = std::max(e.a.y, e.b.y);
    const double fxlo = std::min(f.a.x, f.b.x), fxhi = std::max(f.a.x, f.b.x);
    const double fylo = std::min(f.a.y, f.b.y), fyhi = std::max(f.a.y, f.b.y);
    return exlo <= fxhi && fxlo <= exhi && eylo <= fyhi && fylo <= eyhi;
}

// y-intervals of the polygon interior along the vertical line x = xm, where xm
// is strictly between two corner x-coordinates.
std::vector<std::pair<double, double>> slab_intervals(const std::vector<Point>& ring, double xm) {
    std::vector<double> ys;
    for (const Edge& e : edges_of(ring)) {
        if (!e.horizontal()) continue;
        const double lo = std::min(e.a.x, e.b.x), hi = std::max(e.a.x, e.b.x);
        if (lo < xm && xm < hi) ys.push_back(e.a.y);
    }
    std::sort(ys.begin(), ys.end());
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i + 1 < ys.size(); i += 2) out.emplace_back(ys[i], ys[i + 1]);
    return out;
}

using Interval = std::pair<double, double>;

// Sweeps slabs left to right. Rectangles are extended while the same interval
// persists in consecutive slabs.
std::vector<Rect> sweep(const std::vector<double>& xs,
                        const std::vector<std::vector<Interval>>& per_slab) {
    std::vector<Rect> out;
    std::map<Interval, double> open;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const auto& cur = per_slab[i];
        for (auto it = open.begin(); it != open.end();) {
            if (std::find(cur.begin(), cur.end(), it->first) == cur.end()) {
                out.push_back({it->second, it->first.first, xs[i], it->first.second});
                it = open.erase(it);
            } else {
                ++it;
            }
        }
        for (const Interval& iv : cur) open.try_emplace(iv, xs[i]);
    }
    for (const auto& [iv, start] : open) out.push_back({start, iv.first, xs.back(), iv.second});
    std::sort(out.begin(), out.end(), [](const Rect& a, const Rect& b) {
        return std::tie(a.xlo, a.ylo) < std::tie(b.xlo, b.ylo);
    });
    return out;
}

std::optional<ShapeViolation> find_violation(const std::vector<Point>& ring) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % n];
        if (a.x != b.x && a.y != b.y) return ShapeViolation::NotAxisParallel;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (ring[i] == ring[(i + 1) % n]) return ShapeViolation::Degenerate;
    }
    if (n % 2 != 0) return ShapeViolation::OddCornerCount;
    if (n < 4) return ShapeViolation::TooFewCorners;
    const auto edges = edges_of(ring);
    for (std::size_t i = 0; i < n; ++i) {
        if (edges[i].horizontal() == edges[(i + 1) % n].horizontal()) return ShapeViolation::Degenerate;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent through the closing corner
            if (segments_touch(edges[i], edges[j])) return ShapeViolation::SelfIntersecting;
        }
    }
    return std::nullopt;
}

std::vector<Point> normalize_ring(std::vector<Point> ring) {
    if (signed_area(ring) > 0.0) std::reverse(ring.begin(), ring.end());
    const auto first = std::min_element(ring.begin(), ring.end(), [](const Point& a, const Point& b) {
        return std::tie(a.x, a.y) < std::tie(b.x, b.y);
    });
    std::rotate(ring.begin(), first, ring.end());
    return ring;
}

std::vector<Point> strip_closing(std::span<const Point> corners) {
    std::vector<Point> ring(corners.begin(), corners.end());
    if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
    return ring;
}

std::vector<double> unique_xs(const std::vector<Point>& ring) {
    std::vector<double> xs;
    for (const Point& p : ring) xs.push_back(p.x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

}  // namespace

double overlap_area(const Rect& a, const Rect& b) {
    const double w = std::min(a.xhi, b.xhi) - std::max(a.xlo, b.xlo);
    const double h = std::min(a.yhi, b.yhi) - std::max(a.ylo, b.ylo);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

bool interiors_overlap(const Rect& a, const Rect& b) {
    const double w = std::min(a.xhi, b.xhi) - std::max(a.xlo, b.xlo);
    const double h = std::min(a.yhi, b.yhi) - std::max(a.ylo, b.ylo);
    const double scale = std::max({1.0, std::abs(a.xhi), std::abs(a.yhi), std::abs(b.xhi), std::abs(b.yhi)});
    return w > kGeomEps * scale && h > kGeomEps * scale;
}

Side transform_side(Side side, Orientation o) {
    const bool flip_y = (static_cast<int>(o) & 1) != 0;
    const bool flip_x = (static_cast<int>(o) & 2) != 0;
    switch (side) {
        case Side::N: return flip_y ? Side::S : Side::N;
        case Side::S: return flip_y ? Side::N : Side::S;
        case Side::E: return flip_x ? Side::W : Side::E;
        case Side::W: return flip_x ? Side::E : Side::W;
    }
    return side;
}

std::string_view to_string(Orientation o) {
    switch (o) {
        case Orientation::R0: return "R0";
        case Orientation::MX: return "MX";
        case Orientation::MY: return "MY";
        case Orientation::R180: return "R180";
    }
    return "?";
}

std::string_view to_string(Side s) {
    switch (s) {
        case Side::N: return "N";
        case Side::E: return "E";
        case Side::S: return "S";
        case Side::W: return "W";
    }
    return "?";
}

std::optional<Orientation> parse_orientation(std::string_view text) {
    for (Orientation o : kAllOrientations) {
        if (to_string(o) == text) return o;
    }
    return std::nullopt;
}

std::optional<Side> parse_side(std::string_view text) {
    for (Side s : {Side::N, Side::E, Side::S, Side::W}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

std::string_view to_string(ShapeViolation v) {
    switch (v) {
        case ShapeViolation::NotAxisParallel: return "NotAxisParallel";
        case ShapeViolation::OddCornerCount: return "OddCornerCount";
        case ShapeViolation::TooFewCorners: return "TooFewCorners";
        case ShapeViolation::Degenerate: return "Degenerate";
        case ShapeViolation::SelfIntersecting: return "SelfIntersecting";
    }
    return "?";
}

GeometryError::GeometryError(ShapeViolation kind)
    : Error(std::string("invalid rectilinear polygon: ") + std::string(to_string(kind))), kind_(kind) {}

double signed_area(std::span<const Point> ring) {
    double twice = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % ring.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return twice / 2.0;
}

RectilinearShape RectilinearShape::build(std::vector<Point> normalized) {
    RectilinearShape s;
    s.corners_ = std::move(normalized);
    s.area_ = std::abs(signed_area(s.corners_));
    s.bbox_ = {s.corners_[0].x, s.corners_[0].y, s.corners_[0].x, s.corners_[0].y};
    for (const Point& p : s.corners_) {
        s.bbox_.xlo = std::min(s.bbox_.xlo, p.x);
        s.bbox_.ylo = std::min(s.bbox_.ylo, p.y);
        s.bbox_.xhi = std::max(s.bbox_.xhi, p.x);
        s.bbox_.yhi = std::max(s.bbox_.yhi, p.y);
    }
    s.rects_ = decompose_rectilinear(s);
    return s;
}

RectilinearShape RectilinearShape::from_corners(std::vector<Point> corners) {
    auto result = validate_rectilinear(corners);
    if (auto* v = std::get_if<ShapeViolation>(&result)) throw GeometryError(*v);
    return std::get<RectilinearShape>(std::move(result));
}

RectilinearShape RectilinearShape::rectangle(double width, double height) {
    return from_rect({0.0, 0.0, width, height});
}

RectilinearShape RectilinearShape::from_rect(const Rect& r) {
    return from_corners({{r.xlo, r.ylo}, {r.xlo, r.yhi}, {r.xhi, r.yhi}, {r.xhi, r.ylo}});
}

RectilinearShape RectilinearShape::translated(double dx, double dy) const {
    RectilinearShape s = *this;
    for (Point& p : s.corners_) {
        p.x += dx;
        p.y += dy;
    }
    for (Rect& r : s.rects_) r = r.translated(dx, dy);
    s.bbox_ = bbox_.translated(dx, dy);
    return s;
}

RectilinearShape RectilinearShape::at_origin() const {
    if (bbox_.xlo == 0.0 && bbox_.ylo == 0.0) return *this;
    return translated(-bbox_.xlo, -bbox_.ylo);
}

bool RectilinearShape::on_boundary(Point p) const { return !sides_at(p).empty(); }

bool RectilinearShape::contains(Point p) const {
    for (const Rect& r : rects_) {
        if (p.x >= r.xlo - kGeomEps && p.x <= r.xhi + kGeomEps && p.y >= r.ylo - kGeomEps &&
            p.y <= r.yhi + kGeomEps) {
            return true;
        }
    }
    return false;
}

std::vector<Side> RectilinearShape::sides_at(Point p) const {
    std::vector<Side> sides;
    for (const Edge& e : edges_of(corners_)) {
        if (e.horizontal()) {
            if (!near(p.y, e.a.y)) continue;
            if (p.x < std::min(e.a.x, e.b.x) - kGeomEps || p.x > std::max(e.a.x, e.b.x) + kGeomEps) continue;
            sides.push_back(e.b.x > e.a.x ? Side::N : Side::S);
        } else {
            if (!near(p.x, e.a.x)) continue;
            if (p.y < std::min(e.a.y, e.b.y) - kGeomEps || p.y > std::max(e.a.y, e.b.y) + kGeomEps) continue;
            sides.push_back(e.b.y > e.a.y ? Side::W : Side::E);
        }
    }
    return sides;
}

std::variant<RectilinearShape, ShapeViolation> validate_rectilinear(std::span<const Point> corners) {
    std::vector<Point> ring = strip_closing(corners);
    if (auto v = find_violation(ring)) return *v;
    return RectilinearShape::build(normalize_ring(std::move(ring)));
}

std::vector<Rect> decompose_rectilinear(const RectilinearShape& shape) {
    const auto& ring = shape.corners();
    const std::vector<double> xs = unique_xs(ring);
    std::vector<std::vector<Interval>> per_slab;
    per_slab.reserve(xs.size());
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        per_slab.push_back(slab_intervals(ring, (xs[i] + xs[i + 1]) / 2.0));
    }
    return sweep(xs, per_slab);
}

std::vector<Rect> complement_nonplaceable(const RectilinearShape& canvas, const Rect& bounding) {
    const auto& ring = canvas.corners();
    std::vector<double> xs = unique_xs(ring);
    xs.push_back(bounding.xlo);
    xs.push_back(bounding.xhi);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    xs.erase(std::remove_if(xs.begin(), xs.end(),
                            [&](double x) { return x < bounding.xlo || x > bounding.xhi; }),
             xs.end());

    std::vector<std::vector<Interval>> per_slab;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const auto inside = slab_intervals(ring, (xs[i] + xs[i + 1]) / 2.0);
        std::vector<Interval> gaps;
        double cursor = bounding.ylo;
        for (const auto& [lo, hi] : inside) {
            const double clo = std::max(lo, bounding.ylo);
            const double chi = std::min(hi, bounding.yhi);
            if (chi <= clo) continue;
            if (clo > cursor) gaps.emplace_back(cursor, clo);
            cursor = std::max(cursor, chi);
        }
        if (cursor < bounding.yhi) gaps.emplace_back(cursor, bounding.yhi);
        per_slab.push_back(std::move(gaps));
    }
    if (xs.size() < 2) return {};
    return sweep(xs, per_slab);
}

Point orient_point(Point p, double width, double height, Orientation o) {
    if ((static_cast<int>(o) & 1) != 0) p.y = height - p.y;
    if ((static_cast<int>(o) & 2) != 0) p.x = width - p.x;
    return p;
}

RectilinearShape apply_orientation(const RectilinearShape& shape, Orientation o) {
    const RectilinearShape base = shape.at_origin();
    if (o == Orientation::R0) return base;
    const double w = base.bbox().width();
    const double h = base.bbox().height();
    std::vector<Point> pts;
    pts.reserve(base.corners().size());
    for (const Point& p : base.corners()) pts.push_back(orient_point(p, w, h, o));
    return RectilinearShape::from_corners(std::move(pts));
}

CellSpan covered_span(double lo, double hi, double cell) {
    if (hi <= lo) return {0, 0};
    const int first = static_cast<int>(std::floor(lo / cell + kGeomEps));
    const int last = static_cast<int>(std::ceil(hi / cell - kGeomEps));
    return {first, std::max(first, last)};
}

std::vector<CellIndex> rasterize_shape(const RectilinearShape& shape, double cell_w, double cell_h,
                                       CellIndex anchor) {
    const RectilinearShape base = shape.at_origin();
    std::vector<CellIndex> cells;
    for (const Rect& r : base.rects()) {
        const CellSpan cs = covered_span(r.xlo, r.xhi, cell_w);
        const CellSpan rs = covered_span(r.ylo, r.yhi, cell_h);
        for (int row = rs.first; row < rs.last; ++row) {
            for (int col = cs.first; col < cs.last; ++col) {
                cells.push_back({anchor.row + row, anchor.col + col});
            }
        }
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return cells;
}

}  // namespace macroplace
