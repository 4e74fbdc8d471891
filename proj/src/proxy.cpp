#include "macroplace/proxy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace macroplace {

double weighted_total(const ProxyCosts& c, const RewardWeights& w) {
    return w.alpha * c.wl + w.beta * c.cong + w.gamma * c.dens + w.omega * c.hier;
}

double reward(const ProxyCosts& costs, const RewardWeights& w) { return -weighted_total(costs, w); }

double wirelength_cost(std::span<const PinNet> nets, double canvas_half_perimeter) {
    double num = 0.0;
    double den = 0.0;
    for (const PinNet& net : nets) {
        if (net.pins.empty()) continue;
        double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
        double ylo = xlo, yhi = -xlo;
        for (const Point& p : net.pins) {
            xlo = std::min(xlo, p.x);
            xhi = std::max(xhi, p.x);
            ylo = std::min(ylo, p.y);
            yhi = std::max(yhi, p.y);
        }
        num += net.weight * ((xhi - xlo) + (yhi - ylo));
        den += net.weight * canvas_half_perimeter;
    }
    return den > 0.0 ? num / den : 0.0;
}

double top_fraction_mean(std::span<const double> values, double fraction) {
    if (values.empty()) return 0.0;
    const auto k = static_cast<std::size_t>(
        std::clamp<double>(std::ceil(fraction * static_cast<double>(values.size()) - 1e-12), 1.0,
                           static_cast<double>(values.size())));
    std::vector<double> v(values.begin(), values.end());
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end(), std::greater<>());
    std::sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), std::greater<>());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += v[i];
    return sum / static_cast<double>(k);
}

double density_cost(std::span<const double> cell_densities) {
    return top_fraction_mean(cell_densities, kDensityTopFraction);
}

std::vector<double> congestion_map(int rows, int cols, std::span<const CellNetBox> nets,
                                   std::span<const double> macro_coverage, double blockage) {
    std::vector<double> demand(static_cast<std::size_t>(rows) * cols, 0.0);
    for (const CellNetBox& b : nets) {
        const int hpwl = (b.col_hi - b.col_lo) + (b.row_hi - b.row_lo);
        if (hpwl == 0) continue;
        const double per_cell = static_cast<double>(hpwl) / ((b.col_hi - b.col_lo + 1) * (b.row_hi - b.row_lo + 1));
        for (int r = b.row_lo; r <= b.row_hi; ++r) {
            for (int c = b.col_lo; c <= b.col_hi; ++c) demand[r * cols + c] += per_cell;
        }
    }
    for (std::size_t i = 0; i < demand.size(); ++i) {
        const double cover = macro_coverage.empty() ? 0.0 : std::min(1.0, macro_coverage[i]);
        demand[i] /= 1.0 - blockage * cover;
    }
    return demand;
}

double congestion_cost(int rows, int cols, std::span<const CellNetBox> nets, std::span<const double> macro_coverage,
                       double blockage) {
    return top_fraction_mean(congestion_map(rows, cols, nets, macro_coverage, blockage), kCongestionTopFraction);
}

double hierarchy_cost(std::span<const std::vector<Rect>> group_bboxes) {
    if (group_bboxes.empty()) return 0.0;
    double total = 0.0;
    for (const auto& boxes : group_bboxes) {
        double dist = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            for (std::size_t j = 0; j < boxes.size(); ++j) {
                if (i == j) continue;
                const Point a = boxes[i].center(), b = boxes[j].center();
                dist += std::hypot(a.x - b.x, a.y - b.y);
                scale += std::min(boxes[i].width() + boxes[j].width(), boxes[i].height() + boxes[j].height());
            }
        }
        if (scale > 0.0) total += dist / scale;
    }
    return total / static_cast<double>(group_bboxes.size());
}

std::vector<PinNet> pin_nets(const Design& design, const Placement& placement) {
    std::vector<PinNet> out;
    out.reserve(design.nets().size());
    for (const ResolvedNet& net : design.nets()) {
        PinNet pn{net.weight, {}};
        pn.pins.reserve(net.pins.size());
        for (const Endpoint& e : net.pins) pn.pins.push_back(endpoint_position(design, placement, e));
        out.push_back(std::move(pn));
    }
    return out;
}

double wirelength_cost(const Design& design, const Placement& placement) {
    const Rect& bb = design.grid().canvas().bbox();
    return wirelength_cost(pin_nets(design, placement), bb.width() + bb.height());
}

std::vector<CellNetBox> cell_net_boxes(const Design& design, const Placement& placement) {
    std::vector<CellNetBox> out;
    for (const PinNet& net : pin_nets(design, placement)) {
        CellNetBox b{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), -1, -1};
        for (const Point& p : net.pins) {
            const CellIndex c = design.grid().cell_of(p);
            b.row_lo = std::min(b.row_lo, c.row);
            b.row_hi = std::max(b.row_hi, c.row);
            b.col_lo = std::min(b.col_lo, c.col);
            b.col_hi = std::max(b.col_hi, c.col);
        }
        if (b.row_hi >= 0) out.push_back(b);
    }
    return out;
}

double hierarchy_cost(const Design& design, const Placement& placement) {
    std::vector<std::vector<Rect>> boxes(design.group_count());
    for (int m = 0; m < design.macro_count(); ++m) {
        if (!placement.macros[m].placed) continue;
        boxes[design.group_of(m)].push_back(macro_bbox(design, placement, m));
    }
    return hierarchy_cost(boxes);
}

std::vector<double> macro_coverage(const Design& design, const Placement& placement) {
    Occupancy occ(design.grid());
    for (int m = 0; m < design.macro_count(); ++m) {
        if (placement.macros[m].placed) occ.mark(m, macro_rects(design, placement, m), design.grid());
    }
    const auto cov = occ.coverage();
    return {cov.begin(), cov.end()};
}

std::vector<double> cell_densities(const Design& design, const Placement& placement) {
    const GridSpec& grid = design.grid();
    std::vector<double> dens = macro_coverage(design, placement);
    if (!placement.clusters_placed) return dens;
    const double cell_area = grid.cell_w() * grid.cell_h();
    const Point o = grid.origin();
    for (int k = 0; k < design.cluster_count(); ++k) {
        const double half = std::sqrt(design.netlist().clusters[k].area) / 2.0;
        const Point c = placement.clusters[k];
        const Rect sq{c.x - half, c.y - half, c.x + half, c.y + half};
        const CellSpan cs = covered_span(sq.xlo - o.x, sq.xhi - o.x, grid.cell_w());
        const CellSpan rs = covered_span(sq.ylo - o.y, sq.yhi - o.y, grid.cell_h());
        for (int r = std::max(0, rs.first); r < std::min(grid.rows(), rs.last); ++r) {
            for (int col = std::max(0, cs.first); col < std::min(grid.cols(), cs.last); ++col) {
                dens[r * grid.cols() + col] += overlap_area(sq, grid.cell_rect(r, col)) / cell_area;
            }
        }
    }
    return dens;
}

ProxyCosts compute_costs(const Design& design, const Placement& placement) {
    const GridSpec& grid = design.grid();
    const std::vector<double> cover = macro_coverage(design, placement);
    const std::vector<CellNetBox> boxes = cell_net_boxes(design, placement);
    ProxyCosts c;
    c.wl = wirelength_cost(design, placement);
    c.cong = congestion_cost(grid.rows(), grid.cols(), boxes, cover);
    c.dens = density_cost(cell_densities(design, placement));
    c.hier = hierarchy_cost(design, placement);
    return c;
}

}  // namespace macroplace
