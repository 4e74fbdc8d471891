#pragma once

#include <span>
#include <vector>

#include "macroplace/design.hpp"

namespace macroplace {

struct RewardWeights {
    double alpha = 5.0;  // wirelength
    double beta = 1.0;   // congestion
    double gamma = 0.5;  // density
    double omega = 0.1;  // hierarchy
};

struct ProxyCosts {
    double wl = 0.0;
    double cong = 0.0;
    double dens = 0.0;
    double hier = 0.0;

    bool operator==(const ProxyCosts&) const = default;
};

double weighted_total(const ProxyCosts& costs, const RewardWeights& w);
double reward(const ProxyCosts& costs, const RewardWeights& w);

struct PinNet {
    double weight = 1.0;
    std::vector<Point> pins;
};

// Weighted HPWL normalized by the total weight times the canvas half-perimeter.
double wirelength_cost(std::span<const PinNet> nets, double canvas_half_perimeter);

// Mean of the largest ceil(fraction * n) values; 0 for an empty input.
double top_fraction_mean(std::span<const double> values, double fraction);

inline constexpr double kDensityTopFraction = 0.10;
inline constexpr double kCongestionTopFraction = 0.05;
inline constexpr double kMacroBlockage = 0.5;

double density_cost(std::span<const double> cell_densities);

// A net's pins as grid cells.
struct CellNetBox {
    int row_lo = 0;
    int col_lo = 0;
    int row_hi = 0;
    int col_hi = 0;
};

// Per-cell demand/capacity with every net's HPWL (in cells) smeared uniformly
// over its bounding box of cells; capacity is 1 - blockage * macro coverage.
std::vector<double> congestion_map(int rows, int cols, std::span<const CellNetBox> nets,
                                   std::span<const double> macro_coverage, double blockage = kMacroBlockage);
double congestion_cost(int rows, int cols, std::span<const CellNetBox> nets, std::span<const double> macro_coverage,
                       double blockage = kMacroBlockage);

// Per group: ordered-pair sum of center distances over the ordered-pair sum
// of min(w_i + w_j, h_i + h_j); averaged over all groups, singletons count 0.
double hierarchy_cost(std::span<const std::vector<Rect>> group_bboxes);

// Adapters over a placed design. Every endpoint must be placed.
std::vector<PinNet> pin_nets(const Design& design, const Placement& placement);
double wirelength_cost(const Design& design, const Placement& placement);
std::vector<CellNetBox> cell_net_boxes(const Design& design, const Placement& placement);
double hierarchy_cost(const Design& design, const Placement& placement);

// Exact macro coverage fraction per cell (row-major), non-placeable cells
// excluded.
std::vector<double> macro_coverage(const Design& design, const Placement& placement);

// Macro coverage plus each cluster's area spread as a square centered on it.
std::vector<double> cell_densities(const Design& design, const Placement& placement);

ProxyCosts compute_costs(const Design& design, const Placement& placement);

}  // namespace macroplace
