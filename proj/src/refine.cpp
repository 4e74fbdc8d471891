#include "macroplace/refine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace macroplace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gap between a moving rect and an obstacle ahead of it in direction (dx, dy);
// infinity when the obstacle is not in the way.
double gap_ahead(const Rect& r, const Rect& o, int dx, int dy) {
    if (dx != 0) {
        if (std::min(r.yhi, o.yhi) - std::max(r.ylo, o.ylo) <= kGeomEps) return kInf;
        if (dx < 0) return o.xhi <= r.xlo + kGeomEps ? std::max(0.0, r.xlo - o.xhi) : kInf;
        return o.xlo >= r.xhi - kGeomEps ? std::max(0.0, o.xlo - r.xhi) : kInf;
    }
    if (std::min(r.xhi, o.xhi) - std::max(r.xlo, o.xlo) <= kGeomEps) return kInf;
    if (dy < 0) return o.yhi <= r.ylo + kGeomEps ? std::max(0.0, r.ylo - o.yhi) : kInf;
    return o.ylo >= r.yhi - kGeomEps ? std::max(0.0, o.ylo - r.yhi) : kInf;
}

constexpr std::array<std::array<int, 2>, 4> kDirections{{{-1, 0}, {0, -1}, {1, 0}, {0, 1}}};

}  // namespace

std::string_view to_string(MoveKind kind) {
    switch (kind) {
        case MoveKind::Shift: return "shift";
        case MoveKind::Swap: return "swap";
        case MoveKind::Flip: return "flip";
        case MoveKind::Relocate: return "relocate";
    }
    return "?";
}

RefineContext::RefineContext(const Design& design)
    : design_(&design), pins_(design) {
    for (int a = 0; a < design.macro_count(); ++a) {
        for (int b = a + 1; b < design.macro_count(); ++b) {
            if (design.group_of(a) == design.group_of(b) &&
                design.netlist().macros[a].shape == design.netlist().macros[b].shape) {
                swap_pairs_.emplace_back(a, b);
            }
        }
    }
}

bool RefineContext::inside_canvas(const Placement& placement, int macro) const {
    for (const Rect& r : macro_rects(*design_, placement, macro)) {
        if (!inside_canvas(r)) return false;
    }
    return true;
}

bool RefineContext::overlaps_other(const Placement& placement, int macro) const {
    const std::vector<Rect> mine = macro_rects(*design_, placement, macro);
    const Rect mb = macro_bbox(*design_, placement, macro);
    for (int j = 0; j < design_->macro_count(); ++j) {
        if (j == macro || !placement.macros[j].placed) continue;
        if (!interiors_overlap(mb, macro_bbox(*design_, placement, j))) continue;
        for (const Rect& o : macro_rects(*design_, placement, j)) {
            for (const Rect& r : mine) {
                if (interiors_overlap(r, o)) return true;
            }
        }
    }
    return false;
}

bool RefineContext::legal(const Placement& placement, int macro) const {
    return inside_canvas(placement, macro) && !overlaps_other(placement, macro);
}

double RefineContext::slide_distance(const Placement& placement, int macro, int dx, int dy,
                                     bool include_macros) const {
    const Rect& bb = design_->grid().canvas().bbox();
    const std::vector<Rect> mine = macro_rects(*design_, placement, macro);
    double best = kInf;
    for (const Rect& r : mine) {
        if (dx < 0) best = std::min(best, r.xlo - bb.xlo);
        if (dx > 0) best = std::min(best, bb.xhi - r.xhi);
        if (dy < 0) best = std::min(best, r.ylo - bb.ylo);
        if (dy > 0) best = std::min(best, bb.yhi - r.yhi);
        for (const Rect& h : holes()) best = std::min(best, gap_ahead(r, h, dx, dy));
        if (!include_macros) continue;
        for (int j = 0; j < design_->macro_count(); ++j) {
            if (j == macro || !placement.macros[j].placed) continue;
            for (const Rect& o : macro_rects(*design_, placement, j)) best = std::min(best, gap_ahead(r, o, dx, dy));
        }
    }
    return std::max(0.0, best);
}

double RefineContext::boundary_distance(const Placement& placement, int macro) const {
    double best = kInf;
    for (const auto& [dx, dy] : kDirections) best = std::min(best, slide_distance(placement, macro, dx, dy, false));
    return best;
}

namespace {

// Overlap-free coarse anchors for a macro in one orientation, ignoring the macro itself.
PositionMask free_anchors(const Design& design, const Placement& placement, int skip, Orientation o) {
    Occupancy occ(design.grid());
    for (int j = 0; j < design.macro_count(); ++j) {
        if (j == skip || !placement.macros[j].placed) continue;
        occ.mark(j, macro_rects(design, placement, j), design.grid());
    }
    return overlap_free_mask(occ, design.oriented(skip, o).footprint);
}

}  // namespace

Move propose_move(const RefineContext& ctx, const Placement& placement, std::mt19937_64& rng, bool allow_relocate) {
    const Design& design = ctx.design();
    std::vector<int> placed;
    for (int m = 0; m < design.macro_count(); ++m) {
        if (placement.macros[m].placed) placed.push_back(m);
    }
    if (placed.empty()) throw IllegalAction("no placed macro to move");
    const int kinds = allow_relocate ? 4 : 3;
    Move mv;
    mv.kind = static_cast<MoveKind>(std::uniform_int_distribution<int>(0, kinds - 1)(rng));
    const int m = placed[std::uniform_int_distribution<std::size_t>(0, placed.size() - 1)(rng)];

    switch (mv.kind) {
        case MoveKind::Shift: {
            mv.macro = m;
            mv.target = placement.macros[m];
            int best_dir = 0;
            double best = kInf;
            for (int d = 0; d < 4; ++d) {
                const double dist = ctx.slide_distance(placement, m, kDirections[d][0], kDirections[d][1], false);
                if (dist < best - kGeomEps) {
                    best = dist;
                    best_dir = d;
                }
            }
            const auto [dx, dy] = kDirections[best_dir];
            const double slide = ctx.slide_distance(placement, m, dx, dy, true);
            const double step = dx != 0 ? ctx.fine().floor_x(slide) : ctx.fine().floor_y(slide);
            mv.target.origin.x += dx * step;
            mv.target.origin.y += dy * step;
            break;
        }
        case MoveKind::Swap: {
            std::vector<std::pair<int, int>> eligible;
            for (const auto& pr : ctx.swap_pairs()) {
                if (placement.macros[pr.first].placed && placement.macros[pr.second].placed) eligible.push_back(pr);
            }
            if (eligible.empty()) break;
            const auto [a, b] = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
            mv.macro = a;
            mv.other = b;
            mv.target = placement.macros[b];
            mv.other_target = placement.macros[a];
            break;
        }
        case MoveKind::Flip: {
            mv.macro = m;
            mv.target = placement.macros[m];
            const Orientation axis = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? Orientation::MX
                                                                                       : Orientation::MY;
            mv.target.orientation = compose(axis, mv.target.orientation);
            break;
        }
        case MoveKind::Relocate: {
            mv.macro = m;
            const Orientation o = placement.macros[m].orientation;
            const std::vector<int> anchors = free_anchors(design, placement, m, o).indices();
            mv.target = placement.macros[m];
            if (anchors.empty()) break;
            const int pos = anchors[std::uniform_int_distribution<std::size_t>(0, anchors.size() - 1)(rng)];
            mv.target = place_at_cell(design, PositionMask::cell_at(pos), o);
            break;
        }
    }
    return mv;
}

void apply_move(Placement& placement, const Move& move) {
    if (move.macro < 0) return;
    placement.macros[move.macro] = move.target;
    if (move.other >= 0) placement.macros[move.other] = move.other_target;
}

double weighted_cost(const Design& design, const Placement& placement, const RewardWeights& weights) {
    return -evaluate_placement(design, placement, weights).reward;
}

namespace {

bool move_is_legal(const RefineContext& ctx, const Placement& p, const Move& mv) {
    if (mv.macro < 0) return true;
    if (!ctx.legal(p, mv.macro)) return false;
    return mv.other < 0 || ctx.legal(p, mv.other);
}

}  // namespace

AnnealResult anneal(const Design& design, const Placement& initial, const SASchedule& schedule,
                    const RewardWeights& weights, std::uint64_t seed, bool allow_relocate) {
    const RefineContext ctx(design);
    std::mt19937_64 rng(seed);
    AnnealResult res;
    Placement cur = initial;
    cur.clusters_placed = false;
    double cur_cost = weighted_cost(design, cur, weights);
    int cur_viol = ctx.violation_count(cur);
    res.initial_cost = cur_cost;
    res.initial_violations = cur_viol;
    res.best = evaluate_placement(design, cur, weights).placement;
    res.best_cost = cur_cost;
    res.best_violations = cur_viol;

    int placed = 0;
    for (const auto& mp : cur.macros) placed += mp.placed ? 1 : 0;
    if (placed == 0) return res;

    double t = schedule.t0;
    if (t <= 0.0) {
        std::vector<double> samples;
        for (int i = 0; i < schedule.calibration_moves; ++i) {
            Placement trial = cur;
            const Move mv = propose_move(ctx, trial, rng, allow_relocate);
            apply_move(trial, mv);
            if (move_is_legal(ctx, trial, mv)) samples.push_back(weighted_cost(design, trial, weights));
        }
        double mean = 0.0, var = 0.0;
        for (double s : samples) mean += s;
        if (!samples.empty()) mean /= static_cast<double>(samples.size());
        for (double s : samples) var += (s - mean) * (s - mean);
        t = samples.size() > 1 ? std::sqrt(var / static_cast<double>(samples.size() - 1)) : 0.0;
        t = std::max(t, 1e-6);
    }
    res.t0 = t;

    int iteration = 0;
    for (int sweep = 0; sweep < schedule.sweeps; ++sweep) {
        for (int k = 0; k < placed; ++k, ++iteration) {
            Placement trial = cur;
            const Move mv = propose_move(ctx, trial, rng, allow_relocate);
            apply_move(trial, mv);
            bool accepted = false;
            double trial_cost = cur_cost;
            if (move_is_legal(ctx, trial, mv)) {
                const int viol = ctx.violation_count(trial);
                if (viol < cur_viol) {
                    accepted = true;
                    trial_cost = weighted_cost(design, trial, weights);
                } else if (viol == cur_viol) {
                    trial_cost = weighted_cost(design, trial, weights);
                    const double delta = trial_cost - cur_cost;
                    accepted = delta <= 0.0 ||
                               (t > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < std::exp(-delta / t));
                }
                if (accepted) {
                    cur = std::move(trial);
                    cur_cost = trial_cost;
                    cur_viol = viol;
                    if (cur_viol < res.best_violations ||
                        (cur_viol == res.best_violations && cur_cost < res.best_cost)) {
                        res.best = evaluate_placement(design, cur, weights).placement;
                        res.best_cost = cur_cost;
                        res.best_violations = cur_viol;
                    }
                }
            }
            res.trace.push_back({iteration, t, cur_cost, accepted});
            res.best_trace.push_back(res.best_cost);
        }
        t *= schedule.cooling;
    }
    return res;
}

Placement random_legal_placement(const Design& design, std::mt19937_64& rng) {
    Placement p = Placement::empty(design);
    Occupancy occ(design.grid());
    for (int m : design.placement_order()) {
        std::vector<std::pair<int, Orientation>> options;
        for (Orientation o : kAllOrientations) {
            for (int pos : overlap_free_mask(occ, design.oriented(m, o).footprint).indices()) options.emplace_back(pos, o);
        }
        if (options.empty()) throw NoLegalAction("no free anchor for macro '" + design.netlist().macros[m].name + "'");
        const auto [pos, o] = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
        const CellIndex cell = PositionMask::cell_at(pos);
        const OrientedMacro& om = design.oriented(m, o);
        occ.commit(m, om.footprint, cell, om.shape, design.grid());
        p.macros[m] = place_at_cell(design, cell, o);
    }
    return p;
}

AnnealResult sa_place_from_scratch(const Design& design, const SASchedule& schedule, const RewardWeights& weights,
                                   std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Placement start = random_legal_placement(design, rng);
    return anneal(design, start, schedule, weights, rng(), true);
}

void write_sa_trace(const std::vector<SATraceRow>& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "iteration,temperature,cost,accepted\n";
    char line[160];
    for (const SATraceRow& r : trace) {
        std::snprintf(line, sizeof line, "%d,%.10g,%.10g,%d\n", r.iteration, r.temperature, r.cost, r.accepted ? 1 : 0);
        out << line;
    }
}

}  // namespace macroplace
