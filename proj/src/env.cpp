#include "macroplace/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace macroplace {

namespace {

Occupancy occupancy_of(const Design& design, const Placement& placement) {
    Occupancy occ(design.grid());
    for (int m = 0; m < design.macro_count(); ++m) {
        if (placement.macros[m].placed) occ.mark(m, macro_rects(design, placement, m), design.grid());
    }
    return occ;
}

struct Link {
    int cluster = -1;  // neighbour cluster, or -1 for a fixed point
    Point fixed;
    double weight = 0.0;
};

}  // namespace

std::vector<Point> place_clusters(const Design& design, const Placement& placement, int iterations) {
    const int k = design.cluster_count();
    if (k == 0) return {};
    const GridSpec& grid = design.grid();
    const Occupancy occ = occupancy_of(design, placement);

    std::vector<Point> free_centers;
    for (int r = 0; r < grid.rows(); ++r) {
        for (int c = 0; c < grid.cols(); ++c) {
            if (occ.is_free(r, c)) free_centers.push_back(grid.cell_rect(r, c).center());
        }
    }
    Point free_centroid = grid.canvas().bbox().center();
    if (!free_centers.empty()) {
        Point s;
        for (const Point& p : free_centers) {
            s.x += p.x;
            s.y += p.y;
        }
        free_centroid = {s.x / free_centers.size(), s.y / free_centers.size()};
    }

    std::vector<std::vector<Link>> links(k);
    for (const ResolvedNet& net : design.nets()) {
        const double w = net.weight / static_cast<double>(net.pins.size() - 1);
        for (const Endpoint& self : net.pins) {
            if (self.kind != PinOwner::Cluster) continue;
            for (const Endpoint& other : net.pins) {
                if (&other == &self) continue;
                if (other.kind == PinOwner::Cluster) {
                    if (other.index != self.index) links[self.index].push_back({other.index, {}, w});
                } else {
                    links[self.index].push_back({-1, endpoint_position(design, placement, other), w});
                }
            }
        }
    }

    auto snap = [&](Point p) {
        const Rect& bb = grid.canvas().bbox();
        p.x = std::clamp(p.x, bb.xlo, bb.xhi);
        p.y = std::clamp(p.y, bb.ylo, bb.yhi);
        const CellIndex cell = grid.cell_of(p);
        if (occ.is_free(cell.row, cell.col) || free_centers.empty()) return p;
        double best = std::numeric_limits<double>::infinity();
        Point out = p;
        for (const Point& c : free_centers) {
            const double d = std::hypot(c.x - p.x, c.y - p.y);
            if (d < best) {
                best = d;
                out = c;
            }
        }
        return out;
    };

    std::vector<Point> pos(k);
    for (int i = 0; i < k; ++i) {
        double wsum = 0.0;
        Point s;
        for (const Link& l : links[i]) {
            if (l.cluster >= 0) continue;
            s.x += l.weight * l.fixed.x;
            s.y += l.weight * l.fixed.y;
            wsum += l.weight;
        }
        pos[i] = snap(wsum > 0.0 ? Point{s.x / wsum, s.y / wsum} : free_centroid);
    }

    for (int it = 0; it < iterations; ++it) {
        std::vector<Point> next = pos;
        for (int i = 0; i < k; ++i) {
            double wsum = 0.0;
            Point s;
            for (const Link& l : links[i]) {
                const Point q = l.cluster >= 0 ? pos[l.cluster] : l.fixed;
                s.x += l.weight * q.x;
                s.y += l.weight * q.y;
                wsum += l.weight;
            }
            if (wsum <= 0.0) continue;
            next[i] = snap({(pos[i].x + s.x / wsum) / 2.0, (pos[i].y + s.y / wsum) / 2.0});
        }
        pos = std::move(next);
    }
    return pos;
}

EpisodeRecord evaluate_placement(const Design& design, Placement placement, const RewardWeights& weights) {
    placement.clusters = place_clusters(design, placement);
    placement.clusters_placed = true;
    EpisodeRecord rec;
    rec.costs = compute_costs(design, placement);
    rec.reward = reward(rec.costs, weights);
    rec.placement = std::move(placement);
    return rec;
}

PlacementEnv::PlacementEnv(const Design& design, RewardWeights weights)
    : design_(&design), pins_(design), weights_(weights), occ_(design.grid()) {
    reset();
}

void PlacementEnv::reset() {
    t_ = 0;
    done_ = false;
    occ_ = Occupancy(design_->grid());
    placement_ = Placement::empty(*design_);
    terminal_reward_.reset();
    record_.reset();
    masks_ = MaskStack{};
    if (horizon() == 0) {
        finish();
    } else {
        refresh_mask();
    }
}

void PlacementEnv::refresh_mask() {
    const int m = current_macro();
    MaskRequest req;
    req.grid = &design_->grid();
    req.occupancy = &occ_;
    for (Orientation o : kAllOrientations) req.footprints[index_of(o)] = &design_->oriented(m, o).footprint;
    const int g = design_->group_of(m);
    for (int j = 0; j < t_; ++j) {
        const int other = design_->placement_order()[j];
        if (design_->group_of(other) != g) continue;
        const MacroPlacement& mp = placement_.macros[other];
        const Footprint& fp = design_->oriented(other, mp.orientation).footprint;
        req.same_group_placed.push_back({mp.anchor, fp.rows, fp.cols});
    }
    Placement trial = placement_;
    req.preferred = [&](int pos, int o) {
        trial.macros[m] = place_at_cell(*design_, PositionMask::cell_at(pos), static_cast<Orientation>(o));
        return pins_.involving(trial, m) == 0;
    };
    try {
        masks_ = compose_position_mask(req);
    } catch (const NoLegalAction&) {
        done_ = true;
        masks_ = MaskStack{};
        terminal_reward_ = kAbortPenalty;
        EpisodeRecord rec;
        rec.reward = kAbortPenalty;
        rec.placement = placement_;
        rec.aborted = true;
        record_ = std::move(rec);
    }
}

std::array<bool, 4> PlacementEnv::legal_orientations(int position) const {
    std::array<bool, 4> out{};
    for (int o = 0; o < 4; ++o) out[o] = masks_.per_orientation[o].test(position);
    return out;
}

double PlacementEnv::step(StepAction action) {
    if (done_) throw IllegalAction("episode is already done");
    if (!masks_.per_orientation[index_of(action.orientation)].test(action.position)) {
        throw IllegalAction("position " + std::to_string(action.position) + " with orientation " +
                            std::string(to_string(action.orientation)) + " is masked");
    }
    const int m = current_macro();
    const CellIndex anchor = PositionMask::cell_at(action.position);
    const OrientedMacro& om = design_->oriented(m, action.orientation);
    occ_.commit(m, om.footprint, anchor, om.shape, design_->grid());
    placement_.macros[m] = place_at_cell(*design_, anchor, action.orientation);
    ++t_;
    if (t_ == horizon()) {
        finish();
        return *terminal_reward_;
    }
    refresh_mask();
    return done_ ? *terminal_reward_ : 0.0;
}

void PlacementEnv::finish() {
    done_ = true;
    record_ = evaluate_placement(*design_, placement_, weights_);
    placement_ = record_->placement;
    terminal_reward_ = record_->reward;
}

const EpisodeRecord& PlacementEnv::result() const {
    if (!done_ || !record_) throw NotDone("episode has " + std::to_string(horizon() - t_) + " macros left to place");
    return *record_;
}

}  // namespace macroplace
