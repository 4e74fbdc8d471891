#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "macroplace/design.hpp"
#include "macroplace/env.hpp"
#include "macroplace/pins.hpp"
#include "macroplace/proxy.hpp"

namespace macroplace {

struct SASchedule {
    double t0 = 0.0;  // <= 0 selects the calibrated temperature
    double cooling = 0.98;
    int sweeps = 200;
    int calibration_moves = 100;
};

enum class MoveKind : std::uint8_t { Shift, Swap, Flip, Relocate };

std::string_view to_string(MoveKind kind);

struct Move {
    MoveKind kind = MoveKind::Shift;
    int macro = -1;  // -1 for a swap without an eligible pair
    MacroPlacement target;
    int other = -1;  // swap partner
    MacroPlacement other_target;
};

// Shared, placement-independent data for refinement.
class RefineContext {
public:
    explicit RefineContext(const Design& design);

    const Design& design() const { return *design_; }
    const PinChecker& pins() const { return pins_; }
    const FineGrid& fine() const { return pins_.fine(); }
    const std::vector<Rect>& holes() const { return pins_.holes(); }
    // Same group, congruent R0 shapes.
    const std::vector<std::pair<int, int>>& swap_pairs() const { return swap_pairs_; }

    bool inside_canvas(const Rect& r) const { return pins_.inside_canvas(r); }
    bool inside_canvas(const Placement& placement, int macro) const;
    bool overlaps_other(const Placement& placement, int macro) const;
    bool legal(const Placement& placement, int macro) const;

    // Free slide of the macro in direction (dx, dy) in {(-1,0),(0,-1),(1,0),(0,1)}
    // before touching the canvas boundary, or also any other macro.
    double slide_distance(const Placement& placement, int macro, int dx, int dy, bool include_macros) const;
    // Smallest of the four boundary slide distances.
    double boundary_distance(const Placement& placement, int macro) const;

    std::vector<PinViolation> pin_violations(const Placement& placement, int macro) const {
        return pins_.violations(placement, macro);
    }
    int violation_count(const Placement& placement) const { return pins_.count(placement); }

private:
    const Design* design_;
    PinChecker pins_;
    std::vector<std::pair<int, int>> swap_pairs_;
};

// Uniform over shift, swap, flip (and relocate when enabled); the macro is
// uniform over placed macros.
Move propose_move(const RefineContext& ctx, const Placement& placement, std::mt19937_64& rng,
                  bool allow_relocate = false);
void apply_move(Placement& placement, const Move& move);

struct SATraceRow {
    int iteration = 0;
    double temperature = 0.0;
    double cost = 0.0;
    bool accepted = false;
};

struct AnnealResult {
    Placement best;
    double initial_cost = 0.0;
    double best_cost = 0.0;
    int initial_violations = 0;
    int best_violations = 0;
    double t0 = 0.0;
    std::vector<SATraceRow> trace;
    std::vector<double> best_trace;  // best-seen cost after each proposal
};

// Metropolis annealing on the weighted proxy cost. Moves that overlap or leave
// the canvas are always reverted; the pin-violation count is compared first,
// so a move adding a violation is reverted and one removing a violation is
// kept. Returns the best state seen under the same ordering.
AnnealResult anneal(const Design& design, const Placement& initial, const SASchedule& schedule,
                    const RewardWeights& weights, std::uint64_t seed, bool allow_relocate = false);

// Random legal coarse placement followed by annealing with relocation moves.
AnnealResult sa_place_from_scratch(const Design& design, const SASchedule& schedule, const RewardWeights& weights,
                                   std::uint64_t seed);

Placement random_legal_placement(const Design& design, std::mt19937_64& rng);

double weighted_cost(const Design& design, const Placement& placement, const RewardWeights& weights);

void write_sa_trace(const std::vector<SATraceRow>& trace, const std::filesystem::path& path);

}  // namespace macroplace
