#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "macroplace/canvas.hpp"
#include "macroplace/design.hpp"
#include "macroplace/pins.hpp"
#include "macroplace/proxy.hpp"

namespace macroplace {

inline constexpr double kAbortPenalty = -10.0;
inline constexpr int kClusterPlacerIterations = 100;

struct StepAction {
    int position = 0;  // r * kMaxGrid + c
    Orientation orientation = Orientation::R0;
};

struct EpisodeRecord {
    ProxyCosts costs;
    double reward = 0.0;
    Placement placement;
    bool aborted = false;
};

// Cluster centers from an all-macros-placed placement: start at the centroid
// of connected macro pins and ports (or of the free area when unconnected),
// then move halfway towards the weighted centroid of net neighbours for a
// fixed number of rounds, snapping out of occupied cells after each round.
std::vector<Point> place_clusters(const Design& design, const Placement& placement,
                                  int iterations = kClusterPlacerIterations);

// Places clusters and evaluates the four costs and the reward.
EpisodeRecord evaluate_placement(const Design& design, Placement placement, const RewardWeights& weights);

// Sequential placement of the design's macros on its coarse grid. Choices
// that block no pin are preferred along the mask ladder.
class PlacementEnv {
public:
    PlacementEnv(const Design& design, RewardWeights weights = {});

    void reset();

    const Design& design() const { return *design_; }
    const RewardWeights& weights() const { return weights_; }
    int step_index() const { return t_; }
    int horizon() const { return static_cast<int>(design_->placement_order().size()); }
    bool done() const { return done_; }
    // Macro index placed at the current step; undefined once done.
    int current_macro() const { return design_->placement_order()[t_]; }
    const Occupancy& occupancy() const { return occ_; }
    const Placement& placement() const { return placement_; }
    const MaskStack& masks() const { return masks_; }
    const PositionMask& mask() const { return masks_.position; }
    // Orientation legality at a position of the current mask.
    std::array<bool, 4> legal_orientations(int position) const;
    std::optional<double> terminal_reward() const { return terminal_reward_; }

    // Commits the current macro. Returns 0 mid-episode and the terminal reward
    // on the last step. Throws IllegalAction, leaving the state unchanged.
    double step(StepAction action);

    // Throws NotDone before the episode ends.
    const EpisodeRecord& result() const;

private:
    void refresh_mask();
    void finish();

    const Design* design_;
    PinChecker pins_;
    RewardWeights weights_;
    int t_ = 0;
    bool done_ = false;
    Occupancy occ_;
    Placement placement_;
    MaskStack masks_;
    std::optional<double> terminal_reward_;
    std::optional<EpisodeRecord> record_;
};

}  // namespace macroplace
