#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "macroplace/env.hpp"

namespace macroplace {

inline constexpr int kMaxCorners = 16;
// kind(3) + w, h, x, y, placed, group scalar (6) + pin sides(4) + corners(32)
inline constexpr int kNodeFeatures = 3 + 6 + 4 + 2 * kMaxCorners;
// canvas corners(32) + step fraction
inline constexpr int kGlobalFeatures = 2 * kMaxCorners + 1;
// Embedding ids: 0 for non-macros, 1 + group id (saturating) for macros.
inline constexpr int kGroupEmbeddings = 16;
inline constexpr int kMaxCliquePins = 8;

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct GraphFeatures {
    Eigen::MatrixXd nodes;                        // N x kNodeFeatures, row order: macros, clusters, ports
    std::vector<int> group_ids;                   // N embedding ids
    std::shared_ptr<const SparseRows> adjacency;  // N x N, rows sum to 1 or 0
    Eigen::RowVectorXd global;                    // kGlobalFeatures
    int current = 0;                              // node index of the macro being placed
    int grid_rows = 1;
    int grid_cols = 1;
};

// Corner list of a shape scaled into its own bounding box, clockwise from the
// lexicographically smallest corner, zero-padded to kMaxCorners pairs.
std::vector<double> corner_features(const RectilinearShape& shape);

// Row-normalized clique expansion of the nets: a net with p pins (first
// kMaxCliquePins kept) links every pin pair with weight 1 / (p - 1).
SparseRows clique_adjacency(const Design& design);

class FeatureEncoder {
public:
    explicit FeatureEncoder(const Design& design);

    // Features of the env's current state. Unplaced objects sit at (0, 0).
    GraphFeatures encode(const PlacementEnv& env) const;

    int node_count() const { return static_cast<int>(static_.rows()); }

private:
    const Design* design_;
    Eigen::MatrixXd static_;
    std::vector<int> group_ids_;
    std::shared_ptr<const SparseRows> adjacency_;
    Eigen::RowVectorXd canvas_corners_;
};

}  // namespace macroplace
