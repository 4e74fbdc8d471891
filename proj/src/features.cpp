#include "macroplace/features.hpp"

#include <algorithm>
#include <cmath>

namespace macroplace {

namespace {

constexpr int kColKind = 0;
constexpr int kColW = 3;
constexpr int kColH = 4;
constexpr int kColX = 5;
constexpr int kColY = 6;
constexpr int kColPlaced = 7;
constexpr int kColGroup = 8;
constexpr int kColSides = 9;
constexpr int kColCorners = 13;

void set_pin_sides(Eigen::MatrixXd& nodes, int row, const std::vector<Side>& sides) {
    for (int s = 0; s < 4; ++s) nodes(row, kColSides + s) = 0.0;
    if (sides.empty()) return;
    for (Side s : sides) nodes(row, kColSides + static_cast<int>(s)) += 1.0 / static_cast<double>(sides.size());
}

}  // namespace

std::vector<double> corner_features(const RectilinearShape& shape) {
    std::vector<double> out(2 * kMaxCorners, 0.0);
    const Rect& bb = shape.bbox();
    const auto& corners = shape.corners();
    const int n = std::min<int>(kMaxCorners, static_cast<int>(corners.size()));
    for (int i = 0; i < n; ++i) {
        out[2 * i] = (corners[i].x - bb.xlo) / bb.width();
        out[2 * i + 1] = (corners[i].y - bb.ylo) / bb.height();
    }
    return out;
}

SparseRows clique_adjacency(const Design& design) {
    const int m = design.macro_count(), k = design.cluster_count();
    const int n = m + k + design.port_count();
    auto node_of = [&](const Endpoint& e) {
        switch (e.kind) {
            case PinOwner::Macro: return e.index;
            case PinOwner::Cluster: return m + e.index;
            case PinOwner::Port: return m + k + e.index;
        }
        return 0;
    };
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (const ResolvedNet& net : design.nets()) {
        std::vector<int> members;
        for (const Endpoint& e : net.pins) {
            if (static_cast<int>(members.size()) == kMaxCliquePins) break;
            members.push_back(node_of(e));
        }
        if (members.size() < 2) continue;
        const double w = 1.0 / static_cast<double>(members.size() - 1);
        for (int a : members) {
            for (int b : members) {
                if (a != b) dense(a, b) += w;
            }
        }
    }
    std::vector<Eigen::Triplet<double>> trips;
    for (int r = 0; r < n; ++r) {
        const double s = dense.row(r).sum();
        if (s <= 0.0) continue;
        for (int c = 0; c < n; ++c) {
            if (dense(r, c) != 0.0) trips.emplace_back(r, c, dense(r, c) / s);
        }
    }
    SparseRows adj(n, n);
    adj.setFromTriplets(trips.begin(), trips.end());
    return adj;
}

FeatureEncoder::FeatureEncoder(const Design& design)
    : design_(&design), adjacency_(std::make_shared<SparseRows>(clique_adjacency(design))) {
    const int m = design.macro_count(), k = design.cluster_count(), p = design.port_count();
    const Rect& cb = design.grid().canvas().bbox();
    const double cw = cb.width(), ch = cb.height();
    static_ = Eigen::MatrixXd::Zero(m + k + p, kNodeFeatures);
    group_ids_.assign(m + k + p, 0);
    const int groups = std::max(1, design.group_count());

    for (int i = 0; i < m; ++i) {
        const Macro& mac = design.netlist().macros[i];
        static_(i, kColKind + 0) = 1.0;
        static_(i, kColW) = mac.width() / cw;
        static_(i, kColH) = mac.height() / ch;
        static_(i, kColGroup) = static_cast<double>(design.group_of(i) + 1) / groups;
        set_pin_sides(static_, i, design.oriented(i, Orientation::R0).pin_sides);
        const auto corners = corner_features(mac.shape);
        for (int c = 0; c < 2 * kMaxCorners; ++c) static_(i, kColCorners + c) = corners[c];
        group_ids_[i] = std::min(kGroupEmbeddings - 1, design.group_of(i) + 1);
    }
    for (int i = 0; i < k; ++i) {
        const double side = std::sqrt(design.netlist().clusters[i].area);
        static_(m + i, kColKind + 1) = 1.0;
        static_(m + i, kColW) = std::min(1.0, side / cw);
        static_(m + i, kColH) = std::min(1.0, side / ch);
    }
    for (int i = 0; i < p; ++i) {
        const Point pos = design.netlist().ports[i].position;
        static_(m + k + i, kColKind + 2) = 1.0;
        static_(m + k + i, kColX) = (pos.x - cb.xlo) / cw;
        static_(m + k + i, kColY) = (pos.y - cb.ylo) / ch;
        static_(m + k + i, kColPlaced) = 1.0;
    }

    canvas_corners_ = Eigen::RowVectorXd::Zero(2 * kMaxCorners);
    const auto& corners = design.grid().canvas().corners();
    for (int i = 0; i < std::min<int>(kMaxCorners, static_cast<int>(corners.size())); ++i) {
        canvas_corners_(2 * i) = (corners[i].x - cb.xlo) / cw;
        canvas_corners_(2 * i + 1) = (corners[i].y - cb.ylo) / ch;
    }
}

GraphFeatures FeatureEncoder::encode(const PlacementEnv& env) const {
    const Design& d = *design_;
    const Rect& cb = d.grid().canvas().bbox();
    GraphFeatures f;
    f.nodes = static_;
    for (int i = 0; i < d.macro_count(); ++i) {
        const MacroPlacement& mp = env.placement().macros[i];
        if (!mp.placed) continue;
        const Point c = macro_bbox(d, env.placement(), i).center();
        f.nodes(i, kColX) = (c.x - cb.xlo) / cb.width();
        f.nodes(i, kColY) = (c.y - cb.ylo) / cb.height();
        f.nodes(i, kColPlaced) = 1.0;
        set_pin_sides(f.nodes, i, d.oriented(i, mp.orientation).pin_sides);
    }
    f.group_ids = group_ids_;
    f.adjacency = adjacency_;
    f.global = Eigen::RowVectorXd::Zero(kGlobalFeatures);
    f.global.head(2 * kMaxCorners) = canvas_corners_;
    f.global(2 * kMaxCorners) = env.horizon() > 0 ? static_cast<double>(env.step_index()) / env.horizon() : 1.0;
    f.current = env.done() ? 0 : env.current_macro();
    f.grid_rows = d.grid().rows();
    f.grid_cols = d.grid().cols();
    return f;
}

}  // namespace macroplace
