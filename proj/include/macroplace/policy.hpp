#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "macroplace/features.hpp"

namespace macroplace {

struct PolicyConfig {
    int hidden = 64;
    int rounds = 3;          // message-passing rounds
    int seed_channels = 16;  // channels of the 4x4 decoder seed
    int decoder_channels = 8;

    bool operator==(const PolicyConfig&) const = default;
};

// Named parameter tensors; gradients and optimizer moments use the same layout.
struct ParamSet {
    std::vector<std::string> names;
    std::vector<Eigen::MatrixXd> tensors;

    Eigen::MatrixXd& operator[](std::size_t i) { return tensors[i]; }
    const Eigen::MatrixXd& operator[](std::size_t i) const { return tensors[i]; }
    std::size_t size() const { return tensors.size(); }
    ParamSet zeros_like() const;
    void set_zero();
    double squared_norm() const;
    void scale(double s);
    void add_scaled(const ParamSet& other, double s);
    bool all_finite() const;
    bool operator==(const ParamSet& other) const;
};

// Forward activations kept for the backward pass.
struct ForwardCache {
    Eigen::MatrixXd x;
    std::vector<Eigen::MatrixXd> pre;  // pre-activation of every encoder layer
    std::vector<Eigen::MatrixXd> h;    // post-activation, h[0] .. h[rounds]
    std::vector<Eigen::MatrixXd> agg;  // A * h[l]
    Eigen::RowVectorXd ctx_in;
    Eigen::RowVectorXd ctx_pre;
    Eigen::RowVectorXd ctx;
    Eigen::RowVectorXd seed_pre;
    std::vector<Eigen::MatrixXd> maps;      // decoder maps (pixels x channels), post-activation
    std::vector<Eigen::MatrixXd> maps_pre;  // decoder maps, pre-activation
    std::vector<int> sides;                 // side length of each decoder map
    int layers = 0;
};

struct PolicyOutput {
    int rows = 1;
    int cols = 1;
    std::vector<double> position_logits;  // rows * cols, grid order r * cols + c
    std::array<double, 4> orientation_logits{};
    double value = 0.0;
    ForwardCache cache;
};

// Message-passing graph encoder with a value head, a 4-way orientation head,
// and a transposed-convolution decoder to a position logit grid.
class PolicyNet {
public:
    explicit PolicyNet(PolicyConfig config = {}, std::uint64_t seed = 0);

    const PolicyConfig& config() const { return config_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

    PolicyOutput forward(const GraphFeatures& features) const;

    // Accumulates parameter gradients given loss gradients on the heads.
    void backward(const GraphFeatures& features, const PolicyOutput& out, const std::vector<double>& d_position_logits,
                  const std::array<double, 4>& d_orientation_logits, double d_value, ParamSet& grads) const;

    nlohmann::json to_json() const;
    static PolicyNet from_json(const nlohmann::json& doc);
    void save(const std::filesystem::path& path) const;
    static PolicyNet load(const std::filesystem::path& path);

    bool operator==(const PolicyNet& other) const { return config_ == other.config_ && params_ == other.params_; }

private:
    std::size_t index(const std::string& name) const;

    // Tensor positions in params_, resolved once at construction.
    struct Slots {
        struct Round {
            std::size_t self = 0, nbr = 0, b = 0;
        };
        struct Deconv {
            std::size_t w = 0, b = 0;
        };
        std::size_t in_w = 0, in_b = 0, emb = 0, ctx_w = 0, ctx_b = 0, value_w = 0, value_b = 0, orient_w = 0,
                    orient_b = 0, seed_w = 0, seed_b = 0, out_w = 0, out_b = 0;
        std::vector<Round> mp;
        std::vector<Deconv> deconv;
    };

    PolicyConfig config_;
    ParamSet params_;
    Slots slots_;
};

// Decoder layers needed so that the output side covers the grid.
int decoder_layers(int rows, int cols);

// Softmax restricted to mask bits; throws EmptyMask when nothing is legal.
std::vector<double> masked_softmax(const std::vector<double>& logits, const std::vector<std::uint8_t>& legal);

// Grid-order legality (r * cols + c) of an action mask.
std::vector<std::uint8_t> grid_legality(const PositionMask& mask, int rows, int cols);

}  // namespace macroplace
