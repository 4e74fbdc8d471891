#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include "macroplace/env.hpp"
#include "macroplace/features.hpp"
#include "macroplace/policy.hpp"

namespace macroplace {

struct PPOConfig {
    double clip = 0.2;
    int epochs = 4;
    int minibatch = 64;
    double lr = 3e-4;
    double discount = 1.0;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;
    int episodes_per_update = 32;
    bool normalize_advantages = true;
};

enum class SampleMode : std::uint8_t { Stochastic, Greedy };

// Joint action distribution at one state. The orientation head is renormalized
// over the orientations legal at the chosen position.
struct ActionDistribution {
    int rows = 1;
    int cols = 1;
    std::vector<double> position;  // grid order
    std::array<double, 4> orientation_logits{};
    std::vector<std::array<bool, 4>> legal_orientations;  // grid order

    std::array<double, 4> orientation_probs(int grid_index) const;
    double log_prob(int grid_index, Orientation o) const;
};

ActionDistribution action_distribution(const PolicyOutput& out, const PositionMask& mask,
                                       const std::array<PositionMask, 4>& per_orientation);

// Greedy takes the argmax of each head (lowest index on ties).
StepAction sample_action(const ActionDistribution& dist, SampleMode mode, std::mt19937_64& rng);

struct Transition {
    GraphFeatures features;
    std::array<PositionMask, 4> per_orientation;
    PositionMask mask;
    StepAction action;
    double log_prob = 0.0;
    double value = 0.0;
    double ret = 0.0;
};

struct Episode {
    std::vector<Transition> steps;
    EpisodeRecord record;
};

class Adam {
public:
    explicit Adam(const ParamSet& like, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void step(ParamSet& params, const ParamSet& grads);

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    ParamSet m_;
    ParamSet v_;
};

struct UpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

// Clipped-surrogate PPO over a flat buffer of transitions, each carrying the
// terminal return of its episode. Minibatches are drawn in a seeded shuffle.
// Throws NonFiniteLoss if the loss or the updated parameters stop being finite.
UpdateStats ppo_update(PolicyNet& policy, Adam& optimizer, const std::vector<Transition>& buffer,
                       const PPOConfig& cfg, std::mt19937_64& rng);

// Per-transition loss and its gradient (added into grads); advantage given.
double ppo_sample_loss(const PolicyNet& policy, const Transition& t, double advantage, const PPOConfig& cfg,
                       ParamSet& grads, bool* clipped = nullptr, double* entropy = nullptr);

Episode run_episode(const PolicyNet& policy, const Design& design, const FeatureEncoder& encoder,
                    const RewardWeights& weights, SampleMode mode, std::uint64_t seed, bool record_steps = true);

// Step i of T gets discount^(T - 1 - i) times the terminal reward.
void discount_returns(Episode& episode, double discount);

// Uniform over legal positions, then uniform over orientations legal there.
EpisodeRecord random_episode(const Design& design, const RewardWeights& weights, std::uint64_t seed);

struct UpdateMetrics {
    int update = 0;
    double mean_reward = 0.0;
    ProxyCosts costs;  // means over the update's episodes
};

struct TrainConfig {
    PPOConfig ppo;
    RewardWeights weights;
    int updates = 0;
    int workers = 1;
    std::uint64_t seed = 0;
    std::function<void(const UpdateMetrics&, const PolicyNet&)> on_update;
};

struct TrainResult {
    PolicyNet policy;
    std::vector<UpdateMetrics> metrics;
};

// Collectors roll out episodes in parallel; results are gathered in episode
// order so the outcome does not depend on the worker count.
TrainResult train(const Design& design, PolicyNet initial, const TrainConfig& cfg);

void write_metrics_csv(const std::vector<UpdateMetrics>& metrics, const std::filesystem::path& path);

struct CostStats {
    double mean_reward = 0.0;
    double std_reward = 0.0;
    ProxyCosts mean_costs;
    int episodes = 0;
};

struct EvalResult {
    CostStats greedy;
    CostStats stochastic;
};

EvalResult evaluate_policy(const PolicyNet& policy, const Design& design, const RewardWeights& weights, int episodes,
                           std::uint64_t seed);
CostStats evaluate_random(const Design& design, const RewardWeights& weights, int episodes, std::uint64_t seed);

// Seed of episode `index` in update `update`.
std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t update, std::uint64_t index);

}  // namespace macroplace
