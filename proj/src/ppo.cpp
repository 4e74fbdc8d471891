#include "macroplace/ppo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <thread>

namespace macroplace {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

int sample_index(const std::vector<double>& probs, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    int last = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        acc += probs[i];
        last = static_cast<int>(i);
        if (u < acc) return last;
    }
    return last;
}

int argmax(const std::vector<double>& v) {
    int best = -1;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] > 0.0 && (best < 0 || v[i] > v[best])) best = static_cast<int>(i);
    }
    return best;
}

struct OrientationPart {
    std::array<double, 4> probs{};
    std::array<bool, 4> legal{};
};

OrientationPart orientation_part(const std::array<double, 4>& logits, const std::array<bool, 4>& legal) {
    OrientationPart out;
    out.legal = legal;
    double hi = -std::numeric_limits<double>::infinity();
    for (int o = 0; o < 4; ++o) {
        if (legal[o]) hi = std::max(hi, logits[o]);
    }
    if (hi == -std::numeric_limits<double>::infinity()) throw EmptyMask("no legal orientation at the chosen position");
    double sum = 0.0;
    for (int o = 0; o < 4; ++o) {
        out.probs[o] = legal[o] ? std::exp(logits[o] - hi) : 0.0;
        sum += out.probs[o];
    }
    for (double& p : out.probs) p /= sum;
    return out;
}

std::array<bool, 4> legal_at(const std::array<PositionMask, 4>& per_orientation, int position) {
    std::array<bool, 4> out{};
    for (int o = 0; o < 4; ++o) out[o] = per_orientation[o].test(position);
    return out;
}

}  // namespace

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t update, std::uint64_t index) {
    return splitmix(splitmix(splitmix(seed) ^ update) ^ index);
}

std::array<double, 4> ActionDistribution::orientation_probs(int grid_index) const {
    return orientation_part(orientation_logits, legal_orientations[grid_index]).probs;
}

double ActionDistribution::log_prob(int grid_index, Orientation o) const {
    return std::log(position[grid_index]) + std::log(orientation_probs(grid_index)[index_of(o)]);
}

ActionDistribution action_distribution(const PolicyOutput& out, const PositionMask& mask,
                                       const std::array<PositionMask, 4>& per_orientation) {
    ActionDistribution d;
    d.rows = out.rows;
    d.cols = out.cols;
    d.position = masked_softmax(out.position_logits, grid_legality(mask, out.rows, out.cols));
    d.orientation_logits = out.orientation_logits;
    d.legal_orientations.resize(d.position.size());
    for (int r = 0; r < d.rows; ++r) {
        for (int c = 0; c < d.cols; ++c) {
            d.legal_orientations[r * d.cols + c] = legal_at(per_orientation, PositionMask::index_of(r, c));
        }
    }
    return d;
}

StepAction sample_action(const ActionDistribution& dist, SampleMode mode, std::mt19937_64& rng) {
    const int g = mode == SampleMode::Greedy ? argmax(dist.position) : sample_index(dist.position, rng);
    const auto probs = dist.orientation_probs(g);
    std::vector<double> pv(probs.begin(), probs.end());
    const int o = mode == SampleMode::Greedy ? argmax(pv) : sample_index(pv, rng);
    return {PositionMask::index_of(g / dist.cols, g % dist.cols), static_cast<Orientation>(o)};
}

Adam::Adam(const ParamSet& like, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(like.zeros_like()), v_(like.zeros_like()) {}

void Adam::step(ParamSet& params, const ParamSet& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
        params[i].array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
    }
}

double ppo_sample_loss(const PolicyNet& policy, const Transition& t, double advantage, const PPOConfig& cfg,
                       ParamSet& grads, bool* clipped, double* entropy) {
    const PolicyOutput out = policy.forward(t.features);
    const auto legal = grid_legality(t.mask, out.rows, out.cols);
    const std::vector<double> p = masked_softmax(out.position_logits, legal);
    const CellIndex cell = PositionMask::cell_at(t.action.position);
    const int a = cell.row * out.cols + cell.col;
    const OrientationPart q = orientation_part(out.orientation_logits, legal_at(t.per_orientation, t.action.position));
    const int o = index_of(t.action.orientation);

    const double logp = std::log(p[a]) + std::log(q.probs[o]);
    const double ratio = std::exp(logp - t.log_prob);
    const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
    const double surr1 = ratio * advantage;
    const double surr2 = clipped_ratio * advantage;
    const bool unclipped = surr1 <= surr2;
    const double policy_loss = -std::min(surr1, surr2);
    const double d_logp = unclipped ? -advantage * ratio : 0.0;
    if (clipped) *clipped = !unclipped;

    double h_pos = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) h_pos -= p[i] * std::log(p[i]);
    }
    double h_or = 0.0;
    for (int k = 0; k < 4; ++k) {
        if (q.probs[k] > 0.0) h_or -= q.probs[k] * std::log(q.probs[k]);
    }
    if (entropy) *entropy = h_pos + h_or;

    const double value_loss = cfg.value_coef * (out.value - t.ret) * (out.value - t.ret);
    const double loss = policy_loss + value_loss - cfg.entropy_coef * (h_pos + h_or);

    std::vector<double> d_pos(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!legal[i]) continue;
        const double dlog = (static_cast<int>(i) == a ? 1.0 : 0.0) - p[i];
        const double dent = p[i] > 0.0 ? -p[i] * (std::log(p[i]) + h_pos) : 0.0;
        d_pos[i] = d_logp * dlog - cfg.entropy_coef * dent;
    }
    std::array<double, 4> d_or{};
    for (int k = 0; k < 4; ++k) {
        if (!q.legal[k]) continue;
        const double dlog = (k == o ? 1.0 : 0.0) - q.probs[k];
        const double dent = q.probs[k] > 0.0 ? -q.probs[k] * (std::log(q.probs[k]) + h_or) : 0.0;
        d_or[k] = d_logp * dlog - cfg.entropy_coef * dent;
    }
    const double d_value = 2.0 * cfg.value_coef * (out.value - t.ret);
    policy.backward(t.features, out, d_pos, d_or, d_value, grads);
    return loss;
}

UpdateStats ppo_update(PolicyNet& policy, Adam& optimizer, const std::vector<Transition>& buffer,
                       const PPOConfig& cfg, std::mt19937_64& rng) {
    UpdateStats stats;
    const int n = static_cast<int>(buffer.size());
    if (n == 0) return stats;

    std::vector<double> adv(n);
    for (int i = 0; i < n; ++i) adv[i] = buffer[i].ret - buffer[i].value;
    if (cfg.normalize_advantages && n > 1) {
        const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
        double var = 0.0;
        for (double a : adv) var += (a - mean) * (a - mean);
        const double sd = std::sqrt(var / n);
        for (double& a : adv) a = sd > 1e-8 ? (a - mean) / sd : 0.0;
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    ParamSet grads = policy.params().zeros_like();
    int samples = 0, clipped_count = 0;
    double loss_sum = 0.0, entropy_sum = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int start = 0; start < n; start += cfg.minibatch) {
            const int end = std::min(n, start + cfg.minibatch);
            grads.set_zero();
            double mb_loss = 0.0;
            for (int k = start; k < end; ++k) {
                bool clipped = false;
                double ent = 0.0;
                mb_loss += ppo_sample_loss(policy, buffer[order[k]], adv[order[k]], cfg, grads, &clipped, &ent);
                clipped_count += clipped ? 1 : 0;
                entropy_sum += ent;
                ++samples;
            }
            if (!std::isfinite(mb_loss)) throw NonFiniteLoss("PPO loss became non-finite");
            grads.scale(1.0 / (end - start));
            const double norm = std::sqrt(grads.squared_norm());
            if (!std::isfinite(norm)) throw NonFiniteLoss("PPO gradient became non-finite");
            if (cfg.max_grad_norm > 0.0 && norm > cfg.max_grad_norm) grads.scale(cfg.max_grad_norm / norm);
            optimizer.step(policy.params(), grads);
            if (!policy.params().all_finite()) throw NonFiniteLoss("policy parameters became non-finite");
            loss_sum += mb_loss;
        }
    }
    stats.policy_loss = loss_sum / samples;
    stats.entropy = entropy_sum / samples;
    stats.clip_fraction = static_cast<double>(clipped_count) / samples;
    return stats;
}

Episode run_episode(const PolicyNet& policy, const Design& design, const FeatureEncoder& encoder,
                    const RewardWeights& weights, SampleMode mode, std::uint64_t seed, bool record_steps) {
    std::mt19937_64 rng(seed);
    PlacementEnv env(design, weights);
    Episode ep;
    while (!env.done()) {
        GraphFeatures f = encoder.encode(env);
        const PolicyOutput out = policy.forward(f);
        const ActionDistribution dist = action_distribution(out, env.mask(), env.masks().per_orientation);
        const StepAction a = sample_action(dist, mode, rng);
        if (record_steps) {
            const CellIndex cell = PositionMask::cell_at(a.position);
            Transition t;
            t.features = std::move(f);
            t.per_orientation = env.masks().per_orientation;
            t.mask = env.mask();
            t.action = a;
            t.log_prob = dist.log_prob(cell.row * dist.cols + cell.col, a.orientation);
            t.value = out.value;
            ep.steps.push_back(std::move(t));
        }
        env.step(a);
    }
    ep.record = env.result();
    const int horizon = static_cast<int>(ep.steps.size());
    for (int i = 0; i < horizon; ++i) ep.steps[i].ret = ep.record.reward;
    return ep;
}

void discount_returns(Episode& episode, double discount) {
    double ret = episode.record.reward;
    for (auto it = episode.steps.rbegin(); it != episode.steps.rend(); ++it) {
        it->ret = ret;
        ret *= discount;
    }
}

EpisodeRecord random_episode(const Design& design, const RewardWeights& weights, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PlacementEnv env(design, weights);
    while (!env.done()) {
        const std::vector<int> cells = env.mask().indices();
        const int pos = cells[std::uniform_int_distribution<std::size_t>(0, cells.size() - 1)(rng)];
        std::vector<Orientation> legal;
        const auto flags = env.legal_orientations(pos);
        for (int o = 0; o < 4; ++o) {
            if (flags[o]) legal.push_back(static_cast<Orientation>(o));
        }
        const Orientation o = legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(rng)];
        env.step({pos, o});
    }
    return env.result();
}

namespace {

template <typename Fn>
void parallel_for(int count, int workers, Fn fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = next++; i < count; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

CostStats summarize(const std::vector<EpisodeRecord>& records) {
    CostStats s;
    s.episodes = static_cast<int>(records.size());
    if (records.empty()) return s;
    for (const auto& r : records) {
        s.mean_reward += r.reward;
        s.mean_costs.wl += r.costs.wl;
        s.mean_costs.cong += r.costs.cong;
        s.mean_costs.dens += r.costs.dens;
        s.mean_costs.hier += r.costs.hier;
    }
    const double n = static_cast<double>(records.size());
    s.mean_reward /= n;
    s.mean_costs.wl /= n;
    s.mean_costs.cong /= n;
    s.mean_costs.dens /= n;
    s.mean_costs.hier /= n;
    double var = 0.0;
    for (const auto& r : records) var += (r.reward - s.mean_reward) * (r.reward - s.mean_reward);
    s.std_reward = records.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    return s;
}

}  // namespace

TrainResult train(const Design& design, PolicyNet initial, const TrainConfig& cfg) {
    TrainResult result{std::move(initial), {}};
    if (cfg.updates <= 0) return result;
    const FeatureEncoder encoder(design);
    Adam adam(result.policy.params(), cfg.ppo.lr);
    std::mt19937_64 rng(episode_seed(cfg.seed, 0xFFFFFFFFULL, 0));
    const int episodes = cfg.ppo.episodes_per_update;
    for (int u = 0; u < cfg.updates; ++u) {
        std::vector<Episode> batch(episodes);
        const PolicyNet& snapshot = result.policy;
        parallel_for(episodes, cfg.workers, [&](int e) {
            batch[e] = run_episode(snapshot, design, encoder, cfg.weights, SampleMode::Stochastic,
                                   episode_seed(cfg.seed, static_cast<std::uint64_t>(u), static_cast<std::uint64_t>(e)));
        });
        std::vector<Transition> buffer;
        std::vector<EpisodeRecord> records;
        for (Episode& ep : batch) {
            discount_returns(ep, cfg.ppo.discount);
            for (Transition& t : ep.steps) buffer.push_back(std::move(t));
            records.push_back(std::move(ep.record));
        }
        ppo_update(result.policy, adam, buffer, cfg.ppo, rng);
        const CostStats s = summarize(records);
        UpdateMetrics m{u, s.mean_reward, s.mean_costs};
        result.metrics.push_back(m);
        if (cfg.on_update) cfg.on_update(m, result.policy);
    }
    return result;
}

void write_metrics_csv(const std::vector<UpdateMetrics>& metrics, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "update,mean_reward,wl,cong,dens,hier\n";
    char line[256];
    for (const UpdateMetrics& m : metrics) {
        std::snprintf(line, sizeof line, "%d,%.10g,%.10g,%.10g,%.10g,%.10g\n", m.update, m.mean_reward, m.costs.wl,
                      m.costs.cong, m.costs.dens, m.costs.hier);
        out << line;
    }
}

EvalResult evaluate_policy(const PolicyNet& policy, const Design& design, const RewardWeights& weights, int episodes,
                           std::uint64_t seed) {
    const FeatureEncoder encoder(design);
    EvalResult r;
    // Greedy rollouts are deterministic, so one episode is the whole distribution.
    r.greedy = summarize({run_episode(policy, design, encoder, weights, SampleMode::Greedy, seed, false).record});
    std::vector<EpisodeRecord> recs;
    for (int e = 0; e < episodes; ++e) {
        recs.push_back(run_episode(policy, design, encoder, weights, SampleMode::Stochastic,
                                   episode_seed(seed, 1, static_cast<std::uint64_t>(e)), false)
                           .record);
    }
    r.stochastic = summarize(recs);
    return r;
}

CostStats evaluate_random(const Design& design, const RewardWeights& weights, int episodes, std::uint64_t seed) {
    std::vector<EpisodeRecord> recs;
    for (int e = 0; e < episodes; ++e) {
        recs.push_back(random_episode(design, weights, episode_seed(seed, 2, static_cast<std::uint64_t>(e))));
    }
    return summarize(recs);
}

}  // namespace macroplace
