#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "macroplace/policy.hpp"
#include "macroplace/ppo.hpp"
#include "support.hpp"

namespace macroplace {
namespace {

using testing::fixture_design;

TEST(MaskedSoftmax, NormalizesOverLegalEntries) {
    const auto p = masked_softmax({0.0, std::log(3.0), 5.0}, {1, 1, 0});
    EXPECT_DOUBLE_EQ(p[0], 0.25);
    EXPECT_DOUBLE_EQ(p[1], 0.75);
    EXPECT_EQ(p[2], 0.0);
}

TEST(MaskedSoftmax, SingleLegalEntryIsCertain) {
    const auto p = masked_softmax({-1e6, 2.0, 1e6}, {1, 0, 0});
    EXPECT_EQ(p, (std::vector<double>{1.0, 0.0, 0.0}));
}

TEST(MaskedSoftmax, StableForLargeLogits) {
    const auto p = masked_softmax({1000.0, 1000.0}, {1, 1});
    EXPECT_DOUBLE_EQ(p[0], 0.5);
}

TEST(MaskedSoftmax, EmptyMaskThrows) { EXPECT_THROW(masked_softmax({1.0, 2.0}, {0, 0}), EmptyMask); }

TEST(Policy, DecoderLayersCoverTheGrid) {
    EXPECT_EQ(decoder_layers(1, 1), 1);
    EXPECT_EQ(decoder_layers(8, 8), 1);
    EXPECT_EQ(decoder_layers(9, 3), 2);
    EXPECT_EQ(decoder_layers(64, 10), 4);
    EXPECT_EQ(decoder_layers(128, 128), 5);
}

TEST(Policy, GridLegalityIsGridOrdered) {
    PositionMask m;
    m.set(1, 2);
    const auto g = grid_legality(m, 3, 4);
    ASSERT_EQ(g.size(), 12u);
    for (int i = 0; i < 12; ++i) EXPECT_EQ(g[i], i == 1 * 4 + 2 ? 1 : 0);
}

TEST(Policy, InitialPolicyIsUniformOverLegalActions) {
    const Design d = fixture_design("toy6.json");
    const FeatureEncoder enc(d);
    const PlacementEnv env(d);
    const PolicyNet net({}, 3);
    const PolicyOutput out = net.forward(enc.encode(env));
    const ActionDistribution dist = action_distribution(out, env.mask(), env.masks().per_orientation);
    const auto legal = env.mask().indices();
    for (int pos : legal) {
        const CellIndex c = PositionMask::cell_at(pos);
        EXPECT_NEAR(dist.position[c.row * d.grid().cols() + c.col], 1.0 / legal.size(), 1e-12);
    }
    // Chi-squared goodness of fit of sampled positions.
    std::mt19937_64 rng(11);
    const int n = 20000;
    std::map<int, int> counts;
    for (int i = 0; i < n; ++i) ++counts[sample_action(dist, SampleMode::Stochastic, rng).position];
    double chi2 = 0.0;
    const double expect = static_cast<double>(n) / legal.size();
    for (int pos : legal) chi2 += std::pow(counts[pos] - expect, 2) / expect;
    EXPECT_EQ(counts.size(), legal.size());
    // 99.9th percentile, Wilson-Hilferty approximation.
    const double k = static_cast<double>(legal.size() - 1);
    const double z = 3.090;
    const double bound = k * std::pow(1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k)), 3);
    EXPECT_LT(chi2, bound);
}

// Random parameters so every unit is active somewhere.
PolicyNet randomized(std::uint64_t seed) {
    PolicyNet net({16, 2, 4, 4}, seed);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.3);
    for (auto& t : net.params().tensors) {
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = g(rng);
    }
    return net;
}

TEST(Policy, GradientMatchesFiniteDifferences) {
    const Design d = fixture_design("fixture10.json");
    const FeatureEncoder enc(d);
    PlacementEnv env(d);
    env.step({env.mask().indices().front(), static_cast<Orientation>([&] {
                  const auto l = env.legal_orientations(env.mask().indices().front());
                  int o = 0;
                  while (!l[o]) ++o;
                  return o;
              }())});
    const GraphFeatures f = enc.encode(env);
    PolicyNet net = randomized(5);

    const PolicyOutput out0 = net.forward(f);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> a(out0.position_logits.size());
    for (double& v : a) v = g(rng);
    std::array<double, 4> b{};
    for (double& v : b) v = g(rng);
    const double cv = g(rng);
    auto loss = [&](const PolicyNet& p) {
        const PolicyOutput o = p.forward(f);
        double s = cv * o.value;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * o.position_logits[i];
        for (int k = 0; k < 4; ++k) s += b[k] * o.orientation_logits[k];
        return s;
    };

    ParamSet grads = net.params().zeros_like();
    net.backward(f, out0, a, b, cv, grads);

    const double h = 1e-6;
    int checked = 0;
    for (std::size_t t = 0; t < net.params().size(); ++t) {
        auto& tensor = net.params()[t];
        const Eigen::Index stride = std::max<Eigen::Index>(1, tensor.size() / 7);
        for (Eigen::Index i = 0; i < tensor.size(); i += stride) {
            const double keep = tensor.data()[i];
            tensor.data()[i] = keep + h;
            const double up = loss(net);
            tensor.data()[i] = keep - h;
            const double down = loss(net);
            tensor.data()[i] = keep;
            const double numeric = (up - down) / (2 * h);
            const double analytic = grads[t].data()[i];
            EXPECT_NEAR(analytic, numeric, 1e-4 * std::max(1.0, std::abs(numeric)))
                << net.params().names[t] << "[" << i << "]";
            ++checked;
        }
    }
    EXPECT_GT(checked, 50);
}

TEST(Policy, ForwardIsDeterministic) {
    const Design d = fixture_design("toy6.json");
    const FeatureEncoder enc(d);
    const PlacementEnv env(d);
    const PolicyNet net = randomized(2);
    const auto f = enc.encode(env);
    const PolicyOutput a = net.forward(f), b = net.forward(f);
    EXPECT_EQ(a.position_logits, b.position_logits);
    EXPECT_EQ(a.orientation_logits, b.orientation_logits);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(static_cast<int>(a.position_logits.size()), d.grid().rows() * d.grid().cols());
}

TEST(Policy, SameSeedSameParameters) {
    EXPECT_EQ(PolicyNet({}, 4), PolicyNet({}, 4));
    EXPECT_FALSE(PolicyNet({}, 4) == PolicyNet({}, 5));
}

TEST(Policy, JsonRoundTripIsExact) {
    const PolicyNet net = randomized(8);
    EXPECT_EQ(PolicyNet::from_json(net.to_json()), net);
    const auto dir = testing::scratch_dir("policy_roundtrip");
    net.save(dir / "p.json");
    EXPECT_EQ(PolicyNet::load(dir / "p.json"), net);
}

TEST(Policy, RejectsForeignCheckpoint) {
    nlohmann::json doc = PolicyNet().to_json();
    doc["format"] = "something-else";
    EXPECT_THROW(PolicyNet::from_json(doc), ParseError);
    doc = PolicyNet().to_json();
    doc["tensors"].erase(0);
    EXPECT_THROW(PolicyNet::from_json(doc), ParseError);
}

}  // namespace
}  // namespace macroplace
