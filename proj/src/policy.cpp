#include "macroplace/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

namespace macroplace {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr int kSeedSide = 4;
constexpr int kMaxDecoderLayers = 5;  // 4 * 2^5 = 128

Eigen::MatrixXd relu(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0); }

Eigen::MatrixXd relu_grad(const Eigen::MatrixXd& d, const Eigen::MatrixXd& pre) {
    return d.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
}

Eigen::MatrixXd glorot(int rows, int cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = u(rng);
    }
    return m;
}

}  // namespace

ParamSet ParamSet::zeros_like() const {
    ParamSet out;
    out.names = names;
    for (const auto& t : tensors) out.tensors.push_back(Eigen::MatrixXd::Zero(t.rows(), t.cols()));
    return out;
}

void ParamSet::set_zero() {
    for (auto& t : tensors) t.setZero();
}

double ParamSet::squared_norm() const {
    double s = 0.0;
    for (const auto& t : tensors) s += t.squaredNorm();
    return s;
}

void ParamSet::scale(double s) {
    for (auto& t : tensors) t *= s;
}

void ParamSet::add_scaled(const ParamSet& other, double s) {
    for (std::size_t i = 0; i < tensors.size(); ++i) tensors[i] += s * other.tensors[i];
}

bool ParamSet::all_finite() const {
    return std::all_of(tensors.begin(), tensors.end(), [](const Eigen::MatrixXd& t) { return t.allFinite(); });
}

bool ParamSet::operator==(const ParamSet& other) const {
    if (names != other.names || tensors.size() != other.tensors.size()) return false;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        if (tensors[i].rows() != other.tensors[i].rows() || tensors[i].cols() != other.tensors[i].cols() ||
            tensors[i] != other.tensors[i]) {
            return false;
        }
    }
    return true;
}

int decoder_layers(int rows, int cols) {
    int layers = 1;
    while (kSeedSide << layers < std::max(rows, cols)) ++layers;
    if (layers > kMaxDecoderLayers) throw ValidationError("grid exceeds the decoder's maximum side");
    return layers;
}

std::vector<double> masked_softmax(const std::vector<double>& logits, const std::vector<std::uint8_t>& legal) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (legal[i]) hi = std::max(hi, logits[i]);
    }
    if (hi == -std::numeric_limits<double>::infinity()) throw EmptyMask("no legal entry in the mask");
    std::vector<double> p(logits.size(), 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (!legal[i]) continue;
        p[i] = std::exp(logits[i] - hi);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

std::vector<std::uint8_t> grid_legality(const PositionMask& mask, int rows, int cols) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(rows) * cols, 0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) out[r * cols + c] = mask.test(r, c) ? 1 : 0;
    }
    return out;
}

PolicyNet::PolicyNet(PolicyConfig config, std::uint64_t seed) : config_(config) {
    std::mt19937_64 rng(seed);
    const int h = config.hidden;
    auto add = [&](std::string name, Eigen::MatrixXd t) {
        params_.names.push_back(std::move(name));
        params_.tensors.push_back(std::move(t));
    };
    add("in.w", glorot(kNodeFeatures, h, rng));
    add("in.b", Eigen::MatrixXd::Zero(1, h));
    add("emb", glorot(kGroupEmbeddings, h, rng));
    for (int l = 0; l < config.rounds; ++l) {
        add("mp" + std::to_string(l) + ".self", glorot(h, h, rng));
        add("mp" + std::to_string(l) + ".nbr", glorot(h, h, rng));
        add("mp" + std::to_string(l) + ".b", Eigen::MatrixXd::Zero(1, h));
    }
    add("ctx.w", glorot(2 * h + kGlobalFeatures, h, rng));
    add("ctx.b", Eigen::MatrixXd::Zero(1, h));
    add("value.w", Eigen::MatrixXd::Zero(h, 1));
    add("value.b", Eigen::MatrixXd::Zero(1, 1));
    add("orient.w", Eigen::MatrixXd::Zero(h, 4));
    add("orient.b", Eigen::MatrixXd::Zero(1, 4));
    const int seed_width = kSeedSide * kSeedSide * config.seed_channels;
    add("seed.w", glorot(h, seed_width, rng));
    add("seed.b", Eigen::MatrixXd::Zero(1, seed_width));
    for (int k = 0; k < kMaxDecoderLayers; ++k) {
        const int cin = k == 0 ? config.seed_channels : config.decoder_channels;
        const int cout = config.decoder_channels;
        add("deconv" + std::to_string(k) + ".w", glorot(cin, 4 * cout, rng));
        add("deconv" + std::to_string(k) + ".b", Eigen::MatrixXd::Zero(1, cout));
    }
    add("out.w", Eigen::MatrixXd::Zero(config.decoder_channels, 1));
    add("out.b", Eigen::MatrixXd::Zero(1, 1));

    slots_.in_w = index("in.w");
    slots_.in_b = index("in.b");
    slots_.emb = index("emb");
    for (int l = 0; l < config.rounds; ++l) {
        const std::string tag = "mp" + std::to_string(l);
        slots_.mp.push_back({index(tag + ".self"), index(tag + ".nbr"), index(tag + ".b")});
    }
    slots_.ctx_w = index("ctx.w");
    slots_.ctx_b = index("ctx.b");
    slots_.value_w = index("value.w");
    slots_.value_b = index("value.b");
    slots_.orient_w = index("orient.w");
    slots_.orient_b = index("orient.b");
    slots_.seed_w = index("seed.w");
    slots_.seed_b = index("seed.b");
    for (int k = 0; k < kMaxDecoderLayers; ++k) {
        const std::string tag = "deconv" + std::to_string(k);
        slots_.deconv.push_back({index(tag + ".w"), index(tag + ".b")});
    }
    slots_.out_w = index("out.w");
    slots_.out_b = index("out.b");
}

std::size_t PolicyNet::index(const std::string& name) const {
    const auto it = std::find(params_.names.begin(), params_.names.end(), name);
    if (it == params_.names.end()) throw ValidationError("missing parameter '" + name + "'");
    return static_cast<std::size_t>(it - params_.names.begin());
}

PolicyOutput PolicyNet::forward(const GraphFeatures& f) const {
    const auto& P = params_;
    const int n = static_cast<int>(f.nodes.rows());
    const int h = config_.hidden;
    PolicyOutput out;
    out.rows = f.grid_rows;
    out.cols = f.grid_cols;
    ForwardCache& c = out.cache;
    c.x = f.nodes;

    const SparseRows& adj = *f.adjacency;
    Eigen::MatrixXd pre = f.nodes * P[slots_.in_w];
    pre.rowwise() += P[slots_.in_b].row(0);
    const Eigen::MatrixXd& emb = P[slots_.emb];
    for (int i = 0; i < n; ++i) pre.row(i) += emb.row(f.group_ids[i]);
    c.pre.push_back(pre);
    c.h.push_back(relu(pre));
    for (int l = 0; l < config_.rounds; ++l) {
        const Slots::Round& tag = slots_.mp[l];
        Eigen::MatrixXd agg = adj * c.h.back();
        Eigen::MatrixXd p = c.h.back() * P[tag.self] + agg * P[tag.nbr];
        p.rowwise() += P[tag.b].row(0);
        c.agg.push_back(std::move(agg));
        c.h.push_back(relu(p));
        c.pre.push_back(std::move(p));
    }

    const Eigen::MatrixXd& hl = c.h.back();
    c.ctx_in.resize(2 * h + kGlobalFeatures);
    c.ctx_in.head(h) = n > 0 ? Eigen::RowVectorXd(hl.colwise().mean()) : Eigen::RowVectorXd::Zero(h);
    c.ctx_in.segment(h, h) = n > 0 ? Eigen::RowVectorXd(hl.row(f.current)) : Eigen::RowVectorXd::Zero(h);
    c.ctx_in.tail(kGlobalFeatures) = f.global;
    c.ctx_pre = c.ctx_in * P[slots_.ctx_w] + P[slots_.ctx_b];
    c.ctx = c.ctx_pre.cwiseMax(0.0);

    out.value = (c.ctx * P[slots_.value_w])(0, 0) + P[slots_.value_b](0, 0);
    const Eigen::RowVectorXd ol = c.ctx * P[slots_.orient_w] + P[slots_.orient_b];
    for (int o = 0; o < 4; ++o) out.orientation_logits[o] = ol(o);

    c.seed_pre = c.ctx * P[slots_.seed_w] + P[slots_.seed_b];
    const Eigen::RowVectorXd seed = c.seed_pre.cwiseMax(0.0);
    c.layers = decoder_layers(f.grid_rows, f.grid_cols);
    int side = kSeedSide;
    Eigen::MatrixXd map = Eigen::Map<const RowMajorMatrix>(seed.data(), side * side, config_.seed_channels);
    c.sides.push_back(side);
    c.maps_pre.push_back(map);
    c.maps.push_back(map);
    for (int k = 0; k < c.layers; ++k) {
        const Slots::Deconv& tag = slots_.deconv[k];
        const Eigen::MatrixXd& kernel = P[tag.w];
        const Eigen::MatrixXd& bias = P[tag.b];
        const int cout = static_cast<int>(bias.cols());
        const Eigen::MatrixXd y = c.maps.back() * kernel;
        const int next = 2 * side;
        Eigen::MatrixXd up(next * next, cout);
        for (int i = 0; i < side; ++i) {
            for (int j = 0; j < side; ++j) {
                for (int a = 0; a < 2; ++a) {
                    for (int b = 0; b < 2; ++b) {
                        const int pix = (2 * i + a) * next + (2 * j + b);
                        for (int co = 0; co < cout; ++co) up(pix, co) = y(i * side + j, co * 4 + a * 2 + b) + bias(0, co);
                    }
                }
            }
        }
        side = next;
        c.sides.push_back(side);
        c.maps.push_back(relu(up));
        c.maps_pre.push_back(std::move(up));
    }
    const Eigen::VectorXd full = c.maps.back() * P[slots_.out_w];
    const double ob = P[slots_.out_b](0, 0);
    out.position_logits.resize(static_cast<std::size_t>(out.rows) * out.cols);
    for (int r = 0; r < out.rows; ++r) {
        for (int col = 0; col < out.cols; ++col) out.position_logits[r * out.cols + col] = full(r * side + col) + ob;
    }
    return out;
}

void PolicyNet::backward(const GraphFeatures& f, const PolicyOutput& out, const std::vector<double>& d_pos,
                         const std::array<double, 4>& d_orient, double d_value, ParamSet& g) const {
    const auto& P = params_;
    const ForwardCache& c = out.cache;
    const int n = static_cast<int>(f.nodes.rows());
    const int h = config_.hidden;

    // Position decoder.
    const int side = c.sides.back();
    Eigen::VectorXd d_full = Eigen::VectorXd::Zero(side * side);
    double d_ob = 0.0;
    for (int r = 0; r < out.rows; ++r) {
        for (int col = 0; col < out.cols; ++col) {
            d_full(r * side + col) = d_pos[r * out.cols + col];
            d_ob += d_pos[r * out.cols + col];
        }
    }
    g[slots_.out_w] += c.maps.back().transpose() * d_full;
    g[slots_.out_b](0, 0) += d_ob;
    Eigen::MatrixXd d_map = d_full * P[slots_.out_w].transpose();
    for (int k = c.layers - 1; k >= 0; --k) {
        const Slots::Deconv& tag = slots_.deconv[k];
        const Eigen::MatrixXd& kernel = P[tag.w];
        const Eigen::MatrixXd d_pre = relu_grad(d_map, c.maps_pre[k + 1]);
        const int cout = static_cast<int>(d_pre.cols());
        const int s = c.sides[k], next = c.sides[k + 1];
        Eigen::MatrixXd d_y(s * s, 4 * cout);
        for (int i = 0; i < s; ++i) {
            for (int j = 0; j < s; ++j) {
                for (int a = 0; a < 2; ++a) {
                    for (int b = 0; b < 2; ++b) {
                        const int pix = (2 * i + a) * next + (2 * j + b);
                        for (int co = 0; co < cout; ++co) d_y(i * s + j, co * 4 + a * 2 + b) = d_pre(pix, co);
                    }
                }
            }
        }
        g[tag.b] += d_pre.colwise().sum();
        g[tag.w] += c.maps[k].transpose() * d_y;
        d_map = d_y * kernel.transpose();
    }
    // The seed map is a reshaped, rectified vector.
    Eigen::RowVectorXd d_seed(d_map.size());
    Eigen::Map<RowMajorMatrix>(d_seed.data(), d_map.rows(), d_map.cols()) = d_map;
    d_seed = d_seed.cwiseProduct((c.seed_pre.array() > 0.0).cast<double>().matrix());
    g[slots_.seed_w] += c.ctx.transpose() * d_seed;
    g[slots_.seed_b] += d_seed;
    Eigen::RowVectorXd d_ctx = d_seed * P[slots_.seed_w].transpose();

    // Value and orientation heads.
    g[slots_.value_w] += c.ctx.transpose() * d_value;
    g[slots_.value_b](0, 0) += d_value;
    d_ctx += d_value * P[slots_.value_w].transpose();
    Eigen::RowVectorXd d_ol(4);
    for (int o = 0; o < 4; ++o) d_ol(o) = d_orient[o];
    g[slots_.orient_w] += c.ctx.transpose() * d_ol;
    g[slots_.orient_b] += d_ol;
    d_ctx += d_ol * P[slots_.orient_w].transpose();

    // Context.
    const Eigen::RowVectorXd d_ctx_pre = d_ctx.cwiseProduct((c.ctx_pre.array() > 0.0).cast<double>().matrix());
    g[slots_.ctx_w] += c.ctx_in.transpose() * d_ctx_pre;
    g[slots_.ctx_b] += d_ctx_pre;
    if (n == 0) return;
    const Eigen::RowVectorXd d_in = d_ctx_pre * P[slots_.ctx_w].transpose();
    Eigen::MatrixXd d_h = Eigen::MatrixXd::Zero(n, h);
    d_h.rowwise() += d_in.head(h) / static_cast<double>(n);
    d_h.row(f.current) += d_in.segment(h, h);

    // Encoder.
    const SparseRows& adj = *f.adjacency;
    for (int l = config_.rounds - 1; l >= 0; --l) {
        const Slots::Round& tag = slots_.mp[l];
        const Eigen::MatrixXd d_pre = relu_grad(d_h, c.pre[l + 1]);
        g[tag.self] += c.h[l].transpose() * d_pre;
        g[tag.nbr] += c.agg[l].transpose() * d_pre;
        g[tag.b] += d_pre.colwise().sum();
        d_h = d_pre * P[tag.self].transpose() +
              adj.transpose() * (d_pre * P[tag.nbr].transpose());
    }
    const Eigen::MatrixXd d_pre = relu_grad(d_h, c.pre[0]);
    g[slots_.in_w] += c.x.transpose() * d_pre;
    g[slots_.in_b] += d_pre.colwise().sum();
    Eigen::MatrixXd& d_emb = g[slots_.emb];
    for (int i = 0; i < n; ++i) d_emb.row(f.group_ids[i]) += d_pre.row(i);
}

nlohmann::json PolicyNet::to_json() const {
    nlohmann::json doc;
    doc["format"] = "macroplace-policy";
    doc["version"] = 1;
    doc["config"] = {{"hidden", config_.hidden},
                     {"rounds", config_.rounds},
                     {"seed_channels", config_.seed_channels},
                     {"decoder_channels", config_.decoder_channels}};
    nlohmann::json tensors = nlohmann::json::array();
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const Eigen::MatrixXd& t = params_[i];
        std::vector<double> data;
        data.reserve(t.size());
        for (int r = 0; r < t.rows(); ++r) {
            for (int c = 0; c < t.cols(); ++c) data.push_back(t(r, c));
        }
        tensors.push_back({{"name", params_.names[i]}, {"rows", t.rows()}, {"cols", t.cols()}, {"data", data}});
    }
    doc["tensors"] = std::move(tensors);
    return doc;
}

PolicyNet PolicyNet::from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format") != "macroplace-policy" || doc.at("version") != 1) {
            throw ParseError("not a version 1 policy checkpoint");
        }
        const auto& jc = doc.at("config");
        PolicyConfig cfg{jc.at("hidden").get<int>(), jc.at("rounds").get<int>(), jc.at("seed_channels").get<int>(),
                         jc.at("decoder_channels").get<int>()};
        PolicyNet net(cfg, 0);
        const auto& tensors = doc.at("tensors");
        if (tensors.size() != net.params_.size()) throw ParseError("checkpoint tensor count mismatch");
        for (const auto& jt : tensors) {
            const std::size_t i = net.index(jt.at("name").get<std::string>());
            Eigen::MatrixXd& t = net.params_[i];
            if (jt.at("rows").get<int>() != t.rows() || jt.at("cols").get<int>() != t.cols()) {
                throw ParseError("checkpoint tensor '" + net.params_.names[i] + "' has the wrong shape");
            }
            const auto data = jt.at("data").get<std::vector<double>>();
            if (static_cast<Eigen::Index>(data.size()) != t.size()) throw ParseError("checkpoint tensor size mismatch");
            for (int r = 0; r < t.rows(); ++r) {
                for (int c = 0; c < t.cols(); ++c) t(r, c) = data[r * t.cols() + c];
            }
        }
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what());
    }
}

void PolicyNet::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json().dump() << '\n';
}

PolicyNet PolicyNet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open checkpoint " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return from_json(doc);
}

}  // namespace macroplace
