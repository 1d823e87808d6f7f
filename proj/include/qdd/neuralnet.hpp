// Fully-connected energy regressor trained from scratch: forward pass,
// reverse-mode gradients with respect to weights and to the input vector,
// Adam / AdamW, the training loop, and the checkpoint file format.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qdd/dataset.hpp"
#include "qdd/encoding.hpp"
#include "qdd/rng.hpp"
#include "qdd/serde.hpp"

namespace qdd {

inline constexpr int kCheckpointSchemaVersion = 1;
inline constexpr char kCheckpointMagic[] = "QDDMLP1\n";

enum class LossKind { L1, L2 };

inline std::string_view loss_name(LossKind k) { return k == LossKind::L1 ? "L1" : "L2"; }

struct OptimizerConfig {
    enum class Kind { Adam, AdamW };

    Kind kind = Kind::Adam;
    double learning_rate = 1e-3;
    double weight_decay = 0.0;  // AdamW only; biases are exempt
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainConfig {
    LossKind loss = LossKind::L2;
    OptimizerConfig optimizer;
    int epochs = 2000;
    int batch_size = 64;
    double train_fraction = 0.85;
    double noise_lower = 0.1;
    double noise_upper = 0.95;
    int plateau_patience = 200;  // epochs without a new best test loss
    std::uint64_t seed = 0;
};

/// Rectifier hidden layers, linear scalar output. Weight matrices are
/// row-major (out x in). Frozen models are immutable values.
struct MlpModel {
    std::vector<int> layer_sizes;  // input, hidden..., 1
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::uint64_t vocab_fingerprint = 0;

    int input_size() const { return layer_sizes.front(); }
    std::size_t layer_count() const { return weights.size(); }

    std::uint64_t checksum() const {
        std::uint64_t h = kFnvOffset;
        auto mix = [&](const std::vector<double>& v) {
            h = fnv1a(std::string_view(reinterpret_cast<const char*>(v.data()),
                                       v.size() * sizeof(double)),
                      h);
        };
        for (const auto& w : weights) mix(w);
        for (const auto& b : biases) mix(b);
        return h;
    }
};

/// Scaled-uniform initialization: weights drawn from
/// U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))), biases zero.
inline MlpModel init_model(const std::vector<int>& layer_sizes, std::uint64_t seed,
                           std::uint64_t vocab_fingerprint = 0) {
    if (layer_sizes.size() < 3)
        throw std::invalid_argument("model needs at least one hidden layer");
    for (int s : layer_sizes)
        if (s < 1) throw std::invalid_argument("zero-width layer");
    if (layer_sizes.back() != 1)
        throw std::invalid_argument("output layer must have width 1");

    MlpModel m;
    m.layer_sizes = layer_sizes;
    m.vocab_fingerprint = vocab_fingerprint;
    Rng rng(derive_seed(seed, "init"));
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::vector<double> w(static_cast<std::size_t>(fan_in) * fan_out);
        for (double& v : w) v = rng.uniform(-limit, limit);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(static_cast<std::size_t>(fan_out), 0.0);
    }
    return m;
}

namespace detail {

inline constexpr int kBatchTile = 8;  // SIMD lanes; samples share one weight sweep

// Packs a batch tile into lane-major scratch: xt[i*kBatchTile + t], with zero
// padding for missing lanes, so the tile loop below vectorizes cleanly.
inline void pack_tile(const double* x, int b0, int tile, int in, std::vector<double>& xt) {
    for (int i = 0; i < in; ++i) {
        double* lane = xt.data() + static_cast<std::size_t>(i) * kBatchTile;
        for (int t = 0; t < kBatchTile; ++t)
            lane[t] = t < tile ? x[static_cast<std::size_t>(b0 + t) * in + i] : 0.0;
    }
}

// out[b, o] = sum_i X[b, i] * W[o, i] + bias[o]. Each weight row is streamed
// once per batch tile; the tile occupies the SIMD lanes.
inline void affine_forward(const double* x, int batch, int in, const std::vector<double>& w,
                           const std::vector<double>& bias, int out, double* z) {
    std::vector<double> xt(static_cast<std::size_t>(in) * kBatchTile);
    for (int b0 = 0; b0 < batch; b0 += kBatchTile) {
        const int tile = std::min(kBatchTile, batch - b0);
        pack_tile(x, b0, tile, in, xt);
        for (int o = 0; o < out; ++o) {
            const double* wo = w.data() + static_cast<std::size_t>(o) * in;
            double acc[kBatchTile] = {};
            for (int i = 0; i < in; ++i) {
                const double wv = wo[i];
                const double* lane = xt.data() + static_cast<std::size_t>(i) * kBatchTile;
                for (int t = 0; t < kBatchTile; ++t) acc[t] += lane[t] * wv;
            }
            for (int t = 0; t < tile; ++t)
                z[static_cast<std::size_t>(b0 + t) * out + o] =
                    acc[t] + bias[static_cast<std::size_t>(o)];
        }
    }
}

// dW[o, :] += sum_b delta[b, o] * A[b, :] and dX[b, :] += delta[b, o] * W[o, :],
// with the same lane-major tiling.
inline void affine_backward(const double* activations, const double* delta, int batch,
                            int in, int out, const std::vector<double>& w,
                            std::vector<double>& dw, std::vector<double>& db,
                            double* prev_delta) {
    std::vector<double> at(static_cast<std::size_t>(in) * kBatchTile);
    std::vector<double> pdt(static_cast<std::size_t>(in) * kBatchTile);
    for (int b0 = 0; b0 < batch; b0 += kBatchTile) {
        const int tile = std::min(kBatchTile, batch - b0);
        pack_tile(activations, b0, tile, in, at);
        std::fill(pdt.begin(), pdt.end(), 0.0);
        for (int o = 0; o < out; ++o) {
            const double* wo = w.data() + static_cast<std::size_t>(o) * in;
            double* dwo = dw.data() + static_cast<std::size_t>(o) * in;
            double d[kBatchTile] = {};
            bool any = false;
            for (int t = 0; t < tile; ++t) {
                d[t] = delta[static_cast<std::size_t>(b0 + t) * out + o];
                db[static_cast<std::size_t>(o)] += d[t];
                any = any || d[t] != 0.0;
            }
            if (!any) continue;
            for (int i = 0; i < in; ++i) {
                const double wv = wo[i];
                const double* alane = at.data() + static_cast<std::size_t>(i) * kBatchTile;
                double* plane = pdt.data() + static_cast<std::size_t>(i) * kBatchTile;
                double dw_acc = 0.0;
                for (int t = 0; t < kBatchTile; ++t) {
                    dw_acc += d[t] * alane[t];
                    plane[t] += d[t] * wv;
                }
                dwo[i] += dw_acc;
            }
        }
        for (int t = 0; t < tile; ++t) {
            double* row = prev_delta + static_cast<std::size_t>(b0 + t) * in;
            for (int i = 0; i < in; ++i)
                row[i] += pdt[static_cast<std::size_t>(i) * kBatchTile + t];
        }
    }
}

}  // namespace detail

inline double forward(const MlpModel& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.input_size())
        throw std::invalid_argument("input size does not match model");
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < m.layer_count(); ++l) {
        const int in = m.layer_sizes[l];
        const int out = m.layer_sizes[l + 1];
        next.assign(static_cast<std::size_t>(out), 0.0);
        detail::affine_forward(cur.data(), 1, in, m.weights[l], m.biases[l], out,
                               next.data());
        if (l + 1 < m.layer_count())
            for (double& v : next) v = v > 0.0 ? v : 0.0;
        cur.swap(next);
    }
    return cur[0];
}

inline double forward(const MlpModel& m, const MultiHotVector& x) {
    if (m.vocab_fingerprint != 0 && x.vocab_fingerprint != m.vocab_fingerprint)
        throw std::invalid_argument("input vector bound to a different vocabulary");
    return forward(m, std::span<const double>(x.values));
}

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

struct LossAndGradients {
    double loss = 0.0;
    Gradients grads;
    std::vector<double> input_grads;        // batch x input
    std::vector<double> predictions;        // batch
};

/// Mean loss over the batch plus gradients with respect to every weight,
/// bias, and input entry.
inline LossAndGradients loss_and_gradients(const MlpModel& m, const double* x, int batch,
                                           const double* labels, LossKind loss_kind) {
    if (batch <= 0) throw std::invalid_argument("empty batch");
    const std::size_t layers = m.layer_count();

    // activations[0] is the input; activations[l+1] the output of layer l.
    std::vector<std::vector<double>> activations(layers + 1);
    std::vector<std::vector<double>> preacts(layers);
    activations[0].assign(x, x + static_cast<std::size_t>(batch) * m.input_size());
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = m.layer_sizes[l];
        const int out = m.layer_sizes[l + 1];
        preacts[l].assign(static_cast<std::size_t>(batch) * out, 0.0);
        detail::affine_forward(activations[l].data(), batch, in, m.weights[l],
                               m.biases[l], out, preacts[l].data());
        activations[l + 1] = preacts[l];
        if (l + 1 < layers)
            for (double& v : activations[l + 1]) v = v > 0.0 ? v : 0.0;
    }

    LossAndGradients result;
    result.predictions.assign(activations[layers].begin(), activations[layers].end());

    double loss = 0.0;
    std::vector<double> delta(static_cast<std::size_t>(batch), 0.0);
    for (int b = 0; b < batch; ++b) {
        const double diff = result.predictions[static_cast<std::size_t>(b)] - labels[b];
        if (loss_kind == LossKind::L2) {
            loss += diff * diff;
            delta[static_cast<std::size_t>(b)] = 2.0 * diff / batch;
        } else {
            loss += std::abs(diff);
            delta[static_cast<std::size_t>(b)] =
                (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0)) / batch;
        }
    }
    result.loss = loss / batch;

    result.grads.weights.resize(layers);
    result.grads.biases.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        result.grads.weights[l].assign(m.weights[l].size(), 0.0);
        result.grads.biases[l].assign(m.biases[l].size(), 0.0);
    }

    // delta holds dLoss/d(pre-activation) of the current layer, batch-major.
    for (std::size_t l = layers; l-- > 0;) {
        const int in = m.layer_sizes[l];
        const int out = m.layer_sizes[l + 1];
        std::vector<double> prev_delta(static_cast<std::size_t>(batch) * in, 0.0);
        detail::affine_backward(activations[l].data(), delta.data(), batch, in, out,
                                m.weights[l], result.grads.weights[l],
                                result.grads.biases[l], prev_delta.data());
        if (l > 0) {
            const std::vector<double>& z = preacts[l - 1];
            for (std::size_t i = 0; i < prev_delta.size(); ++i)
                if (z[i] <= 0.0) prev_delta[i] = 0.0;
        }
        delta.swap(prev_delta);
    }
    result.input_grads = std::move(delta);
    return result;
}

struct AdamState {
    std::vector<std::vector<double>> m_weights, v_weights;
    std::vector<std::vector<double>> m_biases, v_biases;
    long step = 0;

    static AdamState zeros_like(const MlpModel& m) {
        AdamState s;
        for (const auto& w : m.weights) {
            s.m_weights.emplace_back(w.size(), 0.0);
            s.v_weights.emplace_back(w.size(), 0.0);
        }
        for (const auto& b : m.biases) {
            s.m_biases.emplace_back(b.size(), 0.0);
            s.v_biases.emplace_back(b.size(), 0.0);
        }
        return s;
    }
};

/// One Adam step with bias correction. AdamW first applies decoupled decay
/// w <- w - lr * lambda * w to weights only; biases never decay.
inline void optimizer_step(MlpModel& m, const Gradients& grads, AdamState& state,
                           const OptimizerConfig& opt) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.step));

    auto update = [&](std::vector<double>& param, const std::vector<double>& grad,
                      std::vector<double>& mom, std::vector<double>& vel, bool decay) {
        if (decay && opt.kind == OptimizerConfig::Kind::AdamW && opt.weight_decay > 0.0)
            for (double& p : param) p -= opt.learning_rate * opt.weight_decay * p;
        for (std::size_t i = 0; i < param.size(); ++i) {
            mom[i] = opt.beta1 * mom[i] + (1.0 - opt.beta1) * grad[i];
            vel[i] = opt.beta2 * vel[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
            param[i] -= opt.learning_rate * (mom[i] / bc1) /
                        (std::sqrt(vel[i] / bc2) + opt.epsilon);
        }
    };
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        update(m.weights[l], grads.weights[l], state.m_weights[l], state.v_weights[l], true);
        update(m.biases[l], grads.biases[l], state.m_biases[l], state.v_biases[l], false);
    }
}

struct TrainReport {
    double final_train_loss = 0.0;
    double final_test_loss = 0.0;
    double best_test_loss = 0.0;
    int best_epoch = 0;
    int epochs_run = 0;
    bool stopped_early = false;
    std::vector<double> train_curve;
    std::vector<double> test_curve;
    std::vector<std::size_t> train_indices;  // into the record list
    std::vector<std::size_t> test_indices;
    // Checksum of the last-epoch weights. Unlike the returned snapshot (picked
    // by test loss), the trajectory itself must not depend on test records.
    std::uint64_t final_model_checksum = 0;
};

/// Trains on encoded dataset records. The record order is shuffled once with
/// the config seed and split train:test by cfg.train_fraction. Every epoch
/// draws fresh input noise per training sample. Held-out records are encoded
/// with one fixed noise draw each (seeded by the config seed): training inputs
/// always carry the additive noise band, so a noiseless vector lies outside
/// the input distribution and would measure extrapolation rather than
/// generalization. Returns the snapshot with the best test loss.
inline std::pair<MlpModel, TrainReport> train(const std::vector<DatasetRecord>& records,
                                              const Vocabulary& vocab,
                                              const std::vector<int>& hidden_sizes,
                                              const TrainConfig& cfg) {
    if (records.size() < 2) throw std::invalid_argument("dataset too small to split");
    if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
        throw std::invalid_argument("train fraction must be in (0,1)");

    const int input = vocab.vector_length();
    std::vector<int> layer_sizes{input};
    layer_sizes.insert(layer_sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
    layer_sizes.push_back(1);

    // Noiseless feature matrix, one row per record.
    std::vector<double> base(static_cast<std::size_t>(records.size()) * input);
    std::vector<double> labels(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        Circuit c = parse_circuit_string(records[r].circuit_string, vocab.n_qubits());
        MultiHotVector enc = encode(c, vocab);
        std::copy(enc.values.begin(), enc.values.end(),
                  base.begin() + static_cast<std::ptrdiff_t>(r * input));
        labels[r] = records[r].energy;
    }

    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng split_rng(derive_seed(cfg.seed, "split"));
    split_rng.shuffle(order);
    const std::size_t n_train = std::max<std::size_t>(
        1, static_cast<std::size_t>(cfg.train_fraction * static_cast<double>(order.size())));
    if (n_train >= order.size())
        throw std::invalid_argument("split leaves no test records");
    std::vector<std::size_t> train_idx(order.begin(),
                                       order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                      order.end());

    MlpModel model = init_model(layer_sizes, derive_seed(cfg.seed, "model"),
                                vocab.fingerprint());
    AdamState state = AdamState::zeros_like(model);

    // One fixed noisy encoding per held-out record.
    std::vector<double> test_features(test_idx.size() * static_cast<std::size_t>(input));
    for (std::size_t t = 0; t < test_idx.size(); ++t) {
        const std::size_t rec = test_idx[t];
        Rng noise(derive_seed(cfg.seed, "test-noise", rec));
        const double* src = base.data() + rec * input;
        double* dst = test_features.data() + t * static_cast<std::size_t>(input);
        for (int i = 0; i < input; ++i)
            dst[i] = src[i] + noise.uniform(cfg.noise_lower, cfg.noise_upper);
    }

    auto evaluate = [&] {
        double loss = 0.0;
        for (std::size_t t = 0; t < test_idx.size(); ++t) {
            const double pred = forward(
                model,
                std::span<const double>(
                    test_features.data() + t * static_cast<std::size_t>(input),
                    static_cast<std::size_t>(input)));
            const double diff = pred - labels[test_idx[t]];
            loss += cfg.loss == LossKind::L2 ? diff * diff : std::abs(diff);
        }
        return loss / static_cast<double>(test_idx.size());
    };

    TrainReport report;
    MlpModel best = model;
    double best_test = evaluate();
    int best_epoch = 0;

    std::vector<double> batch_x;
    std::vector<double> batch_y;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng epoch_rng(derive_seed(cfg.seed, "epoch", static_cast<std::uint64_t>(epoch)));
        std::vector<std::size_t> sweep = train_idx;
        epoch_rng.shuffle(sweep);

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < sweep.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(sweep.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const int bsize = static_cast<int>(stop - start);
            batch_x.assign(static_cast<std::size_t>(bsize) * input, 0.0);
            batch_y.assign(static_cast<std::size_t>(bsize), 0.0);
            for (int b = 0; b < bsize; ++b) {
                const std::size_t rec = sweep[start + static_cast<std::size_t>(b)];
                // Fresh augmentation draw per sample per epoch.
                Rng noise(derive_seed(cfg.seed, "noise",
                                      static_cast<std::uint64_t>(epoch), rec));
                const double* src = base.data() + rec * input;
                double* dst = batch_x.data() + static_cast<std::size_t>(b) * input;
                for (int i = 0; i < input; ++i)
                    dst[i] = src[i] + noise.uniform(cfg.noise_lower, cfg.noise_upper);
                batch_y[static_cast<std::size_t>(b)] = labels[rec];
            }
            LossAndGradients lg =
                loss_and_gradients(model, batch_x.data(), bsize, batch_y.data(), cfg.loss);
            optimizer_step(model, lg.grads, state, cfg.optimizer);
            epoch_loss += lg.loss * bsize;
            seen += static_cast<std::size_t>(bsize);
        }
        report.train_curve.push_back(epoch_loss / static_cast<double>(seen));

        const double test_loss = evaluate();
        report.test_curve.push_back(test_loss);
        report.epochs_run = epoch;
        if (test_loss < best_test) {
            best_test = test_loss;
            best = model;
            best_epoch = epoch;
        }
        if (epoch - best_epoch >= cfg.plateau_patience) {
            report.stopped_early = true;
            break;
        }
    }

    report.final_train_loss = report.train_curve.empty() ? 0.0 : report.train_curve.back();
    report.final_test_loss = report.test_curve.empty() ? best_test : report.test_curve.back();
    report.best_test_loss = best_test;
    report.best_epoch = best_epoch;
    report.train_indices = std::move(train_idx);
    report.test_indices = std::move(test_idx);
    report.final_model_checksum = model.checksum();
    return {std::move(best), std::move(report)};
}

// ---------------------------------------------------------------------------
// Checkpoint file format: magic line, one JSON header line (schema, layer
// sizes, vocabulary, fingerprint, training digest, layout notes), then raw
// little-endian float64 payload: per layer all weights row-major, then all
// biases, in layer order.
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json vocab_to_json(const Vocabulary& v) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json pool = nlohmann::ordered_json::array();
    for (Gate g : v.pool().allowed) pool.push_back(std::string(gate_name(g)));
    j["pool"] = std::move(pool);
    j["connectivity"] =
        v.pool().connectivity.kind == Connectivity::Kind::AllToAll
            ? nlohmann::ordered_json{{"kind", "all_to_all"}}
            : nlohmann::ordered_json{{"kind", "nearest_neighbor"},
                                     {"max_distance", v.pool().connectivity.max_distance}};
    j["n_qubits"] = v.n_qubits();
    j["max_gates"] = v.max_gates();
    j["param_tokens"] = v.param_tokens();
    return j;
}

inline Vocabulary vocab_from_json(const nlohmann::json& j) {
    GatePool pool;
    for (const auto& name : j.at("pool")) {
        auto g = gate_from_name(name.get<std::string>());
        if (!g) throw std::runtime_error("checkpoint names unknown gate");
        pool.allowed.push_back(*g);
    }
    const auto& conn = j.at("connectivity");
    pool.connectivity = conn.at("kind") == "all_to_all"
                            ? Connectivity::all_to_all()
                            : Connectivity::nearest_neighbor(conn.at("max_distance"));
    return build_vocabulary(pool, j.at("n_qubits"), j.at("param_tokens"),
                            j.at("max_gates"));
}

}  // namespace detail

inline void save_checkpoint(const MlpModel& m, const Vocabulary& vocab,
                            const std::string& path,
                            const std::string& train_digest = "") {
    nlohmann::ordered_json header;
    header["schema"] = kCheckpointSchemaVersion;
    header["layer_sizes"] = m.layer_sizes;
    header["activation"] = "relu";
    header["vocab_fingerprint"] = to_hex(vocab.fingerprint());
    header["vocab"] = detail::vocab_to_json(vocab);
    header["train_digest"] = train_digest;
    header["layout"] =
        "input is slot-major: per gate slot the one-hot sub-segments are "
        "gate, target, control, param in dictionary order; payload is raw "
        "little-endian float64, per layer weights row-major then biases";

    std::string out(kCheckpointMagic);
    out += header.dump();
    out.push_back('\n');
    auto append = [&](const std::vector<double>& v) {
        const std::size_t old = out.size();
        out.resize(old + v.size() * sizeof(double));
        std::memcpy(out.data() + old, v.data(), v.size() * sizeof(double));
    };
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        append(m.weights[l]);
        append(m.biases[l]);
    }
    write_file(path, out);
}

inline std::pair<MlpModel, Vocabulary> load_checkpoint(const std::string& path) {
    const std::string raw = read_file(path);
    const std::size_t magic_len = sizeof(kCheckpointMagic) - 1;
    if (raw.size() < magic_len || raw.compare(0, magic_len, kCheckpointMagic) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    const std::size_t header_end = raw.find('\n', magic_len);
    if (header_end == std::string::npos)
        throw std::runtime_error("truncated checkpoint header: " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(raw.substr(magic_len, header_end - magic_len));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad checkpoint header: " + std::string(e.what()));
    }
    if (header.value("schema", 0) != kCheckpointSchemaVersion)
        throw std::runtime_error("unsupported checkpoint schema");

    Vocabulary vocab = detail::vocab_from_json(header.at("vocab"));
    if (to_hex(vocab.fingerprint()) != header.at("vocab_fingerprint").get<std::string>())
        throw std::runtime_error("checkpoint vocabulary fingerprint mismatch");

    MlpModel m;
    m.layer_sizes = header.at("layer_sizes").get<std::vector<int>>();
    if (m.layer_sizes.size() < 2) throw std::runtime_error("bad checkpoint layer sizes");
    if (m.layer_sizes.front() != vocab.vector_length())
        throw std::runtime_error("checkpoint input width does not match its vocabulary");
    m.vocab_fingerprint = vocab.fingerprint();

    std::size_t offset = header_end + 1;
    auto take = [&](std::size_t count) {
        const std::size_t bytes = count * sizeof(double);
        if (offset + bytes > raw.size())
            throw std::runtime_error("truncated checkpoint payload: " + path);
        std::vector<double> v(count);
        std::memcpy(v.data(), raw.data() + offset, bytes);
        offset += bytes;
        return v;
    };
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        const std::size_t in = static_cast<std::size_t>(m.layer_sizes[l]);
        const std::size_t out = static_cast<std::size_t>(m.layer_sizes[l + 1]);
        m.weights.push_back(take(in * out));
        m.biases.push_back(take(out));
    }
    if (offset != raw.size())
        throw std::runtime_error("checkpoint has trailing bytes: " + path);
    return {std::move(m), std::move(vocab)};
}

}  // namespace qdd
