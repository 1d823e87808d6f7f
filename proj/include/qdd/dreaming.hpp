// Input-space gradient descent on a frozen regressor: each outer epoch
// re-encodes the current circuit, injects noise, takes inner gradient steps
// toward the target energy, decodes the moved vector back to a circuit, and
// labels the result with VQE. Every intermediate circuit is recorded.
//
// Trace files hold one JSON object per line:
//   {"schema":1,"epoch":k,"circuit":"...","predicted":p,
//    "dreaming_loss":l,"true_energy":e}

#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdd/encoding.hpp"
#include "qdd/neuralnet.hpp"
#include "qdd/rng.hpp"
#include "qdd/vqe.hpp"

namespace qdd {

inline constexpr int kTraceSchemaVersion = 1;

struct DreamConfig {
    double target_energy = -8.0;
    double learning_rate = 0.01;
    double noise_lower = 0.1;
    double noise_upper = 0.9;
    int inner_steps = 50;    // gradient steps per outer epoch
    int outer_epochs = 10;   // re-encode/decode rounds
    double tolerance = 1e-6; // stop once the dreaming loss falls below this
    std::uint64_t seed = 0;
};

inline double dreaming_loss(double predicted, double target) {
    const double d = predicted - target;
    return d * d;
}

/// One gradient-descent step on the input vector; the model never changes.
inline MultiHotVector dream_step(const MlpModel& m, const MultiHotVector& x,
                                 const DreamConfig& cfg) {
    if (m.vocab_fingerprint != 0 && x.vocab_fingerprint != m.vocab_fingerprint)
        throw std::invalid_argument("vector bound to a different vocabulary than the model");
    const double target = cfg.target_energy;
    // Dreaming loss is the L2 distance to the target, so the existing L2
    // backward pass yields exactly d(dreaming_loss)/dx.
    LossAndGradients lg =
        loss_and_gradients(m, x.values.data(), 1, &target, LossKind::L2);
    MultiHotVector out = x;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] -= cfg.learning_rate * lg.input_grads[i];
    return out;
}

struct DreamEpoch {
    int epoch = 0;
    std::string circuit;
    double predicted = 0.0;
    double dreaming_loss = 0.0;
    double true_energy = 0.0;
};

struct DreamTrace {
    std::vector<DreamEpoch> epochs;  // epoch 0 is the initial circuit

    double initial_energy() const { return epochs.front().true_energy; }
    double final_energy() const { return epochs.back().true_energy; }
    double minimum_energy() const {
        double e = epochs.front().true_energy;
        for (const DreamEpoch& ep : epochs) e = std::min(e, ep.true_energy);
        return e;
    }
};

/// Runs the full iterative loop from `c0`. Stops after cfg.outer_epochs or as
/// soon as the recorded dreaming loss falls below cfg.tolerance. The model is
/// checksummed before and after; dreaming must never touch the weights.
inline DreamTrace dream_run(const MlpModel& m, const Vocabulary& vocab, const Circuit& c0,
                            const DreamConfig& cfg, const HamiltonianSpec& h,
                            const VqeConfig& vqe) {
    if (m.input_size() != vocab.vector_length())
        throw std::invalid_argument("model input width does not match vocabulary");
    const std::uint64_t checksum_before = m.checksum();

    DreamTrace trace;
    auto label = [&](const Circuit& c, std::uint64_t epoch) {
        VqeConfig vc = vqe;
        vc.seed = derive_seed(cfg.seed, "vqe", epoch);
        return minimize_energy(c, h, vc).energy;
    };

    MultiHotVector x0 = encode(c0, vocab);
    DreamEpoch first;
    first.epoch = 0;
    first.circuit = serialize_circuit(c0);
    first.predicted = forward(m, x0);
    first.dreaming_loss = dreaming_loss(first.predicted, cfg.target_energy);
    first.true_energy = label(c0, 0);
    trace.epochs.push_back(std::move(first));

    Circuit current = c0;
    if (trace.epochs.front().dreaming_loss >= cfg.tolerance) {
        for (int epoch = 1; epoch <= cfg.outer_epochs; ++epoch) {
            MultiHotVector x = encode(current, vocab);
            x = inject_noise(x, cfg.noise_lower, cfg.noise_upper,
                             derive_seed(cfg.seed, "noise",
                                         static_cast<std::uint64_t>(epoch)));
            for (int step = 0; step < cfg.inner_steps; ++step) x = dream_step(m, x, cfg);

            current = decode(x, vocab);
            DreamEpoch rec;
            rec.epoch = epoch;
            rec.circuit = serialize_circuit(current);
            rec.predicted = forward(m, x);
            rec.dreaming_loss = dreaming_loss(rec.predicted, cfg.target_energy);
            rec.true_energy = label(current, static_cast<std::uint64_t>(epoch));
            const bool done = rec.dreaming_loss < cfg.tolerance;
            trace.epochs.push_back(std::move(rec));
            if (done) break;
        }
    }

    if (m.checksum() != checksum_before)
        throw std::logic_error("model weights changed during dreaming");
    return trace;
}

inline std::string trace_epoch_line(const DreamEpoch& e) {
    nlohmann::ordered_json j;
    j["schema"] = kTraceSchemaVersion;
    j["epoch"] = e.epoch;
    j["circuit"] = e.circuit;
    j["predicted"] = e.predicted;
    j["dreaming_loss"] = e.dreaming_loss;
    j["true_energy"] = e.true_energy;
    return j.dump();
}

inline void write_trace(const DreamTrace& trace, const std::string& path) {
    std::string out;
    for (const DreamEpoch& e : trace.epochs) {
        out += trace_epoch_line(e);
        out.push_back('\n');
    }
    write_file(path, out);
}

inline DreamTrace read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    DreamTrace trace;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": bad trace record: " + e.what());
        }
        if (j.value("schema", 0) != kTraceSchemaVersion)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": unsupported trace schema");
        DreamEpoch e;
        e.epoch = j.at("epoch").get<int>();
        e.circuit = j.at("circuit").get<std::string>();
        e.predicted = j.at("predicted").get<double>();
        e.dreaming_loss = j.at("dreaming_loss").get<double>();
        e.true_energy = j.at("true_energy").get<double>();
        trace.epochs.push_back(std::move(e));
    }
    if (trace.epochs.empty()) throw std::runtime_error("empty trace file: " + path);
    return trace;
}

}  // namespace qdd
