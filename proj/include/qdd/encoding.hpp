// Bidirectional mapping between circuits and multi-hot feature vectors.
//
// Vector layout (the checkpoint compatibility contract, slot-major):
//   vector = slot[0] ++ slot[1] ++ ... ++ slot[max_gates-1]
//   slot   = gate one-hot ++ target one-hot ++ control one-hot ++ param one-hot
// Dictionary orders: gates follow the pool order with "nop" appended last;
// targets are qubits 0..n-1; controls are qubits 0..n-1 with "nop" last;
// param tokens start with "nop" at index 0 followed by dataset tokens in
// insertion order. An absent parameter is encoded as an all-zero param
// sub-segment; unused slots are all-zero padding.
//
// Decoding treats an entry as "hot" when it is >= 1. A noiseless one-hot entry
// is exactly 1 and additive uniform noise from [lower, upper] with lower >= 0
// keeps hot entries at or above 1 while cold entries stay below 1 whenever
// upper < 1, so slot occupancy and per-segment argmax survive noise injection.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdd/circuit.hpp"
#include "qdd/rng.hpp"
#include "qdd/serde.hpp"

namespace qdd {

/// Canonical token for a gate parameter ("nop" when absent).
inline std::string param_token(const GateParam& p) {
    switch (p.kind) {
        case GateParam::Kind::None: return "nop";
        case GateParam::Kind::Var: return p.name;
        case GateParam::Kind::Fixed: return format_double(p.value);
    }
    return "nop";
}

class Vocabulary {
public:
    Vocabulary(GatePool pool, int n_qubits, std::vector<std::string> param_tokens,
               int max_gates)
        : pool_(std::move(pool)), n_qubits_(n_qubits), max_gates_(max_gates) {
        if (pool_.allowed.empty()) throw std::invalid_argument("empty gate pool");
        if (n_qubits_ < 1) throw std::invalid_argument("vocabulary needs qubits");
        if (max_gates_ < 1) throw std::invalid_argument("max_gates must be positive");

        for (Gate g : pool_.allowed) {
            if (g == Gate::Nop) continue;  // appended once, below
            gate_tokens_.push_back(g);
        }
        // "nop" terminates the gate dictionary and is always encodable.
        gate_tokens_.push_back(Gate::Nop);

        param_tokens_.push_back("nop");
        for (const std::string& t : param_tokens) {
            if (t == "nop") continue;
            if (param_index_of(t) < 0) param_tokens_.push_back(t);
        }
    }

    const GatePool& pool() const { return pool_; }
    int n_qubits() const { return n_qubits_; }
    int max_gates() const { return max_gates_; }
    const std::vector<Gate>& gate_tokens() const { return gate_tokens_; }
    const std::vector<std::string>& param_tokens() const { return param_tokens_; }

    int gate_width() const { return static_cast<int>(gate_tokens_.size()); }
    int target_width() const { return n_qubits_; }
    int control_width() const { return n_qubits_ + 1; }  // + "nop"
    int param_width() const { return static_cast<int>(param_tokens_.size()); }

    int segment_width() const {
        return gate_width() + target_width() + control_width() + param_width();
    }
    int vector_length() const { return max_gates_ * segment_width(); }

    int gate_index(Gate g) const {
        for (std::size_t i = 0; i < gate_tokens_.size(); ++i)
            if (gate_tokens_[i] == g) return static_cast<int>(i);
        return -1;
    }

    int param_index_of(const std::string& token) const {
        for (std::size_t i = 0; i < param_tokens_.size(); ++i)
            if (param_tokens_[i] == token) return static_cast<int>(i);
        return -1;
    }

    /// Stable hash of the full layout; binds vectors and models to this vocabulary.
    std::uint64_t fingerprint() const {
        std::uint64_t h = kFnvOffset;
        h = fnv1a("vocab:v1", h);
        for (Gate g : pool_.allowed) h = fnv1a(gate_name(g), h);
        h = fnv1a_u64(pool_.connectivity.kind == Connectivity::Kind::AllToAll
                          ? 0xa11ULL
                          : static_cast<std::uint64_t>(pool_.connectivity.max_distance),
                      h);
        h = fnv1a_u64(static_cast<std::uint64_t>(n_qubits_), h);
        h = fnv1a_u64(static_cast<std::uint64_t>(max_gates_), h);
        for (Gate g : gate_tokens_) h = fnv1a(gate_name(g), h);
        for (const std::string& t : param_tokens_) {
            h = fnv1a(t, h);
            h = fnv1a_u64(0x1f, h);  // token separator
        }
        return h;
    }

private:
    GatePool pool_;
    int n_qubits_;
    int max_gates_;
    std::vector<Gate> gate_tokens_;
    std::vector<std::string> param_tokens_;
};

inline Vocabulary build_vocabulary(const GatePool& pool, int n_qubits,
                                   const std::vector<std::string>& param_tokens,
                                   int max_gates) {
    return Vocabulary(pool, n_qubits, param_tokens, max_gates);
}

/// Distinct param tokens of a circuit sequence, in first-seen order.
inline std::vector<std::string> collect_param_tokens(const std::vector<Circuit>& circuits) {
    std::vector<std::string> tokens{"nop"};
    for (const Circuit& c : circuits) {
        for (const GateSpec& g : c.gates()) {
            std::string t = param_token(g.param);
            if (std::find(tokens.begin(), tokens.end(), t) == tokens.end())
                tokens.push_back(t);
        }
    }
    return tokens;
}

struct MultiHotVector {
    std::vector<double> values;
    std::uint64_t vocab_fingerprint = 0;
};

inline MultiHotVector encode(const Circuit& c, const Vocabulary& v) {
    if (c.n_qubits() != v.n_qubits())
        throw std::invalid_argument("circuit qubit count does not match vocabulary");
    if (static_cast<int>(c.gates().size()) > v.max_gates())
        throw std::invalid_argument("circuit has more gates than vocabulary slots");

    MultiHotVector out;
    out.values.assign(static_cast<std::size_t>(v.vector_length()), 0.0);
    out.vocab_fingerprint = v.fingerprint();

    const int width = v.segment_width();
    for (std::size_t slot = 0; slot < c.gates().size(); ++slot) {
        const GateSpec& g = c.gates()[slot];
        double* seg = out.values.data() + static_cast<std::size_t>(width) * slot;

        int gi = v.gate_index(g.gate);
        if (gi < 0)
            throw std::invalid_argument(std::string(gate_name(g.gate)) +
                                        " absent from vocabulary");
        seg[gi] = 1.0;

        double* target_seg = seg + v.gate_width();
        target_seg[g.target] = 1.0;

        double* control_seg = target_seg + v.target_width();
        control_seg[g.control ? *g.control : v.n_qubits()] = 1.0;

        if (g.param.kind != GateParam::Kind::None) {
            double* param_seg = control_seg + v.control_width();
            int pi = v.param_index_of(param_token(g.param));
            if (pi < 0)
                throw std::invalid_argument("param token absent from vocabulary: " +
                                            param_token(g.param));
            param_seg[pi] = 1.0;
        }
        // An absent parameter leaves the param sub-segment all-zero.
    }
    return out;
}

/// Adds an independent uniform draw from [lower, upper] to every entry.
inline MultiHotVector inject_noise(const MultiHotVector& x, double lower, double upper,
                                   std::uint64_t seed) {
    if (lower > upper) throw std::invalid_argument("noise lower bound above upper bound");
    if (lower < 0.0) throw std::invalid_argument("noise bounds must be non-negative");
    Rng rng(seed);
    MultiHotVector out = x;
    for (double& e : out.values) e += rng.uniform(lower, upper);
    return out;
}

namespace detail {

// Argmax with ties broken toward the lowest index.
inline int argmax(const double* seg, int width) {
    int best = 0;
    for (int i = 1; i < width; ++i)
        if (seg[i] > seg[best]) best = i;
    return best;
}

// A sub-segment carries a symbol only if some entry reached the hot threshold.
inline bool has_hot(const double* seg, int width) {
    for (int i = 0; i < width; ++i)
        if (seg[i] >= 1.0) return true;
    return false;
}

}  // namespace detail

/// Maps a vector back to the circuit it represents. Total on correctly sized
/// vectors: slots without a hot gate entry (padding) and slots decoding to NOP
/// are dropped, and two-qubit controls are resolved within the pool's
/// connectivity so the result always validates. A vector with no surviving
/// slots decodes to the identity circuit "NOP=0=nop=nop".
inline Circuit decode(const MultiHotVector& x, const Vocabulary& v) {
    if (x.values.size() != static_cast<std::size_t>(v.vector_length()))
        throw std::invalid_argument("vector length does not match vocabulary layout");

    const int width = v.segment_width();
    std::vector<GateSpec> gates;
    for (int slot = 0; slot < v.max_gates(); ++slot) {
        const double* seg = x.values.data() + static_cast<std::size_t>(width) * slot;
        if (!detail::has_hot(seg, v.gate_width())) continue;  // padding slot

        Gate gate = v.gate_tokens()[static_cast<std::size_t>(
            detail::argmax(seg, v.gate_width()))];
        if (gate == Gate::Nop) continue;

        const double* target_seg = seg + v.gate_width();
        GateSpec g;
        g.gate = gate;
        g.target = detail::argmax(target_seg, v.target_width());

        const double* control_seg = target_seg + v.target_width();
        if (is_two_qubit(gate)) {
            // Best control that keeps the gate valid under the pool.
            int best = -1;
            for (int q = 0; q < v.n_qubits(); ++q) {
                if (q == g.target || !v.pool().connectivity.allows(g.target, q)) continue;
                if (best < 0 || control_seg[q] > control_seg[best]) best = q;
            }
            if (best < 0)
                throw std::invalid_argument("no admissible control qubit for " +
                                            std::string(gate_name(gate)));
            g.control = best;
        }

        if (is_parametrized(gate)) {
            const double* param_seg = control_seg + v.control_width();
            if (detail::has_hot(param_seg, v.param_width())) {
                const std::string& token = v.param_tokens()[static_cast<std::size_t>(
                    detail::argmax(param_seg, v.param_width()))];
                if (token != "nop") {
                    double value = 0.0;
                    g.param = parse_double(token, value) ? GateParam::fixed(value)
                                                         : GateParam::var(token);
                }
            }
        }
        gates.push_back(std::move(g));
    }

    if (gates.empty()) gates.push_back(GateSpec{Gate::Nop, 0, std::nullopt, {}});
    return Circuit(v.n_qubits(), std::move(gates));
}

}  // namespace qdd
