// Test-only oracles and generators, kept independent of the library's
// implementation paths they are used to check.

#pragma once

#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "qdd/circuit.hpp"
#include "qdd/rng.hpp"
#include "qdd/simulator.hpp"

namespace qdd::testing {

// ---------------------------------------------------------------------------
// Full-matrix statevector oracle: expands every gate to a dense 2^n x 2^n
// matrix via explicit Kronecker products and multiplies out the chain.
// ---------------------------------------------------------------------------

using CMat = std::vector<std::vector<Complex>>;

inline CMat cmat_identity(std::size_t dim) {
    CMat m(dim, std::vector<Complex>(dim, Complex{0, 0}));
    for (std::size_t i = 0; i < dim; ++i) m[i][i] = 1.0;
    return m;
}

inline CMat cmat_mul(const CMat& a, const CMat& b) {
    const std::size_t n = a.size();
    CMat out(n, std::vector<Complex>(n, Complex{0, 0}));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const Complex aik = a[i][k];
            if (aik == Complex{0, 0}) continue;
            for (std::size_t j = 0; j < n; ++j) out[i][j] += aik * b[k][j];
        }
    return out;
}

// Embeds a 2x2 or 4x4 gate matrix into the full register dimension by
// summing basis transitions (little-endian bit order, |control target>).
inline CMat embed_gate(const GateSpec& g, std::optional<double> angle, int n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    GateMatrix u = gate_matrix(g.gate, angle);
    CMat out(dim, std::vector<Complex>(dim, Complex{0, 0}));
    if (u.dim == 2) {
        const std::size_t mask = std::size_t{1} << g.target;
        for (std::size_t col = 0; col < dim; ++col) {
            const int cbit = (col & mask) ? 1 : 0;
            for (int rbit = 0; rbit < 2; ++rbit) {
                const std::size_t row = rbit ? (col | mask) : (col & ~mask);
                out[row][col] += u.at(rbit, cbit);
            }
        }
    } else {
        const std::size_t tmask = std::size_t{1} << g.target;
        const std::size_t cmask = std::size_t{1} << *g.control;
        for (std::size_t col = 0; col < dim; ++col) {
            const int cin = ((col & cmask) ? 2 : 0) | ((col & tmask) ? 1 : 0);
            for (int rout = 0; rout < 4; ++rout) {
                std::size_t row = col & ~(tmask | cmask);
                if (rout & 2) row |= cmask;
                if (rout & 1) row |= tmask;
                out[row][col] += u.at(rout, cin);
            }
        }
    }
    return out;
}

inline std::vector<Complex> matrix_chain_state(const Circuit& c,
                                               const ParamBinding& binding) {
    const std::size_t dim = std::size_t{1} << c.n_qubits();
    CMat total = cmat_identity(dim);
    for (std::size_t i = 0; i < c.gates().size(); ++i) {
        const GateSpec& g = c.gates()[i];
        if (g.gate == Gate::Nop) continue;
        std::optional<double> angle;
        if (is_parametrized(g.gate)) {
            angle = g.param.kind == GateParam::Kind::Fixed
                        ? g.param.value
                        : binding.at(binding_key(g, i));
        }
        total = cmat_mul(embed_gate(g, angle, c.n_qubits()), total);
    }
    std::vector<Complex> psi(dim, Complex{0, 0});
    for (std::size_t r = 0; r < dim; ++r) psi[r] = total[r][0];
    return psi;
}

// ---------------------------------------------------------------------------
// Independent moment-count oracle: places gates one by one, scanning all
// previously placed gates for qubit overlap.
// ---------------------------------------------------------------------------

inline int greedy_layering_oracle(const Circuit& c) {
    struct Placed {
        std::vector<int> qubits;
        int layer;
    };
    std::vector<Placed> placed;
    int depth = 0;
    for (const GateSpec& g : c.gates()) {
        if (g.gate == Gate::Nop) continue;
        std::vector<int> qubits{g.target};
        if (g.control) qubits.push_back(*g.control);
        int layer = 1;
        for (const Placed& p : placed) {
            bool overlap = false;
            for (int q : qubits)
                for (int pq : p.qubits)
                    if (q == pq) overlap = true;
            if (overlap) layer = std::max(layer, p.layer + 1);
        }
        placed.push_back({qubits, layer});
        depth = std::max(depth, layer);
    }
    return depth;
}

// ---------------------------------------------------------------------------
// Random circuit generator for property tests (independent of datagen).
// ---------------------------------------------------------------------------

struct GenOptions {
    int n_qubits = 4;
    int max_gates = 10;
    bool allow_nop = true;
    bool allow_var = true;
    bool allow_fixed = true;
    std::vector<Gate> gates{Gate::X,    Gate::Y,   Gate::Z,   Gate::H,
                            Gate::Rx,   Gate::Ry,  Gate::Rz,  Gate::Cnot,
                            Gate::Crx,  Gate::Cry, Gate::Crz, Gate::Xy};
};

inline Circuit random_test_circuit(Rng& rng, const GenOptions& opt = {}) {
    const int n_gates = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.max_gates)));
    std::vector<GateSpec> gates;
    for (int i = 0; i < n_gates; ++i) {
        GateSpec g;
        if (opt.allow_nop && rng.next_double() < 0.15) {
            g.gate = Gate::Nop;
            g.target = static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.n_qubits)));
            gates.push_back(g);
            continue;
        }
        do {
            g.gate = opt.gates[rng.below(opt.gates.size())];
        } while (opt.n_qubits < 2 && is_two_qubit(g.gate));
        g.target = static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.n_qubits)));
        if (is_two_qubit(g.gate)) {
            int control = g.target;
            while (control == g.target)
                control = static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.n_qubits)));
            g.control = control;
        }
        if (is_parametrized(g.gate)) {
            const double r = rng.next_double();
            if (opt.allow_fixed && r < 0.4) {
                g.param = GateParam::fixed(rng.uniform(-3.2, 3.2));
            } else if (opt.allow_var && r < 0.7) {
                g.param = GateParam::var("p" + std::to_string(i));
            }  // else anonymous free parameter
        }
        gates.push_back(std::move(g));
    }
    return Circuit(opt.n_qubits, std::move(gates));
}

inline ParamBinding random_binding(const Circuit& c, Rng& rng) {
    ParamBinding b;
    for (const std::string& name : free_parameter_names(c))
        b[name] = rng.uniform(0.0, 6.283185307179586);
    return b;
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Mixed relative/absolute comparison used by the gradient suites.
inline bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace qdd::testing
