// Variational energy minimization over a circuit's free parameters.
//
// Gradients use parameter-shift rules, exact per gate family:
//   RX/RY/RZ      two-term rule, shifts +-pi/2
//   CRX/CRY/CRZ   four-term rule, shifts +-pi/2 and +-3pi/2
//                 (the energy carries frequencies 1/2 and 1 in the angle)
//   XY            four-term rule, shifts +-pi/4 and +-3pi/4 (frequencies 1, 2)
// Each shift is applied to one gate occurrence at a time, so gradients are
// exact even when several gates share a named parameter.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdd/circuit.hpp"
#include "qdd/rng.hpp"
#include "qdd/simulator.hpp"

namespace qdd {

enum class VqeOptimizer { GradientDescent, Adam };

struct VqeConfig {
    int restarts = 3;
    int max_iterations = 500;
    double gradient_tolerance = 1e-6;
    double learning_rate = 0.05;
    VqeOptimizer optimizer = VqeOptimizer::Adam;
    std::uint64_t seed = 0;
};

struct EnergyLabel {
    double energy = 0.0;
    ParamBinding best_params;
    std::vector<double> restart_energies;
    bool converged = true;
};

namespace detail {

struct ShiftTerm {
    double shift;
    double weight;
};

inline const std::vector<ShiftTerm>& shift_rule(Gate g) {
    using std::numbers::pi;
    static const double r1 = 0.25 + 0.25 / std::numbers::sqrt2;
    static const double r2 = 0.25 / std::numbers::sqrt2 - 0.25;
    static const double x1 = 0.5 + 0.5 / std::numbers::sqrt2;
    static const double x2 = 0.5 / std::numbers::sqrt2 - 0.5;
    static const std::vector<ShiftTerm> plain{{pi / 2, 0.5}, {-pi / 2, -0.5}};
    static const std::vector<ShiftTerm> controlled{
        {pi / 2, r1}, {-pi / 2, -r1}, {3 * pi / 2, r2}, {-3 * pi / 2, -r2}};
    static const std::vector<ShiftTerm> xy{
        {pi / 4, x1}, {-pi / 4, -x1}, {3 * pi / 4, x2}, {-3 * pi / 4, -x2}};
    switch (g) {
        case Gate::Rx:
        case Gate::Ry:
        case Gate::Rz: return plain;
        case Gate::Crx:
        case Gate::Cry:
        case Gate::Crz: return controlled;
        case Gate::Xy: return xy;
        default: throw std::logic_error("shift rule for non-parametrized gate");
    }
}

// Circuit with free parameters resolved to indices into a flat value vector.
struct CompiledAnsatz {
    const Circuit* circuit;
    std::vector<std::string> names;       // flat index -> binding key
    std::vector<int> gate_param_index;    // per gate: index or -1
    std::vector<double> fixed_angles;     // per gate: fixed/irrelevant angle

    explicit CompiledAnsatz(const Circuit& c) : circuit(&c) {
        names = free_parameter_names(c);
        const auto& gates = c.gates();
        gate_param_index.assign(gates.size(), -1);
        fixed_angles.assign(gates.size(), 0.0);
        for (std::size_t i = 0; i < gates.size(); ++i) {
            const GateSpec& g = gates[i];
            if (!is_parametrized(g.gate)) continue;
            if (g.param.kind == GateParam::Kind::Fixed) {
                fixed_angles[i] = g.param.value;
                continue;
            }
            const std::string key = binding_key(g, i);
            for (std::size_t k = 0; k < names.size(); ++k)
                if (names[k] == key) gate_param_index[i] = static_cast<int>(k);
        }
    }

    // Energy with per-occurrence angle overrides (gate index -> extra shift).
    double energy(const HamiltonianSpec& h, const std::vector<double>& values,
                  std::size_t shifted_gate = static_cast<std::size_t>(-1),
                  double shift = 0.0) const {
        StateVector psi = StateVector::zero_state(circuit->n_qubits());
        const auto& gates = circuit->gates();
        for (std::size_t i = 0; i < gates.size(); ++i) {
            const GateSpec& g = gates[i];
            if (g.gate == Gate::Nop) continue;
            std::optional<double> angle;
            if (is_parametrized(g.gate)) {
                double a = gate_param_index[i] >= 0
                               ? values[static_cast<std::size_t>(gate_param_index[i])]
                               : fixed_angles[i];
                if (i == shifted_gate) a += shift;
                angle = a;
            }
            GateMatrix u = gate_matrix(g.gate, angle);
            if (u.dim == 2) apply_single_qubit(psi, g.target, u);
            else apply_two_qubit(psi, g.target, *g.control, u);
        }
        return tfim_expectation(psi, h);
    }

    // Exact gradient: sum of per-occurrence shift terms for each parameter.
    std::vector<double> gradient(const HamiltonianSpec& h,
                                 const std::vector<double>& values) const {
        std::vector<double> grad(names.size(), 0.0);
        const auto& gates = circuit->gates();
        for (std::size_t i = 0; i < gates.size(); ++i) {
            const int k = gate_param_index[i];
            if (k < 0) continue;
            for (const ShiftTerm& term : shift_rule(gates[i].gate))
                grad[static_cast<std::size_t>(k)] +=
                    term.weight * energy(h, values, i, term.shift);
        }
        return grad;
    }
};

}  // namespace detail

/// dE/dtheta for every free parameter at the given binding.
inline ParamBinding parameter_shift_gradient(const Circuit& c, const HamiltonianSpec& h,
                                             const ParamBinding& binding) {
    detail::CompiledAnsatz ansatz(c);
    std::vector<double> values(ansatz.names.size(), 0.0);
    for (std::size_t k = 0; k < ansatz.names.size(); ++k) {
        auto it = binding.find(ansatz.names[k]);
        if (it == binding.end())
            throw std::invalid_argument("unbound parameter: " + ansatz.names[k]);
        values[k] = it->second;
    }
    std::vector<double> grad = ansatz.gradient(h, values);
    ParamBinding out;
    for (std::size_t k = 0; k < ansatz.names.size(); ++k) out[ansatz.names[k]] = grad[k];
    return out;
}

/// Minimizes the circuit energy over its free parameters with `cfg.restarts`
/// independent random initializations (each uniform over [0, 2pi)) and
/// returns the best. Deterministic for a fixed seed; restart r always draws
/// from the stream derive_seed(seed, "restart", r).
inline EnergyLabel minimize_energy(const Circuit& c, const HamiltonianSpec& h,
                                   const VqeConfig& cfg) {
    if (cfg.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    detail::CompiledAnsatz ansatz(c);
    const std::size_t n_params = ansatz.names.size();

    EnergyLabel label;
    label.energy = std::numeric_limits<double>::infinity();

    if (n_params == 0) {
        // Nothing to optimize; a single evaluation is the label.
        label.energy = ansatz.energy(h, {});
        label.restart_energies = {label.energy};
        return label;
    }

    for (int r = 0; r < cfg.restarts; ++r) {
        Rng rng(derive_seed(cfg.seed, "restart", static_cast<std::uint64_t>(r)));
        std::vector<double> x(n_params);
        for (double& v : x) v = rng.uniform(0.0, 2.0 * std::numbers::pi);

        std::vector<double> m(n_params, 0.0), v2(n_params, 0.0);
        bool hit_tolerance = false;
        for (int it = 1; it <= cfg.max_iterations; ++it) {
            std::vector<double> g = ansatz.gradient(h, x);
            double gmax = 0.0;
            for (double gv : g) gmax = std::max(gmax, std::abs(gv));
            if (gmax < cfg.gradient_tolerance) {
                hit_tolerance = true;
                break;
            }
            if (cfg.optimizer == VqeOptimizer::Adam) {
                const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
                for (std::size_t k = 0; k < n_params; ++k) {
                    m[k] = b1 * m[k] + (1 - b1) * g[k];
                    v2[k] = b2 * v2[k] + (1 - b2) * g[k] * g[k];
                    const double mhat = m[k] / (1 - std::pow(b1, it));
                    const double vhat = v2[k] / (1 - std::pow(b2, it));
                    x[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + eps);
                }
            } else {
                for (std::size_t k = 0; k < n_params; ++k)
                    x[k] -= cfg.learning_rate * g[k];
            }
        }

        const double e = ansatz.energy(h, x);
        label.restart_energies.push_back(e);
        if (!hit_tolerance) label.converged = false;
        if (e < label.energy) {
            label.energy = e;
            label.best_params.clear();
            for (std::size_t k = 0; k < n_params; ++k)
                label.best_params[ansatz.names[k]] = x[k];
        }
    }
    return label;
}

}  // namespace qdd
