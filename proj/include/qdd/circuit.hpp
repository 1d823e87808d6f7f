// Discrete circuit representation and the circuit-string grammar.
//
// A circuit string is a sequence of '@'-joined records, each of the form
//   gate=target=control=param
// where "nop" stands in for an absent control or parameter. A param token
// that parses as a float literal is a fixed angle in radians; any other
// token (e.g. "nop0") names a free parameter bound at optimization time.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qdd/serde.hpp"

namespace qdd {

enum class Gate { X, Y, Z, H, Rx, Ry, Rz, Cnot, Crx, Cry, Crz, Xy, Nop };

inline constexpr Gate kAllGates[] = {Gate::X,    Gate::Y,   Gate::Z,   Gate::H,
                                     Gate::Rx,   Gate::Ry,  Gate::Rz,  Gate::Cnot,
                                     Gate::Crx,  Gate::Cry, Gate::Crz, Gate::Xy,
                                     Gate::Nop};

inline std::string_view gate_name(Gate g) {
    switch (g) {
        case Gate::X: return "X";
        case Gate::Y: return "Y";
        case Gate::Z: return "Z";
        case Gate::H: return "H";
        case Gate::Rx: return "RX";
        case Gate::Ry: return "RY";
        case Gate::Rz: return "RZ";
        case Gate::Cnot: return "CNOT";
        case Gate::Crx: return "CRX";
        case Gate::Cry: return "CRY";
        case Gate::Crz: return "CRZ";
        case Gate::Xy: return "XY";
        case Gate::Nop: return "NOP";
    }
    return "?";
}

inline std::optional<Gate> gate_from_name(std::string_view name) {
    std::string upper(name);
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (Gate g : kAllGates) {
        if (gate_name(g) == upper) return g;
    }
    return std::nullopt;
}

inline bool is_two_qubit(Gate g) {
    return g == Gate::Cnot || g == Gate::Crx || g == Gate::Cry || g == Gate::Crz ||
           g == Gate::Xy;
}

inline bool is_parametrized(Gate g) {
    return g == Gate::Rx || g == Gate::Ry || g == Gate::Rz || g == Gate::Crx ||
           g == Gate::Cry || g == Gate::Crz || g == Gate::Xy;
}

/// Gate parameter: absent, a named free variable, or a fixed angle.
struct GateParam {
    enum class Kind { None, Var, Fixed };

    Kind kind = Kind::None;
    std::string name;    // Kind::Var
    double value = 0.0;  // Kind::Fixed

    static GateParam none() { return {}; }
    static GateParam var(std::string n) { return {Kind::Var, std::move(n), 0.0}; }
    static GateParam fixed(double v) { return {Kind::Fixed, {}, v}; }

    bool operator==(const GateParam& o) const {
        if (kind != o.kind) return false;
        if (kind == Kind::Var) return name == o.name;
        if (kind == Kind::Fixed) return value == o.value;
        return true;
    }
};

struct GateSpec {
    Gate gate = Gate::Nop;
    int target = 0;
    std::optional<int> control;  // two-qubit gates only
    GateParam param;

    bool operator==(const GateSpec& o) const {
        return gate == o.gate && target == o.target && control == o.control &&
               param == o.param;
    }
};

/// Throws if the gate violates a structural invariant for an n-qubit register.
inline void check_gate(const GateSpec& g, int n_qubits) {
    if (g.target < 0 || g.target >= n_qubits)
        throw std::invalid_argument("gate target out of range: " +
                                    std::to_string(g.target));
    if (is_two_qubit(g.gate)) {
        if (!g.control)
            throw std::invalid_argument(std::string(gate_name(g.gate)) +
                                        " requires a control qubit");
        if (*g.control < 0 || *g.control >= n_qubits)
            throw std::invalid_argument("gate control out of range: " +
                                        std::to_string(*g.control));
        if (*g.control == g.target)
            throw std::invalid_argument("control equals target on " +
                                        std::string(gate_name(g.gate)));
    } else if (g.control) {
        throw std::invalid_argument("control on one-qubit gate " +
                                    std::string(gate_name(g.gate)));
    }
    if (!is_parametrized(g.gate) && g.param.kind != GateParam::Kind::None)
        throw std::invalid_argument("parameter on non-parametrized gate " +
                                    std::string(gate_name(g.gate)));
}

/// Ordered gate sequence over a fixed register. Immutable after construction.
class Circuit {
public:
    Circuit(int n_qubits, std::vector<GateSpec> gates)
        : n_qubits_(n_qubits), gates_(std::move(gates)) {
        if (n_qubits_ < 1) throw std::invalid_argument("circuit needs at least 1 qubit");
        for (const GateSpec& g : gates_) check_gate(g, n_qubits_);
    }

    int n_qubits() const { return n_qubits_; }
    const std::vector<GateSpec>& gates() const { return gates_; }

    bool operator==(const Circuit& o) const {
        return n_qubits_ == o.n_qubits_ && gates_ == o.gates_;
    }

private:
    int n_qubits_;
    std::vector<GateSpec> gates_;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace detail

inline Circuit parse_circuit_string(std::string_view s, int n_qubits) {
    if (s.empty()) throw std::invalid_argument("empty circuit string");
    std::vector<GateSpec> gates;
    for (std::string_view record : detail::split(s, '@')) {
        auto fields = detail::split(record, '=');
        if (fields.size() != 4)
            throw std::invalid_argument("malformed gate record (want 4 fields): " +
                                        std::string(record));
        GateSpec g;
        auto gate = gate_from_name(fields[0]);
        if (!gate)
            throw std::invalid_argument("unknown gate name: " + std::string(fields[0]));
        g.gate = *gate;

        int target = 0;
        if (auto [p, ec] = std::from_chars(fields[1].data(),
                                           fields[1].data() + fields[1].size(), target);
            ec != std::errc{} || p != fields[1].data() + fields[1].size())
            throw std::invalid_argument("bad target field: " + std::string(fields[1]));
        g.target = target;

        if (fields[2] != "nop") {
            int control = 0;
            if (auto [p, ec] = std::from_chars(
                    fields[2].data(), fields[2].data() + fields[2].size(), control);
                ec != std::errc{} || p != fields[2].data() + fields[2].size())
                throw std::invalid_argument("bad control field: " + std::string(fields[2]));
            g.control = control;
        }

        if (fields[3] != "nop") {
            double value = 0.0;
            if (parse_double(fields[3], value)) {
                g.param = GateParam::fixed(value);
            } else {
                g.param = GateParam::var(std::string(fields[3]));
            }
        }
        gates.push_back(std::move(g));
    }
    return Circuit(n_qubits, std::move(gates));
}

inline std::string serialize_circuit(const Circuit& c) {
    if (c.gates().empty())
        throw std::invalid_argument("cannot serialize a circuit with no gates");
    std::string out;
    bool first = true;
    for (const GateSpec& g : c.gates()) {
        if (!first) out.push_back('@');
        first = false;
        out += gate_name(g.gate);
        out.push_back('=');
        out += std::to_string(g.target);
        out.push_back('=');
        out += g.control ? std::to_string(*g.control) : "nop";
        out.push_back('=');
        switch (g.param.kind) {
            case GateParam::Kind::None: out += "nop"; break;
            case GateParam::Kind::Var: out += g.param.name; break;
            case GateParam::Kind::Fixed: out += format_double(g.param.value); break;
        }
    }
    return out;
}

/// Number of layers under greedy left-alignment; NOP gates occupy no layer.
inline int moment_count(const Circuit& c) {
    std::vector<int> last_layer(static_cast<std::size_t>(c.n_qubits()), 0);
    int moments = 0;
    for (const GateSpec& g : c.gates()) {
        if (g.gate == Gate::Nop) continue;
        int layer = last_layer[static_cast<std::size_t>(g.target)];
        if (g.control) layer = std::max(layer, last_layer[static_cast<std::size_t>(*g.control)]);
        ++layer;
        last_layer[static_cast<std::size_t>(g.target)] = layer;
        if (g.control) last_layer[static_cast<std::size_t>(*g.control)] = layer;
        moments = std::max(moments, layer);
    }
    return moments;
}

struct Connectivity {
    enum class Kind { NearestNeighbor, AllToAll };

    Kind kind = Kind::AllToAll;
    int max_distance = 0;  // NearestNeighbor only

    static Connectivity all_to_all() { return {Kind::AllToAll, 0}; }
    static Connectivity nearest_neighbor(int max_distance) {
        return {Kind::NearestNeighbor, max_distance};
    }

    bool allows(int target, int control) const {
        if (kind == Kind::AllToAll) return true;
        return std::abs(target - control) <= max_distance;
    }

    bool operator==(const Connectivity&) const = default;
};

/// Allowed gate set plus qubit connectivity. NOP is always permitted.
struct GatePool {
    std::vector<Gate> allowed;  // order defines the encoding dictionary order
    Connectivity connectivity;

    bool contains(Gate g) const {
        if (g == Gate::Nop) return true;
        for (Gate a : allowed)
            if (a == g) return true;
        return false;
    }

    bool operator==(const GatePool&) const = default;
};

struct Violation {
    std::size_t gate_index;
    std::string message;
};

/// Reports pool-membership and connectivity violations; empty result means ok.
inline std::vector<Violation> validate(const Circuit& c, const GatePool& pool) {
    std::vector<Violation> out;
    for (std::size_t i = 0; i < c.gates().size(); ++i) {
        const GateSpec& g = c.gates()[i];
        if (!pool.contains(g.gate)) {
            out.push_back({i, std::string(gate_name(g.gate)) + " not in gate pool"});
        }
        if (g.control && !pool.connectivity.allows(g.target, *g.control)) {
            out.push_back({i, "connectivity violation: target " + std::to_string(g.target) +
                                  ", control " + std::to_string(*g.control)});
        }
    }
    return out;
}

/// Copy of `c` with all NOP gates removed.
inline Circuit strip_nops(const Circuit& c) {
    std::vector<GateSpec> kept;
    for (const GateSpec& g : c.gates())
        if (g.gate != Gate::Nop) kept.push_back(g);
    return Circuit(c.n_qubits(), std::move(kept));
}

}  // namespace qdd
