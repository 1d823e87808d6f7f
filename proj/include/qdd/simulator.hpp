// Dense statevector simulation and transverse-field Ising expectations.
//
// Qubit ordering is little-endian: qubit 0 is the least significant bit of
// the amplitude index. Rotation gates use the half-angle convention
//   R_P(a) = exp(-i a/2 P),  P in {X, Y, Z},
// controlled rotations apply R_P(a) on the target when the control is set,
// and XY(a) = exp(-i a/2 (XX + YY)).

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdd/circuit.hpp"
#include "qdd/rng.hpp"
#include "qdd/serde.hpp"

namespace qdd {

using Complex = std::complex<double>;

struct StateVector {
    int n_qubits = 0;
    std::vector<Complex> amplitudes;

    static StateVector zero_state(int n_qubits) {
        StateVector psi;
        psi.n_qubits = n_qubits;
        psi.amplitudes.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
        psi.amplitudes[0] = Complex{1.0, 0.0};
        return psi;
    }

    double norm() const {
        double s = 0.0;
        for (const Complex& a : amplitudes) s += std::norm(a);
        return std::sqrt(s);
    }
};

enum class Boundary { Open, Periodic };

struct HamiltonianSpec {
    int n_qubits = 6;
    double coupling = 1.0;  // J
    double field = 1.0;     // g
    Boundary boundary = Boundary::Open;

    bool operator==(const HamiltonianSpec&) const = default;

    std::vector<std::pair<int, int>> bonds() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 0; i + 1 < n_qubits; ++i) out.emplace_back(i, i + 1);
        if (boundary == Boundary::Periodic && n_qubits > 2)
            out.emplace_back(n_qubits - 1, 0);
        return out;
    }
};

/// Dense unitary for one gate; dim is 2 or 4. Two-qubit matrices act on the
/// |control target> basis ordered 00, 01, 10, 11.
struct GateMatrix {
    int dim = 2;
    std::array<Complex, 16> m{};

    Complex& at(int r, int c) { return m[static_cast<std::size_t>(r * dim + c)]; }
    const Complex& at(int r, int c) const {
        return m[static_cast<std::size_t>(r * dim + c)];
    }
};

inline GateMatrix gate_matrix(Gate g, std::optional<double> theta = std::nullopt) {
    const bool wants = is_parametrized(g);
    if (wants && !theta)
        throw std::invalid_argument(std::string(gate_name(g)) + " requires an angle");
    if (!wants && theta)
        throw std::invalid_argument(std::string(gate_name(g)) + " takes no angle");

    GateMatrix u;
    const Complex i{0.0, 1.0};
    auto single = [&](Complex a, Complex b, Complex c, Complex d) {
        u.dim = 2;
        u.m = {a, b, c, d};
    };
    switch (g) {
        case Gate::Nop: single(1, 0, 0, 1); return u;
        case Gate::X: single(0, 1, 1, 0); return u;
        case Gate::Y: single(0, -i, i, 0); return u;
        case Gate::Z: single(1, 0, 0, -1); return u;
        case Gate::H: {
            const double s = 1.0 / std::sqrt(2.0);
            single(s, s, s, -s);
            return u;
        }
        case Gate::Rx: {
            const double c = std::cos(*theta / 2), s = std::sin(*theta / 2);
            single(c, -i * s, -i * s, c);
            return u;
        }
        case Gate::Ry: {
            const double c = std::cos(*theta / 2), s = std::sin(*theta / 2);
            single(c, -s, s, c);
            return u;
        }
        case Gate::Rz: {
            single(std::exp(-i * (*theta / 2.0)), 0, 0, std::exp(i * (*theta / 2.0)));
            return u;
        }
        case Gate::Cnot:
        case Gate::Crx:
        case Gate::Cry:
        case Gate::Crz: {
            GateMatrix block;
            if (g == Gate::Cnot) block = gate_matrix(Gate::X);
            else if (g == Gate::Crx) block = gate_matrix(Gate::Rx, theta);
            else if (g == Gate::Cry) block = gate_matrix(Gate::Ry, theta);
            else block = gate_matrix(Gate::Rz, theta);
            u.dim = 4;
            u.at(0, 0) = 1;
            u.at(1, 1) = 1;
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) u.at(2 + r, 2 + c) = block.at(r, c);
            return u;
        }
        case Gate::Xy: {
            // exp(-i a/2 (XX+YY)) mixes |01> and |10> and fixes |00>, |11>.
            const double c = std::cos(*theta), s = std::sin(*theta);
            u.dim = 4;
            u.at(0, 0) = 1;
            u.at(3, 3) = 1;
            u.at(1, 1) = c;
            u.at(2, 2) = c;
            u.at(1, 2) = -i * s;
            u.at(2, 1) = -i * s;
            return u;
        }
    }
    throw std::logic_error("unhandled gate");
}

inline void apply_single_qubit(StateVector& psi, int q, const GateMatrix& u) {
    const std::size_t mask = std::size_t{1} << q;
    const std::size_t n = psi.amplitudes.size();
    for (std::size_t idx = 0; idx < n; ++idx) {
        if (idx & mask) continue;
        const Complex a = psi.amplitudes[idx];
        const Complex b = psi.amplitudes[idx | mask];
        psi.amplitudes[idx] = u.at(0, 0) * a + u.at(0, 1) * b;
        psi.amplitudes[idx | mask] = u.at(1, 0) * a + u.at(1, 1) * b;
    }
}

inline void apply_two_qubit(StateVector& psi, int target, int control,
                            const GateMatrix& u) {
    const std::size_t tmask = std::size_t{1} << target;
    const std::size_t cmask = std::size_t{1} << control;
    const std::size_t n = psi.amplitudes.size();
    for (std::size_t idx = 0; idx < n; ++idx) {
        if ((idx & tmask) || (idx & cmask)) continue;
        const std::size_t i00 = idx;
        const std::size_t i01 = idx | tmask;
        const std::size_t i10 = idx | cmask;
        const std::size_t i11 = idx | cmask | tmask;
        const Complex a = psi.amplitudes[i00];
        const Complex b = psi.amplitudes[i01];
        const Complex c = psi.amplitudes[i10];
        const Complex d = psi.amplitudes[i11];
        psi.amplitudes[i00] = u.at(0, 0) * a + u.at(0, 1) * b + u.at(0, 2) * c + u.at(0, 3) * d;
        psi.amplitudes[i01] = u.at(1, 0) * a + u.at(1, 1) * b + u.at(1, 2) * c + u.at(1, 3) * d;
        psi.amplitudes[i10] = u.at(2, 0) * a + u.at(2, 1) * b + u.at(2, 2) * c + u.at(2, 3) * d;
        psi.amplitudes[i11] = u.at(3, 0) * a + u.at(3, 1) * b + u.at(3, 2) * c + u.at(3, 3) * d;
    }
}

/// Stable key for the value bound to a gate's parameter: a Var uses its name,
/// and an absent parameter on a parametrized gate is an anonymous free
/// parameter keyed "_<gate index>".
inline std::string binding_key(const GateSpec& g, std::size_t gate_index) {
    if (g.param.kind == GateParam::Kind::Var) return g.param.name;
    return "_" + std::to_string(gate_index);
}

/// Free parameter keys of a circuit, in first-occurrence order. Named
/// variables appear once even if shared by several gates.
inline std::vector<std::string> free_parameter_names(const Circuit& c) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < c.gates().size(); ++i) {
        const GateSpec& g = c.gates()[i];
        if (!is_parametrized(g.gate) || g.param.kind == GateParam::Kind::Fixed) continue;
        std::string key = binding_key(g, i);
        if (std::find(names.begin(), names.end(), key) == names.end())
            names.push_back(std::move(key));
    }
    return names;
}

using ParamBinding = std::map<std::string, double>;

/// Runs the circuit from |0...0>. Every free parameter must be bound.
inline StateVector apply_circuit(const Circuit& c, const ParamBinding& binding = {}) {
    StateVector psi = StateVector::zero_state(c.n_qubits());
    for (std::size_t i = 0; i < c.gates().size(); ++i) {
        const GateSpec& g = c.gates()[i];
        if (g.gate == Gate::Nop) continue;
        std::optional<double> angle;
        if (is_parametrized(g.gate)) {
            if (g.param.kind == GateParam::Kind::Fixed) {
                angle = g.param.value;
            } else {
                auto it = binding.find(binding_key(g, i));
                if (it == binding.end())
                    throw std::invalid_argument("unbound parameter: " + binding_key(g, i));
                angle = it->second;
            }
        }
        GateMatrix u = gate_matrix(g.gate, angle);
        if (u.dim == 2) apply_single_qubit(psi, g.target, u);
        else apply_two_qubit(psi, g.target, *g.control, u);
    }
    return psi;
}

/// <psi|H|psi> for the TFIM  H = -J (sum_<ij> Z_i Z_j + g sum_i X_i).
inline double tfim_expectation(const StateVector& psi, const HamiltonianSpec& h) {
    if (psi.n_qubits != h.n_qubits)
        throw std::invalid_argument("state/Hamiltonian dimension mismatch");
    const std::size_t n = psi.amplitudes.size();

    double zz = 0.0;
    for (auto [i, j] : h.bonds()) {
        const std::size_t mi = std::size_t{1} << i;
        const std::size_t mj = std::size_t{1} << j;
        for (std::size_t idx = 0; idx < n; ++idx) {
            const double p = std::norm(psi.amplitudes[idx]);
            const bool zi = idx & mi;
            const bool zj = idx & mj;
            zz += (zi == zj) ? p : -p;
        }
    }

    Complex x{0.0, 0.0};
    for (int q = 0; q < h.n_qubits; ++q) {
        const std::size_t mq = std::size_t{1} << q;
        for (std::size_t idx = 0; idx < n; ++idx)
            x += std::conj(psi.amplitudes[idx]) * psi.amplitudes[idx ^ mq];
    }
    if (std::abs(x.imag()) > 1e-10)
        throw std::runtime_error("non-real TFIM expectation");

    return -h.coupling * (zz + h.field * x.real());
}

inline double state_fidelity(const StateVector& a, const StateVector& b) {
    if (a.amplitudes.size() != b.amplitudes.size())
        throw std::invalid_argument("fidelity dimension mismatch");
    Complex overlap{0.0, 0.0};
    for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
        overlap += std::conj(a.amplitudes[i]) * b.amplitudes[i];
    return std::norm(overlap);
}

namespace detail {

// Dense TFIM matrix in the computational basis (real symmetric).
inline std::vector<double> tfim_dense(const HamiltonianSpec& h) {
    const std::size_t dim = std::size_t{1} << h.n_qubits;
    std::vector<double> m(dim * dim, 0.0);
    for (auto [i, j] : h.bonds()) {
        const std::size_t mi = std::size_t{1} << i;
        const std::size_t mj = std::size_t{1} << j;
        for (std::size_t idx = 0; idx < dim; ++idx) {
            const bool same = static_cast<bool>(idx & mi) == static_cast<bool>(idx & mj);
            m[idx * dim + idx] += -h.coupling * (same ? 1.0 : -1.0);
        }
    }
    for (int q = 0; q < h.n_qubits; ++q) {
        const std::size_t mq = std::size_t{1} << q;
        for (std::size_t idx = 0; idx < dim; ++idx)
            m[idx * dim + (idx ^ mq)] += -h.coupling * h.field;
    }
    return m;
}

// Cyclic Jacobi eigenvalue iteration; returns the minimum eigenvalue.
inline double jacobi_min_eigenvalue(std::vector<double> a, std::size_t dim) {
    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = r + 1; c < dim; ++c) s += a[r * dim + c] * a[r * dim + c];
        return s;
    };
    double scale = 0.0;
    for (std::size_t k = 0; k < dim * dim; ++k) scale = std::max(scale, std::abs(a[k]));
    if (scale == 0.0) return 0.0;
    const double tol = 1e-28 * scale * scale * static_cast<double>(dim * dim);

    for (int sweep = 0; sweep < 100 && off_norm() > tol; ++sweep) {
        for (std::size_t p = 0; p < dim; ++p) {
            for (std::size_t q = p + 1; q < dim; ++q) {
                const double apq = a[p * dim + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[p * dim + p];
                const double aqq = a[q * dim + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < dim; ++k) {
                    const double akp = a[k * dim + p];
                    const double akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < dim; ++k) {
                    const double apk = a[p * dim + k];
                    const double aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
            }
        }
    }
    double min_ev = a[0];
    for (std::size_t k = 1; k < dim; ++k) min_ev = std::min(min_ev, a[k * dim + k]);
    return min_ev;
}

// H|v> without forming the matrix.
inline void tfim_apply(const HamiltonianSpec& h, const std::vector<double>& v,
                       std::vector<double>& out) {
    const std::size_t dim = v.size();
    std::fill(out.begin(), out.end(), 0.0);
    for (auto [i, j] : h.bonds()) {
        const std::size_t mi = std::size_t{1} << i;
        const std::size_t mj = std::size_t{1} << j;
        for (std::size_t idx = 0; idx < dim; ++idx) {
            const bool same = static_cast<bool>(idx & mi) == static_cast<bool>(idx & mj);
            out[idx] += -h.coupling * (same ? v[idx] : -v[idx]);
        }
    }
    for (int q = 0; q < h.n_qubits; ++q) {
        const std::size_t mq = std::size_t{1} << q;
        for (std::size_t idx = 0; idx < dim; ++idx)
            out[idx] += -h.coupling * h.field * v[idx ^ mq];
    }
}

// Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
inline double tridiag_min_eigenvalue(const std::vector<double>& diag,
                                     const std::vector<double>& sub) {
    const std::size_t m = diag.size();
    double lo = diag[0], hi = diag[0];
    for (std::size_t i = 0; i < m; ++i) {
        const double r = (i > 0 ? std::abs(sub[i - 1]) : 0.0) +
                         (i + 1 < m ? std::abs(sub[i]) : 0.0);
        lo = std::min(lo, diag[i] - r);
        hi = std::max(hi, diag[i] + r);
    }
    auto count_below = [&](double x) {
        // Sturm sequence: number of eigenvalues below x.
        int count = 0;
        double d = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double b2 = i > 0 ? sub[i - 1] * sub[i - 1] : 0.0;
            d = diag[i] - x - (d != 0.0 ? b2 / d : b2 / 1e-300);
            if (d < 0.0) ++count;
        }
        return count;
    };
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(mid) >= 1) hi = mid;
        else lo = mid;
        if (hi - lo < 1e-13 * std::max(1.0, std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

// Lanczos with full reorthogonalization; ground state only.
inline double lanczos_min_eigenvalue(const HamiltonianSpec& h) {
    const std::size_t dim = std::size_t{1} << h.n_qubits;
    const std::size_t max_iter = std::min<std::size_t>(dim, 220);

    std::vector<std::vector<double>> basis;
    std::vector<double> diag, sub;
    std::vector<double> v(dim), w(dim);

    Rng rng(derive_seed(0x1a2b3c4d5e6fULL, "lanczos"));
    for (double& e : v) e = rng.uniform(-1.0, 1.0);
    double nrm = 0.0;
    for (double e : v) nrm += e * e;
    nrm = std::sqrt(nrm);
    for (double& e : v) e /= nrm;

    double prev = 0.0;
    for (std::size_t k = 0; k < max_iter; ++k) {
        basis.push_back(v);
        tfim_apply(h, v, w);
        double alpha = 0.0;
        for (std::size_t i = 0; i < dim; ++i) alpha += v[i] * w[i];
        diag.push_back(alpha);

        // Two rounds of Gram-Schmidt against the whole basis.
        for (int round = 0; round < 2; ++round) {
            for (const auto& b : basis) {
                double proj = 0.0;
                for (std::size_t i = 0; i < dim; ++i) proj += b[i] * w[i];
                for (std::size_t i = 0; i < dim; ++i) w[i] -= proj * b[i];
            }
        }
        double beta = 0.0;
        for (double e : w) beta += e * e;
        beta = std::sqrt(beta);

        const double current = tridiag_min_eigenvalue(diag, sub);
        if (k > 8 && std::abs(current - prev) < 1e-12) return current;
        prev = current;

        if (beta < 1e-12) return current;  // invariant subspace exhausted
        sub.push_back(beta);
        for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / beta;
    }
    return tridiag_min_eigenvalue(diag, sub);
}

}  // namespace detail

inline constexpr int kDenseDiagonalizationCap = 12;

/// Minimum eigenvalue of the TFIM Hamiltonian. Dense Jacobi diagonalization
/// up to 8 qubits, matrix-free Lanczos beyond, capped at `cap` qubits.
inline double exact_ground_energy(const HamiltonianSpec& h,
                                  int cap = kDenseDiagonalizationCap) {
    if (h.n_qubits < 1) throw std::invalid_argument("Hamiltonian needs qubits");
    if (h.n_qubits > cap)
        throw std::invalid_argument("qubit count exceeds diagonalization cap of " +
                                    std::to_string(cap));
    if (h.n_qubits <= 8) {
        const std::size_t dim = std::size_t{1} << h.n_qubits;
        return detail::jacobi_min_eigenvalue(detail::tfim_dense(h), dim);
    }
    return detail::lanczos_min_eigenvalue(h);
}

/// exact_ground_energy with a small on-disk memo table. The cache holds one
/// line per spec: "n J g open|periodic energy" with round-trip formatting.
inline double cached_ground_energy(const HamiltonianSpec& h, const std::string& cache_path,
                                   int cap = kDenseDiagonalizationCap) {
    const std::string key = std::to_string(h.n_qubits) + " " + format_double(h.coupling) +
                            " " + format_double(h.field) + " " +
                            (h.boundary == Boundary::Open ? "open" : "periodic");
    if (std::filesystem::exists(cache_path)) {
        std::ifstream in(cache_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind(key + " ", 0) == 0) {
                double e = 0.0;
                if (parse_double(line.substr(key.size() + 1), e)) return e;
            }
        }
    }
    const double e = exact_ground_energy(h, cap);
    std::ofstream out(cache_path, std::ios::app);
    if (out) out << key << " " << format_double(e) << "\n";
    return e;
}

}  // namespace qdd
