// Training-set construction: random circuit generation, mean-field layers,
// VQE labeling, recycling, and the line-delimited dataset file format.
//
// Dataset files hold one JSON object per line:
//   {"schema":1,"circuit":"...","energy":E,"params":{...},
//    "provenance":{"spec":"B_s","seed":7}}

#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdd/circuit.hpp"
#include "qdd/encoding.hpp"
#include "qdd/parallel.hpp"
#include "qdd/rng.hpp"
#include "qdd/serde.hpp"
#include "qdd/vqe.hpp"

namespace qdd {

inline constexpr int kDatasetSchemaVersion = 1;

enum class MfMode { None, Relaxed, Fixed };

inline std::string_view mf_mode_name(MfMode m) {
    switch (m) {
        case MfMode::None: return "none";
        case MfMode::Relaxed: return "relaxed";
        case MfMode::Fixed: return "fixed";
    }
    return "?";
}

struct DatasetSpec {
    std::string name;
    int size = 0;
    int n_qubits = 6;
    std::vector<int> moment_range;
    GatePool pool;
    std::array<double, 3> gate_ratios{};  // identity, one-qubit, two-qubit
    MfMode mf_mode = MfMode::None;
    std::uint64_t seed = 0;
};

struct Provenance {
    std::string spec_name;
    std::uint64_t seed = 0;
};

struct DatasetRecord {
    std::string circuit_string;
    double energy = 0.0;
    ParamBinding best_params;
    Provenance provenance;
};

// Angles of the product ansatz minimizing the 6-qubit TFIM at J = g = 1.
inline constexpr double kMeanFieldAngles6[6] = {
    0.8766386666903253, 0.587783873106211,  0.5334355932535123,
    0.5334355932535123, 0.5877838731062109, 0.8766386666903251};

inline constexpr double kMeanFieldEnergy6 = -6.902497;

/// One RY per qubit: free parameters "nop0".."nop5" (Relaxed) or the known
/// optimal angles (Fixed). Angle literals exist only for 6 qubits.
inline Circuit mean_field_circuit(MfMode mode, int n_qubits = 6) {
    if (mode == MfMode::None) throw std::invalid_argument("mean field mode is none");
    if (n_qubits != 6)
        throw std::invalid_argument("mean field circuit defined for 6 qubits only");
    std::vector<GateSpec> gates;
    for (int q = 0; q < n_qubits; ++q) {
        GateSpec g;
        g.gate = Gate::Ry;
        g.target = q;
        g.param = mode == MfMode::Relaxed
                      ? GateParam::var("nop" + std::to_string(q))
                      : GateParam::fixed(kMeanFieldAngles6[q]);
        gates.push_back(std::move(g));
    }
    return Circuit(n_qubits, std::move(gates));
}

namespace detail {

inline std::vector<Gate> pool_one_qubit(const GatePool& pool) {
    std::vector<Gate> out;
    for (Gate g : pool.allowed)
        if (!is_two_qubit(g) && g != Gate::Nop) out.push_back(g);
    return out;
}

inline std::vector<Gate> pool_two_qubit(const GatePool& pool) {
    std::vector<Gate> out;
    for (Gate g : pool.allowed)
        if (is_two_qubit(g)) out.push_back(g);
    return out;
}

}  // namespace detail

/// Randomly fills `moments` layers. Scans qubits in order per layer and draws
/// identity / one-qubit / two-qubit according to spec.gate_ratios; two-qubit
/// partners are drawn among free connectivity-compatible qubits (falling back
/// to a one-qubit gate when none exists). Idle draws become explicit NOP
/// gates. Each layer is guaranteed to collide with the previous one so the
/// greedy moment count of the result is exactly `moments`.
inline Circuit random_circuit(const DatasetSpec& spec, int moments, Rng& rng) {
    const int n = spec.n_qubits;
    const std::vector<Gate> one_q = detail::pool_one_qubit(spec.pool);
    const std::vector<Gate> two_q = detail::pool_two_qubit(spec.pool);
    const double p_identity = spec.gate_ratios[0];
    const double p_one = spec.gate_ratios[1];

    std::vector<int> last_layer(static_cast<std::size_t>(n), 0);
    std::vector<GateSpec> gates;

    for (int m = 1; m <= moments; ++m) {
        std::vector<GateSpec> layer;
        bool anchored = false;
        for (int attempt = 0; attempt < 64 && !anchored; ++attempt) {
            layer.clear();
            std::vector<bool> used(static_cast<std::size_t>(n), false);
            for (int q = 0; q < n; ++q) {
                if (used[static_cast<std::size_t>(q)]) continue;
                used[static_cast<std::size_t>(q)] = true;
                const double r = rng.next_double();
                GateSpec g;
                g.target = q;
                if (r < p_identity || (one_q.empty() && two_q.empty())) {
                    g.gate = Gate::Nop;
                } else if (r < p_identity + p_one || two_q.empty()) {
                    g.gate = one_q.empty()
                                 ? Gate::Nop
                                 : one_q[rng.below(one_q.size())];
                } else {
                    std::vector<int> partners;
                    for (int p = 0; p < n; ++p)
                        if (p != q && !used[static_cast<std::size_t>(p)] &&
                            spec.pool.connectivity.allows(q, p))
                            partners.push_back(p);
                    if (partners.empty()) {
                        g.gate = one_q.empty() ? Gate::Nop
                                               : one_q[rng.below(one_q.size())];
                    } else {
                        g.gate = two_q[rng.below(two_q.size())];
                        g.control = partners[rng.below(partners.size())];
                        used[static_cast<std::size_t>(*g.control)] = true;
                    }
                }
                layer.push_back(std::move(g));
            }
            // The layer must contain a gate whose greedy position is m.
            for (const GateSpec& g : layer) {
                if (g.gate == Gate::Nop) continue;
                int reach = last_layer[static_cast<std::size_t>(g.target)];
                if (g.control)
                    reach = std::max(reach, last_layer[static_cast<std::size_t>(*g.control)]);
                if (reach == m - 1) {
                    anchored = true;
                    break;
                }
            }
        }
        if (!anchored && p_identity < 1.0 && !one_q.empty()) {
            // Force an anchor: a deepest qubit (necessarily idle here, or the
            // layer would already be anchored) gets a one-qubit gate.
            int anchor_q = 0;
            for (int q = 0; q < n; ++q)
                if (last_layer[static_cast<std::size_t>(q)] == m - 1) {
                    anchor_q = q;
                    break;
                }
            for (GateSpec& g : layer) {
                if (g.target != anchor_q || g.control) continue;
                g.gate = one_q[rng.below(one_q.size())];
                g.param = {};
                break;
            }
        }
        for (const GateSpec& g : layer) {
            if (g.gate == Gate::Nop) continue;
            int layer_pos = last_layer[static_cast<std::size_t>(g.target)];
            if (g.control)
                layer_pos = std::max(layer_pos, last_layer[static_cast<std::size_t>(*g.control)]);
            ++layer_pos;
            last_layer[static_cast<std::size_t>(g.target)] = layer_pos;
            if (g.control) last_layer[static_cast<std::size_t>(*g.control)] = layer_pos;
        }
        for (GateSpec& g : layer) gates.push_back(std::move(g));
    }
    return Circuit(n, std::move(gates));
}

namespace detail {

inline Circuit with_mf_prefix(MfMode mode, const Circuit& suffix) {
    if (mode == MfMode::None) return suffix;
    Circuit mf = mean_field_circuit(mode, suffix.n_qubits());
    std::vector<GateSpec> gates = mf.gates();
    gates.insert(gates.end(), suffix.gates().begin(), suffix.gates().end());
    return Circuit(suffix.n_qubits(), std::move(gates));
}

// Splits off a leading mean-field layer (either variant) when present.
inline Circuit strip_mf_prefix(const Circuit& c) {
    const int n = c.n_qubits();
    if (static_cast<int>(c.gates().size()) < n) return c;
    for (int q = 0; q < n; ++q) {
        const GateSpec& g = c.gates()[static_cast<std::size_t>(q)];
        if (g.gate != Gate::Ry || g.target != q || g.control) return c;
        const bool relaxed = g.param.kind == GateParam::Kind::Var &&
                             g.param.name == "nop" + std::to_string(q);
        const bool fixed = n == 6 && g.param.kind == GateParam::Kind::Fixed &&
                           g.param.value == kMeanFieldAngles6[q];
        if (!relaxed && !fixed) return c;
    }
    std::vector<GateSpec> rest(c.gates().begin() + n, c.gates().end());
    return Circuit(n, std::move(rest));
}

}  // namespace detail

/// Generates and labels spec.size circuits. Moment counts cycle through
/// spec.moment_range; the optional mean-field layer is prepended to every
/// random circuit. Labeling runs in parallel but output order and content
/// depend only on (spec, h, vqe).
inline std::vector<DatasetRecord> build_dataset(const DatasetSpec& spec,
                                                const HamiltonianSpec& h,
                                                const VqeConfig& vqe,
                                                int workers = default_workers()) {
    if (spec.size <= 0) throw std::invalid_argument("dataset size must be positive");
    if (spec.moment_range.empty())
        throw std::invalid_argument("dataset needs a moment range");
    const double ratio_sum =
        spec.gate_ratios[0] + spec.gate_ratios[1] + spec.gate_ratios[2];
    if (std::abs(ratio_sum - 1.0) > 1e-9)
        throw std::invalid_argument("gate ratios must sum to 1");

    std::vector<DatasetRecord> records(static_cast<std::size_t>(spec.size));
    parallel_for(spec.size, workers, [&](int i) {
        const int moments =
            spec.moment_range[static_cast<std::size_t>(i) % spec.moment_range.size()];
        Rng rng(derive_seed(spec.seed, "circuit", static_cast<std::uint64_t>(i)));
        Circuit random = random_circuit(spec, moments, rng);
        Circuit full = detail::with_mf_prefix(spec.mf_mode, random);

        VqeConfig cfg = vqe;
        cfg.seed = derive_seed(spec.seed, "vqe", static_cast<std::uint64_t>(i));
        EnergyLabel label = minimize_energy(full, h, cfg);

        DatasetRecord& rec = records[static_cast<std::size_t>(i)];
        rec.circuit_string = serialize_circuit(full);
        rec.energy = label.energy;
        rec.best_params = std::move(label.best_params);
        rec.provenance = {spec.name, spec.seed};
    });
    return records;
}

/// Rebuilds records around a different mean-field variant: any existing
/// mean-field prefix is stripped, the new one (if any) is prepended, and the
/// circuits are relabeled from scratch.
inline std::vector<DatasetRecord> recycle_dataset(const std::vector<DatasetRecord>& records,
                                                  MfMode new_mode, const HamiltonianSpec& h,
                                                  const VqeConfig& vqe,
                                                  const std::string& new_name,
                                                  int workers = default_workers()) {
    std::vector<DatasetRecord> out(records.size());
    parallel_for(static_cast<int>(records.size()), workers, [&](int i) {
        const DatasetRecord& src = records[static_cast<std::size_t>(i)];
        Circuit c = parse_circuit_string(src.circuit_string, h.n_qubits);
        Circuit suffix = detail::strip_mf_prefix(c);
        if (suffix.gates().empty())
            throw std::invalid_argument("record " + std::to_string(i) +
                                        " has no random component to recycle");
        Circuit full = detail::with_mf_prefix(new_mode, suffix);

        VqeConfig cfg = vqe;
        cfg.seed = derive_seed(vqe.seed, "recycle", static_cast<std::uint64_t>(i));
        EnergyLabel label = minimize_energy(full, h, cfg);

        DatasetRecord& rec = out[static_cast<std::size_t>(i)];
        rec.circuit_string = serialize_circuit(full);
        rec.energy = label.energy;
        rec.best_params = std::move(label.best_params);
        rec.provenance = {new_name, src.provenance.seed};
    });
    return out;
}

enum class TargetedDataset { RyCnot, XyY };

/// The two narrow-pool datasets. RyCnot: {RY, CNOT}, neighbor-only two-qubit
/// gates, 1000 circuits per moment count in {4,5,6}. XyY: {XY, Y}, all-to-all,
/// 1000 per moment count in {4,5}. `scale` shrinks the per-moment bucket.
inline std::vector<DatasetRecord> targeted_dataset(TargetedDataset kind, std::uint64_t seed,
                                                   const HamiltonianSpec& h,
                                                   const VqeConfig& vqe, double scale = 1.0,
                                                   int workers = default_workers()) {
    DatasetSpec spec;
    spec.seed = seed;
    spec.n_qubits = h.n_qubits;
    spec.gate_ratios = {0.2, 0.4, 0.4};
    spec.mf_mode = MfMode::None;
    int per_bucket = 1000;
    if (kind == TargetedDataset::RyCnot) {
        spec.name = "ry_cnot";
        spec.pool = {{Gate::Ry, Gate::Cnot}, Connectivity::nearest_neighbor(1)};
        spec.moment_range = {4, 5, 6};
    } else {
        spec.name = "xy_y";
        spec.pool = {{Gate::Xy, Gate::Y}, Connectivity::all_to_all()};
        spec.moment_range = {4, 5};
    }
    per_bucket = std::max(1, static_cast<int>(per_bucket * scale + 0.5));
    spec.size = per_bucket * static_cast<int>(spec.moment_range.size());
    return build_dataset(spec, h, vqe, workers);
}

// ---------------------------------------------------------------------------
// Dataset file format
// ---------------------------------------------------------------------------

inline std::string dataset_record_line(const DatasetRecord& rec) {
    nlohmann::ordered_json j;
    j["schema"] = kDatasetSchemaVersion;
    j["circuit"] = rec.circuit_string;
    j["energy"] = rec.energy;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [name, value] : rec.best_params) params[name] = value;
    j["params"] = std::move(params);
    j["provenance"] = {{"spec", rec.provenance.spec_name}, {"seed", rec.provenance.seed}};
    return j.dump();
}

inline void write_dataset(const std::vector<DatasetRecord>& records,
                          const std::string& path) {
    std::string out;
    for (const DatasetRecord& rec : records) {
        out += dataset_record_line(rec);
        out.push_back('\n');
    }
    write_file(path, out);
}

inline std::vector<DatasetRecord> read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::vector<DatasetRecord> records;
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
                                     ": bad dataset record: " + e.what());
        }
        if (j.value("schema", 0) != kDatasetSchemaVersion)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": unsupported dataset schema");
        DatasetRecord rec;
        rec.circuit_string = j.at("circuit").get<std::string>();
        rec.energy = j.at("energy").get<double>();
        for (const auto& [name, value] : j.at("params").items())
            rec.best_params[name] = value.get<double>();
        rec.provenance.spec_name = j.at("provenance").at("spec").get<std::string>();
        rec.provenance.seed = j.at("provenance").at("seed").get<std::uint64_t>();
        records.push_back(std::move(rec));
    }
    return records;
}

/// Vocabulary induced by a dataset under a spec-derived slot budget: the slot
/// count covers the widest generatable circuit (max moments x qubits, plus a
/// mean-field layer when present) and param tokens are collected from the
/// records in order.
inline Vocabulary dataset_vocabulary(const DatasetSpec& spec,
                                     const std::vector<DatasetRecord>& records) {
    const int max_gates =
        *std::max_element(spec.moment_range.begin(), spec.moment_range.end()) *
            spec.n_qubits +
        (spec.mf_mode == MfMode::None ? 0 : spec.n_qubits);
    std::vector<Circuit> circuits;
    circuits.reserve(records.size());
    for (const DatasetRecord& rec : records)
        circuits.push_back(parse_circuit_string(rec.circuit_string, spec.n_qubits));
    return build_vocabulary(spec.pool, spec.n_qubits, collect_param_tokens(circuits),
                            max_gates);
}

}  // namespace qdd
