// Built-in dataset and training configurations.
//
// Dataset presets: A_s (random circuits only), B_s (relaxed mean-field layer
// prepended), C_s (fixed mean-field layer prepended), their 10k counterparts
// A_l/B_l/C_l assembled by recycling the small datasets' random components,
// and the narrow-pool ry_cnot / xy_y sets. Training presets carry the best
// hyperparameters found for each dataset family, plus the search grids a
// sweep iterates over.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdd/dataset.hpp"
#include "qdd/neuralnet.hpp"

namespace qdd {

inline GatePool broad_gate_pool() {
    return {{Gate::X, Gate::Y, Gate::Z, Gate::H, Gate::Rx, Gate::Ry, Gate::Rz,
             Gate::Cnot, Gate::Crx, Gate::Cry, Gate::Crz},
            Connectivity::all_to_all()};
}

inline const std::vector<std::string>& dataset_preset_names() {
    static const std::vector<std::string> names{"A_s", "B_s", "C_s", "A_l",
                                                "B_l", "C_l", "ry_cnot", "xy_y"};
    return names;
}

/// Spec for the three broad 5000-circuit datasets (scaled by `scale`).
inline DatasetSpec broad_dataset_spec(const std::string& name, std::uint64_t seed,
                                      double scale = 1.0) {
    DatasetSpec spec;
    spec.name = name;
    spec.size = std::max(5, static_cast<int>(5000 * scale + 0.5));
    spec.n_qubits = 6;
    spec.moment_range = {4, 5, 6, 7, 8};
    spec.pool = broad_gate_pool();
    spec.gate_ratios = {0.1, 0.45, 0.45};
    spec.seed = seed;
    if (name == "A_s") spec.mf_mode = MfMode::None;
    else if (name == "B_s") spec.mf_mode = MfMode::Relaxed;
    else if (name == "C_s") spec.mf_mode = MfMode::Fixed;
    else throw std::invalid_argument("not a broad dataset preset: " + name);
    return spec;
}

struct BuiltDataset {
    DatasetSpec spec;  // spec describing pool/layout (for vocabulary building)
    std::vector<DatasetRecord> records;
};

/// Materializes any named dataset preset. The large variants reuse the random
/// components of a sibling small dataset under a different mean-field layer:
/// A_l = A_s + recycled C_s, B_l = B_s + recycled A_s, C_l = C_s + recycled B_s.
inline BuiltDataset build_preset_dataset(const std::string& name, std::uint64_t seed,
                                         const HamiltonianSpec& h, const VqeConfig& vqe,
                                         double scale = 1.0,
                                         int workers = default_workers()) {
    BuiltDataset out;
    if (name == "A_s" || name == "B_s" || name == "C_s") {
        out.spec = broad_dataset_spec(name, seed, scale);
        out.records = build_dataset(out.spec, h, vqe, workers);
        return out;
    }
    if (name == "A_l" || name == "B_l" || name == "C_l") {
        const std::string base = name.substr(0, 1) + "_s";
        const std::string donor =
            name == "A_l" ? "C_s" : (name == "B_l" ? "A_s" : "B_s");
        BuiltDataset first = build_preset_dataset(base, seed, h, vqe, scale, workers);
        BuiltDataset other = build_preset_dataset(donor, seed, h, vqe, scale, workers);
        VqeConfig recycle_vqe = vqe;
        recycle_vqe.seed = derive_seed(seed, "recycle", fnv1a(name));
        std::vector<DatasetRecord> recycled = recycle_dataset(
            other.records, first.spec.mf_mode, h, recycle_vqe, name, workers);
        out.spec = first.spec;
        out.spec.name = name;
        out.records = std::move(first.records);
        out.records.insert(out.records.end(), recycled.begin(), recycled.end());
        return out;
    }
    if (name == "ry_cnot" || name == "xy_y") {
        const TargetedDataset kind =
            name == "ry_cnot" ? TargetedDataset::RyCnot : TargetedDataset::XyY;
        out.records = targeted_dataset(kind, seed, h, vqe, scale, workers);
        out.spec.name = name;
        out.spec.size = static_cast<int>(out.records.size());
        out.spec.n_qubits = h.n_qubits;
        out.spec.gate_ratios = {0.2, 0.4, 0.4};
        out.spec.seed = seed;
        if (kind == TargetedDataset::RyCnot) {
            out.spec.pool = {{Gate::Ry, Gate::Cnot}, Connectivity::nearest_neighbor(1)};
            out.spec.moment_range = {4, 5, 6};
        } else {
            out.spec.pool = {{Gate::Xy, Gate::Y}, Connectivity::all_to_all()};
            out.spec.moment_range = {4, 5};
        }
        return out;
    }
    std::string known;
    for (const std::string& n : dataset_preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown dataset preset '" + name + "' (known: " + known + ")");
}

struct TrainPreset {
    std::string name;
    std::vector<int> hidden_sizes;
    double learning_rate;
    double noise_upper;
    LossKind loss;
    double weight_decay;  // 0 selects plain Adam
};

/// Best settings per dataset family; the narrow-pool datasets inherit the
/// no-mean-field settings.
inline TrainPreset train_preset(const std::string& name) {
    if (name == "A_s" || name == "A_l" || name == "ry_cnot" || name == "xy_y")
        return {name, {600, 600, 600}, 1e-6, 0.95, LossKind::L1, 1.0};
    if (name == "B_s" || name == "B_l")
        return {name, {700, 700, 700}, 1e-5, 0.95, LossKind::L1, 1e-4};
    if (name == "C_s" || name == "C_l")
        return {name, {700, 700, 700}, 1e-6, 0.95, LossKind::L2, 1e-4};
    throw std::invalid_argument("unknown training preset '" + name + "'");
}

inline TrainConfig train_config_from_preset(const TrainPreset& p, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.loss = p.loss;
    cfg.optimizer.kind = p.weight_decay > 0.0 ? OptimizerConfig::Kind::AdamW
                                              : OptimizerConfig::Kind::Adam;
    cfg.optimizer.learning_rate = p.learning_rate;
    cfg.optimizer.weight_decay = p.weight_decay;
    cfg.noise_lower = 0.1;
    cfg.noise_upper = p.noise_upper;
    cfg.seed = seed;
    return cfg;
}

// Search grids, one axis per sweep round.
inline std::vector<std::vector<int>> sweep_architectures() {
    std::vector<std::vector<int>> out;
    for (int w = 100; w <= 1000; w += 100) out.push_back({w, w, w});
    return out;
}

inline std::vector<double> sweep_learning_rates() {
    std::vector<double> out;
    for (int e = 2; e <= 12; ++e) out.push_back(std::pow(10.0, -e));
    return out;
}

inline std::vector<double> sweep_noise_upper_bounds() {
    std::vector<double> out;
    for (int i = 0; i <= 10; ++i) out.push_back(0.90 + 0.01 * i);
    return out;
}

inline std::vector<double> sweep_weight_decays() { return {0.0, 1.0, 0.1, 0.01, 0.001, 0.0001}; }

}  // namespace qdd
