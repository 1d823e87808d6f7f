#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "helpers.hpp"
#include "qdd/analysis.hpp"
#include "qdd/dataset.hpp"

using namespace qdd;

namespace {

DreamTrace trace_with_energies(const std::vector<double>& energies) {
    DreamTrace t;
    for (std::size_t i = 0; i < energies.size(); ++i) {
        DreamEpoch e;
        e.epoch = static_cast<int>(i);
        e.circuit = "NOP=0=nop=nop";
        e.true_energy = energies[i];
        t.epochs.push_back(e);
    }
    return t;
}

// The criterion-9 comparison circuit: four moments alternating free RY layers
// with long-range controlled-RY pairs.
Circuit entangling_ansatz() {
    std::vector<GateSpec> gates;
    int p = 0;
    auto ry_layer = [&] {
        for (int q = 0; q < 6; ++q)
            gates.push_back(
                GateSpec{Gate::Ry, q, std::nullopt, GateParam::var("t" + std::to_string(p++))});
    };
    ry_layer();
    for (auto [t, c] : {std::pair{0, 3}, {1, 4}, {2, 5}})
        gates.push_back(GateSpec{Gate::Cry, t, c, GateParam::var("t" + std::to_string(p++))});
    ry_layer();
    for (auto [t, c] : {std::pair{3, 1}, {4, 2}, {5, 0}})
        gates.push_back(GateSpec{Gate::Cry, t, c, GateParam::var("t" + std::to_string(p++))});
    return Circuit(6, gates);
}

// Estimator pipeline applied to fidelity samples drawn exactly from the Haar
// density via its inverse CDF: F = 1 - (1-u)^(1/(N-1)).
double haar_self_kl(int n_qubits, int samples, int bins, std::uint64_t seed) {
    Rng rng(seed);
    const double dim = std::pow(2.0, n_qubits);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    for (int i = 0; i < samples; ++i) {
        const double f = 1.0 - std::pow(1.0 - rng.next_double(), 1.0 / (dim - 1.0));
        int bin = std::min(std::max(static_cast<int>(f * bins), 0), bins - 1);
        ++counts[static_cast<std::size_t>(bin)];
    }
    double kl = 0.0;
    for (int i = 0; i < bins; ++i) {
        const double p = (static_cast<double>(counts[static_cast<std::size_t>(i)]) + 1.0) /
                         (static_cast<double>(samples) + bins);
        const double lo = static_cast<double>(i) / bins;
        const double hi = static_cast<double>(i + 1) / bins;
        const double q = std::pow(1.0 - lo, dim - 1.0) - std::pow(1.0 - hi, dim - 1.0);
        kl += p * std::log(p / q);
    }
    return kl;
}

}  // namespace

TEST_CASE("trace metrics arithmetic", "[analysis]") {
    DreamMetrics single = trace_metrics(trace_with_energies({-3.5}));
    CHECK(single.initial_energy == -3.5);
    CHECK(single.final_energy == -3.5);
    CHECK(single.minimum_energy == -3.5);
    CHECK(single.energy_displacement == 0.0);

    DreamMetrics m = trace_metrics(trace_with_energies({-2, -5, -4}));
    CHECK(m.initial_energy == -2.0);
    CHECK(m.final_energy == -4.0);
    CHECK(m.minimum_energy == -5.0);
    CHECK(m.energy_displacement == -2.0);
}

TEST_CASE("cohort percentages at the extremes", "[analysis]") {
    std::vector<DreamTrace> low{trace_with_energies({-7, -7}), trace_with_energies({-7})};
    CohortMetrics a = cohort_metrics(low, kMeanFieldEnergy6);
    CHECK(a.pct_final_below_mf == 100.0);
    CHECK(a.pct_min_below_mf == 100.0);
    CHECK(a.lowest_min_energy == -7.0);

    std::vector<DreamTrace> high{trace_with_energies({-6}), trace_with_energies({-6, -6})};
    CohortMetrics b = cohort_metrics(high, kMeanFieldEnergy6);
    CHECK(b.pct_final_below_mf == 0.0);
    CHECK(b.pct_min_below_mf == 0.0);

    CHECK_THROWS_AS(cohort_metrics({}, kMeanFieldEnergy6), std::invalid_argument);
}

TEST_CASE("metric identities hold on random cohorts", "[analysis]") {
    Rng rng(271);
    std::vector<DreamTrace> traces;
    for (int t = 0; t < 40; ++t) {
        std::vector<double> energies;
        const int len = 1 + static_cast<int>(rng.below(6));
        for (int i = 0; i < len; ++i) energies.push_back(rng.uniform(-7.3, -1.0));
        traces.push_back(trace_with_energies(energies));
    }
    for (const DreamTrace& t : traces) {
        DreamMetrics m = trace_metrics(t);
        CHECK(m.minimum_energy <= m.initial_energy);
        CHECK(m.minimum_energy <= m.final_energy);
    }
    CohortMetrics c = cohort_metrics(traces, kMeanFieldEnergy6);
    CHECK(c.pct_min_below_mf >= c.pct_final_below_mf);
    for (const DreamTrace& t : traces)
        CHECK(c.lowest_min_energy <= trace_metrics(t).minimum_energy);
}

TEST_CASE("expressibility rejects bad estimator parameters", "[analysis]") {
    Circuit mf = mean_field_circuit(MfMode::Relaxed, 6);
    CHECK_THROWS_AS(expressibility(mf, 10, 75, 0), std::invalid_argument);
}

TEST_CASE("parameter-free circuits are flagged degenerate", "[analysis]") {
    Circuit fixed = mean_field_circuit(MfMode::Fixed, 6);
    ExpressibilityScore score = expressibility(fixed, 200, 10, 0, 2);
    CHECK(score.degenerate);
    CHECK(score.kl_divergence > 1.0);  // point mass far from the Haar density
}

TEST_CASE("expressibility is non-negative and reproducible", "[analysis]") {
    Circuit mf = mean_field_circuit(MfMode::Relaxed, 6);
    ExpressibilityScore a = expressibility(mf, 600, 30, 17, 2);
    ExpressibilityScore b = expressibility(mf, 600, 30, 17, 1);
    CHECK(a.kl_divergence >= 0.0);
    CHECK(a.kl_divergence == b.kl_divergence);  // worker count is irrelevant
}

TEST_CASE("entangling layers beat the product ansatz", "[analysis]") {
    Circuit product = mean_field_circuit(MfMode::Relaxed, 6);
    Circuit entangler = entangling_ansatz();
    CHECK(moment_count(entangler) == 4);
    const double kl_product = expressibility(product, 1500, 75, 3, 2).kl_divergence;
    const double kl_entangler = expressibility(entangler, 1500, 75, 3, 2).kl_divergence;
    CHECK(kl_entangler < kl_product);
}

TEST_CASE("doubling samples moves the estimate by under five percent", "[analysis]") {
    // Needs an ansatz whose fidelity histogram populates every bin, so the
    // add-one smoothing term is negligible and only sampling noise remains.
    // A single free rotation gives the arcsine fidelity law, which does.
    Circuit single(6, {GateSpec{Gate::Ry, 0, std::nullopt, GateParam::var("a")}});
    double at_half = 0.0, at_full = 0.0;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        at_half += expressibility(single, 2500, 75, seed, 2).kl_divergence;
        at_full += expressibility(single, 5000, 75, seed + 100, 2).kl_divergence;
    }
    at_half /= 4;
    at_full /= 4;
    CHECK(std::abs(at_full - at_half) / at_full < 0.05);
}

TEST_CASE("Haar-true samples score below any product ansatz", "[analysis]") {
    const double haar_kl = haar_self_kl(6, 2000, 75, 5);
    Circuit product = mean_field_circuit(MfMode::Relaxed, 6);
    const double product_kl = expressibility(product, 2000, 75, 5, 2).kl_divergence;
    CHECK(haar_kl >= 0.0);
    CHECK(haar_kl < product_kl);
}

TEST_CASE("report export formats and determinism", "[analysis]") {
    std::vector<DreamTrace> traces{trace_with_energies({-2, -5, -4}),
                                   trace_with_energies({-6.95, -7.0})};
    const std::string dir = std::filesystem::temp_directory_path().string();
    const std::string lines_path = dir + "/qdd_report_test.jsonl";
    const std::string table_path = dir + "/qdd_report_test.txt";

    export_report(traces, kMeanFieldEnergy6, lines_path, ReportFormat::Lines,
                  {{"config_digest", "abc123"}});
    export_report(traces, kMeanFieldEnergy6, table_path, ReportFormat::Table);

    const std::string lines = read_file(lines_path);
    CHECK(std::count(lines.begin(), lines.end(), '\n') == 3);  // 2 traces + summary
    CHECK(lines.find("config_digest") != std::string::npos);

    const std::string table = read_file(table_path);
    CHECK(std::count(table.begin(), table.end(), '\n') == 4);  // header + 2 + summary

    export_report(traces, kMeanFieldEnergy6, lines_path, ReportFormat::Lines,
                  {{"config_digest", "abc123"}});
    CHECK(read_file(lines_path) == lines);

    const std::string missing = dir + "/qdd_report_empty.jsonl";
    std::filesystem::remove(missing);
    CHECK_THROWS_AS(export_report({}, kMeanFieldEnergy6, missing, ReportFormat::Lines),
                    std::invalid_argument);
    CHECK_FALSE(std::filesystem::exists(missing));

    std::filesystem::remove(lines_path);
    std::filesystem::remove(table_path);
}
