// Dreaming evaluation metrics, cohort aggregation, and the expressibility
// estimator (KL divergence of the sampled state-fidelity distribution against
// the Haar-random fidelity density P(F) = (N-1)(1-F)^(N-2), N = 2^n).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdd/dreaming.hpp"
#include "qdd/parallel.hpp"
#include "qdd/rng.hpp"
#include "qdd/serde.hpp"
#include "qdd/simulator.hpp"

namespace qdd {

struct DreamMetrics {
    double initial_energy = 0.0;
    double final_energy = 0.0;
    double minimum_energy = 0.0;
    double energy_displacement = 0.0;  // final - initial
};

inline DreamMetrics trace_metrics(const DreamTrace& t) {
    if (t.epochs.empty()) throw std::invalid_argument("empty trace");
    DreamMetrics m;
    m.initial_energy = t.initial_energy();
    m.final_energy = t.final_energy();
    m.minimum_energy = t.minimum_energy();
    m.energy_displacement = m.final_energy - m.initial_energy;
    return m;
}

struct CohortMetrics {
    double pct_final_below_mf = 0.0;
    double pct_min_below_mf = 0.0;
    double lowest_min_energy = 0.0;
    double mean_initial = 0.0;
    double mean_minimum = 0.0;
    double mean_displacement = 0.0;
    int cohort_size = 0;
    double mf_energy = 0.0;
};

/// Aggregates a dreaming cohort. "Below" means strictly less than mf_energy.
inline CohortMetrics cohort_metrics(const std::vector<DreamTrace>& traces,
                                    double mf_energy = kMeanFieldEnergy6) {
    if (traces.empty()) throw std::invalid_argument("empty cohort");
    CohortMetrics c;
    c.cohort_size = static_cast<int>(traces.size());
    c.mf_energy = mf_energy;
    c.lowest_min_energy = std::numeric_limits<double>::infinity();
    int final_below = 0, min_below = 0;
    for (const DreamTrace& t : traces) {
        const DreamMetrics m = trace_metrics(t);
        if (m.final_energy < mf_energy) ++final_below;
        if (m.minimum_energy < mf_energy) ++min_below;
        c.lowest_min_energy = std::min(c.lowest_min_energy, m.minimum_energy);
        c.mean_initial += m.initial_energy;
        c.mean_minimum += m.minimum_energy;
        c.mean_displacement += m.energy_displacement;
    }
    const double n = static_cast<double>(traces.size());
    c.pct_final_below_mf = 100.0 * final_below / n;
    c.pct_min_below_mf = 100.0 * min_below / n;
    c.mean_initial /= n;
    c.mean_minimum /= n;
    c.mean_displacement /= n;
    return c;
}

struct ExpressibilityScore {
    double kl_divergence = 0.0;
    int samples = 0;
    int bins = 0;
    bool degenerate = false;  // circuit has no free parameters
};

/// Estimates expressibility: samples pairs of uniform-random parameter
/// bindings, histograms the pairwise state fidelities over [0,1], and
/// returns the KL divergence from the Haar fidelity distribution. Histogram
/// counts get add-one smoothing so the divergence stays finite. Lower KL
/// means closer to Haar, i.e. more expressible.
inline ExpressibilityScore expressibility(const Circuit& c, int samples, int bins,
                                          std::uint64_t seed,
                                          int workers = default_workers()) {
    if (bins < 1) throw std::invalid_argument("bins must be positive");
    if (samples < bins)
        throw std::invalid_argument("need at least as many samples as bins");

    const std::vector<std::string> names = free_parameter_names(c);
    ExpressibilityScore score;
    score.samples = samples;
    score.bins = bins;
    score.degenerate = names.empty();

    std::vector<double> fidelities(static_cast<std::size_t>(samples), 1.0);
    if (!names.empty()) {
        parallel_for(samples, workers, [&](int i) {
            Rng rng(derive_seed(seed, "pair", static_cast<std::uint64_t>(i)));
            ParamBinding a, b;
            for (const std::string& n : names) a[n] = rng.uniform(0.0, 2.0 * std::numbers::pi);
            for (const std::string& n : names) b[n] = rng.uniform(0.0, 2.0 * std::numbers::pi);
            fidelities[static_cast<std::size_t>(i)] =
                state_fidelity(apply_circuit(c, a), apply_circuit(c, b));
        });
    }

    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    for (double f : fidelities) {
        int bin = static_cast<int>(f * bins);
        bin = std::min(std::max(bin, 0), bins - 1);
        ++counts[static_cast<std::size_t>(bin)];
    }

    const double dim = std::pow(2.0, c.n_qubits());
    double kl = 0.0;
    for (int i = 0; i < bins; ++i) {
        const double p = (static_cast<double>(counts[static_cast<std::size_t>(i)]) + 1.0) /
                         (static_cast<double>(samples) + bins);
        const double lo = static_cast<double>(i) / bins;
        const double hi = static_cast<double>(i + 1) / bins;
        // Integral of (N-1)(1-F)^(N-2) over the bin.
        const double q = std::pow(1.0 - lo, dim - 1.0) - std::pow(1.0 - hi, dim - 1.0);
        kl += p * std::log(p / q);
    }
    score.kl_divergence = kl;
    return score;
}

// ---------------------------------------------------------------------------
// Report emission. "lines" writes one JSON object per trace plus a summary
// object; "table" writes aligned text with one row per trace and a summary
// row. Both embed the caller's provenance digests and are byte-stable.
// ---------------------------------------------------------------------------

enum class ReportFormat { Lines, Table };

inline std::string render_report(const std::vector<DreamTrace>& traces, double mf_energy,
                                 ReportFormat format,
                                 const std::map<std::string, std::string>& provenance = {}) {
    if (traces.empty()) throw std::invalid_argument("empty cohort");
    const CohortMetrics cohort = cohort_metrics(traces, mf_energy);

    if (format == ReportFormat::Lines) {
        std::string out;
        for (std::size_t i = 0; i < traces.size(); ++i) {
            const DreamMetrics m = trace_metrics(traces[i]);
            nlohmann::ordered_json j;
            j["trace"] = i;
            j["initial_energy"] = m.initial_energy;
            j["final_energy"] = m.final_energy;
            j["minimum_energy"] = m.minimum_energy;
            j["energy_displacement"] = m.energy_displacement;
            out += j.dump();
            out.push_back('\n');
        }
        nlohmann::ordered_json s;
        s["summary"] = true;
        s["cohort_size"] = cohort.cohort_size;
        s["mf_energy"] = cohort.mf_energy;
        s["pct_final_below_mf"] = cohort.pct_final_below_mf;
        s["pct_min_below_mf"] = cohort.pct_min_below_mf;
        s["lowest_min_energy"] = cohort.lowest_min_energy;
        s["mean_initial"] = cohort.mean_initial;
        s["mean_minimum"] = cohort.mean_minimum;
        s["mean_displacement"] = cohort.mean_displacement;
        for (const auto& [k, v] : provenance) s[k] = v;
        out += s.dump();
        out.push_back('\n');
        return out;
    }

    char buf[160];
    std::string out = "trace      initial        final      minimum  displacement\n";
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const DreamMetrics m = trace_metrics(traces[i]);
        std::snprintf(buf, sizeof(buf), "%5zu %12.6f %12.6f %12.6f %13.6f\n", i,
                      m.initial_energy, m.final_energy, m.minimum_energy,
                      m.energy_displacement);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "summary: n=%d mf=%.6f final_below=%.2f%% min_below=%.2f%% "
                  "lowest_min=%.6f\n",
                  cohort.cohort_size, cohort.mf_energy, cohort.pct_final_below_mf,
                  cohort.pct_min_below_mf, cohort.lowest_min_energy);
    out += buf;
    for (const auto& [k, v] : provenance) out += k + ": " + v + "\n";
    return out;
}

inline void export_report(const std::vector<DreamTrace>& traces, double mf_energy,
                          const std::string& path, ReportFormat format,
                          const std::map<std::string, std::string>& provenance = {}) {
    // Render before touching the filesystem; an empty cohort must not
    // leave a file behind.
    write_file(path, render_report(traces, mf_energy, format, provenance));
}

}  // namespace qdd
