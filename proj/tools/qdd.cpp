// Command-line workbench: dataset generation, training, dreaming, the exact
// ground-energy oracle, expressibility scoring, and hyperparameter sweeps.
//
// Every command is deterministic given its flags and seed, and every command
// that writes files also writes a <name>.manifest.json carrying the resolved
// configuration and its digest. Errors are reported as a JSON object on
// stderr with a nonzero exit code.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdd/qdd.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("QDD_OUT"); env && *env) return env;
    return ".";
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty() && dir != ".") fs::create_directories(dir);
}

std::string file_digest(const std::string& path) {
    return qdd::to_hex(qdd::fnv1a(qdd::read_file(path)));
}

void write_manifest(const std::string& dir, const std::string& name,
                    const std::string& command, const ordered_json& config) {
    ordered_json manifest;
    manifest["schema"] = 1;
    manifest["command"] = command;
    manifest["config"] = config;
    manifest["digest"] = qdd::to_hex(qdd::fnv1a(config.dump()));
    qdd::write_file(dir + "/" + name + ".manifest.json", manifest.dump(2) + "\n");
}

ordered_json spec_to_json(const qdd::DatasetSpec& spec) {
    ordered_json j;
    j["name"] = spec.name;
    j["size"] = spec.size;
    j["n_qubits"] = spec.n_qubits;
    j["moment_range"] = spec.moment_range;
    ordered_json gates = ordered_json::array();
    for (qdd::Gate g : spec.pool.allowed) gates.push_back(std::string(qdd::gate_name(g)));
    j["pool"] = std::move(gates);
    j["connectivity"] =
        spec.pool.connectivity.kind == qdd::Connectivity::Kind::AllToAll
            ? ordered_json{{"kind", "all_to_all"}}
            : ordered_json{{"kind", "nearest_neighbor"},
                           {"max_distance", spec.pool.connectivity.max_distance}};
    j["gate_ratios"] = spec.gate_ratios;
    j["mf_mode"] = std::string(qdd::mf_mode_name(spec.mf_mode));
    j["seed"] = spec.seed;
    return j;
}

qdd::DatasetSpec spec_from_json(const json& j) {
    qdd::DatasetSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.size = j.at("size").get<int>();
    spec.n_qubits = j.at("n_qubits").get<int>();
    spec.moment_range = j.at("moment_range").get<std::vector<int>>();
    for (const auto& name : j.at("pool")) {
        auto g = qdd::gate_from_name(name.get<std::string>());
        if (!g) throw std::invalid_argument("unknown gate in spec: " +
                                            name.get<std::string>());
        spec.pool.allowed.push_back(*g);
    }
    const auto& conn = j.at("connectivity");
    spec.pool.connectivity =
        conn.at("kind") == "all_to_all"
            ? qdd::Connectivity::all_to_all()
            : qdd::Connectivity::nearest_neighbor(conn.at("max_distance").get<int>());
    const auto ratios = j.at("gate_ratios").get<std::vector<double>>();
    if (ratios.size() != 3) throw std::invalid_argument("gate_ratios needs 3 entries");
    spec.gate_ratios = {ratios[0], ratios[1], ratios[2]};
    const std::string mf = j.at("mf_mode").get<std::string>();
    spec.mf_mode = mf == "relaxed" ? qdd::MfMode::Relaxed
                                   : (mf == "fixed" ? qdd::MfMode::Fixed : qdd::MfMode::None);
    spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

// The dataset spec travels in the gen manifest; train recovers it from there.
qdd::DatasetSpec load_sidecar_spec(const std::string& dataset_path) {
    std::string manifest_path = dataset_path;
    const std::string ext = ".jsonl";
    if (manifest_path.size() > ext.size() &&
        manifest_path.compare(manifest_path.size() - ext.size(), ext.size(), ext) == 0)
        manifest_path.resize(manifest_path.size() - ext.size());
    manifest_path += ".manifest.json";
    if (!fs::exists(manifest_path))
        throw std::runtime_error("no manifest next to dataset (" + manifest_path +
                                 "); pass --spec-json instead");
    json manifest = json::parse(qdd::read_file(manifest_path));
    return spec_from_json(manifest.at("config").at("spec"));
}

struct VqeFlags {
    int restarts = 3;
    int max_iterations = 500;
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--restarts", restarts, "VQE restarts per label");
        cmd->add_option("--vqe-iters", max_iterations, "VQE iteration budget");
    }

    qdd::VqeConfig config() const {
        qdd::VqeConfig cfg;
        cfg.restarts = restarts;
        cfg.max_iterations = max_iterations;
        cfg.seed = seed;
        return cfg;
    }
};

ordered_json vqe_to_json(const qdd::VqeConfig& cfg) {
    return {{"restarts", cfg.restarts},
            {"max_iterations", cfg.max_iterations},
            {"learning_rate", cfg.learning_rate},
            {"gradient_tolerance", cfg.gradient_tolerance}};
}

int run(int argc, char** argv) {
    CLI::App app{"quantum-circuit deep-dreaming workbench"};
    app.require_subcommand(1);

    // ---- gen ------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate and label a dataset");
    std::string gen_preset, gen_spec_file, gen_out, gen_name;
    double gen_scale = 1.0;
    std::uint64_t gen_seed = 0;
    int gen_workers = qdd::default_workers();
    VqeFlags gen_vqe;
    gen->add_option("--preset", gen_preset, "one of the built-in dataset presets");
    gen->add_option("--spec", gen_spec_file, "JSON file with a full dataset spec");
    gen->add_option("--scale", gen_scale, "size multiplier (0.1 = desk scale)");
    gen->add_option("--seed", gen_seed, "master seed");
    gen->add_option("--out", gen_out, "output directory (default $QDD_OUT or .)");
    gen->add_option("--name", gen_name, "output basename (default preset name)");
    gen->add_option("--workers", gen_workers, "parallel labeling workers");
    gen_vqe.attach(gen);

    // ---- train ----------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "train an energy regressor");
    std::string train_dataset, train_preset, train_out, train_name = "model";
    std::string train_arch, train_loss;
    double train_lr = 0.0, train_wd = -1.0, train_noise_upper = -1.0;
    int train_epochs = 0, train_batch = 0;
    std::uint64_t train_seed = 0;
    train_cmd->add_option("--dataset", train_dataset, "dataset .jsonl path")->required();
    train_cmd->add_option("--preset", train_preset,
                          "training preset (A_s, B_s, C_s, A_l, B_l, C_l, ry_cnot, xy_y)");
    train_cmd->add_option("--arch", train_arch, "hidden sizes, e.g. 700,700,700");
    train_cmd->add_option("--lr", train_lr, "learning rate");
    train_cmd->add_option("--loss", train_loss, "L1 or L2");
    train_cmd->add_option("--wd", train_wd, "weight decay (0 = plain Adam)");
    train_cmd->add_option("--noise-upper", train_noise_upper, "noise upper bound");
    train_cmd->add_option("--epochs", train_epochs, "epoch budget");
    train_cmd->add_option("--batch", train_batch, "batch size");
    train_cmd->add_option("--seed", train_seed, "master seed");
    train_cmd->add_option("--out", train_out, "output directory");
    train_cmd->add_option("--name", train_name, "checkpoint basename");

    // ---- dream ----------------------------------------------------------
    auto* dream = app.add_subcommand("dream", "gradient-dream circuits toward a target");
    std::string dream_ckpt, dream_dataset, dream_circuit, dream_out, dream_name = "dream";
    int dream_n = 0, dream_inner = 50, dream_outer = 10, dream_workers = qdd::default_workers();
    double dream_target = -8.0, dream_lr = 0.01, dream_nl = 0.1, dream_nu = 0.9;
    std::uint64_t dream_seed = 0;
    VqeFlags dream_vqe;
    dream->add_option("--checkpoint", dream_ckpt, "trained model checkpoint")->required();
    dream->add_option("--dataset", dream_dataset, "dataset to sample start circuits from");
    dream->add_option("--n", dream_n, "number of circuits to dream");
    dream->add_option("--circuit", dream_circuit, "explicit start circuit string");
    dream->add_option("--target", dream_target, "target energy");
    dream->add_option("--lr", dream_lr, "dreaming learning rate");
    dream->add_option("--noise-lower", dream_nl, "noise lower bound");
    dream->add_option("--noise-upper", dream_nu, "noise upper bound");
    dream->add_option("--inner", dream_inner, "gradient steps per outer epoch");
    dream->add_option("--outer", dream_outer, "outer epochs");
    dream->add_option("--seed", dream_seed, "master seed");
    dream->add_option("--out", dream_out, "output directory");
    dream->add_option("--name", dream_name, "output basename");
    dream->add_option("--workers", dream_workers, "parallel dreaming workers");
    dream_vqe.attach(dream);

    // ---- oracle ---------------------------------------------------------
    auto* oracle = app.add_subcommand("oracle", "exact TFIM ground energy");
    int oracle_n = 6;
    double oracle_j = 1.0, oracle_g = 1.0;
    std::string oracle_boundary = "open", oracle_cache;
    oracle->add_option("--n", oracle_n, "qubit count");
    oracle->add_option("--J", oracle_j, "coupling constant");
    oracle->add_option("--g", oracle_g, "field constant");
    oracle->add_option("--boundary", oracle_boundary, "open or periodic");
    oracle->add_option("--cache", oracle_cache, "on-disk energy cache file");

    // ---- expr -----------------------------------------------------------
    auto* expr = app.add_subcommand("expr", "expressibility of a circuit");
    std::string expr_circuit, expr_trace, expr_out, expr_name = "expr";
    int expr_qubits = 6, expr_samples = 5000, expr_bins = 75, expr_workers = qdd::default_workers();
    std::uint64_t expr_seed = 0;
    expr->add_option("--circuit", expr_circuit, "circuit string");
    expr->add_option("--trace", expr_trace, "dream trace file (scores every epoch)");
    expr->add_option("--n-qubits", expr_qubits, "register width");
    expr->add_option("--samples", expr_samples, "fidelity sample pairs");
    expr->add_option("--bins", expr_bins, "histogram bins");
    expr->add_option("--seed", expr_seed, "sampling seed");
    expr->add_option("--out", expr_out, "output directory (report file optional)");
    expr->add_option("--name", expr_name, "report basename");
    expr->add_option("--workers", expr_workers, "parallel sampling workers");

    // ---- sweep ----------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "hyperparameter search grids");
    std::string sweep_dataset, sweep_grid, sweep_preset = "B_s", sweep_out,
                sweep_name = "sweep";
    int sweep_epochs = 50;
    std::uint64_t sweep_seed = 0;
    sweep->add_option("--dataset", sweep_dataset, "dataset .jsonl path")->required();
    sweep->add_option("--grid", sweep_grid, "arch, lr, noise or loss")->required();
    sweep->add_option("--preset", sweep_preset, "base preset for the fixed axes");
    sweep->add_option("--epochs", sweep_epochs, "epoch budget per grid point");
    sweep->add_option("--seed", sweep_seed, "master seed");
    sweep->add_option("--out", sweep_out, "output directory");
    sweep->add_option("--name", sweep_name, "results basename");

    CLI11_PARSE(app, argc, argv);

    const qdd::HamiltonianSpec tfim{6, 1.0, 1.0, qdd::Boundary::Open};

    if (gen->parsed()) {
        const std::string dir = resolve_out_dir(gen_out);
        ensure_dir(dir);
        gen_vqe.seed = gen_seed;
        qdd::VqeConfig vqe = gen_vqe.config();

        qdd::BuiltDataset built;
        if (!gen_spec_file.empty()) {
            qdd::DatasetSpec spec = spec_from_json(json::parse(qdd::read_file(gen_spec_file)));
            if (gen_seed != 0) spec.seed = gen_seed;
            built.spec = spec;
            built.records = qdd::build_dataset(spec, tfim, vqe, gen_workers);
        } else if (!gen_preset.empty()) {
            built = qdd::build_preset_dataset(gen_preset, gen_seed, tfim, vqe, gen_scale,
                                              gen_workers);
        } else {
            throw CLI::ValidationError("gen", "pass --preset or --spec");
        }

        const std::string name = gen_name.empty() ? built.spec.name : gen_name;
        const std::string path = dir + "/" + name + ".jsonl";
        qdd::write_dataset(built.records, path);

        ordered_json config;
        config["spec"] = spec_to_json(built.spec);
        config["scale"] = gen_scale;
        config["vqe"] = vqe_to_json(vqe);
        config["seed"] = gen_seed;
        write_manifest(dir, name, "gen", config);
        std::cout << path << " (" << built.records.size() << " records)\n";
        return 0;
    }

    if (train_cmd->parsed()) {
        const std::string dir = resolve_out_dir(train_out);
        ensure_dir(dir);
        std::vector<qdd::DatasetRecord> records = qdd::read_dataset(train_dataset);
        qdd::DatasetSpec spec = load_sidecar_spec(train_dataset);
        qdd::Vocabulary vocab = qdd::dataset_vocabulary(spec, records);

        std::vector<int> hidden{700, 700, 700};
        qdd::TrainConfig cfg;
        cfg.seed = train_seed;
        if (!train_preset.empty()) {
            qdd::TrainPreset preset = qdd::train_preset(train_preset);
            hidden = preset.hidden_sizes;
            cfg = qdd::train_config_from_preset(preset, train_seed);
        }
        if (!train_arch.empty()) {
            hidden.clear();
            for (const auto& piece : CLI::detail::split(train_arch, ','))
                hidden.push_back(std::stoi(piece));
        }
        if (train_lr > 0.0) cfg.optimizer.learning_rate = train_lr;
        if (!train_loss.empty())
            cfg.loss = train_loss == "L1" ? qdd::LossKind::L1 : qdd::LossKind::L2;
        if (train_wd >= 0.0) {
            cfg.optimizer.weight_decay = train_wd;
            cfg.optimizer.kind = train_wd > 0.0 ? qdd::OptimizerConfig::Kind::AdamW
                                                : qdd::OptimizerConfig::Kind::Adam;
        }
        if (train_noise_upper >= 0.0) cfg.noise_upper = train_noise_upper;
        if (train_epochs > 0) cfg.epochs = train_epochs;
        if (train_batch > 0) cfg.batch_size = train_batch;

        auto [model, report] = qdd::train(records, vocab, hidden, cfg);

        ordered_json config;
        config["dataset"] = train_dataset;
        config["dataset_digest"] = file_digest(train_dataset);
        config["hidden_sizes"] = hidden;
        config["loss"] = std::string(qdd::loss_name(cfg.loss));
        config["learning_rate"] = cfg.optimizer.learning_rate;
        config["weight_decay"] = cfg.optimizer.weight_decay;
        config["noise_lower"] = cfg.noise_lower;
        config["noise_upper"] = cfg.noise_upper;
        config["epochs"] = cfg.epochs;
        config["batch_size"] = cfg.batch_size;
        config["train_fraction"] = cfg.train_fraction;
        config["seed"] = train_seed;

        const std::string ckpt_path = dir + "/" + train_name + ".ckpt";
        qdd::save_checkpoint(model, vocab, ckpt_path,
                             qdd::to_hex(qdd::fnv1a(config.dump())));

        ordered_json rep;
        rep["final_train_loss"] = report.final_train_loss;
        rep["final_test_loss"] = report.final_test_loss;
        rep["best_test_loss"] = report.best_test_loss;
        rep["best_epoch"] = report.best_epoch;
        rep["epochs_run"] = report.epochs_run;
        rep["stopped_early"] = report.stopped_early;
        rep["train_curve"] = report.train_curve;
        rep["test_curve"] = report.test_curve;
        qdd::write_file(dir + "/" + train_name + ".report.json", rep.dump(2) + "\n");
        write_manifest(dir, train_name, "train", config);
        std::cout << ckpt_path << " best test loss " << report.best_test_loss << "\n";
        return 0;
    }

    if (dream->parsed()) {
        const std::string dir = resolve_out_dir(dream_out);
        ensure_dir(dir);
        auto [model, vocab] = qdd::load_checkpoint(dream_ckpt);

        qdd::DreamConfig cfg;
        cfg.target_energy = dream_target;
        cfg.learning_rate = dream_lr;
        cfg.noise_lower = dream_nl;
        cfg.noise_upper = dream_nu;
        cfg.inner_steps = dream_inner;
        cfg.outer_epochs = dream_outer;

        std::vector<qdd::Circuit> starts;
        if (!dream_circuit.empty()) {
            starts.push_back(qdd::parse_circuit_string(dream_circuit, vocab.n_qubits()));
        } else {
            if (dream_dataset.empty() || dream_n <= 0)
                throw CLI::ValidationError("dream", "pass --circuit or --dataset with --n");
            std::vector<qdd::DatasetRecord> records = qdd::read_dataset(dream_dataset);
            std::vector<std::size_t> idx(records.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            qdd::Rng rng(qdd::derive_seed(dream_seed, "sample"));
            rng.shuffle(idx);
            const std::size_t take =
                std::min<std::size_t>(static_cast<std::size_t>(dream_n), idx.size());
            for (std::size_t i = 0; i < take; ++i)
                starts.push_back(qdd::parse_circuit_string(
                    records[idx[i]].circuit_string, vocab.n_qubits()));
        }

        dream_vqe.seed = dream_seed;
        qdd::VqeConfig vqe = dream_vqe.config();
        std::vector<qdd::DreamTrace> traces(starts.size());
        qdd::parallel_for(static_cast<int>(starts.size()), dream_workers, [&](int i) {
            qdd::DreamConfig run_cfg = cfg;
            run_cfg.seed = qdd::derive_seed(dream_seed, "dream",
                                            static_cast<std::uint64_t>(i));
            qdd::VqeConfig run_vqe = vqe;
            run_vqe.seed = qdd::derive_seed(dream_seed, "dream-vqe",
                                            static_cast<std::uint64_t>(i));
            traces[static_cast<std::size_t>(i)] =
                qdd::dream_run(model, vocab, starts[static_cast<std::size_t>(i)], run_cfg,
                               tfim, run_vqe);
        });

        char suffix[32];
        for (std::size_t i = 0; i < traces.size(); ++i) {
            std::snprintf(suffix, sizeof(suffix), ".trace-%04zu.jsonl", i);
            qdd::write_trace(traces[i], dir + "/" + dream_name + suffix);
        }

        ordered_json config;
        config["checkpoint"] = dream_ckpt;
        config["checkpoint_digest"] = file_digest(dream_ckpt);
        config["target_energy"] = cfg.target_energy;
        config["learning_rate"] = cfg.learning_rate;
        config["noise_lower"] = cfg.noise_lower;
        config["noise_upper"] = cfg.noise_upper;
        config["inner_steps"] = cfg.inner_steps;
        config["outer_epochs"] = cfg.outer_epochs;
        config["n"] = static_cast<int>(traces.size());
        config["seed"] = dream_seed;
        config["vqe"] = vqe_to_json(vqe);
        const std::string digest = qdd::to_hex(qdd::fnv1a(config.dump()));
        qdd::export_report(traces, qdd::kMeanFieldEnergy6,
                           dir + "/" + dream_name + ".report.jsonl",
                           qdd::ReportFormat::Lines, {{"config_digest", digest}});
        qdd::export_report(traces, qdd::kMeanFieldEnergy6,
                           dir + "/" + dream_name + ".report.txt",
                           qdd::ReportFormat::Table, {{"config_digest", digest}});
        write_manifest(dir, dream_name, "dream", config);

        const qdd::CohortMetrics cohort = qdd::cohort_metrics(traces);
        std::cout << traces.size() << " traces; " << cohort.pct_min_below_mf
                  << "% minimum below mean field; lowest minimum "
                  << qdd::format_double(cohort.lowest_min_energy) << "\n";
        return 0;
    }

    if (oracle->parsed()) {
        qdd::HamiltonianSpec h;
        h.n_qubits = oracle_n;
        h.coupling = oracle_j;
        h.field = oracle_g;
        if (oracle_boundary != "open" && oracle_boundary != "periodic")
            throw CLI::ValidationError("oracle", "--boundary must be open or periodic");
        h.boundary = oracle_boundary == "open" ? qdd::Boundary::Open
                                               : qdd::Boundary::Periodic;
        const double energy = oracle_cache.empty()
                                  ? qdd::exact_ground_energy(h)
                                  : qdd::cached_ground_energy(h, oracle_cache);
        std::cout << qdd::format_double(energy) << "\n";
        return 0;
    }

    if (expr->parsed()) {
        if (expr_circuit.empty() == expr_trace.empty())
            throw CLI::ValidationError("expr", "pass exactly one of --circuit/--trace");

        ordered_json out = ordered_json::array();
        auto score_one = [&](const std::string& label, const qdd::Circuit& c) {
            qdd::ExpressibilityScore s =
                qdd::expressibility(c, expr_samples, expr_bins, expr_seed, expr_workers);
            ordered_json j;
            j["circuit"] = label;
            j["kl_divergence"] = s.kl_divergence;
            // Lower KL = closer to Haar = more expressible; the negated value
            // sorts the other way for larger-is-better comparisons.
            j["negated_kl"] = -s.kl_divergence;
            j["samples"] = s.samples;
            j["bins"] = s.bins;
            j["degenerate"] = s.degenerate;
            out.push_back(std::move(j));
        };
        if (!expr_circuit.empty()) {
            score_one(expr_circuit,
                      qdd::parse_circuit_string(expr_circuit, expr_qubits));
        } else {
            qdd::DreamTrace trace = qdd::read_trace(expr_trace);
            for (const qdd::DreamEpoch& e : trace.epochs)
                score_one(e.circuit, qdd::parse_circuit_string(e.circuit, expr_qubits));
        }
        const std::string text = out.dump(2) + "\n";
        std::cout << text;
        if (!expr_out.empty()) {
            ensure_dir(expr_out);
            qdd::write_file(expr_out + "/" + expr_name + ".json", text);
            ordered_json config;
            config["samples"] = expr_samples;
            config["bins"] = expr_bins;
            config["seed"] = expr_seed;
            config["n_qubits"] = expr_qubits;
            write_manifest(expr_out, expr_name, "expr", config);
        }
        return 0;
    }

    if (sweep->parsed()) {
        const std::string dir = resolve_out_dir(sweep_out);
        ensure_dir(dir);
        std::vector<qdd::DatasetRecord> records = qdd::read_dataset(sweep_dataset);
        qdd::DatasetSpec spec = load_sidecar_spec(sweep_dataset);
        qdd::Vocabulary vocab = qdd::dataset_vocabulary(spec, records);
        qdd::TrainPreset base = qdd::train_preset(sweep_preset);

        struct Point {
            std::string label;
            std::vector<int> hidden;
            qdd::TrainConfig cfg;
        };
        std::vector<Point> points;
        auto base_cfg = [&] {
            qdd::TrainConfig cfg = qdd::train_config_from_preset(base, sweep_seed);
            cfg.epochs = sweep_epochs;
            return cfg;
        };
        if (sweep_grid == "arch") {
            for (const auto& hidden : qdd::sweep_architectures()) {
                Point p{std::to_string(hidden[0]) + "x3", hidden, base_cfg()};
                points.push_back(std::move(p));
            }
        } else if (sweep_grid == "lr") {
            for (double lr : qdd::sweep_learning_rates()) {
                Point p{qdd::format_double(lr), base.hidden_sizes, base_cfg()};
                p.cfg.optimizer.learning_rate = lr;
                points.push_back(std::move(p));
            }
        } else if (sweep_grid == "noise") {
            for (double upper : qdd::sweep_noise_upper_bounds()) {
                Point p{qdd::format_double(upper), base.hidden_sizes, base_cfg()};
                p.cfg.noise_upper = upper;
                points.push_back(std::move(p));
            }
        } else if (sweep_grid == "loss") {
            for (qdd::LossKind loss : {qdd::LossKind::L1, qdd::LossKind::L2}) {
                for (double wd : qdd::sweep_weight_decays()) {
                    Point p{std::string(qdd::loss_name(loss)) + "/wd=" +
                                qdd::format_double(wd),
                            base.hidden_sizes, base_cfg()};
                    p.cfg.loss = loss;
                    p.cfg.optimizer.weight_decay = wd;
                    p.cfg.optimizer.kind = wd > 0.0 ? qdd::OptimizerConfig::Kind::AdamW
                                                    : qdd::OptimizerConfig::Kind::Adam;
                    points.push_back(std::move(p));
                }
            }
        } else {
            throw CLI::ValidationError("sweep", "--grid must be arch, lr, noise or loss");
        }

        std::string lines;
        for (const Point& p : points) {
            auto [model, report] = qdd::train(records, vocab, p.hidden, p.cfg);
            ordered_json j;
            j["point"] = p.label;
            j["train_loss"] = report.final_train_loss;
            j["test_loss"] = report.final_test_loss;
            j["best_test_loss"] = report.best_test_loss;
            lines += j.dump();
            lines.push_back('\n');
            std::cout << p.label << " best test loss " << report.best_test_loss << "\n";
        }
        qdd::write_file(dir + "/" + sweep_name + ".jsonl", lines);

        ordered_json config;
        config["dataset"] = sweep_dataset;
        config["dataset_digest"] = file_digest(sweep_dataset);
        config["grid"] = sweep_grid;
        config["preset"] = sweep_preset;
        config["epochs"] = sweep_epochs;
        config["seed"] = sweep_seed;
        write_manifest(dir, sweep_name, "sweep", config);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error& e) {
        ordered_json err;
        err["error"] = {{"type", "usage"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        ordered_json err;
        err["error"] = {{"type", "runtime"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
