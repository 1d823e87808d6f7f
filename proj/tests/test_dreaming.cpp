#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "helpers.hpp"
#include "qdd/dreaming.hpp"

using namespace qdd;

namespace {

Vocabulary two_qubit_vocab() {
    GatePool pool{{Gate::Ry, Gate::Rx, Gate::Cnot}, Connectivity::all_to_all()};
    return build_vocabulary(pool, 2, {}, 4);
}

VqeConfig light_vqe() {
    VqeConfig cfg;
    cfg.restarts = 1;
    cfg.max_iterations = 40;
    return cfg;
}

MlpModel constant_model(const Vocabulary& v, double output) {
    MlpModel m = init_model({v.vector_length(), 4, 1}, 0, v.fingerprint());
    for (auto& w : m.weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : m.biases) std::fill(b.begin(), b.end(), 0.0);
    m.biases.back()[0] = output;
    return m;
}

}  // namespace

TEST_CASE("dreaming loss is the squared distance to the target", "[dreaming]") {
    CHECK(dreaming_loss(-8.0, -8.0) == 0.0);
    CHECK(dreaming_loss(-6.0, -8.0) == 4.0);

    // d(loss)/d(prediction) = 2 (prediction - target).
    const double pred = -5.5, target = -8.0, step = 1e-6;
    const double fd =
        (dreaming_loss(pred + step, target) - dreaming_loss(pred - step, target)) /
        (2 * step);
    CHECK(testing::close_rel(2 * (pred - target), fd, 1e-6));
}

TEST_CASE("zero learning rate leaves the vector unchanged", "[dreaming]") {
    Vocabulary v = two_qubit_vocab();
    MlpModel m = init_model({v.vector_length(), 8, 1}, 3, v.fingerprint());
    MultiHotVector x = encode(parse_circuit_string("RY=0=nop=nop@CNOT=1=0=nop", 2), v);
    DreamConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK(dream_step(m, x, cfg).values == x.values);
}

TEST_CASE("a constant model produces zero input gradient", "[dreaming]") {
    Vocabulary v = two_qubit_vocab();
    MlpModel m = constant_model(v, -5.0);
    MultiHotVector x = encode(parse_circuit_string("RY=0=nop=nop", 2), v);
    DreamConfig cfg;
    cfg.learning_rate = 0.05;
    CHECK(dream_step(m, x, cfg).values == x.values);
}

TEST_CASE("dream_step rejects foreign vectors", "[dreaming]") {
    Vocabulary v = two_qubit_vocab();
    MlpModel m = init_model({v.vector_length(), 8, 1}, 3, v.fingerprint());
    MultiHotVector x = encode(parse_circuit_string("RY=0=nop=nop", 2), v);
    x.vocab_fingerprint ^= 0xff;
    CHECK_THROWS_AS(dream_step(m, x, DreamConfig{}), std::invalid_argument);
}

TEST_CASE("one small enough step decreases the dreaming loss", "[dreaming]") {
    Vocabulary v = two_qubit_vocab();
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        MlpModel m = init_model({v.vector_length(), 10, 1}, rng.next_u64(),
                                v.fingerprint());
        MultiHotVector x = encode(parse_circuit_string("RY=0=nop=nop@RX=1=nop=nop", 2), v);
        x = inject_noise(x, 0.1, 0.9, rng.next_u64());
        DreamConfig cfg;
        cfg.target_energy = -8.0;
        const double before = dreaming_loss(forward(m, x), cfg.target_energy);
        if (before == 0.0) continue;
        cfg.learning_rate = 0.5;
        bool decreased = false;
        for (int halving = 0; halving < 24; ++halving) {
            MultiHotVector moved = dream_step(m, x, cfg);
            if (moved.values == x.values) {  // zero gradient: stationary input
                decreased = true;
                break;
            }
            const double after = dreaming_loss(forward(m, moved), cfg.target_energy);
            if (after < before) {
                decreased = true;
                break;
            }
            cfg.learning_rate /= 2;
        }
        CHECK(decreased);
    }
}

TEST_CASE("a model that already predicts the target stops at epoch zero", "[dreaming]") {
    Vocabulary v = two_qubit_vocab();
    DreamConfig cfg;
    cfg.target_energy = -8.0;
    MlpModel m = constant_model(v, cfg.target_energy);
    HamiltonianSpec h{2, 1.0, 1.0, Boundary::Open};
    Circuit c0 = parse_circuit_string("RY=0=nop=nop@CNOT=1=0=nop", 2);
    DreamTrace trace = dream_run(m, v, c0, cfg, h, light_vqe());
    REQUIRE(trace.epochs.size() == 1);
    CHECK(trace.epochs[0].circuit == serialize_circuit(c0));
    CHECK(trace.epochs[0].dreaming_loss == 0.0);
}

TEST_CASE("dreaming never touches the weights", "[dreaming]") {
    Vocabulary v = two_qubit_vocab();
    MlpModel m = init_model({v.vector_length(), 12, 1}, 31, v.fingerprint());
    const std::uint64_t checksum = m.checksum();
    HamiltonianSpec h{2, 1.0, 1.0, Boundary::Open};
    DreamConfig cfg;
    cfg.outer_epochs = 3;
    cfg.inner_steps = 10;
    cfg.seed = 5;
    dream_run(m, v, parse_circuit_string("RY=0=nop=nop@RX=1=nop=nop", 2), cfg, h,
              light_vqe());
    CHECK(m.checksum() == checksum);
}

TEST_CASE("vanishing learning rate makes the dream stagnate", "[dreaming]") {
    Vocabulary v = two_qubit_vocab();
    MlpModel m = init_model({v.vector_length(), 12, 1}, 32, v.fingerprint());
    HamiltonianSpec h{2, 1.0, 1.0, Boundary::Open};
    DreamConfig cfg;
    cfg.learning_rate = 1e-12;
    cfg.outer_epochs = 5;
    cfg.inner_steps = 25;
    cfg.seed = 6;
    Circuit c0 = parse_circuit_string("RY=0=nop=nop@CNOT=1=0=nop", 2);
    DreamTrace trace = dream_run(m, v, c0, cfg, h, light_vqe());
    REQUIRE(trace.epochs.size() == 6u);  // epoch 0 plus five stagnant epochs
    for (const DreamEpoch& e : trace.epochs)
        CHECK(e.circuit == serialize_circuit(c0));
}

TEST_CASE("recorded losses satisfy the defining identity", "[dreaming]") {
    Vocabulary v = two_qubit_vocab();
    MlpModel m = init_model({v.vector_length(), 12, 1}, 33, v.fingerprint());
    HamiltonianSpec h{2, 1.0, 1.0, Boundary::Open};
    DreamConfig cfg;
    cfg.outer_epochs = 4;
    cfg.inner_steps = 15;
    cfg.seed = 7;
    DreamTrace trace = dream_run(m, v, parse_circuit_string("RY=0=nop=nop@RX=1=nop=nop", 2),
                                 cfg, h, light_vqe());
    REQUIRE(trace.epochs.size() >= 2u);
    for (std::size_t i = 0; i < trace.epochs.size(); ++i) {
        const DreamEpoch& e = trace.epochs[i];
        CHECK(e.epoch == static_cast<int>(i));
        CHECK(e.dreaming_loss == dreaming_loss(e.predicted, cfg.target_energy));
        Circuit c = parse_circuit_string(e.circuit, 2);
        CHECK(validate(c, v.pool()).empty());
    }
}

TEST_CASE("dream runs are reproducible", "[dreaming]") {
    Vocabulary v = two_qubit_vocab();
    MlpModel m = init_model({v.vector_length(), 12, 1}, 34, v.fingerprint());
    HamiltonianSpec h{2, 1.0, 1.0, Boundary::Open};
    DreamConfig cfg;
    cfg.outer_epochs = 3;
    cfg.inner_steps = 10;
    cfg.seed = 99;
    Circuit c0 = parse_circuit_string("RY=0=nop=nop@CNOT=1=0=nop", 2);
    DreamTrace a = dream_run(m, v, c0, cfg, h, light_vqe());
    DreamTrace b = dream_run(m, v, c0, cfg, h, light_vqe());
    REQUIRE(a.epochs.size() == b.epochs.size());
    for (std::size_t i = 0; i < a.epochs.size(); ++i) {
        CHECK(a.epochs[i].circuit == b.epochs[i].circuit);
        CHECK(a.epochs[i].predicted == b.epochs[i].predicted);
        CHECK(a.epochs[i].true_energy == b.epochs[i].true_energy);
    }
}

TEST_CASE("trace files round trip", "[dreaming]") {
    Vocabulary v = two_qubit_vocab();
    MlpModel m = init_model({v.vector_length(), 12, 1}, 35, v.fingerprint());
    HamiltonianSpec h{2, 1.0, 1.0, Boundary::Open};
    DreamConfig cfg;
    cfg.outer_epochs = 2;
    cfg.inner_steps = 8;
    DreamTrace trace = dream_run(m, v, parse_circuit_string("RY=0=nop=nop", 2), cfg, h,
                                 light_vqe());
    const std::string path =
        (std::filesystem::temp_directory_path() / "qdd_trace_test.jsonl").string();
    write_trace(trace, path);
    DreamTrace back = read_trace(path);
    REQUIRE(back.epochs.size() == trace.epochs.size());
    for (std::size_t i = 0; i < trace.epochs.size(); ++i) {
        CHECK(back.epochs[i].circuit == trace.epochs[i].circuit);
        CHECK(back.epochs[i].predicted == trace.epochs[i].predicted);
        CHECK(back.epochs[i].dreaming_loss == trace.epochs[i].dreaming_loss);
        CHECK(back.epochs[i].true_energy == trace.epochs[i].true_energy);
    }
    std::filesystem::remove(path);
}
