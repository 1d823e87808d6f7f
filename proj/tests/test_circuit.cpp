#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "qdd/circuit.hpp"
#include "qdd/dataset.hpp"
#include "qdd/simulator.hpp"

using namespace qdd;

TEST_CASE("parse handles the single-CNOT record", "[circuit]") {
    Circuit c = parse_circuit_string("CNOT=0=1=nop", 4);
    REQUIRE(c.gates().size() == 1);
    const GateSpec& g = c.gates()[0];
    CHECK(g.gate == Gate::Cnot);
    CHECK(g.target == 0);
    REQUIRE(g.control.has_value());
    CHECK(*g.control == 1);
    CHECK(g.param.kind == GateParam::Kind::None);
}

TEST_CASE("parse reads fixed-angle mean field circuits", "[circuit]") {
    const std::string s =
        "RY=0=nop=0.8766386666903253@RY=1=nop=0.587783873106211@"
        "RY=2=nop=0.5334355932535123@RY=3=nop=0.5334355932535123@"
        "RY=4=nop=0.5877838731062109@RY=5=nop=0.8766386666903251";
    Circuit c = parse_circuit_string(s, 6);
    REQUIRE(c.gates().size() == 6);
    for (int q = 0; q < 6; ++q) {
        const GateSpec& g = c.gates()[static_cast<std::size_t>(q)];
        CHECK(g.gate == Gate::Ry);
        CHECK(g.target == q);
        CHECK_FALSE(g.control.has_value());
        REQUIRE(g.param.kind == GateParam::Kind::Fixed);
    }
    CHECK(c.gates()[0].param.value == 0.8766386666903253);
    CHECK(c.gates()[5].param.value == 0.8766386666903251);
    CHECK(serialize_circuit(c) == s);
}

TEST_CASE("parse treats non-float param tokens as named variables", "[circuit]") {
    Circuit c = parse_circuit_string("RY=2=nop=nop0", 6);
    REQUIRE(c.gates()[0].param.kind == GateParam::Kind::Var);
    CHECK(c.gates()[0].param.name == "nop0");
}

TEST_CASE("parse rejects malformed input", "[circuit]") {
    CHECK_THROWS_AS(parse_circuit_string("", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_circuit_string("CNOT=0=1", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_circuit_string("CNOT=0=1=nop=extra", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_circuit_string("FOO=0=nop=nop", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_circuit_string("X=7=nop=nop", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_circuit_string("CNOT=0=9=nop", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_circuit_string("H=0=1=nop", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_circuit_string("CNOT=1=1=nop", 4), std::invalid_argument);
    CHECK_THROWS_AS(parse_circuit_string("X=0=nop=0.5", 4), std::invalid_argument);
}

TEST_CASE("serialize emits canonical records", "[circuit]") {
    Circuit cnot(4, {GateSpec{Gate::Cnot, 0, 1, {}}});
    CHECK(serialize_circuit(cnot) == "CNOT=0=1=nop");

    Circuit mf = mean_field_circuit(MfMode::Relaxed, 6);
    CHECK(serialize_circuit(mf) ==
          "RY=0=nop=nop0@RY=1=nop=nop1@RY=2=nop=nop2@RY=3=nop=nop3@"
          "RY=4=nop=nop4@RY=5=nop=nop5");

    CHECK_THROWS_AS(serialize_circuit(Circuit(4, {})), std::invalid_argument);
}

TEST_CASE("round trip parse(serialize(c)) is the identity", "[circuit]") {
    Rng rng(20240601);
    for (int trial = 0; trial < 300; ++trial) {
        Circuit c = testing::random_test_circuit(rng);
        Circuit back = parse_circuit_string(serialize_circuit(c), c.n_qubits());
        REQUIRE(back == c);
    }
}

TEST_CASE("moment count of disjoint layers is one", "[circuit]") {
    Circuit mf = mean_field_circuit(MfMode::Relaxed, 6);
    CHECK(moment_count(mf) == 1);
}

TEST_CASE("overlapping support forces a new moment", "[circuit]") {
    Circuit c(3, {GateSpec{Gate::Cnot, 0, 1, {}}, GateSpec{Gate::Cnot, 1, 2, {}}});
    CHECK(moment_count(c) == 2);
}

TEST_CASE("moment count matches the independent layering oracle", "[circuit]") {
    // Mean-field layer plus one more rotation on qubit 0.
    std::vector<GateSpec> gates = mean_field_circuit(MfMode::Relaxed, 6).gates();
    gates.push_back(GateSpec{Gate::Rx, 0, std::nullopt, GateParam::var("extra")});
    Circuit c(6, gates);
    const int expected = testing::greedy_layering_oracle(c);
    CHECK(expected == 2);
    CHECK(moment_count(c) == expected);

    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        Circuit r = testing::random_test_circuit(rng);
        CHECK(moment_count(r) == testing::greedy_layering_oracle(r));
    }
}

TEST_CASE("moment count is bounded by the non-NOP gate count", "[circuit]") {
    Rng rng(4242);
    for (int trial = 0; trial < 100; ++trial) {
        Circuit c = testing::random_test_circuit(rng);
        CHECK(moment_count(c) <= static_cast<int>(strip_nops(c).gates().size()));
    }
}

TEST_CASE("validate reports pool and connectivity violations", "[circuit]") {
    GatePool nn1{{Gate::Ry, Gate::Cnot}, Connectivity::nearest_neighbor(1)};
    Circuit far(6, {GateSpec{Gate::Cnot, 0, 3, {}}});
    auto violations = validate(far, nn1);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].gate_index == 0);

    GatePool any{{Gate::Ry, Gate::Cnot}, Connectivity::all_to_all()};
    Circuit wide(6, {GateSpec{Gate::Cnot, 0, 5, {}}});
    CHECK(validate(wide, any).empty());

    Circuit h(6, {GateSpec{Gate::H, 0, std::nullopt, {}}});
    REQUIRE(validate(h, nn1).size() == 1);
}

TEST_CASE("NOP is always pool-valid", "[circuit]") {
    GatePool pool{{Gate::Ry}, Connectivity::nearest_neighbor(1)};
    Circuit c(3, {GateSpec{Gate::Nop, 2, std::nullopt, {}}});
    CHECK(validate(c, pool).empty());
}

TEST_CASE("circuits passing validate simulate cleanly", "[circuit]") {
    GatePool pool = GatePool{{Gate::X, Gate::H, Gate::Ry, Gate::Cnot, Gate::Crz},
                             Connectivity::all_to_all()};
    Rng rng(99);
    int checked = 0;
    for (int trial = 0; trial < 120; ++trial) {
        testing::GenOptions opt;
        opt.gates = pool.allowed;
        Circuit c = testing::random_test_circuit(rng, opt);
        if (!validate(c, pool).empty()) continue;
        StateVector psi = apply_circuit(c, testing::random_binding(c, rng));
        CHECK(testing::close(psi.norm(), 1.0, 1e-10));
        ++checked;
    }
    REQUIRE(checked > 50);
}
