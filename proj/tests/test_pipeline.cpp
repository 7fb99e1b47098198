#include <gtest/gtest.h>

#include <set>

#include "pbqc/grover.hpp"
#include "pbqc/oracle.hpp"
#include "pbqc/pipeline.hpp"
#include "pbqc/verify.hpp"

using namespace pbqc;
using qotp::PadKey;

namespace {

CircuitSpec one_segment(int n, SegmentTag tag, std::vector<GateOp> gates) {
    CircuitSpec s;
    s.num_qubits = n;
    s.segments.push_back({tag, std::move(gates)});
    return s;
}

StateVector plaintext(const CircuitSpec &spec, StateVector s) {
    simulate_plaintext(s, spec.all_gates());
    return s;
}

PipelineState state_with(StateVector plain, std::vector<PadKey> keys, std::uint64_t seed = 1) {
    PipelineState st;
    st.reg = std::move(plain);
    for (std::size_t q = 0; q < keys.size(); ++q) qotp::encrypt(st.reg, static_cast<int>(q), keys[q]);
    st.keys = std::move(keys);
    st.seed = seed;
    return st;
}

}  // namespace

TEST(PublicSegment, HadamardsOnZeroKeys) {
    auto st = state_with(StateVector(2), {PadKey(), PadKey()});
    run_public_segment(st, {{Gate::h(), {0}}, {Gate::h(), {1}}});
    EXPECT_EQ(st.keys, (std::vector<PadKey>{PadKey(), PadKey()}));
    StateVector plus(2);
    apply_gate(plus, Gate::h(), {0});
    apply_gate(plus, Gate::h(), {1});
    EXPECT_NEAR(fidelity_up_to_phase(decrypt_register(st.reg, st.keys), plus), 1.0, 1e-12);
}

TEST(PublicSegment, HadamardSwapsKey) {
    auto st = state_with(StateVector(1), {PadKey(1, 0)});
    run_public_segment(st, {{Gate::h(), {0}}});
    EXPECT_EQ(st.keys[0], PadKey(0, 1));
}

TEST(PublicSegment, TGateUnderEveryKey) {
    Rng rng(12);
    StateVector psi = random_state(1, rng);
    StateVector expect = psi;
    apply_gate(expect, Gate::t(), {0});
    for (int k = 0; k < 4; ++k) {
        auto st = state_with(psi, {PadKey(k & 1, k >> 1)}, static_cast<std::uint64_t>(k));
        run_public_segment(st, {{Gate::t(), {0}}});
        EXPECT_EQ(st.reg.num_qubits(), 1);
        EXPECT_EQ(st.tally.t_gadgets, 1);
        EXPECT_GE(fidelity_up_to_phase(decrypt_register(st.reg, st.keys), expect), 1.0 - 1e-9);
    }
}

TEST(PublicSegment, RejectsRotation) {
    auto st = state_with(StateVector(1), {PadKey()});
    EXPECT_THROW(run_public_segment(st, {{Gate::rz(Angle8(3)), {0}}}), std::invalid_argument);
}

TEST(SensitiveSegment, HadamardOnPlaintextKeys) {
    auto st = state_with(StateVector(1), {PadKey()});
    run_sensitive_segment(st, {{Gate::h(), {0}}});
    EXPECT_GE(fidelity_up_to_phase(decrypt_register(st.reg, st.keys), prepare_plus_theta(Angle8(0))), 1.0 - 1e-9);
    EXPECT_EQ(st.transcripts.size(), 1u);
    EXPECT_GT(st.tally.cluster_qubits, 0);
}

TEST(SensitiveSegment, GroverOracleOnPlusPlus) {
    const std::vector<GateOp> oracle_gates = {{Gate::x(), {0}}, {Gate::x(), {1}}, {Gate::cz(), {0, 1}},
                                              {Gate::x(), {0}}, {Gate::x(), {1}}};
    StateVector plus(2);
    apply_gate(plus, Gate::h(), {0});
    apply_gate(plus, Gate::h(), {1});
    Eigen::VectorXcd expect = oracle::circuit_unitary(2, oracle_gates) * oracle::vec(plus);
    std::set<std::vector<int>> keysets;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng kr(seed, "keys");
        auto st = state_with(plus, {PadKey::random(kr), PadKey::random(kr)}, seed);
        run_sensitive_segment(st, oracle_gates);
        EXPECT_EQ(st.tally.cluster_qubits, 12);
        EXPECT_EQ(st.tally.measurement_layers, 5);
        EXPECT_GE(oracle::fidelity(expect, decrypt_register(st.reg, st.keys)), 1.0 - 1e-9);
        keysets.insert({st.keys[0].a, st.keys[0].b, st.keys[1].a, st.keys[1].b});
    }
    EXPECT_GT(keysets.size(), 1u);
}

TEST(SensitiveSegment, UntouchedQubitsStayPut) {
    Rng rng(40);
    StateVector psi = random_state(3, rng);
    auto st = state_with(psi, {PadKey(1, 0), PadKey(0, 1), PadKey(1, 1)});
    run_sensitive_segment(st, {{Gate::rz(Angle8(3)), {2}}});
    EXPECT_EQ(st.keys[0], PadKey(1, 0));
    EXPECT_EQ(st.keys[1], PadKey(0, 1));
    StateVector expect = psi;
    apply_gate(expect, Gate::rz(Angle8(3)), {2});
    EXPECT_GE(fidelity_up_to_phase(decrypt_register(st.reg, st.keys), expect), 1.0 - 1e-9);
}

TEST(Pipeline, SinglePublicSegmentIsPureQhe) {
    auto spec = one_segment(2, SegmentTag::public_segment, {{Gate::h(), {0}}, {Gate::cx(), {0, 1}}, {Gate::t(), {1}}});
    auto res = run_pipeline(spec, StateVector(2), 5);
    EXPECT_GE(fidelity_up_to_phase(res.final_state, plaintext(spec, StateVector(2))), 1.0 - 1e-9);
    EXPECT_EQ(res.report.cluster_qubits, 0);
    EXPECT_EQ(res.report.measurement_depth, 0);
    ASSERT_EQ(res.transcripts.size(), 1u);
    EXPECT_EQ(res.transcripts[0].segment, "public");
}

TEST(Pipeline, SingleSensitiveSegmentIsPureProtocol) {
    auto spec = one_segment(2, SegmentTag::sensitive_segment, {{Gate::h(), {0}}, {Gate::cz(), {0, 1}}, {Gate::t(), {1}}});
    Rng rng(9);
    StateVector psi = random_state(2, rng);
    auto res = run_pipeline(spec, psi, 5);
    EXPECT_GE(fidelity_up_to_phase(res.final_state, plaintext(spec, psi)), 1.0 - 1e-9);
    ASSERT_EQ(res.transcripts.size(), 1u);
    EXPECT_EQ(res.transcripts[0].segment, "sensitive");
}

TEST(Pipeline, AlternatingSegments) {
    CircuitSpec spec;
    spec.num_qubits = 2;
    spec.segments = {{SegmentTag::public_segment, {{Gate::h(), {0}}, {Gate::t(), {0}}}},
                     {SegmentTag::sensitive_segment, {{Gate::cz(), {0, 1}}, {Gate::rz(Angle8(5)), {1}}}},
                     {SegmentTag::public_segment, {{Gate::cx(), {1, 0}}, {Gate::s(), {1}}, {Gate::h(), {1}}}}};
    Rng rng(13);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        StateVector psi = random_state(2, rng);
        auto check = verify::check_composition(spec, psi, seed);
        EXPECT_LT(check.final_deviation, 1e-9);
        EXPECT_LT(check.boundary_deviation, 1e-9);
        EXPECT_EQ(check.boundaries, 3u);
    }
}

TEST(Pipeline, RandomSpecs) {
    Rng rng(99);
    for (int i = 0; i < 30; ++i) {
        CircuitSpec spec = verify::random_spec(rng);
        StateVector psi = random_state(2, rng);
        auto res = run_pipeline(spec, psi, static_cast<std::uint64_t>(i));
        EXPECT_GE(fidelity_up_to_phase(res.final_state, plaintext(spec, psi)), 1.0 - 1e-9) << spec.to_text();
    }
}

TEST(Pipeline, DecryptedResultIsSeedInvariant) {
    auto spec = grover2_spec();
    auto ref = run_pipeline(spec, StateVector(2), 0).final_state;
    std::set<std::string> key_traces;
    for (std::uint64_t seed = 1; seed < 20; ++seed) {
        auto res = run_pipeline(spec, StateVector(2), seed);
        EXPECT_GE(fidelity_up_to_phase(res.final_state, ref), 1.0 - 1e-9);
        std::string trace;
        for (const auto &snap : res.key_history)
            for (const auto &k : snap.keys) trace += char('0' + k.a) + std::string(1, char('0' + k.b));
        key_traces.insert(trace);
    }
    EXPECT_GT(key_traces.size(), 1u);
}

TEST(Pipeline, InitialStateWidthChecked) {
    EXPECT_THROW(run_pipeline(grover2_spec(), StateVector(3), 0), std::invalid_argument);
}

TEST(Parser, RoundTripsGroverSpec) {
    auto spec = grover2_spec();
    auto back = parse_circuit_spec(spec.to_text());
    EXPECT_EQ(back.to_text(), spec.to_text());
}

TEST(Parser, CommentsCaseAndRotations) {
    auto spec = parse_circuit_spec("# demo\nqubits 2\nsegment sensitive\nrz(3) 1  # angle\ncnot 0 1\n\nsegment public\nt 0\n");
    ASSERT_EQ(spec.segments.size(), 2u);
    EXPECT_EQ(spec.segments[0].gates[0].gate, Gate::rz(Angle8(3)));
    EXPECT_EQ(spec.segments[0].gates[1].gate, Gate::cx());
    EXPECT_EQ(spec.segments[1].gates[0].gate, Gate::t());
}

TEST(Parser, LineNumberedErrors) {
    auto line_of = [](const std::string &text) {
        try {
            parse_circuit_spec(text);
        } catch (const ParseError &e) {
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of("qubits 2\nsegment public\nH 0\nFOO 1\n"), 4);
    EXPECT_EQ(line_of("qubits 2\nsegment public\nH 2\n"), 3);
    EXPECT_EQ(line_of("qubits 2\nsegment public\nCZ 0\n"), 3);
    EXPECT_EQ(line_of("qubits 2\nsegment public\nRZ(2) 0\n"), 3);
    EXPECT_EQ(line_of("qubits 2\nsegment hidden\n"), 2);
    EXPECT_EQ(line_of("segment public\n"), 1);
    EXPECT_EQ(line_of("qubits 1\nH 0\n"), 2);
    EXPECT_EQ(line_of("# only a comment\n"), 1);
}

TEST(Parser, CapacityError) {
    EXPECT_THROW(parse_circuit_spec("qubits 17\nsegment public\nH 0\n"), CapacityError);
}
