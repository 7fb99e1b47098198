#include <gtest/gtest.h>

#include <set>

#include "pbqc/oracle.hpp"
#include "pbqc/protocol.hpp"

using namespace pbqc;
using namespace pbqc::protocol;
using mbqc::JChain;
using mbqc::WirePattern;
using qotp::PadKey;

namespace {

WirePattern single_wire(JChain c) {
    const JChain w[] = {std::move(c)};
    return mbqc::build_wire_patterns(w, {});
}

StateVector plaintext(StateVector s, const std::vector<GateOp> &gates) {
    for (const auto &g : gates) apply_gate(s, g);
    return s;
}

template <class T>
std::size_t count_of(const std::vector<Message> &msgs) {
    return static_cast<std::size_t>(
        std::count_if(msgs.begin(), msgs.end(), [](const Message &m) { return std::holds_alternative<T>(m.body); }));
}

}  // namespace

TEST(ClientPrepare, OneRowTwoColumnsCounts) {
    auto wp = single_wire({Angle8(0)});
    ASSERT_EQ(wp.graph.columns() - 1, 2);
    ClientState c(wp.pattern, {PadKey(0, 0)}, ClientSecrets::zero(wp.pattern));
    auto msgs = client_prepare(c, StateVector(1));
    std::size_t aux = 0, out = 0;
    for (const auto &m : msgs) {
        if (auto *q = std::get_if<QubitTransfer>(&m.body)) (q->role == QubitRole::aux ? aux : out)++;
    }
    EXPECT_EQ(aux, 1u);
    EXPECT_EQ(out, 1u);
    EXPECT_EQ(count_of<InputTransfer>(msgs), 1u);
}

TEST(ClientPrepare, ThetaUniformChiSquare) {
    auto wp = single_wire({Angle8(0), Angle8(3)});
    Rng rng(2024);
    std::map<mbqc::NodeId, std::array<int, 8>> hist;
    std::map<mbqc::NodeId, int> r_ones;
    const int runs = 8000;
    for (int i = 0; i < runs; ++i) {
        auto s = ClientSecrets::sample(wp.pattern, rng);
        for (const auto &[n, t] : s.theta) ++hist[n][static_cast<std::size_t>(t.k())];
        for (const auto &[n, r] : s.r) r_ones[n] += r;
    }
    ASSERT_EQ(hist.size(), 2u);
    for (const auto &[n, h] : hist) {
        double chi2 = 0, e = runs / 8.0;
        for (int v : h) chi2 += (v - e) * (v - e) / e;
        EXPECT_LT(chi2, 24.322) << n.to_string();  // 7 dof, p = 0.001
    }
    for (const auto &[n, ones] : r_ones) {
        double e = runs / 2.0, chi2 = 2 * (ones - e) * (ones - e) / e;
        EXPECT_LT(chi2, 10.828) << n.to_string();  // 1 dof, p = 0.001
    }
}

TEST(ClientPrepare, InputTransferIsPadded) {
    auto wp = single_wire({Angle8(0)});
    ClientState c(wp.pattern, {PadKey(1, 1)}, ClientSecrets::zero(wp.pattern));
    auto msgs = client_prepare(c, StateVector(1));
    for (const auto &m : msgs) {
        if (auto *in = std::get_if<InputTransfer>(&m.body)) {
            ASSERT_TRUE(in->state);
            EXPECT_NEAR(fidelity_up_to_phase(*in->state, StateVector::basis(1, 1)), 1.0, 1e-12);
        }
    }
}

TEST(ClientPrepare, RejectsWrongInputSize) {
    auto wp = single_wire({Angle8(0)});
    ClientState c(wp.pattern, {PadKey(0, 0)}, ClientSecrets::zero(wp.pattern));
    EXPECT_THROW(client_prepare(c, StateVector(2)), std::invalid_argument);
    EXPECT_THROW(ClientState(wp.pattern, {PadKey(), PadKey()}, ClientSecrets::zero(wp.pattern)), std::invalid_argument);
}

TEST(ServerEntangle, OneRowSingleCx) {
    mbqc::ClusterGraph g(2, 1, mbqc::InputColumn::encrypted);
    g.add_edge({0, 0}, {1, 0}, mbqc::EdgeKind::cx_first_column);
    int cx = 0, cz = 0;
    for (const auto &e : g.edges()) (e.kind == mbqc::EdgeKind::cz ? cz : cx)++;
    EXPECT_EQ(cx, 1);
    EXPECT_EQ(cz, 0);
    ServerState s(g, Rng(1));
    s.receive({Party::client, InputTransfer{1, StateVector(1)}});
    s.receive({Party::client, QubitTransfer{{1, 0}, QubitRole::output, prepare_plus_theta(Angle8{})}});
    server_entangle(s);
    s.materialize_all();
    EXPECT_EQ(s.edges_applied(), 1u);
}

TEST(ServerEntangle, MissingQubitRejected) {
    auto wp = single_wire({Angle8(0)});
    ServerState s(wp.graph, Rng(1));
    s.receive({Party::client, InputTransfer{1, StateVector(1)}});
    EXPECT_THROW(server_entangle(s), ProtocolError);
}

TEST(ServerEntangle, CiphertextInjection) {
    // X^a Z^b|psi> (q0) and |+_theta> (q1), CX q1 -> q0, measure q0 -> m:
    // q1 holds Rz(theta) X^(m^a) Z^b |psi>.
    Rng rng(55);
    for (int trial = 0; trial < 5; ++trial) {
        StateVector psi = random_state(1, rng);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int t = 0; t < 8; ++t)
                    for (int m = 0; m < 2; ++m) {
                        StateVector reg = psi;
                        qotp::encrypt(reg, 0, {a, b});
                        reg.append(prepare_plus_theta(Angle8(t)));
                        reg.apply_cx(1, 0);
                        reg.project(0, MeasurementBasis::computational(), m);
                        rotate_to_zero(reg, 0, MeasurementBasis::computational(), m);
                        reg.release(0);
                        StateVector expect = psi;
                        qotp::encrypt(expect, 0, {m ^ a, b});
                        apply_gate(expect, Gate::rz(Angle8(t)), {0});
                        EXPECT_GE(fidelity_up_to_phase(reg, expect), 1.0 - 1e-12);
                    }
    }
}

TEST(ServerEntangle, AllEdgesAppliedBeforeOutput) {
    auto wp = mbqc::build_grover_oracle_pattern();
    Transcript t;
    Channel ch(t);
    Rng crng(3);
    ClientState c(wp.pattern, {PadKey(1, 0), PadKey(0, 1)}, ClientSecrets::sample(wp.pattern, crng));
    ServerState s(wp.graph, Rng(4));
    for (auto &m : client_prepare(c, StateVector(2))) ch.send(std::move(m));
    while (ch.pending(Party::server)) s.receive(ch.receive(Party::server));
    server_entangle(s);
    run_interaction(c, s, ch);
    auto fin = finalize_output(c, s, ch);
    (void)fin;
    EXPECT_EQ(s.edges_applied(), wp.graph.edges().size());
}

TEST(Interaction, IdentityCaseDeltaEqualsPhi) {
    auto wp = single_wire({Angle8(3), Angle8(5)});
    ClientState c(wp.pattern, {PadKey(0, 0)}, ClientSecrets::zero(wp.pattern));
    c.receive({{0, 0}, 0});
    Delta d = c.next_delta();
    EXPECT_EQ(d.node, (mbqc::NodeId{1, 0}));
    EXPECT_EQ(d.delta, wp.pattern.at({1, 0}).angle);
}

TEST(Interaction, FirstColumnFoldsInputKeyIntoSign) {
    auto wp = single_wire({Angle8(7)});  // phi = 1
    ASSERT_EQ(wp.pattern.at({1, 0}).angle.k(), 1);
    ClientState c(wp.pattern, {PadKey(1, 0)}, ClientSecrets::zero(wp.pattern));
    c.receive({{0, 0}, 0});
    EXPECT_EQ(c.corrected_angle({1, 0}).k(), 7);
    ClientState d(wp.pattern, {PadKey(0, 1)}, ClientSecrets::zero(wp.pattern));
    d.receive({{0, 0}, 0});
    EXPECT_EQ(d.corrected_angle({1, 0}).k(), 5);
}

TEST(Interaction, DeltaUniformOverHiddenPairs) {
    for (int phi = 0; phi < 8; ++phi) {
        std::array<int, 8> hits{};
        for (int t = 0; t < 8; ++t)
            for (int r = 0; r < 2; ++r) ++hits[static_cast<std::size_t>((Angle8(phi) + Angle8(t)).plus_pi_times(r).k())];
        for (int h : hits) EXPECT_EQ(h, 2);
    }
}

TEST(Interaction, HadamardFiftySeeds) {
    auto wp = single_wire(mbqc::decompose_to_j_chain(Gate::h()));
    Rng states(17);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        StateVector psi = random_state(1, states);
        Rng crng(seed, "client");
        auto res = run_session(wp, psi, crng, Rng(seed, "server"));
        auto out = decrypt_output(res.output, res.keys);
        EXPECT_GE(fidelity_up_to_phase(out, plaintext(psi, {{Gate::h(), {0}}})), 1.0 - 1e-9) << seed;
    }
}

TEST(Interaction, TwoRowCzFiftySeeds) {
    const std::vector<GateOp> gates = {{Gate::cz(), {0, 1}}};
    auto wp = mbqc::build_wire_patterns(mbqc::compile_circuit(2, gates));
    Rng states(18);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        StateVector psi = random_state(2, states);
        Rng crng(seed, "client");
        auto res = run_session(wp, psi, crng, Rng(seed, "server"));
        EXPECT_GE(fidelity_up_to_phase(decrypt_output(res.output, res.keys), plaintext(psi, gates)), 1.0 - 1e-9);
    }
}

TEST(Interaction, OutOfOrderAndDoubleMeasurementRejected) {
    auto wp = single_wire({Angle8(0), Angle8(0)});
    Transcript t;
    Channel ch(t);
    ClientState c(wp.pattern, {PadKey(0, 0)}, ClientSecrets::zero(wp.pattern));
    ServerState s(wp.graph, Rng(9));
    for (auto &m : client_prepare(c, StateVector(1))) s.receive(m);
    EXPECT_THROW(s.measure({{1, 0}, Angle8(0)}), ProtocolError);
    server_entangle(s);
    for (const auto &o : s.measure_input_column()) c.receive(o);
    EXPECT_THROW(s.measure_input_column(), ProtocolError);
    EXPECT_THROW(s.measure({{2, 0}, Angle8(0)}), ProtocolError);
    auto o = s.measure(c.next_delta());
    EXPECT_THROW(s.measure({{1, 0}, Angle8(0)}), ProtocolError);
    EXPECT_THROW(c.receive({{2, 0}, 0}), ProtocolError);
    c.receive(o);
    EXPECT_THROW(c.receive(o), ProtocolError);
}

TEST(Interaction, WrongMessageTypeRejected) {
    Transcript t;
    Channel ch(t);
    ch.send({Party::client, Delta{{1, 0}, Angle8(0)}});
    EXPECT_THROW(ch.receive_as<Outcome>(Party::server), ProtocolError);
}

TEST(Finalize, AllZeroOutcomesGivePlaintext) {
    auto wp = single_wire({Angle8(0), Angle8(4)});
    std::map<mbqc::NodeId, int> zeros;
    for (const auto &c : wp.pattern.commands())
        if (c.role != NodeRole::output) zeros[c.node] = 0;
    Rng states(3);
    StateVector psi = random_state(1, states);
    auto res = run_session(wp, psi, {PadKey(0, 0)}, ClientSecrets::zero(wp.pattern), Rng(0), {zeros});
    ASSERT_EQ(res.keys.size(), 1u);
    EXPECT_EQ(res.keys[0], PadKey(0, 0));
    EXPECT_GE(fidelity_up_to_phase(res.output, plaintext(psi, {{Gate::x(), {0}}})), 1.0 - 1e-9);
}

TEST(Finalize, KeysVaryButDecryptedStateDoesNot) {
    auto wp = mbqc::build_grover_oracle_pattern();
    StateVector plus(2);
    apply_gate(plus, Gate::h(), {0});
    apply_gate(plus, Gate::h(), {1});
    const std::vector<GateOp> oracle_gates = {{Gate::x(), {0}}, {Gate::x(), {1}}, {Gate::cz(), {0, 1}},
                                              {Gate::x(), {0}}, {Gate::x(), {1}}};
    StateVector expect = plaintext(plus, oracle_gates);
    std::set<std::vector<int>> seen;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng crng(seed, "client");
        auto res = run_session(wp, plus, crng, Rng(seed, "server"));
        seen.insert({res.keys[0].a, res.keys[0].b, res.keys[1].a, res.keys[1].b});
        EXPECT_GE(fidelity_up_to_phase(decrypt_output(res.output, res.keys), expect), 1.0 - 1e-9);
    }
    EXPECT_GT(seen.size(), 1u);
}

TEST(Finalize, IncompleteRaises) {
    auto wp = single_wire({Angle8(0)});
    Transcript t;
    Channel ch(t);
    ClientState c(wp.pattern, {PadKey(0, 0)}, ClientSecrets::zero(wp.pattern));
    ServerState s(wp.graph, Rng(9));
    for (auto &m : client_prepare(c, StateVector(1))) s.receive(m);
    server_entangle(s);
    EXPECT_THROW(c.output_keys(), ProtocolError);
    EXPECT_THROW(s.output_transfer(), ProtocolError);
    EXPECT_THROW(finalize_output(c, s, ch), ProtocolError);
}

TEST(Transcript, DimsAndDeterministicReplay) {
    auto wp = mbqc::build_grover_oracle_pattern();
    auto once = [&] {
        Rng crng(42, "client");
        return run_session(wp, StateVector(2), crng, Rng(42, "server"));
    };
    auto a = once(), b = once();
    EXPECT_EQ(a.transcript.n, 5);
    EXPECT_EQ(a.transcript.m, 2);
    EXPECT_EQ(a.transcript.to_jsonl(), b.transcript.to_jsonl());
    EXPECT_EQ(a.transcript.all<Delta>().size(), 8u);
    EXPECT_EQ(a.transcript.all<Outcome>().size(), 10u);
    const std::string first = a.transcript.to_jsonl().substr(0, a.transcript.to_jsonl().find('\n'));
    EXPECT_EQ(first, R"({"type":"dims","node":null,"payload":{"segment":"sensitive","n":5,"m":2},"origin":"client"})");
}

TEST(Transcript, ServerViewHoldsNoSecrets) {
    auto wp = mbqc::build_grover_oracle_pattern();
    Rng crng(8, "client");
    auto res = run_session(wp, StateVector(2), crng, Rng(8, "server"));
    for (const char *k : {"theta", "r", "phi", "input_keys"}) {
        EXPECT_TRUE(res.secret_ledger.contains(k));
        EXPECT_FALSE(res.server_view.contains(k));
    }
    const std::string text = res.transcript.to_jsonl();
    EXPECT_EQ(text.find("theta"), std::string::npos);
    EXPECT_EQ(text.find("amplitude"), std::string::npos);
}

TEST(Transcript, RawOutcomesKeptOnServer) {
    auto wp = single_wire({Angle8(0), Angle8(1)});
    ClientSecrets sec = ClientSecrets::zero(wp.pattern);
    for (auto &[n, r] : sec.r) r = 1;
    auto res = run_session(wp, StateVector(1), {PadKey(0, 0)}, sec, Rng(5));
    for (const auto &[n, raw] : res.raw_outcomes) {
        if (n.col == 0) {
            EXPECT_EQ(res.client_outcomes.at(n), raw);
        } else {
            EXPECT_EQ(res.client_outcomes.at(n), raw ^ 1);
        }
    }
}
