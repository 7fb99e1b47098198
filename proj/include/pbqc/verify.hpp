#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pbqc/grover.hpp"
#include "pbqc/mbqc.hpp"
#include "pbqc/oracle.hpp"
#include "pbqc/pipeline.hpp"
#include "pbqc/protocol.hpp"
#include "pbqc/qotp.hpp"
#include "pbqc/resources.hpp"
#include "pbqc/statevec.hpp"

namespace pbqc::verify {

using mbqc::NodeId;

struct PropertyResult {
    std::string name;
    std::string module;
    std::uint64_t enumeration = 0;  // cases checked
    double max_deviation = 0;
    bool pass = false;
    std::uint64_t replay_seed = 0;
    std::string detail;
};

/// Single-qubit key rule under test; swap in a broken one to check that the
/// suite notices.
using KeyRule = std::function<qotp::PadKey(GateKind, qotp::PadKey)>;

inline qotp::PadKey faulty_s_rule(GateKind g, qotp::PadKey k) {
    if (g == GateKind::S) return k;
    return qotp::update_clifford(g, k);
}

namespace detail {

struct Tracker {
    PropertyResult r;
    double tol;

    Tracker(std::string name, std::string module, std::uint64_t seed, double tolerance) : tol(tolerance) {
        r.name = std::move(name);
        r.module = std::move(module);
        r.replay_seed = seed;
    }
    /// Record one case by its deviation from the expected value.
    void dev(double d, const std::string &what = {}) {
        ++r.enumeration;
        if (d > r.max_deviation) r.max_deviation = d;
        if (d > tol && r.detail.empty()) r.detail = what.empty() ? "deviation above tolerance" : what;
    }
    void fail(const std::string &what) {
        ++r.enumeration;
        if (r.detail.empty()) r.detail = what;
        r.max_deviation = std::max(r.max_deviation, 1.0);
    }
    PropertyResult done() {
        r.pass = r.detail.empty() && r.max_deviation <= tol;
        return r;
    }
};

inline std::vector<StateVector> basis_inputs_1q() {
    const double s = 1.0 / std::sqrt(2.0);
    return {StateVector::single(1, 0), StateVector::single(0, 1), StateVector::single(s, s),
            StateVector::single(s, Complex(0, s))};
}

inline Eigen::MatrixXcd average(const std::vector<Eigen::MatrixXcd> &ms) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(ms.at(0).rows(), ms.at(0).cols());
    for (const auto &m : ms) acc += m;
    return acc / static_cast<double>(ms.size());
}

inline double mixed_deviation(const Eigen::MatrixXcd &rho) {
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(rho.rows(), rho.cols()) / static_cast<double>(rho.rows());
    return (rho - id).cwiseAbs().maxCoeff();
}

}  // namespace detail

// ---------------------------------------------------------------- statevec

inline PropertyResult norm_preservation(std::uint64_t seed) {
    detail::Tracker t("norm preservation", "statevec", seed, 1e-10);
    Rng rng(seed);
    const Gate pool[] = {Gate::h(), Gate::x(), Gate::z(), Gate::s(), Gate::t(), Gate::rz(Angle8(3)), Gate::cx(), Gate::cz()};
    for (int trial = 0; trial < 50; ++trial) {
        StateVector s = random_state(3, rng);
        for (int k = 0; k < 30; ++k) {
            Gate g = pool[rng.below(8)];
            int a = static_cast<int>(rng.below(3));
            int b = static_cast<int>((a + 1 + rng.below(2)) % 3);
            if (g.arity() == 1) {
                apply_gate(s, g, {a});
            } else {
                apply_gate(s, g, {a, b});
            }
            t.dev(std::abs(s.norm() - 1.0));
        }
    }
    return t.done();
}

inline PropertyResult gate_unitarity(std::uint64_t seed) {
    detail::Tracker t("gate unitarity", "statevec", seed, 1e-12);
    std::vector<Gate> gates = {Gate::i(), Gate::h(), Gate::x(), Gate::z(), Gate::s(), Gate::t(), Gate::cx(), Gate::cz()};
    for (int k = 0; k < 8; ++k) gates.push_back(Gate::rz(Angle8(k)));
    for (const auto &g : gates) {
        Eigen::MatrixXcd u = gate_matrix(g);
        t.dev((u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff(), g.name());
    }
    return t.done();
}

/// CZ(|psi>|+>), measure the first qubit at angle 0: second holds X^m H|psi>.
inline PropertyResult one_bit_teleportation(std::uint64_t seed) {
    detail::Tracker t("one-bit teleportation X^m H", "statevec", seed, 1e-9);
    Rng rng(seed);
    for (int trial = 0; trial < 20; ++trial) {
        StateVector psi = random_state(1, rng);
        for (int m = 0; m < 2; ++m) {
            StateVector s = psi;
            s.append(prepare_plus_theta(Angle8{}));
            s.apply_cz(0, 1);
            auto basis = MeasurementBasis::rotated_x(Angle8{});
            s.project(0, basis, m);
            rotate_to_zero(s, 0, basis, m);
            s.release(0);
            Eigen::VectorXcd want = oracle::pad(m, 0) * gate_matrix(Gate::h()) * oracle::vec(psi);
            t.dev(1.0 - oracle::fidelity(want, s));
        }
    }
    return t.done();
}

/// Measuring at theta teleports X^m H Rz(-theta).
inline PropertyResult j_gate_teleportation(std::uint64_t seed) {
    detail::Tracker t("J(theta) gate teleportation", "statevec", seed, 1e-9);
    Rng rng(seed);
    for (int trial = 0; trial < 10; ++trial) {
        StateVector psi = random_state(1, rng);
        for (int k = 0; k < 8; ++k) {
            for (int m = 0; m < 2; ++m) {
                StateVector s = psi;
                s.append(prepare_plus_theta(Angle8{}));
                s.apply_cz(0, 1);
                auto basis = MeasurementBasis::rotated_x(Angle8(k));
                s.project(0, basis, m);
                rotate_to_zero(s, 0, basis, m);
                s.release(0);
                Eigen::VectorXcd want = oracle::pad(m, 0) * gate_matrix(Gate::h()) *
                                        gate_matrix(Gate::rz(-Angle8(k))) * oracle::vec(psi);
                t.dev(1.0 - oracle::fidelity(want, s));
            }
        }
    }
    return t.done();
}

// ---------------------------------------------------------------- qotp

/// G X^a Z^b |psi> == X^a' Z^b' G |psi> for the single-qubit rules, CX and CZ.
inline PropertyResult clifford_key_commutation(std::uint64_t seed, const KeyRule &rule = [](GateKind g, qotp::PadKey k) {
    return qotp::update_clifford(g, k);
}) {
    detail::Tracker t("update_clifford: Clifford key commutation", "qotp", seed, 1e-10);
    Rng rng(seed);
    auto inputs = detail::basis_inputs_1q();
    for (int i = 0; i < 5; ++i) inputs.push_back(random_state(1, rng));
    for (GateKind g : {GateKind::X, GateKind::Z, GateKind::H, GateKind::S}) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                qotp::PadKey k2 = rule(g, {a, b});
                for (const auto &psi : inputs) {
                    Eigen::VectorXcd lhs = gate_matrix(Gate{g}) * oracle::pad(a, b) * oracle::vec(psi);
                    Eigen::VectorXcd rhs = oracle::pad(k2.a, k2.b) * gate_matrix(Gate{g}) * oracle::vec(psi);
                    t.dev(1.0 - std::norm(lhs.dot(rhs)), "update_clifford rule for " + Gate{g}.name() + " fails on key (" +
                                                             std::to_string(a) + "," + std::to_string(b) + ")");
                }
            }
        }
    }
    // Two-qubit rules on 4 product-basis inputs plus 5 random entangled ones.
    std::vector<StateVector> pairs;
    for (std::uint64_t i = 0; i < 4; ++i) pairs.push_back(StateVector::basis(2, i));
    for (int i = 0; i < 5; ++i) pairs.push_back(random_state(2, rng));
    for (GateKind g : {GateKind::CX, GateKind::CZ}) {
        Eigen::MatrixXcd u = gate_matrix(Gate{g});
        for (int bits = 0; bits < 16; ++bits) {
            qotp::PadKey k1(bits & 1, (bits >> 1) & 1), k2((bits >> 2) & 1, (bits >> 3) & 1);
            auto [n1, n2] = g == GateKind::CX ? qotp::update_clifford(GateKind::CX, k1, k2) : qotp::update_cz(k1, k2);
            Eigen::MatrixXcd before = oracle::embed(oracle::pad(k1.a, k1.b), {0}, 2) * oracle::embed(oracle::pad(k2.a, k2.b), {1}, 2);
            Eigen::MatrixXcd after = oracle::embed(oracle::pad(n1.a, n1.b), {0}, 2) * oracle::embed(oracle::pad(n2.a, n2.b), {1}, 2);
            for (const auto &psi : pairs) {
                Eigen::VectorXcd lhs = u * before * oracle::vec(psi);
                Eigen::VectorXcd rhs = after * u * oracle::vec(psi);
                t.dev(1.0 - std::norm(lhs.dot(rhs)), "update_clifford rule for " + Gate{g}.name());
            }
        }
    }
    return t.done();
}

/// All 16 (a,b,y,d) x both c x 10 inputs decrypt to T|psi>.
inline PropertyResult t_gadget_exhaustive(std::uint64_t seed) {
    detail::Tracker t("T gadget decrypts to T|psi>", "qotp", seed, 1e-9);
    Rng rng(seed);
    Rng unused(seed, "unused");
    for (int trial = 0; trial < 10; ++trial) {
        StateVector psi = random_state(1, rng);
        Eigen::VectorXcd want = gate_matrix(Gate::t()) * oracle::vec(psi);
        for (int bits = 0; bits < 16; ++bits) {
            qotp::PadKey key(bits & 1, (bits >> 1) & 1);
            qotp::AuxKey aux((bits >> 2) & 1, (bits >> 3) & 1);
            for (int c = 0; c < 2; ++c) {
                StateVector reg = psi;
                qotp::encrypt(reg, 0, key);
                auto res = qotp::eval_t_gadget(reg, 0, key, aux, unused, c);
                if (res.transcript.x != (key.a ^ aux.y)) t.fail("control bit is not a xor y");
                qotp::decrypt(reg, 0, res.key);
                t.dev(1.0 - oracle::fidelity(want, reg));
            }
        }
    }
    return t.done();
}

inline PropertyResult t_gadget_unbiased(std::uint64_t seed) {
    detail::Tracker t("T gadget outcome c unbiased", "qotp", seed, 1e-10);
    Rng rng(seed);
    Rng unused(seed, "unused");
    for (int trial = 0; trial < 10; ++trial) {
        StateVector psi = random_state(1, rng);
        for (int bits = 0; bits < 16; ++bits) {
            qotp::PadKey key(bits & 1, (bits >> 1) & 1);
            qotp::AuxKey aux((bits >> 2) & 1, (bits >> 3) & 1);
            for (int c = 0; c < 2; ++c) {
                StateVector reg = psi;
                qotp::encrypt(reg, 0, key);
                t.dev(std::abs(qotp::eval_t_gadget(reg, 0, key, aux, unused, c).branch_probability - 0.5));
            }
        }
    }
    return t.done();
}

inline PropertyResult qotp_mixedness(std::uint64_t seed) {
    detail::Tracker t("pad average is I/2", "qotp", seed, 1e-12);
    Rng rng(seed);
    for (int trial = 0; trial < 20; ++trial) {
        StateVector psi = random_state(1, rng);
        std::vector<Eigen::MatrixXcd> rhos;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                StateVector s = psi;
                qotp::encrypt(s, 0, {a, b});
                rhos.push_back(s.density_matrix());
            }
        t.dev(detail::mixed_deviation(detail::average(rhos)));
    }
    return t.done();
}

// ---------------------------------------------------------------- mbqc

inline PropertyResult j_chain_oracle(std::uint64_t seed) {
    detail::Tracker t("J chains multiply out to their gate", "mbqc", seed, 1e-12);
    std::vector<Gate> gates = {Gate::i(), Gate::h(), Gate::x(), Gate::z(), Gate::s(), Gate::t()};
    for (int k = 0; k < 8; ++k) gates.push_back(Gate::rz(Angle8(k)));
    for (const auto &g : gates) {
        t.dev(oracle::phase_distance(oracle::mat(mbqc::chain_matrix(mbqc::decompose_to_j_chain(g))), gate_matrix(g)),
              g.name());
    }
    t.dev(oracle::phase_distance(oracle::mat(mbqc::chain_matrix(mbqc::odd_identity())), gate_matrix(Gate::i())),
          "odd identity");
    return t.done();
}

/// Random wire program with <= 3 rows and <= 6 columns.
inline mbqc::WireProgram random_wire_program(Rng &rng) {
    mbqc::WireProgram p;
    p.mode = mbqc::InputColumn::encrypted;
    const int rows = 1 + static_cast<int>(rng.below(3));
    const int len = 1 + static_cast<int>(rng.below(4));
    for (int y = 0; y < rows; ++y) {
        mbqc::JChain c;
        for (int i = 0; i < len; ++i) c.alphas.push_back(rng.angle8());
        p.wires.push_back(c);
    }
    if (rows > 1) {
        const int links = static_cast<int>(rng.below(4));
        for (int k = 0; k < links; ++k) {
            int col = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(len + 1)));
            int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(rows)));
            int b = (a + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(rows - 1)))) % rows;
            mbqc::CrossLink l{col, std::min(a, b), std::max(a, b)};
            if (std::find(p.links.begin(), p.links.end(), l) == p.links.end()) p.links.push_back(l);
        }
    }
    return p;
}

inline PropertyResult pattern_soundness(std::uint64_t seed) {
    detail::Tracker t("pattern soundness", "mbqc", seed, 1e-9);
    Rng rng(seed);
    for (int prog_i = 0; prog_i < 20; ++prog_i) {
        auto prog = random_wire_program(rng);
        auto wp = mbqc::build_wire_patterns(prog);
        Eigen::MatrixXcd u = oracle::wire_program_unitary(prog);
        for (int k = 0; k < 10; ++k) {
            StateVector in = random_state(static_cast<int>(prog.wires.size()), rng);
            auto res = mbqc::execute_pattern(wp, in, rng);
            t.dev(1.0 - oracle::fidelity(u * oracle::vec(in), res.output));
        }
    }
    return t.done();
}

inline PropertyResult flow_causality(std::uint64_t seed) {
    detail::Tracker t("flow causality", "mbqc", seed, 0.0);
    Rng rng(seed);
    auto check = [&](const mbqc::MeasurementPattern &p) {
        for (const auto &c : p.commands()) {
            for (const auto *deps : {&c.x_deps, &c.z_deps}) {
                for (const auto &d : *deps) {
                    if (!p.contains(d) || p.position(d) >= p.position(c.node) ||
                        p.at(d).role == mbqc::NodeRole::output) {
                        t.fail("dependency " + d.to_string() + " of " + c.node.to_string() + " is not earlier");
                        return;
                    }
                }
            }
            if (c.role == mbqc::NodeRole::output && c.angle != Angle8{}) t.fail("output node carries an angle");
        }
        t.dev(0.0);
    };
    for (int i = 0; i < 50; ++i) check(mbqc::build_wire_patterns(random_wire_program(rng)).pattern);
    check(mbqc::build_grover_oracle_pattern().pattern);
    for (int n : {1, 5, 9, 13})
        for (int m : {1, 2, 3, 4}) check(mbqc::derive_flow(mbqc::build_brickwork(n, m), {}));
    return t.done();
}

// ---------------------------------------------------------------- protocol

struct ProtocolCase {
    std::string name;
    int rows;
    std::vector<GateOp> gates;
};

inline std::vector<ProtocolCase> protocol_test_set() {
    std::vector<ProtocolCase> out = {{"H", 1, {{Gate::h(), {0}}}},
                                     {"X", 1, {{Gate::x(), {0}}}},
                                     {"Z", 1, {{Gate::z(), {0}}}}};
    for (int k = 0; k < 8; ++k) out.push_back({"RZ(" + std::to_string(k) + ")", 1, {{Gate::rz(Angle8(k)), {0}}}});
    out.push_back({"CZ", 2, {{Gate::cz(), {0, 1}}}});
    out.push_back({"grover oracle", 2,
                   {{Gate::x(), {0}}, {Gate::x(), {1}}, {Gate::cz(), {0, 1}}, {Gate::x(), {0}}, {Gate::x(), {1}}}});
    return out;
}

inline PropertyResult protocol_correctness(std::uint64_t seed, int seeds_per_case = 50) {
    detail::Tracker t("blind protocol correctness", "protocol", seed, 1e-9);
    for (const auto &pc : protocol_test_set()) {
        auto wp = pc.name == "grover oracle"
                      ? mbqc::build_grover_oracle_pattern()
                      : mbqc::build_wire_patterns(mbqc::compile_circuit(pc.rows, pc.gates, mbqc::InputColumn::encrypted));
        Eigen::MatrixXcd u = oracle::circuit_unitary(pc.rows, pc.gates);
        for (int s = 0; s < seeds_per_case; ++s) {
            std::uint64_t run_seed = derive_seed(seed, pc.name + "/" + std::to_string(s));
            Rng client(run_seed, "client");
            StateVector in = random_state(pc.rows, client);
            auto res = protocol::run_session(wp, in, client, Rng(run_seed, "server"));
            StateVector out = protocol::decrypt_output(res.output, res.keys);
            t.dev(1.0 - oracle::fidelity(u * oracle::vec(in), out), pc.name + " seed " + std::to_string(run_seed));
        }
    }
    return t.done();
}

/// Blinded angles of a client driven with fixed raw outcomes; no quantum
/// state involved.
inline std::vector<Angle8> client_deltas(const mbqc::MeasurementPattern &p, std::vector<qotp::PadKey> keys,
                                         protocol::ClientSecrets secrets, const std::map<NodeId, int> &raw) {
    protocol::ClientState c(p, std::move(keys), std::move(secrets));
    std::vector<Angle8> out;
    for (const auto &n : p.nodes_with_role(mbqc::NodeRole::input)) c.receive({n, raw.count(n) ? raw.at(n) : 0});
    while (!c.complete()) {
        auto d = c.next_delta();
        out.push_back(d.delta);
        c.receive({d.node, raw.count(d.node) ? raw.at(d.node) : 0});
    }
    return out;
}

/// Every secrets assignment over theta in Z_8, r in {0,1} for each measured
/// node, in a fixed order.
inline std::vector<protocol::ClientSecrets> enumerate_secrets(const mbqc::MeasurementPattern &p) {
    auto nodes = p.nodes_with_role(mbqc::NodeRole::measured);
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < nodes.size(); ++i) total *= 16;
    std::vector<protocol::ClientSecrets> out;
    for (std::uint64_t code = 0; code < total; ++code) {
        protocol::ClientSecrets s;
        std::uint64_t c = code;
        for (const auto &n : nodes) {
            s.theta[n] = Angle8(static_cast<int>(c & 7));
            s.r[n] = static_cast<int>((c >> 3) & 1);
            c >>= 4;
        }
        out.push_back(std::move(s));
    }
    return out;
}

/// For each phi' the 16 (theta, r) pairs hit every delta exactly twice.
inline PropertyResult delta_uniformity(std::uint64_t seed, std::map<int, int> *histogram_out = nullptr) {
    detail::Tracker t("delta uniform on Z_8 (each value twice)", "protocol", seed, 0.0);
    for (int alpha = 0; alpha < 8; ++alpha) {
        for (int keybits = 0; keybits < 4; ++keybits) {
            for (int s0 = 0; s0 < 2; ++s0) {
                mbqc::JChain chain{Angle8(alpha)};
                auto wp = mbqc::build_wire_patterns(std::vector<mbqc::JChain>{chain}, {}, mbqc::InputColumn::encrypted);
                std::map<int, int> hist;
                for (auto &sec : enumerate_secrets(wp.pattern)) {
                    auto ds = client_deltas(wp.pattern, {qotp::PadKey(keybits & 1, keybits >> 1)}, sec,
                                            {{NodeId{0, 0}, s0}});
                    ++hist[ds.at(0).k()];
                }
                bool ok = hist.size() == 8;
                for (auto &[_, cnt] : hist) ok = ok && cnt == 2;
                if (!ok) t.fail("delta histogram not flat for alpha " + std::to_string(alpha));
                t.dev(0.0);
                if (histogram_out && alpha == 0 && keybits == 0 && s0 == 0) *histogram_out = hist;
            }
        }
    }
    return t.done();
}

/// Two patterns of equal dimensions with different angles give the same
/// multiset of achievable delta vectors.
inline PropertyResult transcript_indistinguishability(std::uint64_t seed) {
    detail::Tracker t("achievable transcripts identical", "protocol", seed, 0.0);
    using mbqc::JChain;
    auto one_row = [](std::vector<JChain> w, std::vector<mbqc::CrossLink> l) {
        return mbqc::build_wire_patterns(w, l, mbqc::InputColumn::encrypted);
    };
    std::vector<std::pair<mbqc::WirePattern, mbqc::WirePattern>> pairs;
    pairs.emplace_back(one_row({JChain{Angle8(0), Angle8(0)}}, {}), one_row({JChain{Angle8(1), Angle8(6)}}, {}));
    pairs.emplace_back(one_row({JChain{Angle8(0)}, JChain{Angle8(0)}}, {{1, 0, 1}}),
                       one_row({JChain{Angle8(3)}, JChain{Angle8(5)}}, {{2, 0, 1}}));
    Rng rng(seed);
    for (auto &[p1, p2] : pairs) {
        for (int trial = 0; trial < 4; ++trial) {
            std::map<NodeId, int> raw;
            std::vector<qotp::PadKey> keys;
            for (const auto &c : p1.pattern.commands()) raw[c.node] = rng.bit();
            for (int y = 0; y < p1.graph.rows(); ++y) keys.push_back(qotp::PadKey::random(rng));
            auto collect = [&](const mbqc::WirePattern &wp) {
                std::map<std::vector<int>, int> multiset;
                for (auto &sec : enumerate_secrets(wp.pattern)) {
                    std::vector<int> v;
                    for (auto d : client_deltas(wp.pattern, keys, sec, raw)) v.push_back(d.k());
                    ++multiset[v];
                }
                return multiset;
            };
            auto m1 = collect(p1), m2 = collect(p2);
            const std::size_t k = p1.pattern.nodes_with_role(mbqc::NodeRole::measured).size();
            std::size_t expect_vectors = 1;
            for (std::size_t i = 0; i < k; ++i) expect_vectors *= 8;
            bool flat = m1.size() == expect_vectors;
            for (auto &[_, cnt] : m1) flat = flat && cnt == (1 << k);
            if (m1 != m2) t.fail("achievable delta multisets differ");
            if (!flat) t.fail("delta vectors not each hit 2^k times");
            t.dev(0.0);
        }
    }
    return t.done();
}

/// Averages of what the server receives during preparation.
inline PropertyResult server_view_mixedness(std::uint64_t seed) {
    detail::Tracker t("server-received qubits average to I/2", "protocol", seed, 1e-12);
    Rng rng(seed);
    for (int rows : {1, 2}) {
        std::vector<mbqc::JChain> w(static_cast<std::size_t>(rows), mbqc::JChain{Angle8(0)});
        auto wp = mbqc::build_wire_patterns(w, {}, mbqc::InputColumn::encrypted);
        StateVector in = random_state(rows, rng);
        NodeId probe{1, 0};
        std::vector<Eigen::MatrixXcd> aux, inputs;
        for (int th = 0; th < 8; ++th) {
            for (int r = 0; r < 2; ++r) {
                auto sec = protocol::ClientSecrets::zero(wp.pattern);
                sec.theta[probe] = Angle8(th);
                sec.r[probe] = r;
                protocol::ClientState c(wp.pattern, std::vector<qotp::PadKey>(static_cast<std::size_t>(rows)), sec);
                for (auto &m : protocol::client_prepare(c, in)) {
                    if (auto *q = std::get_if<protocol::QubitTransfer>(&m.body); q && q->node == probe)
                        aux.push_back(q->state->density_matrix());
                }
            }
        }
        t.dev(detail::mixed_deviation(detail::average(aux)));
        for (int code = 0; code < (1 << (2 * rows)); ++code) {
            std::vector<qotp::PadKey> keys;
            for (int y = 0; y < rows; ++y) keys.emplace_back((code >> (2 * y)) & 1, (code >> (2 * y + 1)) & 1);
            protocol::ClientState c(wp.pattern, keys, protocol::ClientSecrets::zero(wp.pattern));
            for (auto &m : protocol::client_prepare(c, in)) {
                if (auto *q = std::get_if<protocol::InputTransfer>(&m.body)) inputs.push_back(q->state->density_matrix());
            }
        }
        t.dev(detail::mixed_deviation(detail::average(inputs)));
    }
    return t.done();
}

struct PaddingCheck {
    double max_deviation = 0;   // averaged output vs maximally mixed
    double branch_deviation = 0;  // max |p - 1/2| over every forced branch
    bool transcripts_fixed = true;
    std::uint64_t runs = 0;
};

/// With every delta and every raw outcome fixed, enumerate the r bits. Each r
/// assignment needs theta = delta - phi'(true outcomes) - pi r, so the
/// server view is identical across the enumeration. `raw` covers the input
/// and measured nodes. Reports the deviation of the r-averaged (still
/// padded) output from I/2^m.
inline PaddingCheck output_padding_enumeration(const mbqc::WirePattern &wp, const StateVector &input,
                                               const std::vector<qotp::PadKey> &keys, const std::map<NodeId, int> &raw,
                                               const std::map<NodeId, Angle8> &delta_target) {
    PaddingCheck out;
    auto nodes = wp.pattern.nodes_with_role(mbqc::NodeRole::measured);
    const std::uint64_t total = std::uint64_t{1} << nodes.size();
    std::vector<Eigen::MatrixXcd> rhos;
    for (std::uint64_t code = 0; code < total; ++code) {
        protocol::ClientSecrets sec = protocol::ClientSecrets::zero(wp.pattern);
        for (std::size_t i = 0; i < nodes.size(); ++i) sec.r[nodes[i]] = static_cast<int>((code >> i) & 1);
        // Dry client: learn phi' along the forced trajectory.
        protocol::ClientState dry(wp.pattern, keys, sec);
        for (const auto &n : wp.pattern.nodes_with_role(mbqc::NodeRole::input)) dry.receive({n, raw.at(n)});
        while (!dry.complete()) {
            NodeId n = *dry.next_node();
            sec.theta[n] = (delta_target.at(n) - dry.corrected_angle(n)).plus_pi_times(sec.r.at(n));
            auto d = dry.next_delta();
            dry.receive({d.node, raw.at(d.node)});
        }
        protocol::SessionOptions opts;
        opts.forced_outcomes = raw;
        auto res = protocol::run_session(wp, input, keys, sec, Rng(code), opts);
        for (const auto &d : res.transcript.all<protocol::Delta>())
            if (d.delta != delta_target.at(d.node)) out.transcripts_fixed = false;
        const double expected_weight = std::pow(0.5, static_cast<double>(raw.size()));
        out.branch_deviation = std::max(out.branch_deviation, std::abs(res.branch_weight - expected_weight));
        rhos.push_back(res.output.density_matrix());
        ++out.runs;
    }
    out.max_deviation = detail::mixed_deviation(detail::average(rhos));
    return out;
}

inline PropertyResult output_padding(std::uint64_t seed) {
    detail::Tracker t("padded output averages to I/2^m over r", "protocol", seed, 1e-10);
    Rng rng(seed);
    std::vector<mbqc::WirePattern> cases;
    cases.push_back(mbqc::build_wire_patterns(mbqc::compile_circuit(1, {{Gate::x(), {0}}})));
    cases.push_back(mbqc::build_wire_patterns(
        mbqc::compile_circuit(2, {{Gate::x(), {0}}, {Gate::h(), {1}}, {Gate::cz(), {0, 1}}, {Gate::h(), {1}}})));
    cases.push_back(mbqc::build_grover_oracle_pattern());
    for (const auto &wp : cases) {
        StateVector in = random_state(wp.graph.rows(), rng);
        std::vector<qotp::PadKey> keys;
        for (int y = 0; y < wp.graph.rows(); ++y) keys.push_back(qotp::PadKey::random(rng));
        std::map<NodeId, int> raw;
        std::map<NodeId, Angle8> deltas;
        for (const auto &c : wp.pattern.commands()) {
            if (c.role == mbqc::NodeRole::output) continue;
            raw[c.node] = rng.bit();
            if (c.role == mbqc::NodeRole::measured) deltas[c.node] = rng.angle8();
        }
        auto chk = output_padding_enumeration(wp, in, keys, raw, deltas);
        if (!chk.transcripts_fixed) t.fail("server view varied across the enumeration");
        t.dev(chk.branch_deviation, "forced branch probability differs from 1/2 per outcome");
        t.dev(chk.max_deviation, "averaged output is not maximally mixed");
        t.r.enumeration += chk.runs - 2;
    }
    return t.done();
}

/// Collect every object key in a JSON document.
inline void json_keys(const nlohmann::ordered_json &j, std::set<std::string> &out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            out.insert(it.key());
            json_keys(it.value(), out);
        }
    } else if (j.is_array()) {
        for (const auto &x : j) json_keys(x, out);
    }
}

/// The serialized server holds no field the client ledger marks secret, and
/// two runs whose server views coincide (same deltas, same raw outcomes)
/// serialize to identical bytes whatever the secrets were.
inline PropertyResult boundary_hygiene(std::uint64_t seed) {
    detail::Tracker t("server state free of client secrets", "protocol", seed, 0.0);
    Rng rng(seed);
    auto wp = mbqc::build_grover_oracle_pattern();
    StateVector in = random_state(2, rng);
    Rng client(seed, "client");
    auto res = protocol::run_session(wp, in, client, Rng(seed, "server"));
    std::set<std::string> server_keys, secret_keys;
    json_keys(res.server_view, server_keys);
    for (auto it = res.secret_ledger.begin(); it != res.secret_ledger.end(); ++it) secret_keys.insert(it.key());
    const std::set<std::string> allowed = {"columns", "rows", "edges", "register_qubits", "qubit_of", "raw_outcomes"};
    for (const auto &k : server_keys) {
        if (!allowed.count(k)) t.fail("unexpected server field `" + k + "`");
        if (secret_keys.count(k)) t.fail("server holds secret field `" + k + "`");
    }
    t.dev(0.0);

    // Same server view, different secrets.
    std::map<NodeId, int> raw;
    std::map<NodeId, Angle8> deltas;
    for (const auto &c : wp.pattern.commands()) {
        if (c.role == mbqc::NodeRole::output) continue;
        raw[c.node] = rng.bit();
        if (c.role == mbqc::NodeRole::measured) deltas[c.node] = rng.angle8();
    }
    std::string first;
    for (int variant = 0; variant < 4; ++variant) {
        auto sec = protocol::ClientSecrets::zero(wp.pattern);
        for (auto &[n, r] : sec.r) r = rng.bit();
        std::vector<qotp::PadKey> keys = {qotp::PadKey::random(rng), qotp::PadKey::random(rng)};
        protocol::ClientState dry(wp.pattern, keys, sec);
        for (const auto &n : wp.pattern.nodes_with_role(mbqc::NodeRole::input)) dry.receive({n, raw.at(n)});
        while (!dry.complete()) {
            NodeId n = *dry.next_node();
            sec.theta[n] = (deltas.at(n) - dry.corrected_angle(n)).plus_pi_times(sec.r.at(n));
            auto d = dry.next_delta();
            dry.receive({d.node, raw.at(d.node)});
        }
        protocol::SessionOptions opts;
        opts.forced_outcomes = raw;
        auto r = protocol::run_session(wp, in, keys, sec, Rng(seed), opts);
        std::string view = r.server_view.dump() + r.transcript.to_jsonl();
        if (variant == 0) first = view;
        if (view != first) t.fail("server view depends on client secrets");
        t.dev(0.0);
    }
    return t.done();
}

// ---------------------------------------------------------------- pbqc

/// Random 2-qubit spec: 1-3 segments of 1-6 gates, at least one sensitive.
inline CircuitSpec random_spec(Rng &rng) {
    CircuitSpec s;
    s.num_qubits = 2;
    const int nseg = 1 + static_cast<int>(rng.below(3));
    const int forced = static_cast<int>(rng.below(static_cast<std::uint64_t>(nseg)));
    const Gate pub[] = {Gate::h(), Gate::x(), Gate::z(), Gate::s(), Gate::t(), Gate::cx(), Gate::cz()};
    for (int i = 0; i < nseg; ++i) {
        Segment seg;
        seg.tag = (i == forced || rng.bit()) ? SegmentTag::sensitive_segment : SegmentTag::public_segment;
        const int ng = 1 + static_cast<int>(rng.below(6));
        for (int k = 0; k < ng; ++k) {
            Gate g;
            if (seg.tag == SegmentTag::public_segment) {
                g = pub[rng.below(7)];
            } else {
                std::uint64_t pick = rng.below(9);
                g = pick < 7 ? pub[pick] : pick == 7 ? Gate::rz(rng.angle8()) : Gate::i();
            }
            int a = static_cast<int>(rng.below(2));
            seg.gates.push_back(g.arity() == 1 ? GateOp{g, {a}} : GateOp{g, {a, 1 - a}});
        }
        s.segments.push_back(std::move(seg));
    }
    return s;
}

struct CompositionCheck {
    double final_deviation = 0;
    double boundary_deviation = 0;
    std::size_t boundaries = 0;
};

/// Runs the pipeline with a plaintext shadow checked at every boundary.
inline CompositionCheck check_composition(const CircuitSpec &spec, const StateVector &initial, std::uint64_t seed) {
    CompositionCheck out;
    StateVector shadow = initial;
    auto probe = [&](std::size_t seg, const StateVector &reg, const std::vector<qotp::PadKey> &keys) {
        simulate_plaintext(shadow, spec.segments.at(seg).gates);
        StateVector dec = decrypt_register(reg, keys);
        out.boundary_deviation = std::max(out.boundary_deviation, 1.0 - fidelity_up_to_phase(shadow, dec));
        ++out.boundaries;
    };
    auto res = run_pipeline(spec, initial, seed, {}, probe);
    Eigen::VectorXcd want = oracle::circuit_unitary(spec.num_qubits, spec.all_gates()) * oracle::vec(initial);
    out.final_deviation = 1.0 - oracle::fidelity(want, res.final_state);
    return out;
}

inline PropertyResult pipeline_composition(std::uint64_t seed, int specs = 30) {
    detail::Tracker t("segmented pipeline matches plaintext", "pbqc", seed, 1e-9);
    for (int i = 0; i < specs; ++i) {
        std::uint64_t run_seed = derive_seed(seed, "spec/" + std::to_string(i));
        Rng rng(run_seed);
        CircuitSpec spec = random_spec(rng);
        StateVector init = random_state(2, rng);
        auto chk = check_composition(spec, init, run_seed);
        t.dev(chk.final_deviation, "final state differs, seed " + std::to_string(run_seed));
        t.dev(chk.boundary_deviation, "boundary invariant broken, seed " + std::to_string(run_seed));
        if (chk.boundaries != spec.segments.size()) t.fail("boundary probe skipped a segment");
    }
    return t.done();
}

// ---------------------------------------------------------------- grover_resources

inline PropertyResult grover_resource_counts(std::uint64_t seed) {
    detail::Tracker t("Grover counts from constructed clusters", "grover_resources", seed, 0.0);
    auto spec = grover2_spec();
    auto full = resource_report(spec, Mode::full_ubqc);
    auto part = resource_report(spec, Mode::pbqc);
    if (!(full == ResourceReport{Mode::full_ubqc, 18, 9, std::nullopt})) t.fail("full_ubqc: " + full.to_json().dump());
    if (!(part == ResourceReport{Mode::pbqc, 12, 5, 6})) t.fail("pbqc: " + part.to_json().dump());
    t.dev(0.0);
    auto run = grover2_demo(seed, 1);
    if (!(run.pipeline.report == part)) t.fail("pipeline tally disagrees with resource_report");
    t.dev(0.0);
    return t.done();
}

inline PropertyResult degenerate_parameters(std::uint64_t seed) {
    detail::Tracker t("PBQC row with p = 0 equals BFK09 row", "grover_resources", seed, 0.0);
    for (int n = 1; n <= 8; ++n) {
        for (int d = 0; d <= 12; ++d) {
            ResourceParams pr;
            pr.n = n;
            pr.d = d;
            pr.s = d;
            pr.p = 0;
            if (!asymptotic_costs(pr, CostRow::pbqc).same_counts(asymptotic_costs(pr, CostRow::bfk09))) {
                t.fail("mismatch at n=" + std::to_string(n) + " d=" + std::to_string(d));
            }
            t.dev(0.0);
        }
    }
    return t.done();
}

/// The pipeline reproduces the plaintext Grover circuit exactly and
/// concentrates on one outcome; `detail` names it.
inline PropertyResult grover_certainty(std::uint64_t seed) {
    detail::Tracker t("Grover pipeline deterministic outcome", "grover_resources", seed, 1e-9);
    StateVector plain(2);
    simulate_plaintext(plain, grover2_spec().all_gates());
    std::string label;
    for (int k = 0; k < 10; ++k) {
        auto d = grover2_demo(derive_seed(seed, "grover/" + std::to_string(k)), 64);
        t.dev(1.0 - fidelity_up_to_phase(plain, d.final_state));
        double best = 0;
        for (std::uint64_t i = 0; i < 4; ++i) {
            double p = std::norm(d.final_state.amplitude(i));
            if (p > best) {
                best = p;
                label = outcome_label(i, 2);
            }
        }
        t.dev(1.0 - best);
    }
    PropertyResult r = t.done();
    if (r.pass) r.detail = "all mass on " + label;
    return r;
}

struct VerifyOptions {
    std::uint64_t seed = 0;
    bool inject_fault = false;
};

inline std::vector<PropertyResult> run_all(const VerifyOptions &o) {
    auto sd = [&](const char *label) { return derive_seed(o.seed, label); };
    KeyRule rule = [](GateKind g, qotp::PadKey k) { return qotp::update_clifford(g, k); };
    if (o.inject_fault) rule = faulty_s_rule;
    return {
        norm_preservation(sd("statevec/norm")),
        gate_unitarity(sd("statevec/unitarity")),
        one_bit_teleportation(sd("statevec/teleport")),
        j_gate_teleportation(sd("statevec/gate-teleport")),
        clifford_key_commutation(sd("qotp/clifford"), rule),
        t_gadget_exhaustive(sd("qotp/t-gadget")),
        t_gadget_unbiased(sd("qotp/t-gadget-bias")),
        qotp_mixedness(sd("qotp/mixedness")),
        j_chain_oracle(sd("mbqc/j-chain")),
        pattern_soundness(sd("mbqc/soundness")),
        flow_causality(sd("mbqc/flow")),
        protocol_correctness(sd("protocol/correctness")),
        delta_uniformity(sd("protocol/delta")),
        transcript_indistinguishability(sd("protocol/transcripts")),
        server_view_mixedness(sd("protocol/server-view")),
        output_padding(sd("protocol/output-padding")),
        boundary_hygiene(sd("protocol/hygiene")),
        pipeline_composition(sd("pbqc/composition")),
        grover_resource_counts(sd("resources/grover-counts")),
        degenerate_parameters(sd("resources/degenerate")),
        grover_certainty(sd("grover/certainty")),
    };
}

}  // namespace pbqc::verify
