#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pbqc/circuit.hpp"
#include "pbqc/mbqc.hpp"
#include "pbqc/protocol.hpp"
#include "pbqc/qotp.hpp"
#include "pbqc/resources.hpp"
#include "pbqc/rng.hpp"
#include "pbqc/statevec.hpp"

namespace pbqc {

struct ResourceTally {
    int cluster_qubits = 0;
    int measurement_layers = 0;
    int public_depth = 0;
    int t_gadgets = 0;
};

struct KeySnapshot {
    std::string label;
    std::vector<qotp::PadKey> keys;
};

/// Everything the client and server hold between segments. `reg` is the
/// server's ciphertext register (logical qubit i = qubit i); `keys` stay with
/// the client.
struct PipelineState {
    StateVector reg;
    std::vector<qotp::PadKey> keys;
    std::vector<protocol::Transcript> transcripts;
    ResourceTally tally;
    std::uint64_t seed = 0;
    std::size_t segment_index = 0;

    Rng client_stream(std::string_view what) const {
        return Rng(seed, "client/" + std::string(what) + "/" + std::to_string(segment_index));
    }
    Rng server_stream(std::string_view what) const {
        return Rng(seed, "server/" + std::string(what) + "/" + std::to_string(segment_index));
    }
};

/// Move qubits so logical qubit i sits at index i; `pos[i]` is its current
/// index.
inline void permute_to_logical(StateVector &reg, std::vector<int> pos) {
    if (static_cast<int>(pos.size()) != reg.num_qubits()) {
        throw std::logic_error("permute_to_logical: register width does not match the logical qubit count");
    }
    for (int i = 0; i < static_cast<int>(pos.size()); ++i) {
        int cur = pos[static_cast<std::size_t>(i)];
        if (cur == i) continue;
        reg.swap_qubits(cur, i);
        for (auto &p : pos)
            if (p == i) p = cur;
        pos[static_cast<std::size_t>(i)] = i;
    }
}

/// Gates act directly on the ciphertext. Cliffords update keys by the
/// commutation rules; each T runs the gadget with a fresh aux qubit.
inline void run_public_segment(PipelineState &st, const std::vector<GateOp> &gates) {
    protocol::Transcript tr;
    tr.segment = "public";
    tr.n = 0;
    tr.m = st.reg.num_qubits();
    protocol::Channel ch(tr);
    Rng client_rng = st.client_stream("public");
    Rng server_rng = st.server_stream("public");
    using protocol::Party;

    for (const auto &op : gates) {
        if (!allowed_in_public(op.gate.kind)) {
            throw qotp::UnsupportedGateError("gate not allowed in a public segment: " + op.to_string());
        }
        ch.send({Party::client, protocol::GateInstruction{op}});
        (void)ch.receive(Party::server);
        switch (op.gate.kind) {
            case GateKind::T: {
                const int q = op.qubits.at(0);
                auto &key = st.keys.at(static_cast<std::size_t>(q));
                qotp::AuxKey aux_key = qotp::AuxKey::random(client_rng);
                StateVector aux = qotp::prepare_aux(aux_key);
                ch.send({Party::client, protocol::AuxTransfer{q, aux}});
                int aux_qubit = st.reg.append(*ch.receive_as<protocol::AuxTransfer>(Party::server).state);
                auto res = qotp::eval_t_gadget(st.reg, q, aux_qubit, key, aux_key, server_rng);
                ch.send({Party::client, protocol::ControlBit{q, res.transcript.x}});
                ch.send({Party::server, protocol::GadgetOutcome{q, res.transcript.c}});
                (void)ch.receive(Party::server);
                (void)ch.receive(Party::client);
                key = res.key;
                ++st.tally.t_gadgets;
                break;
            }
            case GateKind::CX: {
                apply_gate(st.reg, op);
                auto &c = st.keys.at(static_cast<std::size_t>(op.qubits[0]));
                auto &t = st.keys.at(static_cast<std::size_t>(op.qubits[1]));
                std::tie(c, t) = qotp::update_clifford(GateKind::CX, c, t);
                break;
            }
            case GateKind::CZ: {
                apply_gate(st.reg, op);
                auto &a = st.keys.at(static_cast<std::size_t>(op.qubits[0]));
                auto &b = st.keys.at(static_cast<std::size_t>(op.qubits[1]));
                std::tie(a, b) = qotp::update_cz(a, b);
                break;
            }
            default: {
                apply_gate(st.reg, op);
                auto &k = st.keys.at(static_cast<std::size_t>(op.qubits.at(0)));
                k = qotp::update_clifford(op.gate.kind, k);
                break;
            }
        }
    }
    st.tally.public_depth += asap_depth(st.reg.num_qubits(), gates);
    st.transcripts.push_back(std::move(tr));
}

/// The touched qubits' ciphertext becomes the input column of a blind-protocol
/// run on the resident register; the output column and its keys a', b'
/// replace them. Zero keys make this the plaintext hand-off.
inline void run_sensitive_segment(PipelineState &st, const std::vector<GateOp> &gates) {
    if (gates.empty()) return;
    SegmentLayout layout = compile_segment(gates);
    const auto &wp = layout.wp;
    const int rows = wp.graph.rows();

    std::vector<qotp::PadKey> in_keys;
    for (int q : layout.rows) in_keys.push_back(st.keys.at(static_cast<std::size_t>(q)));
    Rng client_rng = st.client_stream("sensitive");
    protocol::ClientSecrets secrets = protocol::ClientSecrets::sample(wp.pattern, client_rng);

    protocol::Transcript tr;
    tr.n = wp.graph.columns() - 1;
    tr.m = rows;
    protocol::Channel ch(tr);
    protocol::ClientState client(wp.pattern, in_keys, std::move(secrets));
    protocol::ServerState server(wp.graph, std::move(st.reg), layout.rows, st.server_stream("sensitive"));

    for (auto &m : protocol::client_prepare(client, std::nullopt)) ch.send(std::move(m));
    while (ch.pending(protocol::Party::server)) server.receive(ch.receive(protocol::Party::server));
    protocol::server_entangle(server);
    protocol::run_interaction(client, server, ch);
    protocol::FinalOutput fin = protocol::finalize_output(client, server, ch);

    const int logical = static_cast<int>(st.keys.size());
    std::vector<int> pos(static_cast<std::size_t>(logical), -1);
    for (int y = 0; y < rows; ++y) {
        pos[static_cast<std::size_t>(layout.rows[static_cast<std::size_t>(y)])] = fin.output_qubits[static_cast<std::size_t>(y)];
        st.keys[static_cast<std::size_t>(layout.rows[static_cast<std::size_t>(y)])] = fin.keys[static_cast<std::size_t>(y)];
    }
    std::size_t next_spectator = 0;
    for (auto &p : pos)
        if (p < 0) p = fin.spectators.at(next_spectator++);
    permute_to_logical(fin.reg, pos);
    st.reg = std::move(fin.reg);

    st.tally.cluster_qubits += wp.graph.node_count();
    st.tally.measurement_layers += wp.pattern.measurement_layers();
    st.transcripts.push_back(std::move(tr));
}

struct PipelineOptions {
    /// false: every qubit starts with key (0,0).
    bool encrypt_input = true;
};

/// Called after each segment with the segment index, the ciphertext register
/// and the client's keys. Test harnesses use it to compare against a
/// plaintext shadow.
using BoundaryProbe =
    std::function<void(std::size_t segment, const StateVector &reg, const std::vector<qotp::PadKey> &keys)>;

struct PipelineResult {
    StateVector final_state;  // decrypted by the client
    std::vector<protocol::Transcript> transcripts;
    ResourceReport report;
    ResourceTally tally;
    std::vector<KeySnapshot> key_history;
};

inline StateVector decrypt_register(StateVector reg, const std::vector<qotp::PadKey> &keys) {
    for (std::size_t q = 0; q < keys.size(); ++q) qotp::decrypt(reg, static_cast<int>(q), keys[q]);
    return reg;
}

inline PipelineResult run_pipeline(const CircuitSpec &spec, const StateVector &initial, std::uint64_t seed,
                                   const PipelineOptions &opts = {}, const BoundaryProbe &probe = {}) {
    spec.validate();
    if (initial.num_qubits() != spec.num_qubits) {
        throw std::invalid_argument("run_pipeline: initial state has " + std::to_string(initial.num_qubits()) +
                                    " qubits, spec needs " + std::to_string(spec.num_qubits));
    }
    PipelineState st;
    st.seed = seed;
    st.reg = initial;
    Rng key_rng(seed, "client/initial-keys");
    for (int q = 0; q < spec.num_qubits; ++q) {
        st.keys.push_back(opts.encrypt_input ? qotp::PadKey::random(key_rng) : qotp::PadKey{});
        qotp::encrypt(st.reg, q, st.keys.back());
    }
    PipelineResult out;
    out.key_history.push_back({"initial", st.keys});
    for (const auto &seg : spec.segments) {
        if (seg.tag == SegmentTag::public_segment) {
            run_public_segment(st, seg.gates);
        } else {
            run_sensitive_segment(st, seg.gates);
        }
        out.key_history.push_back(
            {std::string(tag_name(seg.tag)) + " segment " + std::to_string(st.segment_index), st.keys});
        if (probe) probe(st.segment_index, st.reg, st.keys);
        ++st.segment_index;
    }
    out.final_state = decrypt_register(st.reg, st.keys);
    out.transcripts = std::move(st.transcripts);
    out.tally = st.tally;
    out.report = {Mode::pbqc, st.tally.cluster_qubits, st.tally.measurement_layers, st.tally.public_depth + 1};
    return out;
}

}  // namespace pbqc
