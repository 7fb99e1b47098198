#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "pbqc/circuit.hpp"
#include "pbqc/pipeline.hpp"
#include "pbqc/rng.hpp"

namespace pbqc {

/// Public H x H, sensitive oracle X X CZ X X, public diffusion H Z CZ H
/// (each single-qubit layer on both qubits).
inline CircuitSpec grover2_spec() {
    CircuitSpec s;
    s.num_qubits = 2;
    auto both = [](Gate g) { return std::vector<GateOp>{{g, {0}}, {g, {1}}}; };
    auto cat = [](std::vector<GateOp> a, const std::vector<GateOp> &b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    s.segments.push_back({SegmentTag::public_segment, both(Gate::h())});
    s.segments.push_back(
        {SegmentTag::sensitive_segment, cat(cat(both(Gate::x()), {{Gate::cz(), {0, 1}}}), both(Gate::x()))});
    s.segments.push_back({SegmentTag::public_segment,
                          cat(cat(cat(both(Gate::h()), both(Gate::z())), {{Gate::cz(), {0, 1}}}), both(Gate::h()))});
    return s;
}

/// Outcome label with qubit 0 written first.
inline std::string outcome_label(std::uint64_t index, int num_qubits) {
    std::string s;
    for (int q = 0; q < num_qubits; ++q) s += ((index >> q) & 1) ? '1' : '0';
    return s;
}

/// Computational-basis shots on a (decrypted) state.
inline std::map<std::string, int> sample_histogram(const StateVector &s, int shots, Rng &rng) {
    if (shots < 1) throw std::invalid_argument("shots must be at least 1");
    std::map<std::string, int> hist;
    for (std::uint64_t i = 0; i < s.dimension(); ++i) hist[outcome_label(i, s.num_qubits())] = 0;
    auto amps = s.amplitudes();
    for (int k = 0; k < shots; ++k) {
        double u = rng.uniform(), acc = 0;
        std::uint64_t pick = s.dimension() - 1;
        for (std::uint64_t i = 0; i < s.dimension(); ++i) {
            acc += std::norm(amps[i]);
            if (u < acc) {
                pick = i;
                break;
            }
        }
        ++hist[outcome_label(pick, s.num_qubits())];
    }
    return hist;
}

struct GroverDemo {
    std::map<std::string, int> histogram;
    StateVector final_state;  // decrypted, before the shots
    PipelineResult pipeline;
};

/// |00> padded by the client, run through the Grover pipeline, decrypted,
/// then measured `shots` times.
inline GroverDemo grover2_demo(std::uint64_t seed, int shots) {
    if (shots < 1) throw std::invalid_argument("shots must be at least 1");
    GroverDemo d;
    d.pipeline = run_pipeline(grover2_spec(), StateVector(2), seed);
    d.final_state = d.pipeline.final_state;
    Rng shot_rng(seed, "client/shots");
    d.histogram = sample_histogram(d.final_state, shots, shot_rng);
    return d;
}

}  // namespace pbqc
