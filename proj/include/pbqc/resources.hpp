#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbqc/circuit.hpp"
#include "pbqc/mbqc.hpp"

namespace pbqc {

/// ASAP layering: each gate lands one layer after the latest gate on any of
/// its qubits.
inline int asap_depth(int num_qubits, const std::vector<GateOp> &gates) {
    std::vector<int> front(static_cast<std::size_t>(std::max(num_qubits, 0)), 0);
    int depth = 0;
    for (const auto &op : gates) {
        int layer = 0;
        for (int q : op.qubits) layer = std::max(layer, front.at(static_cast<std::size_t>(q)));
        ++layer;
        for (int q : op.qubits) front[static_cast<std::size_t>(q)] = layer;
        depth = std::max(depth, layer);
    }
    return depth;
}

/// A sensitive segment compiled onto the rows it touches. Row y of the
/// pattern is logical qubit `rows[y]`.
struct SegmentLayout {
    std::vector<int> rows;
    mbqc::WirePattern wp;
};

inline std::vector<int> touched_qubits(const std::vector<GateOp> &gates) {
    std::set<int> s;
    for (const auto &op : gates) s.insert(op.qubits.begin(), op.qubits.end());
    return {s.begin(), s.end()};
}

inline SegmentLayout compile_segment(const std::vector<GateOp> &gates) {
    std::vector<int> rows = touched_qubits(gates);
    if (rows.empty()) throw std::invalid_argument("compile_segment: empty segment");
    std::vector<GateOp> local;
    for (auto op : gates) {
        for (int &q : op.qubits) q = static_cast<int>(std::lower_bound(rows.begin(), rows.end(), q) - rows.begin());
        local.push_back(std::move(op));
    }
    auto prog = mbqc::compile_circuit(static_cast<int>(rows.size()), local, mbqc::InputColumn::encrypted);
    return {std::move(rows), mbqc::build_wire_patterns(prog)};
}

enum class Mode { full_ubqc, pbqc };

inline const char *mode_name(Mode m) { return m == Mode::full_ubqc ? "full_ubqc" : "pbqc"; }

inline Mode parse_mode(const std::string &s) {
    if (s == "full_ubqc") return Mode::full_ubqc;
    if (s == "pbqc") return Mode::pbqc;
    throw std::invalid_argument("unknown mode `" + s + "`");
}

struct ResourceReport {
    Mode mode = Mode::pbqc;
    int cluster_qubits = 0;
    int measurement_depth = 0;
    std::optional<int> circuit_depth;  // nullopt = not applicable

    bool operator==(const ResourceReport &) const = default;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["mode"] = mode_name(mode);
        j["cluster_qubits"] = cluster_qubits;
        j["measurement_depth"] = measurement_depth;
        if (circuit_depth) {
            j["circuit_depth"] = *circuit_depth;
        } else {
            j["circuit_depth"] = nullptr;
        }
        return j;
    }

    std::string to_text() const {
        return std::string("mode: ") + mode_name(mode) + "\ncluster_qubits: " + std::to_string(cluster_qubits) +
               "\nmeasurement_depth: " + std::to_string(measurement_depth) +
               "\ncircuit_depth: " + (circuit_depth ? std::to_string(*circuit_depth) : "N/A") + "\n";
    }
};

/// Counts taken from the constructed clusters.
///
/// full_ubqc: the whole circuit becomes one plus-state cluster (one row per
/// qubit); measurement depth is its measured columns plus the readout of the
/// output column.
///
/// pbqc: one encrypted-input cluster per non-empty sensitive segment,
/// counting its nodes and measured columns; circuit depth is the ASAP depth
/// of every public segment plus the final readout layer.
inline ResourceReport resource_report(const CircuitSpec &spec, Mode mode) {
    spec.validate();
    ResourceReport r;
    r.mode = mode;
    if (mode == Mode::full_ubqc) {
        auto prog = mbqc::compile_circuit(spec.num_qubits, spec.all_gates(), mbqc::InputColumn::plus_states);
        auto wp = mbqc::build_wire_patterns(prog);
        r.cluster_qubits = wp.graph.node_count();
        r.measurement_depth = wp.pattern.measurement_layers() + 1;
        return r;
    }
    int public_depth = 0;
    for (const auto &seg : spec.segments) {
        if (seg.tag == SegmentTag::public_segment) {
            public_depth += asap_depth(spec.num_qubits, seg.gates);
        } else if (!seg.gates.empty()) {
            auto layout = compile_segment(seg.gates);
            r.cluster_qubits += layout.wp.graph.node_count();
            r.measurement_depth += layout.wp.pattern.measurement_layers();
        }
    }
    r.circuit_depth = public_depth + 1;
    return r;
}

/// Inputs for the asymptotic cost rows. d = s + p.
struct ResourceParams {
    double n = 0;
    double d = 0;
    double s = 0;
    double p = 0;
    double tau = 0;
    std::optional<double> kappa;
    std::optional<double> poly_kappa;
    std::optional<double> h_m;
    std::optional<double> g_m;
    std::optional<double> N;

    void validate() const {
        for (double v : {n, d, s, p, tau}) {
            if (v < 0) throw std::invalid_argument("resource parameters must be nonnegative");
        }
        if (d != s + p) throw std::invalid_argument("resource parameters need d = s + p");
    }
};

enum class CostRow { bfk09, mf13, mantri17, succinct, sbqc, pbqc };

inline const char *row_name(CostRow r) {
    switch (r) {
        case CostRow::bfk09: return "BFK09";
        case CostRow::mf13: return "MF13";
        case CostRow::mantri17: return "Mantri17";
        case CostRow::succinct: return "Succinct";
        case CostRow::sbqc: return "SBQC";
        case CostRow::pbqc: return "PBQC";
    }
    return "?";
}

/// Leading term of one asymptotic cost entry; nullopt value renders as "---".
struct Cost {
    std::optional<double> value;
    std::string symbol;
    bool operator==(const Cost &o) const { return value == o.value; }
};

struct CostSummary {
    Cost client_qubits;
    Cost communication;
    Cost server_qubits;
    Cost meas_depth;
    Cost circuit_depth;
    std::string note;

    bool same_counts(const CostSummary &o) const {
        return client_qubits == o.client_qubits && communication == o.communication &&
               server_qubits == o.server_qubits && meas_depth == o.meas_depth && circuit_depth == o.circuit_depth;
    }
};

/// Cost entries with big-O dropped. The succinct row reports its offline
/// phase; the online phase is in `note`. PBQC's circuit-depth entry is "---"
/// when p = 0 (nothing runs outside the blind part).
inline CostSummary asymptotic_costs(const ResourceParams &pr, CostRow row) {
    pr.validate();
    auto need = [&](const std::optional<double> &v, const char *name) {
        if (!v) throw std::invalid_argument(std::string(row_name(row)) + " row needs parameter " + name);
        return *v;
    };
    const Cost none{std::nullopt, "---"};
    const double nd = pr.n * pr.d;
    switch (row) {
        case CostRow::bfk09:
        case CostRow::mf13: return {{1, "O(1)"}, {nd, "O(nd)"}, {nd, "O(nd)"}, {pr.d, "O(d)"}, none, ""};
        case CostRow::mantri17: {
            std::string note;
            if (pr.N) note = "entropy bound 1.388N = " + std::to_string(1.388 * *pr.N);
            return {{0, "0"}, {0, "0"}, {nd, "O(nd)"}, {pr.d, "O(d)"}, none, note};
        }
        case CostRow::succinct: {
            double k = need(pr.kappa, "kappa");
            double pk = need(pr.poly_kappa, "poly_kappa");
            return {{k, "O(kappa)"},
                    {pk * k, "O(poly(kappa)*kappa)"},
                    {k * nd, "O(kappa*nd)"},
                    {pr.d, "O(d)"},
                    none,
                    "online: 0 / 0 / " + std::to_string(nd)};
        }
        case CostRow::sbqc: {
            double h = need(pr.h_m, "h_m");
            double g = need(pr.g_m, "g_m");
            return {{1, "O(1)"}, {h, "O(h(m))"}, {g, "O(g(m))"}, {pr.d, "O(d)"}, none, ""};
        }
        case CostRow::pbqc: {
            double c = pr.n * pr.s + pr.tau;
            Cost circ = pr.p > 0 ? Cost{pr.p, "O(p)"} : none;
            return {{1, "O(1)"}, {c, "O(ns)+O(tau)"}, {c, "O(ns)+O(tau)"}, {pr.s, "O(s)"}, circ, ""};
        }
    }
    throw std::invalid_argument("unknown cost row");
}

}  // namespace pbqc
