#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pbqc/statevec.hpp"

namespace pbqc {

struct GateOp {
    Gate gate;
    std::vector<int> qubits;

    bool operator==(const GateOp &) const = default;
    std::string to_string() const {
        std::string out = gate.name();
        for (int q : qubits) out += " " + std::to_string(q);
        return out;
    }
};

inline void apply_gate(StateVector &state, const GateOp &op) { apply_gate(state, op.gate, op.qubits); }

enum class SegmentTag { public_segment, sensitive_segment };

inline const char *tag_name(SegmentTag t) { return t == SegmentTag::public_segment ? "public" : "sensitive"; }

struct Segment {
    SegmentTag tag = SegmentTag::public_segment;
    std::vector<GateOp> gates;
};

inline bool allowed_in_public(GateKind k) {
    switch (k) {
        case GateKind::H:
        case GateKind::X:
        case GateKind::Z:
        case GateKind::S:
        case GateKind::T:
        case GateKind::CX:
        case GateKind::CZ: return true;
        default: return false;
    }
}

/// Sensitive segments are compiled to measurement patterns; CX is lowered to
/// H CZ H there.
inline bool allowed_in_sensitive(GateKind) { return true; }

/// A circuit split into public (key-tracked) and sensitive (blind) segments.
struct CircuitSpec {
    int num_qubits = 0;
    std::vector<Segment> segments;

    void validate() const {
        if (num_qubits < 1) throw std::invalid_argument("circuit needs at least one qubit");
        if (num_qubits > kMaxQubits) {
            throw CapacityError("circuit requests " + std::to_string(num_qubits) + " qubits; capacity is " +
                                std::to_string(kMaxQubits));
        }
        for (const auto &seg : segments) {
            for (const auto &op : seg.gates) {
                if (static_cast<int>(op.qubits.size()) != op.gate.arity()) {
                    throw std::invalid_argument(op.gate.name() + ": wrong number of targets");
                }
                for (int q : op.qubits) {
                    if (q < 0 || q >= num_qubits) throw std::out_of_range("gate target out of range: " + op.to_string());
                }
                if (op.gate.arity() == 2 && op.qubits[0] == op.qubits[1]) {
                    throw std::invalid_argument("duplicate targets: " + op.to_string());
                }
                if (seg.tag == SegmentTag::public_segment && !allowed_in_public(op.gate.kind)) {
                    throw std::invalid_argument("gate not allowed in a public segment: " + op.to_string());
                }
            }
        }
    }

    std::vector<GateOp> all_gates() const {
        std::vector<GateOp> out;
        for (const auto &seg : segments) out.insert(out.end(), seg.gates.begin(), seg.gates.end());
        return out;
    }

    std::string to_text() const {
        std::string out = "qubits " + std::to_string(num_qubits) + "\n";
        for (const auto &seg : segments) {
            out += std::string("segment ") + tag_name(seg.tag) + "\n";
            for (const auto &op : seg.gates) out += op.to_string() + "\n";
        }
        return out;
    }
};

class ParseError : public std::runtime_error {
  public:
    ParseError(int line, const std::string &msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

namespace detail {

inline std::optional<Gate> gate_from_name(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    if (name == "I") return Gate::i();
    if (name == "H") return Gate::h();
    if (name == "X") return Gate::x();
    if (name == "Z") return Gate::z();
    if (name == "S") return Gate::s();
    if (name == "T") return Gate::t();
    if (name == "CX" || name == "CNOT") return Gate::cx();
    if (name == "CZ") return Gate::cz();
    if (name.starts_with("RZ(") && name.ends_with(")")) {
        std::string arg = name.substr(3, name.size() - 4);
        if (arg.empty() || arg.size() > 3) return std::nullopt;
        for (char c : arg) {
            if (!std::isdigit(static_cast<unsigned char>(c)) && c != '-') return std::nullopt;
        }
        try {
            return Gate::rz(Angle8(std::stoi(arg)));
        } catch (const std::exception &) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// Text form:
///
///     qubits 2
///     segment public
///     H 0
///     segment sensitive
///     CZ 0 1
///     RZ(3) 1          # angle 3*pi/4
///
/// `#` starts a comment. Gate names are case-insensitive.
inline CircuitSpec parse_circuit_spec(std::string_view text) {
    CircuitSpec spec;
    bool have_qubits = false;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
        std::istringstream words(raw);
        std::vector<std::string> tok;
        for (std::string w; words >> w;) tok.push_back(w);
        if (tok.empty()) continue;

        if (tok[0] == "qubits") {
            if (have_qubits) throw ParseError(line_no, "duplicate qubits line");
            if (tok.size() != 2) throw ParseError(line_no, "expected `qubits <count>`");
            try {
                spec.num_qubits = std::stoi(tok[1]);
            } catch (const std::exception &) {
                throw ParseError(line_no, "bad qubit count `" + tok[1] + "`");
            }
            if (spec.num_qubits < 1) throw ParseError(line_no, "qubit count must be positive");
            if (spec.num_qubits > kMaxQubits) {
                throw CapacityError("line " + std::to_string(line_no) + ": circuit requests " + tok[1] +
                                    " qubits; capacity is " + std::to_string(kMaxQubits));
            }
            have_qubits = true;
            continue;
        }
        if (!have_qubits) throw ParseError(line_no, "`qubits <count>` must come first");
        if (tok[0] == "segment") {
            if (tok.size() != 2) throw ParseError(line_no, "expected `segment public|sensitive`");
            if (tok[1] == "public") {
                spec.segments.push_back({SegmentTag::public_segment, {}});
            } else if (tok[1] == "sensitive") {
                spec.segments.push_back({SegmentTag::sensitive_segment, {}});
            } else {
                throw ParseError(line_no, "unknown segment tag `" + tok[1] + "`");
            }
            continue;
        }
        if (spec.segments.empty()) throw ParseError(line_no, "gate outside of a segment");
        auto gate = detail::gate_from_name(tok[0]);
        if (!gate) throw ParseError(line_no, "unknown gate `" + tok[0] + "`");
        GateOp op{*gate, {}};
        for (std::size_t i = 1; i < tok.size(); ++i) {
            std::size_t used = 0;
            int q = -1;
            try {
                q = std::stoi(tok[i], &used);
            } catch (const std::exception &) {
            }
            if (used != tok[i].size() || q < 0) throw ParseError(line_no, "bad qubit index `" + tok[i] + "`");
            if (q >= spec.num_qubits) throw ParseError(line_no, "qubit " + tok[i] + " out of range");
            op.qubits.push_back(q);
        }
        if (static_cast<int>(op.qubits.size()) != gate->arity()) {
            throw ParseError(line_no, gate->name() + " takes " + std::to_string(gate->arity()) + " qubit(s)");
        }
        if (op.gate.arity() == 2 && op.qubits[0] == op.qubits[1]) {
            throw ParseError(line_no, "duplicate targets");
        }
        if (spec.segments.back().tag == SegmentTag::public_segment && !allowed_in_public(op.gate.kind)) {
            throw ParseError(line_no, gate->name() + " is not allowed in a public segment");
        }
        spec.segments.back().gates.push_back(std::move(op));
    }
    if (!have_qubits) throw ParseError(line_no, "missing `qubits <count>`");
    spec.validate();
    return spec;
}

/// Plaintext reference: apply every gate of the spec directly.
inline void simulate_plaintext(StateVector &state, const std::vector<GateOp> &gates) {
    for (const auto &op : gates) apply_gate(state, op);
}

}  // namespace pbqc
