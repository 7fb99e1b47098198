#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "pbqc/rng.hpp"
#include "pbqc/statevec.hpp"

namespace pbqc::qotp {

/// One-time-pad key for a qubit held as X^a Z^b |psi>. (0,0) is plaintext.
struct PadKey {
    std::uint8_t a = 0;
    std::uint8_t b = 0;

    constexpr PadKey() = default;
    constexpr PadKey(int a_bit, int b_bit)
        : a(static_cast<std::uint8_t>(a_bit & 1)), b(static_cast<std::uint8_t>(b_bit & 1)) {}

    static PadKey random(Rng &rng) {
        int a_bit = rng.bit();
        return PadKey(a_bit, rng.bit());
    }
    constexpr bool operator==(const PadKey &) const = default;
};

/// Key of the gadget's auxiliary state S^y Z^d |+>.
struct AuxKey {
    std::uint8_t y = 0;
    std::uint8_t d = 0;

    constexpr AuxKey() = default;
    constexpr AuxKey(int y_bit, int d_bit)
        : y(static_cast<std::uint8_t>(y_bit & 1)), d(static_cast<std::uint8_t>(d_bit & 1)) {}

    static AuxKey random(Rng &rng) {
        int y_bit = rng.bit();
        return AuxKey(y_bit, rng.bit());
    }
    constexpr bool operator==(const AuxKey &) const = default;
};

/// Classical traffic of one T-gadget run: client bit x, server outcome c.
struct GadgetTranscript {
    std::uint8_t x = 0;
    std::uint8_t c = 0;
    constexpr bool operator==(const GadgetTranscript &) const = default;
};

class UnsupportedGateError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Leaves the qubit as X^a Z^b |psi>: Z^b is applied first.
inline void encrypt(StateVector &state, int qubit, PadKey key) {
    if (key.b) state.apply_1q(single_qubit_matrix(Gate::z()), qubit);
    if (key.a) state.apply_1q(single_qubit_matrix(Gate::x()), qubit);
}

inline void decrypt(StateVector &state, int qubit, PadKey key) {
    if (key.a) state.apply_1q(single_qubit_matrix(Gate::x()), qubit);
    if (key.b) state.apply_1q(single_qubit_matrix(Gate::z()), qubit);
}

/// Key after evaluating a single-qubit Clifford on X^a Z^b |psi>.
inline PadKey update_clifford(GateKind gate, PadKey k) {
    switch (gate) {
        case GateKind::I:
        case GateKind::X:
        case GateKind::Z: return k;
        case GateKind::H: return PadKey(k.b, k.a);
        case GateKind::S: return PadKey(k.a, k.a ^ k.b);
        default: break;
    }
    throw UnsupportedGateError("update_clifford: no single-qubit key rule for " + Gate{gate}.name() +
                               (gate == GateKind::T ? " (T needs the gadget)" : ""));
}

/// Keys after CX(control, target).
inline std::pair<PadKey, PadKey> update_clifford(GateKind gate, PadKey control, PadKey target) {
    if (gate != GateKind::CX) {
        throw UnsupportedGateError("update_clifford: no two-qubit key rule for " + Gate{gate}.name());
    }
    return {PadKey(control.a, control.b ^ target.b), PadKey(control.a ^ target.a, target.b)};
}

/// Keys after CZ(a, b), composed as (I x H) CX (I x H) from the rules above.
inline std::pair<PadKey, PadKey> update_cz(PadKey first, PadKey second) {
    PadKey t = update_clifford(GateKind::H, second);
    auto [c, t2] = update_clifford(GateKind::CX, first, t);
    return {c, update_clifford(GateKind::H, t2)};
}

/// S^y Z^d |+>
inline StateVector prepare_aux(AuxKey key) {
    StateVector aux = prepare_plus_theta(Angle8{});
    if (key.d) aux.apply_1q(single_qubit_matrix(Gate::z()), 0);
    if (key.y) aux.apply_1q(single_qubit_matrix(Gate::s()), 0);
    return aux;
}

/// Key after the T gadget, given the server's outcome c.
inline PadKey t_gadget_key_update(PadKey k, AuxKey aux, int c) {
    c &= 1;
    return PadKey(k.a ^ c, (k.a & (c ^ aux.y ^ 1)) ^ k.b ^ aux.d ^ aux.y);
}

struct GadgetResult {
    PadKey key;  // key'' of the aux wire, which now sits at the data qubit's index
    GadgetTranscript transcript;
    double branch_probability = 1.0;  // Born probability of the observed c
};

/// Evaluate T on the encrypted data qubit with an aux qubit the client has
/// already transferred to `aux_qubit` (it must still be the fresh S^y Z^d|+>).
///
/// Server steps: T on data, CX (aux control, data target), computational
/// measurement of data -> c, S^x on aux with x = a xor y from the client.
/// The measured data qubit is reset, the aux wire is relabelled into the data
/// slot, and the spent qubit is released from the register. `forced_c`
/// takes that branch instead of sampling.
inline GadgetResult eval_t_gadget(StateVector &reg, int data_qubit, int aux_qubit, PadKey key, AuxKey aux_key,
                                  Rng &server_rng, std::optional<int> forced_c = std::nullopt) {
    if (aux_qubit == data_qubit) throw std::invalid_argument("eval_t_gadget: aux and data coincide");
    if (aux_qubit != reg.num_qubits() - 1) {
        throw std::invalid_argument("eval_t_gadget: aux must be the most recently appended qubit");
    }
    {
        const int aux_only[] = {aux_qubit};
        Eigen::MatrixXcd rho = reduced_density_matrix(reg, aux_only);
        Eigen::MatrixXcd expect = prepare_aux(aux_key).density_matrix();
        if ((rho - expect).cwiseAbs().maxCoeff() > 1e-9) {
            throw std::logic_error("eval_t_gadget: aux qubit is not freshly prepared");
        }
    }
    // client: control bit
    GadgetTranscript tr;
    tr.x = static_cast<std::uint8_t>(key.a ^ aux_key.y);

    // server
    reg.apply_1q(single_qubit_matrix(Gate::t()), data_qubit);
    reg.apply_cx(aux_qubit, data_qubit);
    const auto z_basis = MeasurementBasis::computational();
    double p;
    if (forced_c) {
        tr.c = static_cast<std::uint8_t>(*forced_c & 1);
        p = reg.project(data_qubit, z_basis, tr.c);
    } else {
        double p0 = reg.probability(data_qubit, z_basis, 0);
        tr.c = static_cast<std::uint8_t>(measure(reg, data_qubit, z_basis, server_rng));
        p = tr.c ? 1.0 - p0 : p0;
    }
    if (tr.x) reg.apply_1q(single_qubit_matrix(Gate::s()), aux_qubit);
    if (tr.c) reg.apply_1q(single_qubit_matrix(Gate::x()), data_qubit);
    reg.swap_qubits(data_qubit, aux_qubit);
    reg.release(aux_qubit);

    // client: key update
    return {t_gadget_key_update(key, aux_key, tr.c), tr, p};
}

/// Convenience form: the client's aux state is appended to the register first.
inline GadgetResult eval_t_gadget(StateVector &reg, int data_qubit, PadKey key, AuxKey aux_key, Rng &server_rng,
                                  std::optional<int> forced_c = std::nullopt) {
    int aux = reg.append(prepare_aux(aux_key));
    return eval_t_gadget(reg, data_qubit, aux, key, aux_key, server_rng, forced_c);
}

}  // namespace pbqc::qotp
