#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbqc/angle.hpp"
#include "pbqc/rng.hpp"

namespace pbqc {

using Complex = std::complex<double>;
/// Row-major 2x2: {m00, m01, m10, m11}.
using Mat2 = std::array<Complex, 4>;

inline constexpr int kMaxQubits = 16;
inline constexpr double kNormTolerance = 1e-10;
/// Branches with probability below this are treated as numerically impossible.
inline constexpr double kDegenerateBranch = 1e-12;

class CapacityError : public std::length_error {
  public:
    using std::length_error::length_error;
};

/// Raised when a measurement is forced onto a branch of (numerically) zero weight.
class DegenerateBranchError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

enum class GateKind { I, H, X, Z, S, T, Rz, CX, CZ };

struct Gate {
    GateKind kind = GateKind::I;
    Angle8 angle{};  // only meaningful for Rz

    static constexpr Gate i() { return {GateKind::I}; }
    static constexpr Gate h() { return {GateKind::H}; }
    static constexpr Gate x() { return {GateKind::X}; }
    static constexpr Gate z() { return {GateKind::Z}; }
    static constexpr Gate s() { return {GateKind::S}; }
    static constexpr Gate t() { return {GateKind::T}; }
    static constexpr Gate rz(Angle8 a) { return {GateKind::Rz, a}; }
    static constexpr Gate cx() { return {GateKind::CX}; }
    static constexpr Gate cz() { return {GateKind::CZ}; }

    constexpr int arity() const { return (kind == GateKind::CX || kind == GateKind::CZ) ? 2 : 1; }
    constexpr bool operator==(const Gate &) const = default;

    std::string name() const {
        switch (kind) {
            case GateKind::I: return "I";
            case GateKind::H: return "H";
            case GateKind::X: return "X";
            case GateKind::Z: return "Z";
            case GateKind::S: return "S";
            case GateKind::T: return "T";
            case GateKind::Rz: return "RZ(" + std::to_string(angle.k()) + ")";
            case GateKind::CX: return "CX";
            case GateKind::CZ: return "CZ";
        }
        return "?";
    }
};

inline Complex phase(Angle8 a) { return std::polar(1.0, a.radians()); }

inline Mat2 single_qubit_matrix(Gate g) {
    const double r = 1.0 / std::sqrt(2.0);
    switch (g.kind) {
        case GateKind::I: return {1, 0, 0, 1};
        case GateKind::H: return {r, r, r, -r};
        case GateKind::X: return {0, 1, 1, 0};
        case GateKind::Z: return {1, 0, 0, -1};
        case GateKind::S: return {1, 0, 0, Complex(0, 1)};
        case GateKind::T: return {1, 0, 0, phase(Angle8(1))};
        case GateKind::Rz: return {1, 0, 0, phase(g.angle)};
        case GateKind::CX:
        case GateKind::CZ: break;
    }
    throw std::invalid_argument("single_qubit_matrix: " + g.name() + " is a two-qubit gate");
}

/// Dense matrix of a gate. For two-qubit gates the first target (the control
/// of CX) is the low bit of the 4-dim index.
inline Eigen::MatrixXcd gate_matrix(Gate g) {
    if (g.arity() == 1) {
        Mat2 m = single_qubit_matrix(g);
        Eigen::MatrixXcd out(2, 2);
        out << m[0], m[1], m[2], m[3];
        return out;
    }
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(4, 4);
    if (g.kind == GateKind::CZ) {
        out.diagonal() << 1, 1, 1, -1;
    } else {
        // control = bit 0, target = bit 1: |c t> with index c + 2t.
        out(0, 0) = 1;
        out(2, 2) = 1;
        out(3, 1) = 1;
        out(1, 3) = 1;
    }
    return out;
}

inline Mat2 mat_mul(const Mat2 &a, const Mat2 &b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3]};
}

/// Measurement basis. Outcome 0 is always the first listed vector: |0> for the
/// computational basis, |+_delta> for rotated_x(delta).
struct MeasurementBasis {
    enum class Kind { computational, rotated_x };
    Kind kind = Kind::computational;
    Angle8 delta{};

    static constexpr MeasurementBasis computational() { return {Kind::computational, Angle8{}}; }
    static constexpr MeasurementBasis rotated_x(Angle8 d) { return {Kind::rotated_x, d}; }

    /// Basis vector for `outcome` as (amplitude on |0>, amplitude on |1>).
    std::array<Complex, 2> vector(int outcome) const {
        if (kind == Kind::computational) {
            return outcome == 0 ? std::array<Complex, 2>{1, 0} : std::array<Complex, 2>{0, 1};
        }
        const double r = 1.0 / std::sqrt(2.0);
        Complex e = phase(delta) * r;
        return {r, outcome == 0 ? e : -e};
    }
};

class StateVector {
  public:
    /// |0...0> on `num_qubits` qubits.
    explicit StateVector(int num_qubits = 0) {
        check_capacity(num_qubits);
        num_qubits_ = num_qubits;
        amps_.assign(std::size_t{1} << num_qubits, Complex{0, 0});
        amps_[0] = 1;
    }

    static StateVector from_amplitudes(std::vector<Complex> amps) {
        std::size_t n = 0;
        while ((std::size_t{1} << n) < amps.size()) ++n;
        if (amps.empty() || (std::size_t{1} << n) != amps.size()) {
            throw std::invalid_argument("amplitude count must be a power of two");
        }
        check_capacity(static_cast<int>(n));
        StateVector s;
        s.num_qubits_ = static_cast<int>(n);
        s.amps_ = std::move(amps);
        double nrm = s.norm();
        if (std::abs(nrm - 1.0) > 1e-8) throw std::invalid_argument("amplitudes are not normalized");
        s.scale(1.0 / nrm);
        return s;
    }

    static StateVector single(Complex a0, Complex a1) { return from_amplitudes({a0, a1}); }

    static StateVector basis(int num_qubits, std::uint64_t index) {
        StateVector s(num_qubits);
        if (index >= s.amps_.size()) throw std::out_of_range("basis index out of range");
        s.amps_[0] = 0;
        s.amps_[index] = 1;
        return s;
    }

    int num_qubits() const { return num_qubits_; }
    std::size_t dimension() const { return amps_.size(); }
    std::span<const Complex> amplitudes() const { return amps_; }
    Complex amplitude(std::size_t i) const { return amps_.at(i); }

    double norm() const {
        double acc = 0;
        for (const auto &a : amps_) acc += std::norm(a);
        return std::sqrt(acc);
    }

    void apply_1q(const Mat2 &m, int q) {
        check_qubit(q);
        const std::size_t mask = std::size_t{1} << q;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) continue;
            Complex a = amps_[i], b = amps_[i | mask];
            amps_[i] = m[0] * a + m[1] * b;
            amps_[i | mask] = m[2] * a + m[3] * b;
        }
    }

    void apply_cx(int control, int target) {
        check_pair(control, target);
        const std::size_t cm = std::size_t{1} << control, tm = std::size_t{1} << target;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & cm) && !(i & tm)) std::swap(amps_[i], amps_[i | tm]);
        }
    }

    void apply_cz(int a, int b) {
        check_pair(a, b);
        const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & mask) == mask) amps_[i] = -amps_[i];
        }
    }

    /// Probability that measuring `q` in `basis` yields `outcome`.
    double probability(int q, const MeasurementBasis &basis, int outcome) const {
        check_qubit(q);
        auto v = basis.vector(outcome);
        const std::size_t mask = std::size_t{1} << q;
        double p = 0;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) continue;
            Complex c = std::conj(v[0]) * amps_[i] + std::conj(v[1]) * amps_[i | mask];
            p += std::norm(c);
        }
        return p;
    }

    /// Project `q` onto the `outcome` vector of `basis` and renormalize.
    /// Returns the branch probability.
    double project(int q, const MeasurementBasis &basis, int outcome) {
        double p = probability(q, basis, outcome);
        if (p < kDegenerateBranch) {
            throw DegenerateBranchError("projection onto a branch of probability " + std::to_string(p));
        }
        auto v = basis.vector(outcome);
        const std::size_t mask = std::size_t{1} << q;
        const double inv = 1.0 / std::sqrt(p);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) continue;
            Complex c = (std::conj(v[0]) * amps_[i] + std::conj(v[1]) * amps_[i | mask]) * inv;
            amps_[i] = c * v[0];
            amps_[i | mask] = c * v[1];
        }
        return p;
    }

    /// Tensor `other` onto the high end of the register. Returns the index of
    /// the first appended qubit.
    int append(const StateVector &other) {
        const int first = num_qubits_;
        check_capacity(num_qubits_ + other.num_qubits_);
        std::vector<Complex> out(amps_.size() * other.amps_.size());
        for (std::size_t j = 0; j < other.amps_.size(); ++j) {
            for (std::size_t i = 0; i < amps_.size(); ++i) {
                out[i | (j << num_qubits_)] = amps_[i] * other.amps_[j];
            }
        }
        amps_ = std::move(out);
        num_qubits_ += other.num_qubits_;
        return first;
    }

    /// Remove qubit `q`, which must be |0> and unentangled. Qubits above `q`
    /// shift down by one.
    void release(int q) {
        check_qubit(q);
        const std::size_t mask = std::size_t{1} << q;
        double leaked = 0;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & mask) leaked += std::norm(amps_[i]);
        }
        if (leaked > kNormTolerance) {
            throw std::logic_error("release: qubit " + std::to_string(q) + " is not in |0>");
        }
        std::vector<Complex> out(amps_.size() / 2);
        const std::size_t low = mask - 1;
        for (std::size_t k = 0; k < out.size(); ++k) {
            std::size_t i = (k & low) | ((k & ~low) << 1);
            out[k] = amps_[i];
        }
        amps_ = std::move(out);
        --num_qubits_;
        scale(1.0 / norm());
    }

    /// Relabel qubits a and b (a permutation of amplitudes, not a physical gate).
    void swap_qubits(int a, int b) {
        check_qubit(a);
        check_qubit(b);
        if (a == b) return;
        const std::size_t am = std::size_t{1} << a, bm = std::size_t{1} << b;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & am) && !(i & bm)) std::swap(amps_[i], amps_[(i & ~am) | bm]);
        }
    }

    Eigen::MatrixXcd density_matrix() const {
        Eigen::Map<const Eigen::VectorXcd> v(amps_.data(), static_cast<Eigen::Index>(amps_.size()));
        return v * v.adjoint();
    }

  private:
    static void check_capacity(int n) {
        if (n < 0 || n > kMaxQubits) {
            throw CapacityError("register of " + std::to_string(n) + " qubits exceeds the " +
                                std::to_string(kMaxQubits) + "-qubit capacity");
        }
    }
    void check_qubit(int q) const {
        if (q < 0 || q >= num_qubits_) {
            throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for " +
                                    std::to_string(num_qubits_) + " qubits");
        }
    }
    void check_pair(int a, int b) const {
        check_qubit(a);
        check_qubit(b);
        if (a == b) throw std::invalid_argument("two-qubit gate with duplicate targets");
    }
    void scale(double f) {
        for (auto &a : amps_) a *= f;
    }

    int num_qubits_ = 0;
    std::vector<Complex> amps_;
};

inline void apply_gate(StateVector &state, Gate gate, std::span<const int> targets) {
    if (static_cast<int>(targets.size()) != gate.arity()) {
        throw std::invalid_argument(gate.name() + " expects " + std::to_string(gate.arity()) + " target(s)");
    }
    switch (gate.kind) {
        case GateKind::CX: state.apply_cx(targets[0], targets[1]); return;
        case GateKind::CZ: state.apply_cz(targets[0], targets[1]); return;
        default: state.apply_1q(single_qubit_matrix(gate), targets[0]); return;
    }
}

inline void apply_gate(StateVector &state, Gate gate, std::initializer_list<int> targets) {
    apply_gate(state, gate, std::span<const int>(targets.begin(), targets.size()));
}

/// |+_theta> = (|0> + e^{i theta}|1>)/sqrt(2)
inline StateVector prepare_plus_theta(Angle8 theta) {
    const double r = 1.0 / std::sqrt(2.0);
    return StateVector::single(r, phase(theta) * r);
}

/// Sample an outcome from the Born rule and collapse. Outcome 0 is the first
/// basis vector.
inline int measure(StateVector &state, int q, const MeasurementBasis &basis, Rng &rng) {
    double p0 = state.probability(q, basis, 0);
    int outcome = rng.uniform() < p0 ? 0 : 1;
    state.project(q, basis, outcome);
    return outcome;
}

/// Measure in the computational basis and flip back to |0>.
inline int reset(StateVector &state, int q, Rng &rng) {
    int m = measure(state, q, MeasurementBasis::computational(), rng);
    if (m) state.apply_1q(single_qubit_matrix(Gate::x()), q);
    return m;
}

/// After `q` was projected onto `basis.vector(outcome)`, rotate it back to |0>
/// without consuming randomness.
inline void rotate_to_zero(StateVector &state, int q, const MeasurementBasis &basis, int outcome) {
    auto v = basis.vector(outcome);
    auto w = basis.vector(outcome ^ 1);
    state.apply_1q({std::conj(v[0]), std::conj(v[1]), std::conj(w[0]), std::conj(w[1])}, q);
}

/// |<s1|s2>|^2
inline double fidelity_up_to_phase(const StateVector &s1, const StateVector &s2) {
    if (s1.num_qubits() != s2.num_qubits()) {
        throw std::invalid_argument("fidelity_up_to_phase: qubit counts differ");
    }
    Complex acc = 0;
    auto a = s1.amplitudes(), b = s2.amplitudes();
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return std::norm(acc);
}

/// Partial trace onto `qubits`; qubits[0] becomes the low bit of the result.
inline Eigen::MatrixXcd reduced_density_matrix(const StateVector &state, std::span<const int> qubits) {
    if (qubits.empty()) throw std::invalid_argument("reduced_density_matrix: empty qubit set");
    const int n = state.num_qubits();
    std::uint64_t keep_mask = 0;
    for (int q : qubits) {
        if (q < 0 || q >= n) throw std::out_of_range("reduced_density_matrix: qubit out of range");
        if (keep_mask & (std::uint64_t{1} << q)) throw std::invalid_argument("reduced_density_matrix: repeated qubit");
        keep_mask |= std::uint64_t{1} << q;
    }
    const auto k = static_cast<int>(qubits.size());
    const Eigen::Index rows = Eigen::Index{1} << k;
    const Eigen::Index cols = Eigen::Index{1} << (n - k);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(rows, cols);
    auto amps = state.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        Eigen::Index r = 0, e = 0;
        for (int j = 0; j < k; ++j) r |= static_cast<Eigen::Index>((i >> qubits[j]) & 1) << j;
        int pos = 0;
        for (int q = 0; q < n; ++q) {
            if (keep_mask & (std::uint64_t{1} << q)) continue;
            e |= static_cast<Eigen::Index>((i >> q) & 1) << pos++;
        }
        a(r, e) = amps[i];
    }
    return a * a.adjoint();
}

inline Eigen::MatrixXcd reduced_density_matrix(const StateVector &state, std::initializer_list<int> qubits) {
    return reduced_density_matrix(state, std::span<const int>(qubits.begin(), qubits.size()));
}

/// Haar-ish random state from normalized complex Gaussians.
inline StateVector random_state(int num_qubits, Rng &rng) {
    std::vector<Complex> amps(std::size_t{1} << num_qubits);
    for (auto &a : amps) {
        double u1 = rng.uniform(), u2 = rng.uniform();
        double rad = std::sqrt(-2.0 * std::log(1.0 - u1));
        a = std::polar(rad, 2.0 * std::numbers::pi * u2);
    }
    double nrm = 0;
    for (auto &a : amps) nrm += std::norm(a);
    for (auto &a : amps) a /= std::sqrt(nrm);
    return StateVector::from_amplitudes(std::move(amps));
}

}  // namespace pbqc
