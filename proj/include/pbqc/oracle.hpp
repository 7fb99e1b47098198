#pragma once

// Dense reference operators. Everything here is built from full 2^n x 2^n
// matrices and never calls the StateVector kernels, so results can be used
// to check them.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "pbqc/circuit.hpp"
#include "pbqc/mbqc.hpp"
#include "pbqc/statevec.hpp"

namespace pbqc::oracle {

/// Lift a k-qubit operator onto `targets` of an n-qubit space;
/// targets[0] is the low bit of `u`'s index.
inline Eigen::MatrixXcd embed(const Eigen::MatrixXcd &u, std::span<const int> targets, int n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    const int k = static_cast<int>(targets.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        Eigen::Index local = 0, rest = col;
        for (int j = 0; j < k; ++j) {
            local |= ((col >> targets[j]) & 1) << j;
            rest &= ~(Eigen::Index{1} << targets[j]);
        }
        for (Eigen::Index out = 0; out < (Eigen::Index{1} << k); ++out) {
            Eigen::Index row = rest;
            for (int j = 0; j < k; ++j) row |= ((out >> j) & 1) << targets[j];
            m(row, col) += u(out, local);
        }
    }
    return m;
}

inline Eigen::MatrixXcd embed(const Eigen::MatrixXcd &u, std::initializer_list<int> targets, int n) {
    return embed(u, std::span<const int>(targets.begin(), targets.size()), n);
}

inline Eigen::MatrixXcd mat(const Mat2 &m) {
    Eigen::MatrixXcd out(2, 2);
    out << m[0], m[1], m[2], m[3];
    return out;
}

inline Eigen::MatrixXcd circuit_unitary(int n, const std::vector<GateOp> &gates) {
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
    for (const auto &op : gates) u = embed(gate_matrix(op.gate), op.qubits, n) * u;
    return u;
}

/// X^a Z^b
inline Eigen::MatrixXcd pad(int a, int b) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2);
    if (b) m = gate_matrix(Gate::z()) * m;
    if (a) m = gate_matrix(Gate::x()) * m;
    return m;
}

/// Circuit a wire program is meant to implement, read off its chains and
/// links: at each column, links first, then that column's J on every row.
inline Eigen::MatrixXcd wire_program_unitary(const mbqc::WireProgram &prog) {
    const int n = static_cast<int>(prog.wires.size());
    const int len = static_cast<int>(prog.wires.at(0).size());
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
    Eigen::MatrixXcd cz = gate_matrix(Gate::cz());
    for (int i = 0; i <= len; ++i) {
        const int col = mbqc::chain_column(prog.mode, i);
        for (const auto &l : prog.links)
            if (l.column == col) u = embed(cz, {l.row_a, l.row_b}, n) * u;
        if (i == len) break;
        for (int y = 0; y < n; ++y) u = embed(mat(mbqc::j_matrix(prog.wires[static_cast<std::size_t>(y)].alphas[static_cast<std::size_t>(i)])), {y}, n) * u;
    }
    return u;
}

inline Eigen::VectorXcd vec(const StateVector &s) {
    auto a = s.amplitudes();
    return Eigen::Map<const Eigen::VectorXcd>(a.data(), static_cast<Eigen::Index>(a.size()));
}

inline double fidelity(const Eigen::VectorXcd &expected, const StateVector &s) {
    if (expected.size() != static_cast<Eigen::Index>(s.dimension())) return 0.0;
    return std::norm(expected.dot(vec(s)));
}

/// Equality up to global phase: min over phases of max |M1 - e^{i p} M2|.
inline double phase_distance(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b) {
    Eigen::Index r = 0, c = 0;
    b.cwiseAbs().maxCoeff(&r, &c);
    if (std::abs(b(r, c)) < 1e-15) return a.cwiseAbs().maxCoeff();
    Complex ph = a(r, c) / b(r, c);
    if (std::abs(ph) < 1e-15) return (a - b).cwiseAbs().maxCoeff();
    ph /= std::abs(ph);
    return (a - ph * b).cwiseAbs().maxCoeff();
}

}  // namespace pbqc::oracle
