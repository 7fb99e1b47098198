#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pbqc/angle.hpp"
#include "pbqc/circuit.hpp"
#include "pbqc/qotp.hpp"
#include "pbqc/rng.hpp"
#include "pbqc/statevec.hpp"

namespace pbqc::mbqc {

/// Grid position: column x, row y. Ordering is column-major, which is also
/// the measurement order.
struct NodeId {
    int col = 0;
    int row = 0;

    auto operator<=>(const NodeId &) const = default;
    std::string to_string() const { return std::to_string(col) + "," + std::to_string(row); }
};

enum class EdgeKind { cz, cx_first_column };

/// For cx_first_column edges `a` is the column-0 node (CX target) and `b` the
/// column-1 node (CX control).
struct Edge {
    NodeId a;
    NodeId b;
    EdgeKind kind = EdgeKind::cz;
};

/// How the first column enters the cluster.
///   encrypted:   column 0 holds (possibly one-time-padded) inputs, joined to
///                column 1 by CX and measured in the computational basis.
///   plus_states: every node starts as |+>; column 0 is the first measured
///                column.
enum class InputColumn { encrypted, plus_states };

class GraphError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Full columns x rows grid of nodes plus an explicit edge list.
class ClusterGraph {
  public:
    ClusterGraph(int columns, int rows, InputColumn input) : columns_(columns), rows_(rows), input_(input) {
        if (columns < 1 || rows < 1) throw GraphError("cluster graph needs at least one row and one column");
        if (input == InputColumn::encrypted && columns < 2) {
            throw GraphError("an encrypted-input cluster needs an input and an output column");
        }
    }

    int columns() const { return columns_; }
    int rows() const { return rows_; }
    int node_count() const { return columns_ * rows_; }
    InputColumn input() const { return input_; }
    const std::vector<Edge> &edges() const { return edges_; }

    bool contains(NodeId n) const { return n.col >= 0 && n.col < columns_ && n.row >= 0 && n.row < rows_; }

    bool has_edge(NodeId u, NodeId v) const {
        return std::any_of(edges_.begin(), edges_.end(), [&](const Edge &e) {
            return (e.a == u && e.b == v) || (e.a == v && e.b == u);
        });
    }

    void add_edge(NodeId u, NodeId v, EdgeKind kind) {
        if (!contains(u) || !contains(v)) {
            throw GraphError("edge " + u.to_string() + " - " + v.to_string() + " references a missing node");
        }
        if (u == v) throw GraphError("self-loop at " + u.to_string());
        if (has_edge(u, v)) throw GraphError("duplicate edge " + u.to_string() + " - " + v.to_string());
        if (kind == EdgeKind::cx_first_column) {
            if (u.col > v.col) std::swap(u, v);
            if (input_ != InputColumn::encrypted || u.col != 0 || v.col != 1 || u.row != v.row) {
                throw GraphError("cx_first_column edges must join (0,y) and (1,y) of an encrypted-input cluster");
            }
        } else if (input_ == InputColumn::encrypted && (u.col == 0 || v.col == 0)) {
            throw GraphError("input column nodes may only carry the cx_first_column edge");
        }
        edges_.push_back({u, v, kind});
    }

    std::vector<NodeId> neighbors(NodeId n) const {
        std::vector<NodeId> out;
        for (const auto &e : edges_) {
            if (e.a == n) out.push_back(e.b);
            if (e.b == n) out.push_back(e.a);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<NodeId> nodes() const {
        std::vector<NodeId> out;
        for (int x = 0; x < columns_; ++x)
            for (int y = 0; y < rows_; ++y) out.push_back({x, y});
        return out;
    }

  private:
    int columns_;
    int rows_;
    InputColumn input_;
    std::vector<Edge> edges_;
};

enum class NodeRole { input, measured, output };

inline const char *role_name(NodeRole r) {
    switch (r) {
        case NodeRole::input: return "input";
        case NodeRole::measured: return "measured";
        case NodeRole::output: return "output";
    }
    return "?";
}

struct NodeCommand {
    NodeId node;
    NodeRole role = NodeRole::measured;
    Angle8 angle{};  // target angle phi; unused for input and output nodes
    std::vector<NodeId> x_deps;
    std::vector<NodeId> z_deps;
};

/// Target angles plus flow dependencies, in measurement order: input column,
/// then measured nodes column by column, then outputs.
class MeasurementPattern {
  public:
    MeasurementPattern() = default;
    MeasurementPattern(int columns, int rows, std::vector<NodeCommand> commands)
        : columns_(columns), rows_(rows), commands_(std::move(commands)) {
        for (std::size_t i = 0; i < commands_.size(); ++i) index_[commands_[i].node] = i;
        check_causality();
    }

    int columns() const { return columns_; }
    int rows() const { return rows_; }
    const std::vector<NodeCommand> &commands() const { return commands_; }

    const NodeCommand &at(NodeId n) const {
        auto it = index_.find(n);
        if (it == index_.end()) throw std::out_of_range("pattern has no node " + n.to_string());
        return commands_[it->second];
    }
    bool contains(NodeId n) const { return index_.count(n) != 0; }
    std::size_t position(NodeId n) const { return index_.at(n); }

    std::vector<NodeId> nodes_with_role(NodeRole role) const {
        std::vector<NodeId> out;
        for (const auto &c : commands_)
            if (c.role == role) out.push_back(c.node);
        return out;
    }

    /// Sequential measurement rounds: distinct columns holding input or
    /// measured nodes.
    int measurement_layers() const {
        std::set<int> cols;
        for (const auto &c : commands_)
            if (c.role != NodeRole::output) cols.insert(c.node.col);
        return static_cast<int>(cols.size());
    }

    /// Every dependency must point at a node measured strictly earlier.
    void check_causality() const {
        for (std::size_t i = 0; i < commands_.size(); ++i) {
            const auto &c = commands_[i];
            for (const auto *deps : {&c.x_deps, &c.z_deps}) {
                for (const auto &d : *deps) {
                    auto it = index_.find(d);
                    if (it == index_.end() || it->second >= i || commands_[it->second].role == NodeRole::output) {
                        throw GraphError("dependency " + d.to_string() + " of node " + c.node.to_string() +
                                         " is not measured before it");
                    }
                }
            }
        }
    }

    /// Deterministic human-readable listing, one node per line.
    std::string listing() const {
        std::string out = "pattern columns=" + std::to_string(columns_) + " rows=" + std::to_string(rows_) + "\n";
        auto deps = [](const std::vector<NodeId> &v) {
            std::string s = "[";
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i].to_string();
            return s + "]";
        };
        for (const auto &c : commands_) {
            out += "node " + c.node.to_string() + " " + role_name(c.role);
            if (c.role == NodeRole::measured) out += " angle " + std::to_string(c.angle.k());
            out += " x " + deps(c.x_deps) + " z " + deps(c.z_deps) + "\n";
        }
        return out;
    }

  private:
    int columns_ = 0;
    int rows_ = 0;
    std::vector<NodeCommand> commands_;
    std::map<NodeId, std::size_t> index_;
};

/// phi' = (-1)^sx * phi + sz * pi
constexpr Angle8 corrected_angle(Angle8 phi, int sx_parity, int sz_parity) {
    return phi.signed_by(sx_parity).plus_pi_times(sz_parity);
}

/// XOR of `value(d)` over the node's X and Z dependency sets.
template <class ValueFn>
std::pair<int, int> parities(const NodeCommand &c, ValueFn &&value) {
    int sx = 0, sz = 0;
    for (const auto &d : c.x_deps) sx ^= value(d) & 1;
    for (const auto &d : c.z_deps) sz ^= value(d) & 1;
    return {sx, sz};
}

/// Standard flow for row chains joined by vertical (same-column) CZ edges:
///   X deps of (x,y): {(x-1,y)}
///   Z deps of (x,y): {(x-2,y)} plus {(x-1,y') : (x,y)-(x,y') is a vertical edge}
/// Angles default to 0 for measured nodes not present in `angles`.
inline MeasurementPattern derive_flow(const ClusterGraph &g, const std::map<NodeId, Angle8> &angles) {
    for (const auto &e : g.edges()) {
        bool horizontal = e.a.row == e.b.row && std::abs(e.a.col - e.b.col) == 1;
        bool vertical = e.a.col == e.b.col;
        if (!horizontal && !vertical) {
            throw GraphError("no chain flow for diagonal edge " + e.a.to_string() + " - " + e.b.to_string());
        }
    }
    for (int y = 0; y < g.rows(); ++y) {
        for (int x = 0; x + 1 < g.columns(); ++x) {
            if (!g.has_edge({x, y}, {x + 1, y})) {
                throw GraphError("row " + std::to_string(y) + " is not a chain at column " + std::to_string(x));
            }
        }
    }
    for (const auto &[node, _] : angles) {
        if (!g.contains(node)) throw GraphError("angle given for missing node " + node.to_string());
    }

    std::vector<NodeCommand> cmds;
    const int last = g.columns() - 1;
    for (const auto &n : g.nodes()) {
        NodeCommand c;
        c.node = n;
        if (n.col == last) {
            c.role = NodeRole::output;
        } else if (n.col == 0 && g.input() == InputColumn::encrypted) {
            c.role = NodeRole::input;
        } else {
            c.role = NodeRole::measured;
            if (auto it = angles.find(n); it != angles.end()) c.angle = it->second;
        }
        if (c.role == NodeRole::input) {
            cmds.push_back(std::move(c));
            continue;
        }
        if (n.col >= 1) c.x_deps.push_back({n.col - 1, n.row});
        if (n.col >= 2) c.z_deps.push_back({n.col - 2, n.row});
        if (n.col >= 1) {
            for (const auto &nb : g.neighbors(n)) {
                if (nb.col == n.col) c.z_deps.push_back({n.col - 1, nb.row});
            }
        }
        std::sort(c.z_deps.begin(), c.z_deps.end());
        cmds.push_back(std::move(c));
    }
    return MeasurementPattern(g.columns(), g.rows(), std::move(cmds));
}

/// J(alpha_k) ... J(alpha_1); alphas[0] is applied first.
struct JChain {
    std::vector<Angle8> alphas;

    JChain() = default;
    JChain(std::initializer_list<Angle8> a) : alphas(a) {}
    explicit JChain(std::vector<Angle8> a) : alphas(std::move(a)) {}

    std::size_t size() const { return alphas.size(); }
    bool operator==(const JChain &) const = default;
};

/// J(alpha) = H Rz(alpha)
inline Mat2 j_matrix(Angle8 alpha) {
    return mat_mul(single_qubit_matrix(Gate::h()), single_qubit_matrix(Gate::rz(alpha)));
}

inline Mat2 chain_matrix(const JChain &chain) {
    Mat2 m = single_qubit_matrix(Gate::i());
    for (Angle8 a : chain.alphas) m = mat_mul(j_matrix(a), m);
    return m;
}

class UnsupportedGateError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// S and T are accepted as Rz(pi/2) and Rz(pi/4).
inline JChain decompose_to_j_chain(Gate g) {
    const Angle8 zero{}, pi = Angle8::pi();
    switch (g.kind) {
        case GateKind::I: return {zero, zero};
        case GateKind::H: return {zero};
        case GateKind::X: return {zero, pi};
        case GateKind::Z: return {pi, zero};
        case GateKind::S: return {Angle8(2), zero};
        case GateKind::T: return {Angle8(1), zero};
        case GateKind::Rz: return {g.angle, zero};
        default: break;
    }
    throw UnsupportedGateError("decompose_to_j_chain: " + g.name() + " is not a single-qubit gate");
}

/// Identity of odd length: (H S)^3 is proportional to I.
inline JChain odd_identity() { return {Angle8(2), Angle8(2), Angle8(2)}; }

/// CZ at `column` between two rows.
struct CrossLink {
    int column = 0;
    int row_a = 0;
    int row_b = 0;
    bool operator==(const CrossLink &) const = default;
};

struct WirePattern {
    ClusterGraph graph;
    MeasurementPattern pattern;
};

/// Column of the node that carries J number `index` (0-based) of a chain.
constexpr int chain_column(InputColumn mode, int index) {
    return mode == InputColumn::encrypted ? index + 1 : index;
}

/// One linear CZ chain per row realizing its J chain, plus vertical CZ edges
/// for the cross links. A cross link at column c acts on the logical state
/// held by column c before that column's J is applied; the last column holds
/// the outputs. Measuring at angle phi implements J(-phi), so each alpha is
/// stored as phi = -alpha.
inline WirePattern build_wire_patterns(std::span<const JChain> wires, std::span<const CrossLink> links,
                                       InputColumn mode = InputColumn::encrypted) {
    if (wires.empty()) throw GraphError("build_wire_patterns: no wires");
    const std::size_t len = wires[0].size();
    for (const auto &w : wires) {
        if (w.size() == 0) throw GraphError("build_wire_patterns: empty J chain");
        if (w.size() != len) throw GraphError("build_wire_patterns: rows have unequal length after padding");
    }
    const int rows = static_cast<int>(wires.size());
    const int L = static_cast<int>(len);
    const int columns = mode == InputColumn::encrypted ? L + 2 : L + 1;
    ClusterGraph g(columns, rows, mode);
    for (int y = 0; y < rows; ++y) {
        int x0 = 0;
        if (mode == InputColumn::encrypted) {
            g.add_edge({0, y}, {1, y}, EdgeKind::cx_first_column);
            x0 = 1;
        }
        for (int x = x0; x + 1 < columns; ++x) g.add_edge({x, y}, {x + 1, y}, EdgeKind::cz);
    }
    const int min_col = mode == InputColumn::encrypted ? 1 : 0;
    for (const auto &l : links) {
        if (l.column < min_col || l.column >= columns || l.row_a == l.row_b || l.row_a < 0 || l.row_b < 0 ||
            l.row_a >= rows || l.row_b >= rows) {
            throw GraphError("dangling cross link at column " + std::to_string(l.column) + " rows " +
                             std::to_string(l.row_a) + "," + std::to_string(l.row_b));
        }
        g.add_edge({l.column, l.row_a}, {l.column, l.row_b}, EdgeKind::cz);
    }
    std::map<NodeId, Angle8> angles;
    for (int y = 0; y < rows; ++y) {
        for (int i = 0; i < L; ++i) angles[{chain_column(mode, i), y}] = -wires[y].alphas[i];
    }
    MeasurementPattern p = derive_flow(g, angles);
    return {std::move(g), std::move(p)};
}

/// Wire-level program for a gate list: a J chain per row plus cross links.
struct WireProgram {
    std::vector<JChain> wires;
    std::vector<CrossLink> links;
    InputColumn mode = InputColumn::encrypted;
};

namespace detail {

inline void append(JChain &w, const JChain &c) { w.alphas.insert(w.alphas.end(), c.alphas.begin(), c.alphas.end()); }

/// Pad the shorter of two rows with identity chains until lengths agree.
inline void align(JChain &u, JChain &v) {
    while (u.size() != v.size()) {
        JChain &shorter = u.size() < v.size() ? u : v;
        std::size_t diff = (u.size() < v.size() ? v.size() - u.size() : u.size() - v.size());
        append(shorter, diff % 2 ? odd_identity() : decompose_to_j_chain(Gate::i()));
    }
}

}  // namespace detail

/// Compile a gate list over rows 0..num_rows-1 to wires.
///
/// Encrypted mode starts each row from its input state. Plus-state mode
/// starts from |+>, so an H is prepended to reach |0>; a leading H gate on a
/// row cancels against it. CX is lowered to H CZ H. Rows are padded with
/// identity pairs J(0)J(0) (or the odd identity J(pi/2)^3 when the parity of
/// the gap is odd) so that CZ partners and the final column line up.
inline WireProgram compile_circuit(int num_rows, const std::vector<GateOp> &gates,
                                   InputColumn mode = InputColumn::encrypted) {
    if (num_rows < 1) throw GraphError("compile_circuit: need at least one row");
    WireProgram prog;
    prog.mode = mode;
    prog.wires.resize(static_cast<std::size_t>(num_rows));
    std::vector<bool> pending_h(static_cast<std::size_t>(num_rows), mode == InputColumn::plus_states);

    auto row_ref = [&](int q) -> JChain & {
        if (q < 0 || q >= num_rows) throw std::out_of_range("compile_circuit: row out of range");
        return prog.wires[static_cast<std::size_t>(q)];
    };
    auto flush_h = [&](int q) {
        if (pending_h[static_cast<std::size_t>(q)]) {
            pending_h[static_cast<std::size_t>(q)] = false;
            detail::append(row_ref(q), decompose_to_j_chain(Gate::h()));
        }
    };
    auto single = [&](Gate g, int q) {
        if (pending_h[static_cast<std::size_t>(q)] && g.kind == GateKind::H) {
            pending_h[static_cast<std::size_t>(q)] = false;
            return;
        }
        flush_h(q);
        detail::append(row_ref(q), decompose_to_j_chain(g));
    };
    auto cz = [&](int a, int b) {
        if (a == b) throw std::invalid_argument("compile_circuit: CZ with duplicate targets");
        flush_h(a);
        flush_h(b);
        JChain &u = row_ref(a);
        JChain &v = row_ref(b);
        detail::align(u, v);
        auto column = [&] { return chain_column(mode, static_cast<int>(u.size())); };
        auto taken = [&] {
            return std::any_of(prog.links.begin(), prog.links.end(), [&](const CrossLink &l) {
                return l.column == column() && ((l.row_a == a && l.row_b == b) || (l.row_a == b && l.row_b == a));
            });
        };
        if (taken()) {
            detail::append(u, decompose_to_j_chain(Gate::i()));
            detail::append(v, decompose_to_j_chain(Gate::i()));
        }
        prog.links.push_back({column(), std::min(a, b), std::max(a, b)});
    };

    for (const auto &op : gates) {
        switch (op.gate.kind) {
            case GateKind::CZ: cz(op.qubits.at(0), op.qubits.at(1)); break;
            case GateKind::CX:
                single(Gate::h(), op.qubits.at(1));
                cz(op.qubits.at(0), op.qubits.at(1));
                single(Gate::h(), op.qubits.at(1));
                break;
            default:
                if (op.qubits.size() != 1) throw std::invalid_argument("compile_circuit: bad targets for " + op.to_string());
                single(op.gate, op.qubits[0]);
                break;
        }
    }
    for (int q = 0; q < num_rows; ++q) flush_h(q);

    // Equalize row lengths; every row needs at least one J.
    for (;;) {
        std::size_t target = 1;
        for (const auto &w : prog.wires) target = std::max(target, w.size());
        bool changed = false;
        for (auto &w : prog.wires) {
            if (w.size() == target) continue;
            std::size_t diff = target - w.size();
            detail::append(w, diff % 2 ? odd_identity() : decompose_to_j_chain(Gate::i()));
            changed = true;
        }
        if (!changed) break;
    }
    return prog;
}

inline WirePattern build_wire_patterns(const WireProgram &prog) {
    return build_wire_patterns(prog.wires, prog.links, prog.mode);
}

/// X, CZ, X on two rows: 2 input nodes, 8 auxiliary nodes, 2 outputs, with
/// 5 measured columns (the input column plus four J columns).
inline WirePattern build_grover_oracle_pattern() {
    const std::vector<GateOp> oracle = {{Gate::x(), {0}}, {Gate::x(), {1}}, {Gate::cz(), {0, 1}},
                                        {Gate::x(), {0}}, {Gate::x(), {1}}};
    WirePattern wp = build_wire_patterns(compile_circuit(2, oracle, InputColumn::encrypted));
    if (wp.graph.node_count() != 12 || wp.pattern.measurement_layers() != 5) {
        throw std::logic_error("grover oracle layout does not have 12 nodes and 5 measurement layers");
    }
    return wp;
}

/// Brickwork graph with `n` columns and `m` rows (all nodes start as |+>).
/// With 1-based column j and row i, bricks join rows i and i+1 at columns j
/// and j+2 for j = 3 mod 8 with i odd, and j = 7 mod 8 with i even. Bricks
/// that would leave the grid are dropped, so any n, m >= 1 is accepted.
inline ClusterGraph build_brickwork(int n, int m) {
    if (n < 1 || m < 1) throw GraphError("build_brickwork: dimensions must be positive");
    ClusterGraph g(n, m, InputColumn::plus_states);
    for (int y = 0; y < m; ++y)
        for (int x = 0; x + 1 < n; ++x) g.add_edge({x, y}, {x + 1, y}, EdgeKind::cz);
    for (int j = 1; j <= n; ++j) {
        for (int i = 1; i < m; ++i) {
            bool brick = (j % 8 == 3 && i % 2 == 1) || (j % 8 == 7 && i % 2 == 0);
            if (!brick) continue;
            for (int jj : {j, j + 2}) {
                if (jj <= n) g.add_edge({jj - 1, i - 1}, {jj - 1, i}, EdgeKind::cz);
            }
        }
    }
    return g;
}

struct ExecutionResult {
    StateVector output;                    // row y of the output column is qubit y
    std::vector<qotp::PadKey> byproducts;  // X^a Z^b left on each output row
    std::map<NodeId, int> outcomes;
    int peak_qubits = 0;
};

/// Plain (non-blind) execution of a pattern. Nodes are allocated only when a
/// neighbour is about to be measured and released right after their own
/// measurement, so the live register stays close to two columns wide.
///
/// `input` is the column-0 register (one qubit per row) for encrypted-input
/// graphs and must be empty otherwise. With `apply_corrections` the output
/// byproducts are undone before returning.
inline ExecutionResult execute_pattern(const ClusterGraph &g, const MeasurementPattern &p,
                                       const std::optional<StateVector> &input, Rng &rng,
                                       bool apply_corrections = true) {
    if (p.columns() != g.columns() || p.rows() != g.rows()) {
        throw GraphError("execute_pattern: pattern and graph dimensions differ");
    }
    ExecutionResult res;
    std::map<NodeId, int> qubit_of;
    StateVector state(0);
    if (g.input() == InputColumn::encrypted) {
        if (!input || input->num_qubits() != g.rows()) {
            throw std::invalid_argument("execute_pattern: need one input qubit per row");
        }
        state = *input;
        for (int y = 0; y < g.rows(); ++y) qubit_of[{0, y}] = y;
    } else if (input && input->num_qubits() != 0) {
        throw std::invalid_argument("execute_pattern: plus-state clusters take no input");
    }
    res.peak_qubits = state.num_qubits();

    std::vector<bool> applied(g.edges().size(), false);
    auto ensure = [&](NodeId n) {
        if (qubit_of.count(n)) return;
        qubit_of[n] = state.append(prepare_plus_theta(Angle8{}));
        res.peak_qubits = std::max(res.peak_qubits, state.num_qubits());
    };
    auto entangle_around = [&](NodeId n) {
        for (std::size_t i = 0; i < g.edges().size(); ++i) {
            const Edge &e = g.edges()[i];
            if (applied[i] || (e.a != n && e.b != n)) continue;
            ensure(e.a);
            ensure(e.b);
            if (e.kind == EdgeKind::cx_first_column) {
                state.apply_cx(qubit_of[e.b], qubit_of[e.a]);
            } else {
                state.apply_cz(qubit_of[e.a], qubit_of[e.b]);
            }
            applied[i] = true;
        }
    };
    auto release = [&](NodeId n) {
        int q = qubit_of.at(n);
        state.release(q);
        qubit_of.erase(n);
        for (auto &[_, idx] : qubit_of)
            if (idx > q) --idx;
    };
    auto value = [&](NodeId d) { return res.outcomes.at(d); };

    for (const auto &c : p.commands()) {
        if (c.role == NodeRole::output) continue;
        ensure(c.node);
        entangle_around(c.node);
        MeasurementBasis basis = MeasurementBasis::computational();
        if (c.role == NodeRole::measured) {
            auto [sx, sz] = parities(c, value);
            basis = MeasurementBasis::rotated_x(corrected_angle(c.angle, sx, sz));
        }
        int q = qubit_of.at(c.node);
        int s = measure(state, q, basis, rng);
        res.outcomes[c.node] = s;
        rotate_to_zero(state, q, basis, s);
        release(c.node);
    }

    const auto outputs = p.nodes_with_role(NodeRole::output);
    for (const auto &o : outputs) {
        ensure(o);
        entangle_around(o);
    }
    // Only outputs remain; order them by row.
    for (int y = 0; y < g.rows(); ++y) {
        NodeId o{g.columns() - 1, y};
        int cur = qubit_of.at(o);
        if (cur == y) continue;
        NodeId other{};
        for (const auto &[n, idx] : qubit_of)
            if (idx == y) other = n;
        state.swap_qubits(cur, y);
        qubit_of[other] = cur;
        qubit_of[o] = y;
    }
    for (const auto &o : outputs) {
        auto [a, b] = parities(p.at(o), value);
        res.byproducts.push_back(qotp::PadKey(a, b));
        if (apply_corrections) qotp::decrypt(state, o.row, res.byproducts.back());
    }
    res.output = std::move(state);
    return res;
}

inline ExecutionResult execute_pattern(const WirePattern &wp, const std::optional<StateVector> &input, Rng &rng,
                                       bool apply_corrections = true) {
    return execute_pattern(wp.graph, wp.pattern, input, rng, apply_corrections);
}

}  // namespace pbqc::mbqc
