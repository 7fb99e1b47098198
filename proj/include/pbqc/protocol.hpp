#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pbqc/angle.hpp"
#include "pbqc/circuit.hpp"
#include "pbqc/mbqc.hpp"
#include "pbqc/qotp.hpp"
#include "pbqc/rng.hpp"
#include "pbqc/statevec.hpp"

namespace pbqc::protocol {

using mbqc::NodeId;
using mbqc::NodeRole;
using json = nlohmann::ordered_json;

class ProtocolError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

enum class Party { client, server };

inline const char *party_name(Party p) { return p == Party::client ? "client" : "server"; }

enum class QubitRole { aux, output };

/// Preparation: one auxiliary |+_theta> or output |+> qubit.
struct QubitTransfer {
    NodeId node;
    QubitRole role = QubitRole::aux;
    std::optional<StateVector> state;
};

/// The padded input column as one register (row y = qubit y). An
/// empty `state` means the ciphertext is already resident on the server.
struct InputTransfer {
    int rows = 0;
    std::optional<StateVector> state;
};

struct Delta {
    NodeId node;
    Angle8 delta;
};

/// Raw server outcome; the client ledger applies the r flip.
struct Outcome {
    NodeId node;
    int s = 0;
};

struct OutputTransfer {
    std::vector<int> rows;
};

// Public-segment traffic.
struct GateInstruction {
    GateOp op;
};
struct AuxTransfer {
    int qubit = 0;
    std::optional<StateVector> state;
};
struct ControlBit {
    int qubit = 0;
    int x = 0;
};
struct GadgetOutcome {
    int qubit = 0;
    int c = 0;
};

using Body = std::variant<QubitTransfer, InputTransfer, Delta, Outcome, OutputTransfer, GateInstruction, AuxTransfer,
                          ControlBit, GadgetOutcome>;

struct Message {
    Party origin = Party::client;
    Body body;
};

inline json node_json(NodeId n) { return json::array({n.col, n.row}); }

/// One transcript record: {type, node, payload, origin}. Quantum payloads
/// are described, never serialized.
inline json to_record(const Message &m) {
    json rec;
    json node = nullptr;
    json payload = json::object();
    std::string type;
    std::visit(
        [&](const auto &b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, QubitTransfer>) {
                type = "qubit";
                node = node_json(b.node);
                payload["role"] = b.role == QubitRole::aux ? "aux" : "output";
            } else if constexpr (std::is_same_v<T, InputTransfer>) {
                type = "input";
                payload["rows"] = b.rows;
                payload["resident"] = !b.state.has_value();
            } else if constexpr (std::is_same_v<T, Delta>) {
                type = "delta";
                node = node_json(b.node);
                payload["delta"] = b.delta.k();
            } else if constexpr (std::is_same_v<T, Outcome>) {
                type = "outcome";
                node = node_json(b.node);
                payload["s"] = b.s;
            } else if constexpr (std::is_same_v<T, OutputTransfer>) {
                type = "output";
                payload["rows"] = b.rows;
            } else if constexpr (std::is_same_v<T, GateInstruction>) {
                type = "gate";
                payload["op"] = b.op.to_string();
            } else if constexpr (std::is_same_v<T, AuxTransfer>) {
                type = "gadget_aux";
                payload["qubit"] = b.qubit;
            } else if constexpr (std::is_same_v<T, ControlBit>) {
                type = "control";
                payload["qubit"] = b.qubit;
                payload["x"] = b.x;
            } else if constexpr (std::is_same_v<T, GadgetOutcome>) {
                type = "gadget_outcome";
                payload["qubit"] = b.qubit;
                payload["c"] = b.c;
            }
        },
        m.body);
    rec["type"] = type;
    rec["node"] = node;
    rec["payload"] = payload;
    rec["origin"] = party_name(m.origin);
    return rec;
}

/// Ordered message log of one segment. `n` is the number of computation
/// columns (the cluster has n+1 columns including the input column), `m` the
/// number of rows. Qubit states are dropped when logged.
struct Transcript {
    std::string segment = "sensitive";
    int n = 0;
    int m = 0;
    std::vector<Message> messages;

    template <class T>
    std::vector<T> all() const {
        std::vector<T> out;
        for (const auto &msg : messages)
            if (auto *p = std::get_if<T>(&msg.body)) out.push_back(*p);
        return out;
    }

    std::string to_jsonl() const {
        json head;
        head["type"] = "dims";
        head["node"] = nullptr;
        head["payload"] = {{"segment", segment}, {"n", n}, {"m", m}};
        head["origin"] = "client";
        std::string out = head.dump() + "\n";
        for (const auto &msg : messages) out += to_record(msg).dump() + "\n";
        return out;
    }
};

/// In-process ordered lossless channel. Every message sent is appended to
/// the transcript with its quantum payload stripped.
class Channel {
  public:
    explicit Channel(Transcript &log) : log_(&log) {}

    void send(Message m) {
        Message logged = m;
        std::visit(
            [](auto &b) {
                if constexpr (requires { b.state; }) b.state.reset();
            },
            logged.body);
        log_->messages.push_back(std::move(logged));
        (m.origin == Party::client ? to_server_ : to_client_).push_back(std::move(m));
    }

    bool pending(Party receiver) const {
        return !(receiver == Party::server ? to_server_ : to_client_).empty();
    }

    Message receive(Party receiver) {
        auto &q = receiver == Party::server ? to_server_ : to_client_;
        if (q.empty()) throw ProtocolError(std::string("no message pending for the ") + party_name(receiver));
        Message m = std::move(q.front());
        q.pop_front();
        return m;
    }

    template <class T>
    T receive_as(Party receiver) {
        Message m = receive(receiver);
        if (auto *p = std::get_if<T>(&m.body)) return std::move(*p);
        throw ProtocolError(std::string("out-of-order message for the ") + party_name(receiver));
    }

  private:
    Transcript *log_;
    std::deque<Message> to_server_;
    std::deque<Message> to_client_;
};

/// Hidden client randomness: theta and r for every measured node.
struct ClientSecrets {
    std::map<NodeId, Angle8> theta;
    std::map<NodeId, int> r;

    /// Draws theta then r per measured node in measurement order.
    static ClientSecrets sample(const mbqc::MeasurementPattern &p, Rng &rng) {
        ClientSecrets s;
        for (const auto &n : p.nodes_with_role(NodeRole::measured)) {
            s.theta[n] = rng.angle8();
            s.r[n] = rng.bit();
        }
        return s;
    }

    static ClientSecrets zero(const mbqc::MeasurementPattern &p) {
        ClientSecrets s;
        for (const auto &n : p.nodes_with_role(NodeRole::measured)) {
            s.theta[n] = Angle8{};
            s.r[n] = 0;
        }
        return s;
    }
};

/// Alice. Walks the pattern's measurement order, computing blinded angles and
/// recording corrected outcomes.
class ClientState {
  public:
    ClientState(mbqc::MeasurementPattern pattern, std::vector<qotp::PadKey> input_keys, ClientSecrets secrets)
        : pattern_(std::move(pattern)), keys_(std::move(input_keys)), secrets_(std::move(secrets)) {
        if (static_cast<int>(keys_.size()) != pattern_.rows()) {
            throw std::invalid_argument("client: need one input key per row");
        }
        if (pattern_.nodes_with_role(NodeRole::input).size() != keys_.size()) {
            throw std::invalid_argument("client: pattern has no encrypted input column");
        }
        for (const auto &n : pattern_.nodes_with_role(NodeRole::measured)) {
            if (!secrets_.theta.count(n) || !secrets_.r.count(n)) {
                throw std::invalid_argument("client: missing secrets for node " + n.to_string());
            }
        }
        for (const auto &c : pattern_.commands())
            if (c.role != NodeRole::output) order_.push_back(c.node);
    }

    const mbqc::MeasurementPattern &pattern() const { return pattern_; }
    const std::vector<qotp::PadKey> &input_keys() const { return keys_; }
    const ClientSecrets &secrets() const { return secrets_; }
    const std::map<NodeId, int> &outcomes() const { return s_; }
    bool complete() const { return cursor_ == order_.size(); }
    std::optional<NodeId> next_node() const {
        if (complete()) return std::nullopt;
        return order_[cursor_];
    }

    /// phi' for a measured node from the outcomes recorded so far.
    Angle8 corrected_angle(NodeId n) const {
        const auto &c = pattern_.at(n);
        auto [sx, sz] = parities(c);
        return mbqc::corrected_angle(c.angle, sx, sz);
    }

    /// delta = phi' + theta + pi r for the next node.
    Delta next_delta() {
        if (complete()) throw ProtocolError("client: all nodes already measured");
        NodeId n = order_[cursor_];
        if (pattern_.at(n).role != NodeRole::measured) throw ProtocolError("client: awaiting input-column outcome");
        if (awaiting_) throw ProtocolError("client: awaiting outcome for " + n.to_string());
        awaiting_ = true;
        Angle8 d = corrected_angle(n) + secrets_.theta.at(n);
        return {n, d.plus_pi_times(secrets_.r.at(n))};
    }

    /// Record an outcome, undoing the r flip for measured nodes.
    void receive(const Outcome &o) {
        if (s_.count(o.node)) throw ProtocolError("client: node " + o.node.to_string() + " measured twice");
        if (complete() || order_[cursor_] != o.node) {
            throw ProtocolError("client: out-of-order outcome for " + o.node.to_string());
        }
        const auto &c = pattern_.at(o.node);
        int s = o.s & 1;
        if (c.role == NodeRole::measured) {
            if (!awaiting_) throw ProtocolError("client: outcome before delta for " + o.node.to_string());
            s ^= secrets_.r.at(o.node);
        }
        s_[o.node] = s;
        awaiting_ = false;
        ++cursor_;
    }

    /// Output keys: a'_y = s^X, b'_y = s^Z of the output node.
    std::vector<qotp::PadKey> output_keys() const {
        if (!complete()) throw ProtocolError("interaction incomplete");
        std::vector<qotp::PadKey> out;
        for (const auto &n : pattern_.nodes_with_role(NodeRole::output)) {
            auto [a, b] = parities(pattern_.at(n));
            out.emplace_back(a, b);
        }
        return out;
    }

    /// Everything the server must never learn.
    json secret_ledger() const {
        json j;
        j["theta"] = json::object();
        j["r"] = json::object();
        j["phi"] = json::object();
        for (const auto &[n, t] : secrets_.theta) j["theta"][n.to_string()] = t.k();
        for (const auto &[n, r] : secrets_.r) j["r"][n.to_string()] = r;
        for (const auto &n : pattern_.nodes_with_role(NodeRole::measured)) j["phi"][n.to_string()] = pattern_.at(n).angle.k();
        j["input_keys"] = json::array();
        for (const auto &k : keys_) j["input_keys"].push_back({k.a, k.b});
        return j;
    }

  private:
    // Column-0 values fold in a_y; b_y joins the Z parity of column 1.
    int value(NodeId d) const {
        int s = s_.at(d);
        if (pattern_.at(d).role == NodeRole::input) s ^= keys_.at(static_cast<std::size_t>(d.row)).a;
        return s;
    }
    std::pair<int, int> parities(const mbqc::NodeCommand &c) const {
        auto [sx, sz] = mbqc::parities(c, [&](NodeId d) { return value(d); });
        if (c.node.col == 1) sz ^= keys_.at(static_cast<std::size_t>(c.node.row)).b;
        return {sx, sz};
    }

    mbqc::MeasurementPattern pattern_;
    std::vector<qotp::PadKey> keys_;
    ClientSecrets secrets_;
    std::vector<NodeId> order_;
    std::size_t cursor_ = 0;
    bool awaiting_ = false;
    std::map<NodeId, int> s_;
};

/// Preparation messages: |+_theta> per measured node (column-major), the
/// padded input column, then |+> per output node. `plaintext_input` (row y =
/// qubit y) is padded here with `input_keys`; pass nullopt when the
/// ciphertext is already resident on the server.
inline std::vector<Message> client_prepare(const ClientState &client,
                                           const std::optional<StateVector> &plaintext_input) {
    const auto &p = client.pattern();
    std::vector<Message> out;
    for (const auto &n : p.nodes_with_role(NodeRole::measured)) {
        out.push_back({Party::client, QubitTransfer{n, QubitRole::aux, prepare_plus_theta(client.secrets().theta.at(n))}});
    }
    InputTransfer in{p.rows(), std::nullopt};
    if (plaintext_input) {
        if (plaintext_input->num_qubits() != p.rows()) {
            throw std::invalid_argument("client_prepare: input has " + std::to_string(plaintext_input->num_qubits()) +
                                        " qubits for " + std::to_string(p.rows()) + " rows");
        }
        StateVector enc = *plaintext_input;
        for (int y = 0; y < p.rows(); ++y) qotp::encrypt(enc, y, client.input_keys()[static_cast<std::size_t>(y)]);
        in.state = std::move(enc);
    }
    out.push_back({Party::client, std::move(in)});
    for (const auto &n : p.nodes_with_role(NodeRole::output)) {
        out.push_back({Party::client, QubitTransfer{n, QubitRole::output, prepare_plus_theta(Angle8{})}});
    }
    return out;
}

/// Bob. Holds the register and the graph only.
///
/// Received single-qubit states are kept in a pool and moved into the
/// register when a neighbouring measurement first needs them; edges are
/// applied at that point too. All pending operations commute with what has
/// been done, so the outcome statistics equal those of entangling up front.
class ServerState {
  public:
    /// Fresh register: the input column arrives by InputTransfer.
    ServerState(mbqc::ClusterGraph graph, Rng rng) : graph_(std::move(graph)), rng_(rng) { init(); }

    /// Resident ciphertext: row y of the input column is qubit
    /// `input_qubits[y]` of `reg`; the other qubits of `reg` are spectators.
    ServerState(mbqc::ClusterGraph graph, StateVector reg, std::vector<int> input_qubits, Rng rng)
        : graph_(std::move(graph)), rng_(rng), reg_(std::move(reg)) {
        init();
        if (static_cast<int>(input_qubits.size()) != graph_.rows()) {
            throw std::invalid_argument("server: need one resident qubit per row");
        }
        std::set<int> used(input_qubits.begin(), input_qubits.end());
        if (used.size() != input_qubits.size()) throw std::invalid_argument("server: repeated resident qubit");
        for (int y = 0; y < graph_.rows(); ++y) qubit_of_[{0, y}] = input_qubits[static_cast<std::size_t>(y)];
        for (int q = 0; q < reg_.num_qubits(); ++q)
            if (!used.count(q)) spectators_.push_back(q);
        resident_ = true;
    }

    const mbqc::ClusterGraph &graph() const { return graph_; }
    const StateVector &register_state() const { return reg_; }
    int peak_qubits() const { return peak_; }
    const std::map<NodeId, int> &raw_outcomes() const { return outcomes_; }

    /// Test hook: take the given branch instead of sampling. The product of
    /// forced branch probabilities is accumulated in branch_weight().
    void force_outcomes(std::map<NodeId, int> forced) { forced_ = std::move(forced); }
    double branch_weight() const { return weight_; }

    void receive(const Message &m) {
        if (entangled_) throw ProtocolError("server: qubit received after entangling");
        if (auto *q = std::get_if<QubitTransfer>(&m.body)) {
            if (!graph_.contains(q->node) || q->node.col == 0) {
                throw ProtocolError("server: qubit for unknown node " + q->node.to_string());
            }
            if (pool_.count(q->node) || qubit_of_.count(q->node)) {
                throw ProtocolError("server: node " + q->node.to_string() + " received twice");
            }
            if (!q->state || q->state->num_qubits() != 1) throw ProtocolError("server: expected a single qubit");
            pool_.emplace(q->node, *q->state);
        } else if (auto *in = std::get_if<InputTransfer>(&m.body)) {
            if (in->rows != graph_.rows()) throw ProtocolError("server: input column has the wrong row count");
            if (have_input_) throw ProtocolError("server: input column received twice");
            if (resident_ != !in->state) throw ProtocolError("server: input column residency mismatch");
            if (in->state) {
                if (in->state->num_qubits() != graph_.rows()) throw ProtocolError("server: input register size mismatch");
                int first = reg_.append(*in->state);
                for (int y = 0; y < graph_.rows(); ++y) qubit_of_[{0, y}] = first + y;
                note_peak();
            }
            have_input_ = true;
        } else {
            throw ProtocolError("server: unexpected message during preparation");
        }
    }

    /// Entangling stage. Checks that every node is present; see the class comment for
    /// when edges are physically applied.
    void entangle() {
        if (entangled_) throw ProtocolError("server: already entangled");
        for (const auto &n : graph_.nodes()) {
            if (!pool_.count(n) && !qubit_of_.count(n)) throw ProtocolError("server: missing qubit " + n.to_string());
        }
        entangled_ = true;
        for (const auto &c : graph_.nodes())
            if (c.col != 0 && c.col + 1 < graph_.columns()) meas_order_.push_back(c);
    }

    std::size_t edges_applied() const {
        return static_cast<std::size_t>(std::count(applied_.begin(), applied_.end(), true));
    }

    /// Apply every outstanding edge (used before handing outputs back).
    void materialize_all() {
        for (const auto &n : graph_.nodes())
            if (!measured_.count(n)) entangle_around(n);
    }

    /// First column: computational measurement of every input node.
    std::vector<Outcome> measure_input_column() {
        if (!entangled_) throw ProtocolError("server: measurement before entangling");
        if (input_done_) throw ProtocolError("server: input column measured twice");
        std::vector<Outcome> out;
        for (int y = 0; y < graph_.rows(); ++y) {
            NodeId n{0, y};
            out.push_back({n, measure_node(n, MeasurementBasis::computational())});
        }
        input_done_ = true;
        return out;
    }

    /// Measure in {|+_delta>, |-_delta>}; returns the raw outcome.
    Outcome measure(const Delta &d) {
        if (!input_done_) throw ProtocolError("server: delta before the input column was measured");
        if (measured_.count(d.node)) throw ProtocolError("server: node " + d.node.to_string() + " measured twice");
        if (next_ >= meas_order_.size() || meas_order_[next_] != d.node) {
            throw ProtocolError("server: out-of-order delta for " + d.node.to_string());
        }
        ++next_;
        return {d.node, measure_node(d.node, MeasurementBasis::rotated_x(d.delta))};
    }

    bool all_measured() const { return input_done_ && next_ == meas_order_.size(); }

    /// Output column node -> register index.
    std::vector<int> output_qubits() const {
        std::vector<int> out;
        for (int y = 0; y < graph_.rows(); ++y) out.push_back(qubit_of_.at({graph_.columns() - 1, y}));
        return out;
    }
    const std::vector<int> &spectators() const { return spectators_; }

    /// Hand the output column back.
    OutputTransfer output_transfer() {
        if (!all_measured()) throw ProtocolError("interaction incomplete");
        materialize_all();
        OutputTransfer t;
        for (int y = 0; y < graph_.rows(); ++y) t.rows.push_back(y);
        return t;
    }

    StateVector take_register() { return std::move(reg_); }

    /// Everything the server knows.
    json serialize() const {
        json j;
        j["columns"] = graph_.columns();
        j["rows"] = graph_.rows();
        j["edges"] = json::array();
        for (const auto &e : graph_.edges()) {
            j["edges"].push_back({node_json(e.a), node_json(e.b), e.kind == mbqc::EdgeKind::cz ? "cz" : "cx"});
        }
        j["register_qubits"] = reg_.num_qubits();
        j["qubit_of"] = json::array();
        for (const auto &[n, q] : qubit_of_) j["qubit_of"].push_back({node_json(n), q});
        j["raw_outcomes"] = json::array();
        for (const auto &[n, s] : outcomes_) j["raw_outcomes"].push_back({node_json(n), s});
        return j;
    }

  private:
    void init() {
        applied_.assign(graph_.edges().size(), false);
        peak_ = reg_.num_qubits();
    }
    void note_peak() { peak_ = std::max(peak_, reg_.num_qubits()); }

    void ensure(NodeId n) {
        if (qubit_of_.count(n)) return;
        auto it = pool_.find(n);
        if (it == pool_.end()) throw ProtocolError("server: missing qubit " + n.to_string());
        qubit_of_[n] = reg_.append(it->second);
        pool_.erase(it);
        note_peak();
    }

    void entangle_around(NodeId n) {
        for (std::size_t i = 0; i < graph_.edges().size(); ++i) {
            const auto &e = graph_.edges()[i];
            if (applied_[i] || (e.a != n && e.b != n)) continue;
            ensure(e.a);
            ensure(e.b);
            if (e.kind == mbqc::EdgeKind::cx_first_column) {
                reg_.apply_cx(qubit_of_.at(e.b), qubit_of_.at(e.a));
            } else {
                reg_.apply_cz(qubit_of_.at(e.a), qubit_of_.at(e.b));
            }
            applied_[i] = true;
        }
        ensure(n);
    }

    int measure_node(NodeId n, MeasurementBasis basis) {
        entangle_around(n);
        int q = qubit_of_.at(n);
        int s;
        if (auto it = forced_.find(n); it != forced_.end()) {
            s = it->second & 1;
            weight_ *= reg_.project(q, basis, s);
        } else {
            s = pbqc::measure(reg_, q, basis, rng_);
        }
        rotate_to_zero(reg_, q, basis, s);
        reg_.release(q);
        qubit_of_.erase(n);
        for (auto &[_, idx] : qubit_of_)
            if (idx > q) --idx;
        for (auto &idx : spectators_)
            if (idx > q) --idx;
        measured_.insert(n);
        outcomes_[n] = s;
        return s;
    }

    mbqc::ClusterGraph graph_;
    Rng rng_;
    StateVector reg_{0};
    std::map<NodeId, StateVector> pool_;
    std::map<NodeId, int> qubit_of_;
    std::vector<int> spectators_;
    std::vector<bool> applied_;
    std::vector<NodeId> meas_order_;
    std::size_t next_ = 0;
    std::set<NodeId> measured_;
    std::map<NodeId, int> outcomes_;
    std::map<NodeId, int> forced_;
    double weight_ = 1.0;
    int peak_ = 0;
    bool resident_ = false;
    bool have_input_ = false;
    bool entangled_ = false;
    bool input_done_ = false;
};

/// Entangle the received qubits.
inline void server_entangle(ServerState &server) { server.entangle(); }

/// Measurement rounds over the channel: input-column outcomes, then one delta/outcome
/// round per measured node.
inline void run_interaction(ClientState &client, ServerState &server, Channel &ch) {
    for (const auto &o : server.measure_input_column()) ch.send({Party::server, o});
    while (ch.pending(Party::client)) client.receive(ch.receive_as<Outcome>(Party::client));
    while (!client.complete()) {
        ch.send({Party::client, client.next_delta()});
        Outcome o = server.measure(ch.receive_as<Delta>(Party::server));
        ch.send({Party::server, o});
        client.receive(ch.receive_as<Outcome>(Party::client));
    }
}

/// Final hand-off: the server's remaining register and where everything sits.
struct FinalOutput {
    StateVector reg;                      // outputs plus any spectators
    std::vector<int> output_qubits;       // row y -> register index
    std::vector<int> spectators;          // resident non-row qubits, original order
    std::vector<qotp::PadKey> keys;       // a'_y, b'_y
};

inline FinalOutput finalize_output(ClientState &client, ServerState &server, Channel &ch) {
    if (!client.complete() || !server.all_measured()) throw ProtocolError("interaction incomplete");
    ch.send({Party::server, server.output_transfer()});
    (void)ch.receive_as<OutputTransfer>(Party::client);
    FinalOutput out;
    out.output_qubits = server.output_qubits();
    out.spectators = server.spectators();
    out.keys = client.output_keys();
    out.reg = server.take_register();
    return out;
}

/// Reorder a register with no spectators so row y is qubit y.
inline StateVector extract_outputs(FinalOutput out) {
    if (!out.spectators.empty()) throw std::invalid_argument("extract_outputs: register holds spectator qubits");
    auto pos = out.output_qubits;
    for (int y = 0; y < static_cast<int>(pos.size()); ++y) {
        int cur = pos[static_cast<std::size_t>(y)];
        if (cur == y) continue;
        out.reg.swap_qubits(cur, y);
        for (auto &p : pos)
            if (p == y) p = cur;
        pos[static_cast<std::size_t>(y)] = y;
    }
    return std::move(out.reg);
}

struct SessionResult {
    StateVector output;  // padded; decrypt row y with keys[y]
    std::vector<qotp::PadKey> keys;
    Transcript transcript;
    std::map<NodeId, int> client_outcomes;
    std::map<NodeId, int> raw_outcomes;
    json secret_ledger;
    json server_view;
    double branch_weight = 1.0;
    int server_peak_qubits = 0;
};

struct SessionOptions {
    std::map<NodeId, int> forced_outcomes;  // test hook, see ServerState
};

/// Complete standalone run of the blind protocol on a plaintext input register.
inline SessionResult run_session(const mbqc::WirePattern &wp, const StateVector &plaintext_input,
                                 std::vector<qotp::PadKey> input_keys, ClientSecrets secrets, Rng server_rng,
                                 const SessionOptions &opts = {}) {
    if (wp.graph.input() != mbqc::InputColumn::encrypted) {
        throw std::invalid_argument("run_session: pattern has no encrypted input column");
    }
    SessionResult res;
    res.transcript.n = wp.graph.columns() - 1;
    res.transcript.m = wp.graph.rows();
    Channel ch(res.transcript);
    ClientState client(wp.pattern, std::move(input_keys), std::move(secrets));
    ServerState server(wp.graph, server_rng);
    server.force_outcomes(opts.forced_outcomes);
    for (auto &m : client_prepare(client, plaintext_input)) ch.send(std::move(m));
    while (ch.pending(Party::server)) server.receive(ch.receive(Party::server));
    server_entangle(server);
    run_interaction(client, server, ch);
    res.server_view = server.serialize();
    res.raw_outcomes = server.raw_outcomes();
    res.branch_weight = server.branch_weight();
    FinalOutput fin = finalize_output(client, server, ch);
    res.server_peak_qubits = server.peak_qubits();
    res.keys = fin.keys;
    res.output = extract_outputs(std::move(fin));
    res.client_outcomes = client.outcomes();
    res.secret_ledger = client.secret_ledger();
    return res;
}

/// Same, with keys and secrets drawn from the client stream (keys first).
inline SessionResult run_session(const mbqc::WirePattern &wp, const StateVector &plaintext_input, Rng &client_rng,
                                 Rng server_rng) {
    std::vector<qotp::PadKey> keys;
    for (int y = 0; y < wp.graph.rows(); ++y) keys.push_back(qotp::PadKey::random(client_rng));
    ClientSecrets secrets = ClientSecrets::sample(wp.pattern, client_rng);
    return run_session(wp, plaintext_input, std::move(keys), std::move(secrets), server_rng);
}

/// Undo the output pads.
inline StateVector decrypt_output(StateVector s, const std::vector<qotp::PadKey> &keys) {
    for (std::size_t y = 0; y < keys.size(); ++y) qotp::decrypt(s, static_cast<int>(y), keys[y]);
    return s;
}

}  // namespace pbqc::protocol
