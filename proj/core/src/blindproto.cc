// Copyright 2026 The OPQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "opq/blindproto.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace opq {

namespace {

int parity(const std::set<Tag> &deps, const std::map<Tag, int> &s) {
    int p = 0;
    for (const auto &d : deps) {
        p ^= s.at(d);
    }
    return p;
}

template <class M>
typename M::mapped_type lookup_or(const M &m, const typename M::key_type &k, typename M::mapped_type fallback) {
    auto it = m.find(k);
    return it == m.end() ? fallback : it->second;
}

nlohmann::ordered_json matrix_json(const ComplexMatrix &m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); r++) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); c++) {
            row.push_back({m(r, c).real(), m(r, c).imag()});
        }
        rows.push_back(row);
    }
    return rows;
}

const char *party_name(Party p) {
    switch (p) {
        case Party::kClient:
            return "client";
        case Party::kServer:
            return "server";
        case Party::kHarness:
            return "harness";
    }
    return "?";
}

}  // namespace

Angle compute_delta(Angle a, int sx, int sz, Angle theta, int r) {
    Angle adapted = sx ? -a : a;
    if (sz) {
        adapted = adapted + kPiAngle;
    }
    return adapted + theta + (r ? kPiAngle : Angle(0));
}

uint64_t mix_seed(uint64_t seed, uint64_t index) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

ProtocolAbort::ProtocolAbort(size_t step, const std::string &what)
    : std::runtime_error("protocol aborted at step " + std::to_string(step) + ": " + what), step_(step) {
}

void Channel::send(Party from, Message message) {
    log_.push_back(LoggedMessage{from, round_, message});
    (from == Party::kClient ? to_server_ : to_client_).push_back(std::move(message));
}

Message Channel::pop(Party to, size_t step) {
    auto &queue = to == Party::kClient ? to_client_ : to_server_;
    if (queue.empty()) {
        throw ProtocolAbort(step, std::string("no message waiting for the ") + party_name(to));
    }
    Message m = std::move(queue.front());
    queue.erase(queue.begin());
    return m;
}

void World::add(const DensityState &qubits, Party party) {
    state = tensor(state, qubits);
    for (const auto &t : qubits.tags()) {
        owner[t] = party;
    }
}

std::vector<Tag> World::owned_by(Party party) const {
    std::vector<Tag> out;
    for (const auto &t : state.tags()) {
        if (owner.at(t) == party) {
            out.push_back(t);
        }
    }
    return out;
}

void World::discard(const std::vector<Tag> &tags) {
    state = partial_trace(state, tags);
    for (const auto &t : tags) {
        owner.erase(t);
    }
}

ServerRegister::ServerRegister(World &world, std::mt19937_64 &rng) : world_(world), rng_(rng) {
}

bool ServerRegister::holds(const Tag &tag) const {
    auto it = world_.owner.find(tag);
    return it != world_.owner.end() && it->second == Party::kServer;
}

std::vector<Tag> ServerRegister::held() const {
    return world_.owned_by(Party::kServer);
}

void ServerRegister::require(const Tag &tag) const {
    if (!holds(tag)) {
        throw std::invalid_argument("server does not hold qubit '" + tag + "'");
    }
}

void ServerRegister::apply(const ComplexMatrix &gate, const std::vector<Tag> &targets) {
    for (const auto &t : targets) {
        require(t);
    }
    world_.state = apply_gate(world_.state, gate, targets);
}

void ServerRegister::entangle(const Tag &a, const Tag &b) {
    apply(gates::CZ(), {a, b});
}

int ServerRegister::measure(const Tag &tag, Angle delta) {
    require(tag);
    auto branches = measure_xy(world_.state, tag, delta);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    int b = uniform(rng_) < branches[0].probability ? 0 : 1;
    if (!branches[b].possible) {
        b ^= 1;
    }
    world_.state = std::move(*branches[b].state);
    world_.owner.erase(tag);
    return b;
}

void ServerRegister::prepare_mixed(const Tag &tag) {
    if (world_.owner.count(tag)) {
        throw std::invalid_argument("qubit '" + tag + "' already exists");
    }
    world_.add(DensityState::maximally_mixed(tag), Party::kServer);
}

RoundResult run_round(World &world, const RoundPlan &plan, ServerBehavior &server, Channel &channel,
                      std::mt19937_64 &rng, const SessionOptions &options) {
    const Pattern &pattern = plan.pattern;
    RoundResult result;
    ServerRegister reg(world, rng);
    size_t step = 0;
    channel.set_round(plan.round);
    server.begin_round(plan.round);

    auto server_purity = [&]() { return purity_parameter(reduce_to(world.state, world.owned_by(Party::kServer))); };
    bool auditing = false;
    auto audit = [&]() {
        if (auditing) {
            double p = server_purity();
            result.server_purity.push_back({plan.round, step, p, p - result.server_input_purity});
        }
    };

    auto send_qubit = [&](const Tag &tag) {
        auto it = plan.client_qubits.find(tag);
        if (it == plan.client_qubits.end()) {
            throw std::invalid_argument("round plan has no preparation for '" + tag + "'");
        }
        const QubitPlan &q = it->second;
        switch (q.kind) {
            case QubitPlan::Kind::kPlus:
                world.add(DensityState::plus(tag, q.theta), Party::kClient);
                break;
            case QubitPlan::Kind::kBasis:
                world.add(DensityState::basis(tag, q.bit), Party::kClient);
                break;
            case QubitPlan::Kind::kMixed:
                world.add(DensityState::maximally_mixed(tag), Party::kClient);
                break;
            case QubitPlan::Kind::kMixedPurified: {
                Tag ref = reference_tag(tag);
                world.add(DensityState::bell_pair(tag, ref), Party::kClient);
                world.owner[ref] = Party::kHarness;
                world.state = apply_gate(world.state, gates::Rz(q.theta), {tag});
                break;
            }
        }
        std::optional<DensityState> payload;
        if (options.record_payloads) {
            payload = reduce_to(world.state, {tag});
        }
        channel.send(Party::kClient, QubitTransfer{tag, payload});
        auto received = channel.receive<QubitTransfer>(Party::kServer, step);
        if (received.tag != tag) {
            throw ProtocolAbort(step, "qubit transfer tag mismatch");
        }
        world.owner[tag] = Party::kServer;
        server.on_receive(reg, tag);
    };

    for (const auto &tag : pattern.graph.inputs) {
        if (plan.server_inputs.count(tag)) {
            server.prepare_input(reg, tag);
            if (!reg.holds(tag)) {
                throw ProtocolAbort(step, "server did not prepare input '" + tag + "'");
            }
        } else {
            send_qubit(tag);
        }
        step++;
    }
    if (options.audit_server_purity) {
        auditing = true;
        result.server_input_purity = server_purity();
    }

    std::vector<const Command *> corrections;
    for (const auto &command : pattern.commands) {
        if (const auto *p = std::get_if<Prepare>(&command)) {
            send_qubit(p->tag);
        } else if (const auto *e = std::get_if<Entangle>(&command)) {
            try {
                server.entangle(reg, e->a, e->b);
            } catch (const std::invalid_argument &ex) {
                throw ProtocolAbort(step, ex.what());
            }
        } else if (const auto *m = std::get_if<Measure>(&command)) {
            Angle delta;
            auto fixed = plan.fixed_delta.find(m->tag);
            if (fixed != plan.fixed_delta.end()) {
                delta = fixed->second;
            } else {
                int sx = plan.use_dependencies ? parity(m->sx, result.s) : 0;
                int sz = plan.use_dependencies ? parity(m->sz, result.s) : 0;
                delta = compute_delta(m->angle, sx, sz, lookup_or(plan.theta, m->tag, Angle(0)),
                                      lookup_or(plan.r, m->tag, 0));
            }
            channel.send(Party::kClient, AngleMsg{m->tag, delta});
            auto request = channel.receive<AngleMsg>(Party::kServer, step);
            int b;
            try {
                b = server.measure(reg, request.tag, request.delta);
            } catch (const std::invalid_argument &ex) {
                throw ProtocolAbort(step, ex.what());
            }
            if (reg.holds(m->tag)) {
                throw ProtocolAbort(step, "server kept measured qubit '" + m->tag + "'");
            }
            if (b != 0 && b != 1) {
                throw ProtocolAbort(step, "server reported a non-bit outcome");
            }
            channel.send(Party::kServer, OutcomeMsg{m->tag, b});
            auto reply = channel.receive<OutcomeMsg>(Party::kClient, step);
            if (reply.tag != m->tag) {
                throw ProtocolAbort(step, "outcome tag mismatch");
            }
            result.b[m->tag] = reply.b;
            result.s[m->tag] = reply.b ^ lookup_or(plan.r, m->tag, 0);
        } else {
            corrections.push_back(&command);
            continue;
        }
        audit();
        step++;
    }

    const auto &outputs = pattern.graph.outputs;
    server.before_final_layer(reg, outputs);
    for (const auto &o : outputs) {
        if (!reg.holds(o)) {
            throw ProtocolAbort(step, "server does not hold output '" + o + "'");
        }
    }
    std::optional<DensityState> payload;
    if (options.record_payloads) {
        payload = reduce_to(world.state, outputs);
    }
    channel.send(Party::kServer, FinalLayer{outputs, payload});
    channel.receive<FinalLayer>(Party::kClient, step);
    for (const auto &o : outputs) {
        world.owner[o] = Party::kClient;
    }
    result.final_layer = outputs;
    if (auditing) {
        audit();
    }

    if (plan.correct_outputs) {
        for (const auto &o : outputs) {
            auto it = plan.client_qubits.find(o);
            if (it != plan.client_qubits.end() && it->second.kind == QubitPlan::Kind::kPlus) {
                world.state = apply_gate(world.state, gates::Rz(-it->second.theta), {o});
            }
        }
        for (const Command *c : corrections) {
            if (const auto *x = std::get_if<CorrectX>(c)) {
                if (parity(x->deps, result.s)) {
                    world.state = apply_gate(world.state, gates::X(), {x->tag});
                }
            } else if (const auto *z = std::get_if<CorrectZ>(c)) {
                if (parity(z->deps, result.s)) {
                    world.state = apply_gate(world.state, gates::Z(), {z->tag});
                }
            }
        }
    }
    return result;
}

Transcript run_blind(const BrickworkSpec &spec, const std::map<Tag, Angle> &angles, ServerBehavior &server,
                     uint64_t seed, const BlindRunOptions &options) {
    auto [graph, flow] = brickwork(spec);
    RoundPlan plan;
    plan.pattern = rewrite_with_flow(graph, flow, angles);
    std::mt19937_64 client_rng(mix_seed(seed, 0));
    std::mt19937_64 server_rng(mix_seed(seed, 1));
    std::uniform_int_distribution<int> eighth(0, 7), bit(0, 1);

    for (const auto &v : graph.vertices) {
        Angle theta(eighth(client_rng));
        plan.theta[v] = theta;
        if (!graph.is_input(v)) {
            plan.client_qubits[v] = QubitPlan{QubitPlan::Kind::kPlus, theta, 0};
        } else if (options.choi_input) {
            plan.client_qubits[v] = QubitPlan{QubitPlan::Kind::kMixedPurified, theta, 0};
        } else if (v == graph.inputs.front()) {
            plan.client_qubits[v] = QubitPlan{QubitPlan::Kind::kPlus, theta, 0};
        } else {
            // Bob prepares this input himself; theta only masks its measurement angle.
            plan.server_inputs.insert(v);
        }
    }
    for (const auto &v : graph.non_outputs()) {
        plan.r[v] = bit(client_rng);
    }

    World world;
    Channel channel;
    SessionOptions session;
    session.audit_server_purity = options.audit_server_purity;
    session.record_payloads = options.record_payloads;
    RoundResult round = run_round(world, plan, server, channel, server_rng, session);

    Transcript t;
    t.messages = channel.log();
    std::vector<Tag> keep = graph.outputs;
    if (options.choi_input) {
        for (const auto &v : graph.inputs) {
            keep.push_back(reference_tag(v));
        }
    }
    t.output = reduce_to(world.state, keep);
    t.secrets.theta = plan.theta;
    t.secrets.r = plan.r;
    t.secrets.s = round.s;
    t.b = round.b;
    t.server_input_purity = round.server_input_purity;
    t.server_purity = round.server_purity;
    return t;
}

DensityState blind_expected_output(const BrickworkSpec &spec, const std::map<Tag, Angle> &angles) {
    auto [graph, flow] = brickwork(spec);
    ComplexMatrix u = reference_unitary(graph, flow, angles);
    DensityState in = DensityState::plus(graph.inputs.front(), Angle(0));
    for (size_t k = 1; k < graph.inputs.size(); k++) {
        in = tensor(in, DensityState::maximally_mixed(graph.inputs[k]));
    }
    return DensityState(graph.outputs, u * in.matrix() * u.adjoint());
}

std::string transcript_json(const Transcript &transcript, bool include_payloads) {
    using nlohmann::ordered_json;
    ordered_json events = ordered_json::array();
    for (const auto &entry : transcript.messages) {
        ordered_json e;
        std::visit(
            [&](const auto &m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, QubitTransfer>) {
                    e["type"] = "qubit";
                    e["from"] = party_name(entry.from);
                    e["round"] = entry.round;
                    e["tag"] = m.tag;
                    if (include_payloads && m.payload) {
                        e["payload"] = matrix_json(m.payload->matrix());
                    }
                } else if constexpr (std::is_same_v<T, AngleMsg>) {
                    e["type"] = "angle";
                    e["from"] = party_name(entry.from);
                    e["round"] = entry.round;
                    e["tag"] = m.tag;
                    e["delta"] = m.delta.eighths();
                } else if constexpr (std::is_same_v<T, OutcomeMsg>) {
                    e["type"] = "outcome";
                    e["from"] = party_name(entry.from);
                    e["round"] = entry.round;
                    e["tag"] = m.tag;
                    e["b"] = m.b;
                } else {
                    e["type"] = "final_layer";
                    e["from"] = party_name(entry.from);
                    e["round"] = entry.round;
                    e["tags"] = m.tags;
                    if (include_payloads && m.payload) {
                        e["payload"] = matrix_json(m.payload->matrix());
                    }
                }
            },
            entry.message);
        events.push_back(e);
    }
    ordered_json out;
    out["events"] = events;
    ordered_json s = ordered_json::object();
    for (const auto &[v, bit] : transcript.secrets.s) {
        s[v] = bit;
    }
    out["client_signals"] = s;
    if (include_payloads) {
        out["output_tags"] = transcript.output.tags();
        out["output"] = matrix_json(transcript.output.matrix());
    }
    return out.dump(2) + "\n";
}

void AveragedView::add(const std::vector<int> &classical, const ComplexVector &quantum, double weight) {
    auto it = blocks_.find(classical);
    if (it == blocks_.end()) {
        it = blocks_.emplace(classical, ComplexMatrix::Zero(quantum.size(), quantum.size())).first;
    }
    it->second.noalias() += weight * (quantum * quantum.adjoint());
}

double AveragedView::distance(const AveragedView &other) const {
    double total = 0;
    for (const auto &[key, block] : blocks_) {
        auto it = other.blocks_.find(key);
        total += it == other.blocks_.end() ? trace_norm(block) : trace_norm(block - it->second);
    }
    for (const auto &[key, block] : other.blocks_) {
        if (!blocks_.count(key)) {
            total += trace_norm(block);
        }
    }
    return 0.5 * total;
}

namespace {

struct ViewLayout {
    std::vector<Tag> sent;
    std::vector<Tag> theta_vertices;
    std::vector<Measure> measures;
};

ViewLayout view_layout(const Pattern &pattern) {
    const OpenGraph &graph = pattern.graph;
    if (graph.inputs.empty()) {
        throw std::invalid_argument("averaged view: graph needs at least one input");
    }
    ViewLayout layout;
    layout.sent = {graph.inputs.front()};
    for (const auto &c : pattern.commands) {
        if (const auto *p = std::get_if<Prepare>(&c)) {
            layout.sent.push_back(p->tag);
        } else if (const auto *m = std::get_if<Measure>(&c)) {
            layout.measures.push_back(*m);
        }
    }
    // Secret theta for every sent qubit and for server-prepared measured inputs (masking delta only).
    layout.theta_vertices = layout.sent;
    for (const auto &m : layout.measures) {
        if (std::find(layout.sent.begin(), layout.sent.end(), m.tag) == layout.sent.end()) {
            layout.theta_vertices.push_back(m.tag);
        }
    }
    return layout;
}

double view_terms(const ViewLayout &layout, bool r_mask) {
    return std::pow(8.0, (double)layout.theta_vertices.size()) *
           std::pow(r_mask ? 2.0 : 1.0, (double)layout.measures.size());
}

}  // namespace

ComplexVector plus_vector(int eighths) {
    ComplexVector v(2);
    v << 1.0 / std::sqrt(2.0), std::polar(1.0 / std::sqrt(2.0), Angle(eighths).radians());
    return v;
}

ComplexVector product_vector(const std::vector<ComplexVector> &factors) {
    ComplexVector psi = ComplexVector::Ones(1);
    for (const auto &q : factors) {
        ComplexVector next(psi.size() * q.size());
        for (Eigen::Index i = 0; i < psi.size(); i++) {
            next.segment(i * q.size(), q.size()) = psi(i) * q;
        }
        psi = std::move(next);
    }
    return psi;
}

AveragedView averaged_round_view(const OpenGraph &graph, const Flow &flow, const std::map<Tag, Angle> &angles,
                                 const std::vector<int> &reports, bool r_mask) {
    Pattern pattern = rewrite_with_flow(graph, flow, angles);
    ViewLayout layout = view_layout(pattern);
    size_t nm = layout.measures.size();
    if (reports.size() != nm) {
        throw std::invalid_argument("averaged view: expected " + std::to_string(nm) + " reported bits");
    }
    uint64_t n_terms = (uint64_t)view_terms(layout, r_mask);
    int r_values = r_mask ? 2 : 1;
    double weight = 1.0 / (double)n_terms;
    AveragedView view;
    std::vector<int> r(nm), delta(nm);
    std::map<Tag, int> theta_of, s;
    std::vector<ComplexVector> factors(layout.sent.size());
    for (uint64_t term = 0; term < n_terms; term++) {
        uint64_t x = term;
        for (const auto &v : layout.theta_vertices) {
            theta_of[v] = (int)(x % 8);
            x /= 8;
        }
        for (auto &bit : r) {
            bit = (int)(x % (uint64_t)r_values);
            x /= (uint64_t)r_values;
        }
        s.clear();
        for (size_t k = 0; k < nm; k++) {
            const Measure &m = layout.measures[k];
            delta[k] =
                compute_delta(m.angle, parity(m.sx, s), parity(m.sz, s), Angle(theta_of[m.tag]), r[k]).eighths();
            s[m.tag] = reports[k] ^ r[k];
        }
        for (size_t k = 0; k < layout.sent.size(); k++) {
            factors[k] = plus_vector(theta_of[layout.sent[k]]);
        }
        view.add(delta, product_vector(factors), weight);
    }
    return view;
}

BlindnessAuditResult blindness_audit(const OpenGraph &graph, const Flow &flow, const std::map<Tag, Angle> &angles_a,
                                     const std::map<Tag, Angle> &angles_b, const BlindnessAuditOptions &options) {
    ViewLayout layout = view_layout(rewrite_with_flow(graph, flow, angles_a));
    size_t nm = layout.measures.size();
    double terms = view_terms(layout, options.r_mask);
    double reports = std::pow(2.0, (double)nm);
    if (terms * reports * 2 > (double)options.max_terms) {
        throw std::length_error("blindness_audit: size cap exceeded (" + std::to_string((uint64_t)terms) +
                                " secret terms x " + std::to_string((uint64_t)reports) + " report vectors)");
    }
    BlindnessAuditResult result;
    result.secret_terms = (uint64_t)terms;
    result.report_vectors = (uint64_t)reports;
    for (uint64_t rep = 0; rep < (uint64_t)reports; rep++) {
        std::vector<int> b(nm);
        for (size_t k = 0; k < nm; k++) {
            b[k] = (int)((rep >> k) & 1);
        }
        double d = averaged_round_view(graph, flow, angles_a, b, options.r_mask)
                       .distance(averaged_round_view(graph, flow, angles_b, b, options.r_mask));
        if (rep == 0 || d > result.distance) {
            result.distance = d;
            result.worst_reports = b;
        }
    }
    return result;
}

}  // namespace opq
