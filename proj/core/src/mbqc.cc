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

#include "opq/mbqc.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace opq {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::string join(const std::set<Tag> &tags) {
    std::string out = "{";
    bool first = true;
    for (const auto &t : tags) {
        if (!first) {
            out += ",";
        }
        out += t;
        first = false;
    }
    return out + "}";
}

int parity(const std::set<Tag> &deps, const std::map<Tag, int> &outcomes) {
    int p = 0;
    for (const auto &d : deps) {
        p ^= outcomes.at(d);
    }
    return p;
}

}  // namespace

bool OpenGraph::has_vertex(const Tag &v) const {
    return std::find(vertices.begin(), vertices.end(), v) != vertices.end();
}

bool OpenGraph::is_input(const Tag &v) const {
    return std::find(inputs.begin(), inputs.end(), v) != inputs.end();
}

bool OpenGraph::is_output(const Tag &v) const {
    return std::find(outputs.begin(), outputs.end(), v) != outputs.end();
}

bool OpenGraph::adjacent(const Tag &a, const Tag &b) const {
    for (const auto &[u, v] : edges) {
        if ((u == a && v == b) || (u == b && v == a)) {
            return true;
        }
    }
    return false;
}

std::vector<Tag> OpenGraph::neighbors(const Tag &v) const {
    std::vector<Tag> out;
    for (const auto &u : vertices) {
        if (u != v && adjacent(u, v)) {
            out.push_back(u);
        }
    }
    return out;
}

std::vector<Tag> OpenGraph::non_outputs() const {
    std::vector<Tag> out;
    for (const auto &v : vertices) {
        if (!is_output(v)) {
            out.push_back(v);
        }
    }
    return out;
}

std::vector<Tag> OpenGraph::non_inputs() const {
    std::vector<Tag> out;
    for (const auto &v : vertices) {
        if (!is_input(v)) {
            out.push_back(v);
        }
    }
    return out;
}

size_t OpenGraph::vertex_index(const Tag &v) const {
    auto it = std::find(vertices.begin(), vertices.end(), v);
    if (it == vertices.end()) {
        throw std::out_of_range("unknown vertex '" + v + "'");
    }
    return (size_t)(it - vertices.begin());
}

void OpenGraph::validate() const {
    std::set<Tag> seen;
    for (const auto &v : vertices) {
        if (!seen.insert(v).second) {
            throw std::invalid_argument("duplicate vertex '" + v + "'");
        }
    }
    std::set<std::pair<Tag, Tag>> seen_edges;
    for (const auto &[a, b] : edges) {
        if (!seen.count(a) || !seen.count(b)) {
            throw std::invalid_argument("edge (" + a + "," + b + ") references a missing vertex");
        }
        if (a == b) {
            throw std::invalid_argument("self-loop on '" + a + "'");
        }
        if (!seen_edges.insert(std::minmax(a, b)).second) {
            throw std::invalid_argument("duplicate edge (" + a + "," + b + ")");
        }
    }
    for (const auto *list : {&inputs, &outputs}) {
        std::set<Tag> local;
        for (const auto &v : *list) {
            if (!seen.count(v)) {
                throw std::invalid_argument("input/output vertex '" + v + "' is not in the graph");
            }
            if (!local.insert(v).second) {
                throw std::invalid_argument("vertex '" + v + "' listed twice in input/output");
            }
        }
    }
}

std::string command_str(const Command &command) {
    return std::visit(
        overloaded{
            [](const Prepare &c) {
                std::string s = "N(" + c.tag;
                std::visit(overloaded{
                               [&](const PlusState &p) { s += ",+" + p.theta.str(); },
                               [&](const BasisState &b) { s += ",|" + std::to_string(b.bit) + ">"; },
                               [&](const MixedState &) { s += ",I/2"; },
                           },
                           c.spec);
                return s + ")";
            },
            [](const Entangle &c) { return "E(" + c.a + "," + c.b + ")"; },
            [](const Measure &c) {
                return "M(" + c.tag + "," + c.angle.str() + ",x" + join(c.sx) + ",z" + join(c.sz) + ")";
            },
            [](const CorrectX &c) { return "X(" + c.tag + "," + join(c.deps) + ")"; },
            [](const CorrectZ &c) { return "Z(" + c.tag + "," + join(c.deps) + ")"; },
        },
        command);
}

size_t Pattern::num_measurements() const {
    size_t n = 0;
    for (const auto &c : commands) {
        n += std::holds_alternative<Measure>(c);
    }
    return n;
}

std::vector<Tag> Pattern::measurement_order() const {
    std::vector<Tag> out;
    for (const auto &c : commands) {
        if (const auto *m = std::get_if<Measure>(&c)) {
            out.push_back(m->tag);
        }
    }
    return out;
}

std::vector<Violation> check_runnable(const Pattern &pattern) {
    const OpenGraph &g = pattern.graph;
    std::vector<Violation> out;
    std::set<Tag> live(g.inputs.begin(), g.inputs.end());
    std::set<Tag> prepared, measured;
    auto add = [&](const std::string &rule, size_t index, const std::string &msg) {
        out.push_back(Violation{rule, msg, index, std::nullopt});
    };
    auto require_live = [&](const Tag &t, size_t index) {
        if (!g.has_vertex(t)) {
            add("R1", index, "command acts on unknown qubit '" + t + "'");
        } else if (measured.count(t)) {
            add("R1", index, "command acts on already measured qubit '" + t + "'");
        } else if (!live.count(t)) {
            add("R1", index, "command acts on qubit '" + t + "' before its preparation");
        }
    };
    auto require_measured = [&](const std::set<Tag> &deps, size_t index) {
        for (const auto &d : deps) {
            if (!measured.count(d)) {
                add("R0", index, "command depends on outcome of '" + d + "' which is not yet measured");
            }
        }
    };
    for (size_t i = 0; i < pattern.commands.size(); i++) {
        std::visit(overloaded{
                       [&](const Prepare &c) {
                           if (g.is_input(c.tag)) {
                               add("R2", i, "input qubit '" + c.tag + "' is prepared");
                           } else if (prepared.count(c.tag)) {
                               add("R2", i, "qubit '" + c.tag + "' prepared twice");
                           } else if (!g.has_vertex(c.tag)) {
                               add("R1", i, "preparation of unknown qubit '" + c.tag + "'");
                           }
                           prepared.insert(c.tag);
                           live.insert(c.tag);
                       },
                       [&](const Entangle &c) {
                           require_live(c.a, i);
                           require_live(c.b, i);
                       },
                       [&](const Measure &c) {
                           require_measured(c.sx, i);
                           require_measured(c.sz, i);
                           require_live(c.tag, i);
                           if (g.is_output(c.tag)) {
                               add("R2", i, "output qubit '" + c.tag + "' is measured");
                           }
                           measured.insert(c.tag);
                       },
                       [&](const CorrectX &c) {
                           require_measured(c.deps, i);
                           require_live(c.tag, i);
                       },
                       [&](const CorrectZ &c) {
                           require_measured(c.deps, i);
                           require_live(c.tag, i);
                       },
                   },
                   pattern.commands[i]);
    }
    size_t end = pattern.commands.size();
    for (const auto &v : g.vertices) {
        if (!g.is_output(v) && !measured.count(v)) {
            add("R2", end, "non-output qubit '" + v + "' is never measured");
        }
        if (!g.is_input(v) && !prepared.count(v)) {
            add("R2", end, "non-input qubit '" + v + "' is never prepared");
        }
    }
    return out;
}

std::vector<Violation> check_flow(const OpenGraph &graph, const Flow &flow) {
    std::vector<Violation> out;
    auto add = [&](const std::string &rule, const Tag &v, const std::string &msg) {
        out.push_back(Violation{rule, msg, std::nullopt, v});
    };
    for (const auto &v : graph.vertices) {
        if (!flow.level.count(v)) {
            add("shape", v, "no level for vertex '" + v + "'");
        } else if (flow.level.at(v) < 0) {
            add("shape", v, "negative level for vertex '" + v + "'");
        }
    }
    for (const auto &[x, fx] : flow.successor) {
        if (!graph.has_vertex(x) || graph.is_output(x)) {
            add("shape", x, "flow defined on '" + x + "' which is not in O^c");
        }
        if (!graph.has_vertex(fx) || graph.is_input(fx)) {
            add("shape", x, "f(" + x + ") = '" + fx + "' is not in I^c");
        }
    }
    for (const auto &x : graph.non_outputs()) {
        if (!flow.successor.count(x)) {
            add("shape", x, "flow undefined on '" + x + "'");
        }
    }
    if (!out.empty()) {
        return out;
    }
    auto less = [&](const Tag &a, const Tag &b) { return flow.level.at(a) < flow.level.at(b); };
    std::map<Tag, Tag> preimage;
    for (const auto &x : graph.non_outputs()) {
        const Tag &fx = flow.successor.at(x);
        if (!graph.adjacent(x, fx)) {
            add("F0", x, x + " is not adjacent to f(" + x + ") = " + fx);
        }
        if (!less(x, fx)) {
            add("F1", x, x + " does not precede f(" + x + ") = " + fx);
        }
        for (const auto &y : graph.neighbors(fx)) {
            if (y != x && !less(x, y)) {
                add("F2", x, "neighbour " + y + " of f(" + x + ") = " + fx + " does not succeed " + x);
            }
        }
        auto [it, inserted] = preimage.emplace(fx, x);
        if (!inserted) {
            add("injective", x, "f(" + x + ") = f(" + it->second + ") = " + fx);
        }
    }
    return out;
}

std::optional<Flow> find_flow(const OpenGraph &graph, size_t max_vertices) {
    graph.validate();
    size_t n = graph.vertices.size();
    if (n > max_vertices) {
        throw std::invalid_argument("find_flow: graph has " + std::to_string(n) + " vertices, above the bound " +
                                    std::to_string(max_vertices));
    }
    std::vector<uint32_t> adj(n, 0);
    for (const auto &[a, b] : graph.edges) {
        size_t ia = graph.vertex_index(a), ib = graph.vertex_index(b);
        adj[ia] |= 1u << ib;
        adj[ib] |= 1u << ia;
    }
    std::vector<size_t> domain;
    uint32_t non_input_mask = 0;
    for (size_t i = 0; i < n; i++) {
        if (!graph.is_output(graph.vertices[i])) {
            domain.push_back(i);
        }
        if (!graph.is_input(graph.vertices[i])) {
            non_input_mask |= 1u << i;
        }
    }

    std::vector<size_t> f(n, n);
    std::vector<int> level(n, 0);
    // Constraint digraph: x -> f(x), and x -> y for every neighbour y != x of f(x).
    auto layered = [&]() -> bool {
        std::vector<uint32_t> succ(n, 0);
        std::vector<int> indegree(n, 0);
        for (size_t x : domain) {
            uint32_t s = (adj[f[x]] | (1u << f[x])) & ~(1u << x);
            succ[x] = s;
        }
        for (size_t x = 0; x < n; x++) {
            for (size_t y = 0; y < n; y++) {
                indegree[y] += (succ[x] >> y) & 1;
            }
        }
        std::vector<size_t> queue;
        for (size_t v = 0; v < n; v++) {
            level[v] = 0;
            if (indegree[v] == 0) {
                queue.push_back(v);
            }
        }
        for (size_t head = 0; head < queue.size(); head++) {
            size_t x = queue[head];
            for (size_t y = 0; y < n; y++) {
                if ((succ[x] >> y) & 1) {
                    level[y] = std::max(level[y], level[x] + 1);
                    if (--indegree[y] == 0) {
                        queue.push_back(y);
                    }
                }
            }
        }
        return queue.size() == n;
    };

    uint32_t used = 0;
    std::function<bool(size_t)> assign = [&](size_t k) -> bool {
        if (k == domain.size()) {
            return layered();
        }
        size_t x = domain[k];
        uint32_t candidates = adj[x] & non_input_mask & ~used;
        for (size_t y = 0; y < n; y++) {
            if ((candidates >> y) & 1) {
                f[x] = y;
                used |= 1u << y;
                if (assign(k + 1)) {
                    return true;
                }
                used &= ~(1u << y);
            }
        }
        return false;
    };
    if (!assign(0)) {
        return std::nullopt;
    }
    Flow flow;
    for (size_t x : domain) {
        flow.successor[graph.vertices[x]] = graph.vertices[f[x]];
    }
    for (size_t v = 0; v < n; v++) {
        flow.level[graph.vertices[v]] = level[v];
    }
    return flow;
}

std::vector<BranchRecord> execute_pattern(const Pattern &pattern, const DensityState &input,
                                          const ExecutionOptions &options) {
    const OpenGraph &g = pattern.graph;
    for (const auto &v : g.inputs) {
        if (!input.has(v)) {
            throw std::invalid_argument("execute_pattern: input state lacks input vertex '" + v + "'");
        }
    }
    std::vector<Tag> spectators;
    for (const auto &t : input.tags()) {
        if (!g.is_input(t)) {
            if (g.has_vertex(t)) {
                throw std::invalid_argument("execute_pattern: input state holds non-input vertex '" + t + "'");
            }
            spectators.push_back(t);
        }
    }
    auto violations = check_runnable(pattern);
    if (!violations.empty()) {
        const auto &v = violations.front();
        throw std::invalid_argument("execute_pattern: pattern not runnable (" + v.rule + " at command " +
                                    std::to_string(v.command_index.value_or(0)) + ": " + v.message + ")");
    }
    size_t measurements = pattern.num_measurements();
    if (options.mode == ExecutionMode::kEnumerate && measurements > kMaxEnumeratedMeasurements) {
        throw std::length_error("execute_pattern: " + std::to_string(measurements) +
                                " measurements exceed the enumeration cap; use sample mode");
    }
    std::vector<Tag> final_order = g.outputs;
    final_order.insert(final_order.end(), spectators.begin(), spectators.end());

    auto base_angle = [&](const Measure &m) {
        auto it = options.real_angles.find(m.tag);
        return it != options.real_angles.end() ? it->second : m.angle.radians();
    };

    std::vector<BranchRecord> results;
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::function<void(size_t, DensityState, std::map<Tag, int> &, double, uint64_t)> walk =
        [&](size_t index, DensityState state, std::map<Tag, int> &outcomes, double probability, uint64_t branch) {
            for (; index < pattern.commands.size(); index++) {
                const Command &command = pattern.commands[index];
                if (const auto *m = std::get_if<Measure>(&command)) {
                    double angle = base_angle(*m);
                    if (parity(m->sx, outcomes)) {
                        angle = -angle;
                    }
                    if (parity(m->sz, outcomes)) {
                        angle += std::numbers::pi;
                    }
                    auto branches = measure_xy_real(state, m->tag, angle);
                    if (options.mode == ExecutionMode::kSample) {
                        int b = uniform(rng) < branches[0].probability ? 0 : 1;
                        if (!branches[b].possible) {
                            b ^= 1;
                        }
                        outcomes[m->tag] = b;
                        probability *= branches[b].probability;
                        branch = 2 * branch + (uint64_t)b;
                        state = std::move(*branches[b].state);
                        if (options.observer) {
                            options.observer(index, branch, state);
                        }
                        continue;
                    }
                    for (auto &br : branches) {
                        if (!br.possible) {
                            continue;
                        }
                        outcomes[m->tag] = br.outcome;
                        uint64_t child = 2 * branch + (uint64_t)br.outcome;
                        if (options.observer) {
                            options.observer(index, child, *br.state);
                        }
                        walk(index + 1, std::move(*br.state), outcomes, probability * br.probability, child);
                        outcomes.erase(m->tag);
                    }
                    return;
                }
                std::visit(overloaded{
                               [&](const Prepare &c) {
                                   DensityState q = std::visit(
                                       overloaded{
                                           [&](const PlusState &p) { return DensityState::plus(c.tag, p.theta); },
                                           [&](const BasisState &b) { return DensityState::basis(c.tag, b.bit); },
                                           [&](const MixedState &) { return DensityState::maximally_mixed(c.tag); },
                                       },
                                       c.spec);
                                   state = tensor(state, q);
                               },
                               [&](const Entangle &c) { state = apply_gate(state, gates::CZ(), {c.a, c.b}); },
                               [&](const Measure &) {},
                               [&](const CorrectX &c) {
                                   if (parity(c.deps, outcomes)) {
                                       state = apply_gate(state, gates::X(), {c.tag});
                                   }
                               },
                               [&](const CorrectZ &c) {
                                   if (parity(c.deps, outcomes)) {
                                       state = apply_gate(state, gates::Z(), {c.tag});
                                   }
                               },
                           },
                           command);
                if (options.observer) {
                    options.observer(index, branch, state);
                }
            }
            results.push_back(BranchRecord{outcomes, probability, reorder(state, final_order)});
        };
    std::map<Tag, int> outcomes;
    walk(0, input, outcomes, 1.0, 1);
    return results;
}

ComplexMatrix reference_unitary(const OpenGraph &graph, const Flow &flow, const std::map<Tag, double> &angles) {
    graph.validate();
    size_t n = graph.vertices.size();
    if (n > kReferenceUnitaryBound) {
        throw std::length_error("reference_unitary: graph above the size bound");
    }
    auto violations = check_flow(graph, flow);
    if (!violations.empty()) {
        throw std::invalid_argument("reference_unitary: invalid flow (" + violations.front().rule + ": " +
                                    violations.front().message + ")");
    }
    std::vector<size_t> input_idx, output_idx, free_idx, measured_idx;
    for (const auto &v : graph.inputs) {
        input_idx.push_back(graph.vertex_index(v));
    }
    for (const auto &v : graph.outputs) {
        output_idx.push_back(graph.vertex_index(v));
    }
    for (const auto &v : graph.non_inputs()) {
        free_idx.push_back(graph.vertex_index(v));
    }
    std::vector<double> measured_angle;
    for (const auto &v : graph.non_outputs()) {
        measured_idx.push_back(graph.vertex_index(v));
        auto it = angles.find(v);
        if (it == angles.end()) {
            throw std::invalid_argument("reference_unitary: missing angle for '" + v + "'");
        }
        measured_angle.push_back(it->second);
    }
    std::vector<std::pair<size_t, size_t>> edge_idx;
    for (const auto &[a, b] : graph.edges) {
        edge_idx.emplace_back(graph.vertex_index(a), graph.vertex_index(b));
    }

    size_t in_dim = size_t{1} << input_idx.size();
    size_t out_dim = size_t{1} << output_idx.size();
    ComplexMatrix u = ComplexMatrix::Zero(out_dim, in_dim);
    // N_{I^c} contributes 2^{-|I^c|/2}, each bra <+_a| contributes 2^{-1/2}; the prefactor
    // 2^{|O^c|/2} cancels the latter.
    double scale = std::pow(2.0, -0.5 * (double)free_idx.size());
    std::vector<int> z(n, 0);
    for (size_t x = 0; x < in_dim; x++) {
        for (size_t k = 0; k < input_idx.size(); k++) {
            z[input_idx[k]] = (x >> (input_idx.size() - 1 - k)) & 1;
        }
        for (size_t y = 0; y < (size_t{1} << free_idx.size()); y++) {
            for (size_t k = 0; k < free_idx.size(); k++) {
                z[free_idx[k]] = (y >> k) & 1;
            }
            int sign = 0;
            for (const auto &[a, b] : edge_idx) {
                sign ^= z[a] & z[b];
            }
            double phase = 0;
            for (size_t k = 0; k < measured_idx.size(); k++) {
                if (z[measured_idx[k]]) {
                    phase -= measured_angle[k];
                }
            }
            size_t o = 0;
            for (size_t idx : output_idx) {
                o = (o << 1) | (size_t)z[idx];
            }
            u(o, x) += (sign ? -scale : scale) * std::polar(1.0, phase);
        }
    }
    ComplexMatrix gram = u.adjoint() * u;
    if (!approx_equal(gram, ComplexMatrix::Identity(in_dim, in_dim))) {
        throw std::runtime_error("reference_unitary: result is not unitary");
    }
    return u;
}

ComplexMatrix reference_unitary(const OpenGraph &graph, const Flow &flow, const std::map<Tag, Angle> &angles) {
    std::map<Tag, double> real;
    for (const auto &[v, a] : angles) {
        real[v] = a.radians();
    }
    return reference_unitary(graph, flow, real);
}

Tag reference_tag(const Tag &v) {
    return "ref:" + v;
}

DensityState choi_input(const std::vector<Tag> &inputs) {
    DensityState state;
    for (const auto &v : inputs) {
        state = tensor(state, DensityState::bell_pair(v, reference_tag(v)));
    }
    std::vector<Tag> order = inputs;
    for (const auto &v : inputs) {
        order.push_back(reference_tag(v));
    }
    return reorder(state, order);
}

DensityState choi_of_unitary(const ComplexMatrix &u, const std::vector<Tag> &outputs, const std::vector<Tag> &inputs) {
    size_t in_dim = size_t{1} << inputs.size();
    if ((size_t)u.cols() != in_dim || (size_t)u.rows() != (size_t{1} << outputs.size())) {
        throw std::invalid_argument("choi_of_unitary: dimension mismatch");
    }
    // |Phi> = sum_x |x>|x> / sqrt(dim); (U (x) I)|Phi> = sum_x U|x> (x) |x>.
    ComplexVector psi = ComplexVector::Zero(u.rows() * (Eigen::Index)in_dim);
    double norm = 1.0 / std::sqrt((double)in_dim);
    for (size_t x = 0; x < in_dim; x++) {
        for (Eigen::Index o = 0; o < u.rows(); o++) {
            psi(o * (Eigen::Index)in_dim + (Eigen::Index)x) = u(o, (Eigen::Index)x) * norm;
        }
    }
    std::vector<Tag> tags = outputs;
    for (const auto &v : inputs) {
        tags.push_back(reference_tag(v));
    }
    return DensityState(tags, psi * psi.adjoint());
}

DeterminismResult check_strong_determinism(const Pattern &pattern) {
    DeterminismResult result;
    auto branches = execute_pattern(pattern, choi_input(pattern.graph.inputs));
    for (size_t i = 1; i < branches.size(); i++) {
        double d = trace_distance(branches[0].state, branches[i].state);
        if (d > kTolerance) {
            result.ok = false;
            result.branch_a = branches[0].outcomes;
            result.branch_b = branches[i].outcomes;
            result.distance = d;
            return result;
        }
    }
    return result;
}

double choi_distance_to_unitary(const Pattern &pattern, const ComplexMatrix &u,
                                const std::map<Tag, double> &real_angles) {
    ExecutionOptions options;
    options.real_angles = real_angles;
    auto branches = execute_pattern(pattern, choi_input(pattern.graph.inputs), options);
    DensityState expected = choi_of_unitary(u, pattern.graph.outputs, pattern.graph.inputs);
    ComplexMatrix channel = ComplexMatrix::Zero(expected.dim(), expected.dim());
    for (const auto &b : branches) {
        channel += b.probability * reorder(b.state, expected.tags()).matrix();
    }
    return trace_distance(channel, expected.matrix());
}

}  // namespace opq
