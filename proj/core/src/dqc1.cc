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

#include "opq/dqc1.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>

namespace opq {

namespace {

std::set<Tag> z_dependencies(const OpenGraph &graph, const std::map<Tag, Tag> &inverse, const Tag &i) {
    std::set<Tag> out;
    for (const auto &k : graph.neighbors(i)) {
        if (graph.is_input(k)) {
            continue;
        }
        const Tag &pre = inverse.at(k);
        if (pre != i) {
            out.insert(pre);
        }
    }
    return out;
}

std::set<Tag> x_dependencies(const OpenGraph &graph, const std::map<Tag, Tag> &inverse, const Tag &i) {
    if (graph.is_input(i)) {
        return {};
    }
    return {inverse.at(i)};
}

}  // namespace

Pattern rewrite_with_flow(const OpenGraph &graph, const Flow &flow, const std::map<Tag, Angle> &angles) {
    graph.validate();
    auto violations = check_flow(graph, flow);
    if (!violations.empty()) {
        throw std::invalid_argument("rewrite_with_flow: invalid flow (" + violations.front().rule + ": " +
                                    violations.front().message + ")");
    }
    std::map<Tag, Tag> inverse;
    for (const auto &[x, fx] : flow.successor) {
        inverse[fx] = x;
    }
    for (const auto &v : graph.non_inputs()) {
        if (!inverse.count(v)) {
            throw std::invalid_argument("rewrite_with_flow: flow is not surjective onto I^c (missing '" + v + "')");
        }
    }

    std::vector<Tag> order = graph.non_outputs();
    std::stable_sort(order.begin(), order.end(),
                     [&](const Tag &a, const Tag &b) { return flow.level.at(a) < flow.level.at(b); });

    Pattern pattern;
    pattern.graph = graph;
    pattern.flow = flow;
    std::set<Tag> measured;
    std::set<std::pair<Tag, Tag>> entangled;
    for (const auto &i : order) {
        auto it = angles.find(i);
        if (it == angles.end()) {
            throw std::invalid_argument("rewrite_with_flow: missing angle for '" + i + "'");
        }
        pattern.angles[i] = it->second;
        pattern.commands.push_back(Prepare{flow.successor.at(i), PlusState{}});
        for (const auto &k : graph.neighbors(i)) {
            if (measured.count(k) || !entangled.insert(std::minmax(i, k)).second) {
                continue;
            }
            pattern.commands.push_back(Entangle{i, k});
        }
        pattern.commands.push_back(
            Measure{i, it->second, x_dependencies(graph, inverse, i), z_dependencies(graph, inverse, i)});
        measured.insert(i);
    }
    for (const auto &[a, b] : graph.edges) {
        if (entangled.insert(std::minmax(a, b)).second) {
            pattern.commands.push_back(Entangle{a, b});
        }
    }
    for (const auto &o : graph.outputs) {
        auto sx = x_dependencies(graph, inverse, o);
        auto sz = z_dependencies(graph, inverse, o);
        if (!sx.empty()) {
            pattern.commands.push_back(CorrectX{o, sx});
        }
        if (!sz.empty()) {
            pattern.commands.push_back(CorrectZ{o, sz});
        }
    }
    return pattern;
}

Pattern upfront_preparation_variant(const Pattern &pattern) {
    Pattern out = pattern;
    out.commands.clear();
    for (const auto &c : pattern.commands) {
        if (std::holds_alternative<Prepare>(c)) {
            out.commands.push_back(c);
        }
    }
    for (const auto &c : pattern.commands) {
        if (std::holds_alternative<Entangle>(c)) {
            out.commands.push_back(c);
        }
    }
    for (const auto &c : pattern.commands) {
        if (!std::holds_alternative<Prepare>(c) && !std::holds_alternative<Entangle>(c)) {
            out.commands.push_back(c);
        }
    }
    return out;
}

void BrickworkSpec::validate() const {
    if (width < 1) {
        throw std::invalid_argument("brickwork width must be at least 1");
    }
    if (depth < 2) {
        throw std::invalid_argument("brickwork depth must be at least 2");
    }
}

Tag vertex_tag(int row, int col) {
    return "(" + std::to_string(row) + "," + std::to_string(col) + ")";
}

std::pair<int, int> parse_vertex_tag(const Tag &tag) {
    int row = 0, col = 0;
    if (tag.size() < 5 || tag.front() != '(' || tag.back() != ')') {
        throw std::invalid_argument("malformed vertex '" + tag + "', expected (row,col)");
    }
    size_t comma = tag.find(',');
    if (comma == std::string::npos) {
        throw std::invalid_argument("malformed vertex '" + tag + "', expected (row,col)");
    }
    auto r1 = std::from_chars(tag.data() + 1, tag.data() + comma, row);
    auto r2 = std::from_chars(tag.data() + comma + 1, tag.data() + tag.size() - 1, col);
    if (r1.ec != std::errc() || r1.ptr != tag.data() + comma || r2.ec != std::errc() ||
        r2.ptr != tag.data() + tag.size() - 1 || row < 1 || col < 1) {
        throw std::invalid_argument("malformed vertex '" + tag + "', expected (row,col)");
    }
    return {row, col};
}

std::pair<OpenGraph, Flow> brickwork(const BrickworkSpec &spec) {
    spec.validate();
    int w = spec.width, d = spec.depth;
    OpenGraph g;
    Flow flow;
    for (int j = 1; j <= d; j++) {
        for (int i = 1; i <= w; i++) {
            g.vertices.push_back(vertex_tag(i, j));
            flow.level[vertex_tag(i, j)] = j;
            if (j < d) {
                flow.successor[vertex_tag(i, j)] = vertex_tag(i, j + 1);
            }
        }
    }
    for (int i = 1; i <= w; i++) {
        g.inputs.push_back(vertex_tag(i, 1));
        g.outputs.push_back(vertex_tag(i, d));
    }
    for (int j = 1; j <= d; j++) {
        for (int i = 1; i <= w; i++) {
            if (j < d) {
                g.edges.emplace_back(vertex_tag(i, j), vertex_tag(i, j + 1));
            }
        }
        // Bricks start at columns 3 mod 8 (odd upper rows) and 7 mod 8 (even upper rows), with
        // vertical edges at the start column and two columns later.
        for (int start : {j, j - 2}) {
            if (start < 1) {
                continue;
            }
            int phase = start % 8;
            if (phase != 3 && phase != 7) {
                continue;
            }
            int first_row = phase == 3 ? 1 : 2;
            for (int i = first_row; i + 1 <= w; i += 2) {
                g.edges.emplace_back(vertex_tag(i, j), vertex_tag(i + 1, j));
            }
        }
    }
    return {g, flow};
}

std::vector<Tag> brickwork_measured_vertices(const BrickworkSpec &spec) {
    spec.validate();
    std::vector<Tag> out;
    for (int j = 1; j < spec.depth; j++) {
        for (int i = 1; i <= spec.width; i++) {
            out.push_back(vertex_tag(i, j));
        }
    }
    return out;
}

std::map<Tag, Angle> brickwork_angles(const BrickworkSpec &spec, const std::vector<Angle> &flat) {
    auto measured = brickwork_measured_vertices(spec);
    if (flat.size() != measured.size()) {
        throw std::invalid_argument("expected " + std::to_string(measured.size()) + " angles for brickwork(" +
                                    std::to_string(spec.width) + "," + std::to_string(spec.depth) + "), got " +
                                    std::to_string(flat.size()));
    }
    std::map<Tag, Angle> out;
    for (size_t k = 0; k < measured.size(); k++) {
        out[measured[k]] = flat[k];
    }
    return out;
}

PurityAuditTrail audit_purity(const Pattern &pattern, const DensityState &input, double c) {
    PurityAuditTrail trail;
    trail.c = c;
    trail.input_purity = purity_parameter(input);
    trail.max_excess = -1e300;
    ExecutionOptions options;
    options.observer = [&](size_t index, uint64_t branch, const DensityState &state) {
        double p = purity_parameter(state);
        PurityStep step{index, branch, p, p - trail.input_purity};
        trail.steps.push_back(step);
        trail.max_excess = std::max(trail.max_excess, step.excess);
        if (std::holds_alternative<Measure>(pattern.commands[index])) {
            trail.boundaries.push_back(step);
        }
    };
    execute_pattern(pattern, input, options);
    if (trail.steps.empty()) {
        trail.max_excess = 0;
    }
    trail.passed = trail.max_excess < c;
    return trail;
}

std::string audit_trail_csv(const PurityAuditTrail &trail) {
    std::string out = "command_index,branch_id,purity_bits,excess_bits\n";
    char buf[128];
    for (const auto &s : trail.steps) {
        // Round tiny negative zeros so reports stay byte-stable.
        double p = std::abs(s.purity) < 5e-13 ? 0.0 : s.purity;
        double e = std::abs(s.excess) < 5e-13 ? 0.0 : s.excess;
        std::snprintf(buf, sizeof(buf), "%zu,%llu,%.9f,%.9f\n", s.command_index, (unsigned long long)s.branch_id, p, e);
        out += buf;
    }
    return out;
}

ComplexMatrix circuit_unitary(const std::vector<Gate> &circuit, int wires) {
    if (wires < 1 || wires > 12) {
        throw std::invalid_argument("circuit_unitary: unsupported wire count");
    }
    size_t dim = size_t{1} << wires;
    ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
    for (const auto &g : circuit) {
        auto check_wire = [&](int w) {
            if (w < 1 || w > wires) {
                throw std::invalid_argument("gate references wire " + std::to_string(w));
            }
        };
        check_wire(g.target);
        ComplexMatrix full = ComplexMatrix::Zero(dim, dim);
        if (g.kind == GateKind::kCNOT) {
            check_wire(g.control);
            if (g.control == g.target) {
                throw std::invalid_argument("CNOT control equals target");
            }
            size_t cbit = (size_t)(wires - g.control), tbit = (size_t)(wires - g.target);
            for (size_t x = 0; x < dim; x++) {
                size_t y = ((x >> cbit) & 1) ? x ^ (size_t{1} << tbit) : x;
                full(y, x) = 1;
            }
        } else {
            ComplexMatrix m = g.kind == GateKind::kH ? gates::H() : gates::T();
            size_t tbit = (size_t)(wires - g.target);
            for (size_t x = 0; x < dim; x++) {
                size_t b = (x >> tbit) & 1;
                for (size_t a = 0; a < 2; a++) {
                    size_t y = (x & ~(size_t{1} << tbit)) | (a << tbit);
                    full(y, x) += m(a, b);
                }
            }
        }
        u = full * u;
    }
    return u;
}

namespace {

ComplexMatrix column_step(int eighths) {
    // One measured column: H diag(1, e^{-ia}).
    return gates::H() * gates::Rz(-Angle(eighths).radians());
}

ComplexMatrix pair_product(int first, int second) {
    return column_step(second) * column_step(first);
}

struct MatrixKey {
    std::array<long long, 32> v;
    bool operator==(const MatrixKey &o) const {
        return v == o.v;
    }
};

struct MatrixKeyHash {
    size_t operator()(const MatrixKey &k) const {
        size_t h = 1469598103934665603ull;
        for (long long x : k.v) {
            h = (h ^ (size_t)x) * 1099511628211ull;
        }
        return h;
    }
};

// Phase- and scale-normalized rounded key of a 4x4 matrix.
bool matrix_key(const ComplexMatrix &m, MatrixKey &key) {
    Complex pivot = 0;
    for (int c = 0; c < 4 && pivot == Complex(0); c++) {
        for (int r = 0; r < 4; r++) {
            if (std::abs(m(r, c)) > 0.1) {
                pivot = m(r, c);
                break;
            }
        }
    }
    if (pivot == Complex(0)) {
        return false;
    }
    Complex inv = 1.0 / pivot;
    size_t k = 0;
    for (int c = 0; c < 4; c++) {
        for (int r = 0; r < 4; r++) {
            Complex x = m(r, c) * inv;
            key.v[k++] = std::llround(x.real() * 1e6);
            key.v[k++] = std::llround(x.imag() * 1e6);
        }
    }
    return true;
}

}  // namespace

ComplexMatrix brick_model_unitary(const BrickAngles &angles) {
    ComplexMatrix u = ComplexMatrix::Identity(4, 4);
    for (int c = 0; c < kBrickColumns; c++) {
        // Vertical edges at brick-local columns 3 and 5 act before that column's measurement.
        if (c == 2 || c == 4) {
            u = gates::CZ() * u;
        }
        u = kron(column_step(angles[0][c]), column_step(angles[1][c])) * u;
    }
    return u;
}

bool search_brick_angles(const ComplexMatrix &target, BrickAngles &out) {
    std::vector<ComplexMatrix> pairs(64);
    for (int p = 0; p < 64; p++) {
        pairs[p] = pair_product(p / 8, p % 8);
    }
    // Last layer lookup: P3 = J(a6) J(a5) on each wire.
    std::unordered_map<MatrixKey, int, MatrixKeyHash> last;
    for (int t = 0; t < 64; t++) {
        for (int b = 0; b < 64; b++) {
            MatrixKey key;
            if (matrix_key(kron(pairs[t], pairs[b]), key)) {
                last.emplace(key, t * 64 + b);
            }
        }
    }
    ComplexMatrix cz = gates::CZ();
    std::vector<ComplexMatrix> layer(4096);
    for (int t = 0; t < 64; t++) {
        for (int b = 0; b < 64; b++) {
            layer[t * 64 + b] = kron(pairs[t], pairs[b]);
        }
    }
    for (int first = 0; first < 4096; first++) {
        // target = P3 CZ P2 CZ P1  =>  P3 = target P1^dag CZ P2^dag CZ.
        ComplexMatrix a = target * layer[first].adjoint() * cz;
        for (int second = 0; second < 4096; second++) {
            ComplexMatrix x = a * layer[second].adjoint() * cz;
            MatrixKey key;
            if (!matrix_key(x, key)) {
                continue;
            }
            auto it = last.find(key);
            if (it == last.end()) {
                continue;
            }
            BrickAngles angles{};
            int third = it->second;
            int ids[3] = {first, second, third};
            for (int wire = 0; wire < 2; wire++) {
                for (int l = 0; l < 3; l++) {
                    int p = wire == 0 ? ids[l] / 64 : ids[l] % 64;
                    angles[wire][2 * l] = p / 8;
                    angles[wire][2 * l + 1] = p % 8;
                }
            }
            if (approx_equal_up_to_phase(brick_model_unitary(angles), target)) {
                out = angles;
                return true;
            }
        }
    }
    return false;
}

std::map<Tag, Angle> gates_to_brick_angles(const std::vector<Gate> &circuit, const BrickworkSpec &spec) {
    spec.validate();
    int w = spec.width, d = spec.depth;
    std::map<Tag, Angle> angles;
    for (const auto &v : brickwork_measured_vertices(spec)) {
        angles[v] = Angle(0);
    }
    if (circuit.empty()) {
        return angles;
    }
    if ((d - 1) % kBrickColumns != 0) {
        throw std::invalid_argument("circuit does not fit: depth " + std::to_string(d) +
                                    " is not 1 more than a multiple of 8");
    }
    int layers = (d - 1) / kBrickColumns;
    if ((int)circuit.size() > layers) {
        throw std::invalid_argument("circuit does not fit: " + std::to_string(circuit.size()) + " gates need " +
                                    std::to_string(circuit.size() * kBrickColumns + 1) + " columns, depth is " +
                                    std::to_string(d));
    }
    for (size_t layer = 0; layer < circuit.size(); layer++) {
        const Gate &g = circuit[layer];
        int low = g.kind == GateKind::kCNOT ? std::min(g.control, g.target) : g.target;
        if (g.kind == GateKind::kCNOT && std::abs(g.control - g.target) != 1) {
            throw std::invalid_argument("circuit does not fit: CNOT must act on neighbouring wires");
        }
        if (low < 1 || (g.kind == GateKind::kCNOT ? std::max(g.control, g.target) : g.target) > w) {
            throw std::invalid_argument("circuit does not fit: gate references a wire outside the width");
        }
        if (g.kind == GateKind::kCNOT && low % 2 == 0) {
            throw std::invalid_argument("circuit does not fit: CNOT on wires (" + std::to_string(low) + "," +
                                        std::to_string(low + 1) + ") does not align with a brick");
        }
        int top = low % 2 == 1 ? low : low - 1;
        if (top + 1 > w) {
            throw std::invalid_argument("circuit does not fit: wire " + std::to_string(low) + " has no brick partner");
        }
        bool flag = g.kind == GateKind::kCNOT ? g.control != top : g.target != top;
        const BrickAngles &table = brick_table(g.kind, flag);
        for (int wire = 0; wire < 2; wire++) {
            for (int c = 0; c < kBrickColumns; c++) {
                angles[vertex_tag(top + wire, (int)layer * kBrickColumns + c + 1)] = Angle(table[wire][c]);
            }
        }
    }
    return angles;
}

}  // namespace opq
