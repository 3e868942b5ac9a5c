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

#ifndef OPQ_DQC1_H
#define OPQ_DQC1_H

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "opq/mbqc.h"

namespace opq {

/// Rewrites a flowed open graph into the one-pure-qubit friendly command order: per measured
/// vertex i (by level, ties by vertex order) prepare f(i), entangle i with its unmeasured
/// neighbours, measure i. Remaining output-output edges are entangled afterwards, then the outputs
/// are corrected.
Pattern rewrite_with_flow(const OpenGraph &graph, const Flow &flow, const std::map<Tag, Angle> &angles);

/// Same computation with every preparation first, then every entangling, then the measurements.
Pattern upfront_preparation_variant(const Pattern &pattern);

struct BrickworkSpec {
    int width = 1;
    int depth = 2;

    void validate() const;
    /// Number of measured vertices, w(d-1).
    int measured() const {
        return width * (depth - 1);
    }
    /// Number of vertices, wd.
    int vertices() const {
        return width * depth;
    }
};

/// Vertex tag "(i,j)" for row i and column j, both 1-based.
Tag vertex_tag(int row, int col);
/// Parses "(i,j)"; throws std::invalid_argument on malformed input.
std::pair<int, int> parse_vertex_tag(const Tag &tag);

/// Vertices in column-major order, first column inputs, last column outputs, flow (i,j) -> (i,j+1).
std::pair<OpenGraph, Flow> brickwork(const BrickworkSpec &spec);

/// Measured vertices in protocol order (column-major, columns 1..d-1).
std::vector<Tag> brickwork_measured_vertices(const BrickworkSpec &spec);
/// Angle map from a flat column-major list of w(d-1) angles.
std::map<Tag, Angle> brickwork_angles(const BrickworkSpec &spec, const std::vector<Angle> &flat);

struct PurityStep {
    size_t command_index;
    uint64_t branch_id;
    double purity;
    double excess;
};

struct PurityAuditTrail {
    std::vector<PurityStep> steps;
    double input_purity = 0;
    double max_excess = 0;
    double c = 2;
    bool passed = true;
    /// Purity after each Measure command (step boundaries).
    std::vector<PurityStep> boundaries;
};

inline constexpr double kDefaultPurityConstant = 2.0;

/// Executes every branch and records purity after every command; fails iff some step reaches
/// input purity + c.
PurityAuditTrail audit_purity(const Pattern &pattern, const DensityState &input, double c = kDefaultPurityConstant);
std::string audit_trail_csv(const PurityAuditTrail &trail);

enum class GateKind { kH, kT, kCNOT };

struct Gate {
    GateKind kind;
    int target;
    /// Control wire for CNOT, ignored otherwise.
    int control = -1;
};

/// Unitary of a gate sequence on `wires` qubits, wire 1 the most significant.
ComplexMatrix circuit_unitary(const std::vector<Gate> &circuit, int wires);

/// Brick geometry: 2 wires x 8 measured columns. Odd row pairs (1,2), (3,4), ... host bricks.
inline constexpr int kBrickColumns = 8;
using BrickAngles = std::array<std::array<int, kBrickColumns>, 2>;

/// Frozen brick tables; the two-wire brick unitary equals the gate up to global phase.
const BrickAngles &brick_table(GateKind kind, bool on_lower_wire_or_reversed);

/// Places one gate per brick, brick layers left to right. Requires d = 8k + 1 with at least as many
/// layers as gates. Throws std::invalid_argument("circuit does not fit ...") otherwise.
std::map<Tag, Angle> gates_to_brick_angles(const std::vector<Gate> &circuit, const BrickworkSpec &spec);

/// Exhaustive meet-in-the-middle search for a brick implementing `target` (4x4) up to phase, with
/// the last two columns fixed to 0. Returns false if none exists.
bool search_brick_angles(const ComplexMatrix &target, BrickAngles &out);

/// Two-wire unitary of a brick under the single-column J(a) = H diag(1, e^{-ia}) model.
ComplexMatrix brick_model_unitary(const BrickAngles &angles);

}  // namespace opq

#endif
