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

#ifndef OPQ_MBQC_H
#define OPQ_MBQC_H

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "opq/qmat.h"

namespace opq {

using Edge = std::pair<Tag, Tag>;

struct OpenGraph {
    std::vector<Tag> vertices;
    std::vector<Edge> edges;
    std::vector<Tag> inputs;
    std::vector<Tag> outputs;

    /// Throws std::invalid_argument on dangling references, self-loops or duplicates.
    void validate() const;
    bool has_vertex(const Tag &v) const;
    bool is_input(const Tag &v) const;
    bool is_output(const Tag &v) const;
    bool adjacent(const Tag &a, const Tag &b) const;
    /// Neighbours in vertex-list order.
    std::vector<Tag> neighbors(const Tag &v) const;
    /// O^c in vertex-list order.
    std::vector<Tag> non_outputs() const;
    /// I^c in vertex-list order.
    std::vector<Tag> non_inputs() const;
    size_t vertex_index(const Tag &v) const;
};

/// Flow map plus a level function; x strictly precedes y iff level(x) < level(y).
struct Flow {
    std::map<Tag, Tag> successor;
    std::map<Tag, int> level;
};

struct PlusState {
    Angle theta;
};
struct BasisState {
    int bit = 0;
};
struct MixedState {};
using PrepareSpec = std::variant<PlusState, BasisState, MixedState>;

struct Prepare {
    Tag tag;
    PrepareSpec spec = PlusState{};
};
struct Entangle {
    Tag a;
    Tag b;
};
struct Measure {
    Tag tag;
    Angle angle;
    std::set<Tag> sx;
    std::set<Tag> sz;
};
struct CorrectX {
    Tag tag;
    std::set<Tag> deps;
};
struct CorrectZ {
    Tag tag;
    std::set<Tag> deps;
};
using Command = std::variant<Prepare, Entangle, Measure, CorrectX, CorrectZ>;

std::string command_str(const Command &command);

struct Pattern {
    OpenGraph graph;
    std::vector<Command> commands;
    std::map<Tag, Angle> angles;
    std::optional<Flow> flow;

    size_t num_measurements() const;
    /// Measured vertices in command order.
    std::vector<Tag> measurement_order() const;
};

struct Violation {
    std::string rule;
    std::string message;
    /// Offending command index for runnability violations.
    std::optional<size_t> command_index;
    /// Offending vertex for flow violations.
    std::optional<Tag> vertex;
};

/// Empty result means the pattern is runnable. Rules: R0 (dependency on an outcome not yet
/// measured), R1 (command on a qubit not yet prepared or already measured), R2 (qubit prepared or
/// measured twice).
std::vector<Violation> check_runnable(const Pattern &pattern);

/// Empty result means the flow is valid. Rules: shape, F0, F1, F2, injective.
std::vector<Violation> check_flow(const OpenGraph &graph, const Flow &flow);

inline constexpr size_t kDefaultFlowSearchBound = 12;
std::optional<Flow> find_flow(const OpenGraph &graph, size_t max_vertices = kDefaultFlowSearchBound);

struct BranchRecord {
    std::map<Tag, int> outcomes;
    double probability = 1.0;
    DensityState state;
};

enum class ExecutionMode { kEnumerate, kSample };

/// Called after each command with (command index, branch id, state). Branch ids are
/// heap-style: the root is 1 and outcome b of branch k continues as 2k + b.
using CommandObserver = std::function<void(size_t, uint64_t, const DensityState &)>;

inline constexpr size_t kMaxEnumeratedMeasurements = 20;

struct ExecutionOptions {
    ExecutionMode mode = ExecutionMode::kEnumerate;
    uint64_t seed = 0;
    /// Overrides base angles (radians) per vertex; for oracle tests with arbitrary real angles.
    std::map<Tag, double> real_angles;
    CommandObserver observer;
};

/// Runs the commands in order. The input must hold every vertex of I; any further tags are
/// spectators. Output tags are O followed by the spectators in input order.
std::vector<BranchRecord> execute_pattern(const Pattern &pattern, const DensityState &input,
                                          const ExecutionOptions &options = {});

inline constexpr size_t kReferenceUnitaryBound = 20;

/// 2^{|O^c|/2} (prod <+_{a_i}|) E_G N_{I^c}, columns indexed by I, rows by O.
ComplexMatrix reference_unitary(const OpenGraph &graph, const Flow &flow, const std::map<Tag, double> &angles);
ComplexMatrix reference_unitary(const OpenGraph &graph, const Flow &flow, const std::map<Tag, Angle> &angles);

/// Tags "ref:<v>" for every v in `inputs`, used for Choi states.
Tag reference_tag(const Tag &v);
/// Each v in `inputs` maximally entangled with reference_tag(v); tags are inputs ++ references.
DensityState choi_input(const std::vector<Tag> &inputs);
/// Choi state (U (x) I)|Phi><Phi|(U (x) I)^dagger with output tags ++ reference tags.
DensityState choi_of_unitary(const ComplexMatrix &u, const std::vector<Tag> &outputs, const std::vector<Tag> &inputs);

struct DeterminismResult {
    bool ok = true;
    std::map<Tag, int> branch_a;
    std::map<Tag, int> branch_b;
    double distance = 0;
};

DeterminismResult check_strong_determinism(const Pattern &pattern);

/// Channel distance between a pattern (all branches) and conjugation by `u`, via Choi states.
double choi_distance_to_unitary(const Pattern &pattern, const ComplexMatrix &u,
                                const std::map<Tag, double> &real_angles = {});

}  // namespace opq

#endif
