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

#include "gtest/gtest.h"
#include "opq/dqc1.h"
#include "oracles.h"

using namespace opq;

namespace {

OpenGraph line(int n) {
    OpenGraph g;
    for (int i = 1; i <= n; i++) {
        g.vertices.push_back("v" + std::to_string(i));
        if (i > 1) {
            g.edges.emplace_back("v" + std::to_string(i - 1), "v" + std::to_string(i));
        }
    }
    g.inputs = {"v1"};
    g.outputs = {"v" + std::to_string(n)};
    return g;
}

Flow line_flow(int n) {
    Flow f;
    for (int i = 1; i <= n; i++) {
        f.level["v" + std::to_string(i)] = i;
        if (i < n) {
            f.successor["v" + std::to_string(i)] = "v" + std::to_string(i + 1);
        }
    }
    return f;
}

bool has_rule(const std::vector<Violation> &v, const std::string &rule) {
    for (const auto &x : v) {
        if (x.rule == rule) {
            return true;
        }
    }
    return false;
}

std::vector<std::vector<int>> grid(int w, int d, const std::map<Tag, Angle> &angles) {
    std::vector<std::vector<int>> out(w, std::vector<int>(d, 0));
    for (int i = 1; i <= w; i++) {
        for (int j = 1; j < d; j++) {
            out[i - 1][j - 1] = angles.at(vertex_tag(i, j)).eighths();
        }
    }
    return out;
}

}  // namespace

TEST(open_graph, validate_rejects_dangling_and_loops) {
    OpenGraph g = line(2);
    g.edges.emplace_back("v1", "v9");
    EXPECT_THROW(g.validate(), std::invalid_argument);
    OpenGraph loop = line(2);
    loop.edges.emplace_back("v1", "v1");
    EXPECT_THROW(loop.validate(), std::invalid_argument);
    OpenGraph dup = line(2);
    dup.edges.emplace_back("v2", "v1");
    EXPECT_THROW(dup.validate(), std::invalid_argument);
}

TEST(check_runnable, accepts_rewritten_line) {
    OpenGraph g = line(3);
    Pattern p = rewrite_with_flow(g, line_flow(3), {{"v1", Angle(1)}, {"v2", Angle(2)}});
    EXPECT_TRUE(check_runnable(p).empty());
    EXPECT_EQ(p.num_measurements(), 2u);
    EXPECT_EQ(p.measurement_order(), (std::vector<Tag>{"v1", "v2"}));
}

TEST(check_runnable, flags_each_rule) {
    OpenGraph g = line(2);
    Pattern p;
    p.graph = g;
    // Dependency on an unmeasured qubit.
    p.commands = {Prepare{"v2"}, Entangle{"v1", "v2"}, Measure{"v1", Angle(0), {"v2"}, {}}};
    EXPECT_TRUE(has_rule(check_runnable(p), "R0"));
    // Entangling before preparation.
    p.commands = {Entangle{"v1", "v2"}, Prepare{"v2"}, Measure{"v1", Angle(0), {}, {}}};
    EXPECT_TRUE(has_rule(check_runnable(p), "R1"));
    // Acting on a measured qubit.
    p.commands = {Prepare{"v2"}, Measure{"v1", Angle(0), {}, {}}, Entangle{"v1", "v2"}};
    EXPECT_TRUE(has_rule(check_runnable(p), "R1"));
    // Preparing an input, measuring an output, double preparation.
    p.commands = {Prepare{"v1"}, Prepare{"v2"}, Measure{"v1", Angle(0), {}, {}}};
    EXPECT_TRUE(has_rule(check_runnable(p), "R2"));
    p.commands = {Prepare{"v2"}, Measure{"v1", Angle(0), {}, {}}, Measure{"v2", Angle(0), {}, {}}};
    EXPECT_TRUE(has_rule(check_runnable(p), "R2"));
    p.commands = {Prepare{"v2"}, Prepare{"v2"}, Measure{"v1", Angle(0), {}, {}}};
    EXPECT_TRUE(has_rule(check_runnable(p), "R2"));
    // Never measuring a non-output.
    p.commands = {Prepare{"v2"}};
    EXPECT_TRUE(has_rule(check_runnable(p), "R2"));
}

TEST(check_flow, line_flow_is_valid) {
    EXPECT_TRUE(check_flow(line(3), line_flow(3)).empty());
}

TEST(check_flow, reports_violations) {
    OpenGraph g = line(3);
    Flow f = line_flow(3);
    f.level["v2"] = 1;  // v1 no longer strictly precedes f(v1)
    EXPECT_TRUE(has_rule(check_flow(g, f), "F1"));

    // Triangle a-b-c with f(a) = b: neighbour c of f(a) must come after a.
    OpenGraph tri;
    tri.vertices = {"a", "b", "c"};
    tri.edges = {{"a", "b"}, {"b", "c"}, {"a", "c"}};
    tri.inputs = {"a"};
    tri.outputs = {"b", "c"};
    Flow bad;
    bad.successor = {{"a", "b"}};
    bad.level = {{"a", 1}, {"b", 2}, {"c", 0}};
    EXPECT_TRUE(has_rule(check_flow(tri, bad), "F2"));

    Flow off_edge;
    off_edge.successor = {{"v1", "v3"}, {"v2", "v3"}};
    off_edge.level = {{"v1", 0}, {"v2", 1}, {"v3", 2}};
    auto v = check_flow(line(3), off_edge);
    EXPECT_TRUE(has_rule(v, "F0"));
    EXPECT_TRUE(has_rule(v, "injective"));

    Flow partial;
    partial.level = line_flow(3).level;
    EXPECT_TRUE(has_rule(check_flow(line(3), partial), "shape"));
}

TEST(find_flow, finds_line_and_brickwork_flows) {
    auto f = find_flow(line(4));
    ASSERT_TRUE(f.has_value());
    EXPECT_TRUE(check_flow(line(4), *f).empty());
    EXPECT_EQ(f->successor.at("v1"), "v2");

    auto [g, expected] = brickwork({2, 5});
    auto found = find_flow(g);
    ASSERT_TRUE(found.has_value());
    EXPECT_TRUE(check_flow(g, *found).empty());
}

TEST(find_flow, no_flow_for_triangle_with_single_output) {
    OpenGraph tri;
    tri.vertices = {"a", "b", "c"};
    tri.edges = {{"a", "b"}, {"b", "c"}, {"a", "c"}};
    tri.inputs = {"a"};
    tri.outputs = {"c"};
    // f(b) must be c, leaving f(a) = b: F1 gives a < b, and a ~ f(b) gives b < a.
    EXPECT_FALSE(find_flow(tri).has_value());
}

TEST(find_flow, respects_size_bound) {
    EXPECT_THROW(find_flow(line(13)), std::invalid_argument);
    EXPECT_TRUE(find_flow(line(13), 13).has_value());
}

TEST(find_flow, agrees_with_oracle_on_four_vertex_graphs) {
    const int n = 4;
    const int pairs = n * (n - 1) / 2;
    int with_flow = 0, total = 0;
    for (uint32_t edges = 0; edges < (1u << pairs); edges++) {
        oracle::SmallGraph sg{n, std::vector<uint32_t>(n, 0), 0, 0};
        OpenGraph g;
        for (int v = 0; v < n; v++) {
            g.vertices.push_back(std::string(1, char('a' + v)));
        }
        int bit = 0;
        for (int a = 0; a < n; a++) {
            for (int b = a + 1; b < n; b++, bit++) {
                if ((edges >> bit) & 1) {
                    sg.adj[a] |= 1u << b;
                    sg.adj[b] |= 1u << a;
                    g.edges.emplace_back(g.vertices[a], g.vertices[b]);
                }
            }
        }
        for (uint32_t in = 0; in < (1u << n); in++) {
            for (uint32_t out = 0; out < (1u << n); out++) {
                sg.inputs = in;
                sg.outputs = out;
                g.inputs.clear();
                g.outputs.clear();
                for (int v = 0; v < n; v++) {
                    if ((in >> v) & 1) {
                        g.inputs.push_back(g.vertices[v]);
                    }
                    if ((out >> v) & 1) {
                        g.outputs.push_back(g.vertices[v]);
                    }
                }
                bool expected = oracle::find_small_flow(sg).has_value();
                auto found = find_flow(g);
                ASSERT_EQ(found.has_value(), expected) << "edges=" << edges << " in=" << in << " out=" << out;
                if (found) {
                    ASSERT_TRUE(check_flow(g, *found).empty());
                }
                with_flow += expected;
                total++;
            }
        }
    }
    EXPECT_EQ(total, 64 * 256);
    EXPECT_GT(with_flow, 0);
    EXPECT_LT(with_flow, total);
}

TEST(execute_pattern, two_vertex_line_applies_j_step) {
    std::mt19937_64 rng(4);
    OpenGraph g = line(2);
    for (int a = 0; a < 8; a++) {
        Pattern p = rewrite_with_flow(g, line_flow(2), {{"v1", Angle(a)}});
        DensityState in({"v1"}, random_density_matrix(2, rng));
        auto branches = execute_pattern(p, in);
        ASSERT_EQ(branches.size(), 2u);
        oracle::Mat j = oracle::j_step(a);
        ComplexMatrix expect = j * in.matrix() * j.adjoint();
        double total = 0;
        for (const auto &b : branches) {
            EXPECT_EQ(b.state.tags(), std::vector<Tag>{"v2"});
            EXPECT_TRUE(approx_equal(b.state.matrix(), expect));
            total += b.probability;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(execute_pattern, spectators_follow_outputs) {
    OpenGraph g = line(2);
    Pattern p = rewrite_with_flow(g, line_flow(2), {{"v1", Angle(0)}});
    DensityState in = DensityState::bell_pair("v1", "ref");
    auto branches = execute_pattern(p, in);
    for (const auto &b : branches) {
        EXPECT_EQ(b.state.tags(), (std::vector<Tag>{"v2", "ref"}));
        // J(0) = H applied to half of |Phi>.
        ComplexMatrix hi = kron(gates::H(), gates::I());
        EXPECT_TRUE(approx_equal(b.state.matrix(), hi * in.matrix() * hi.adjoint()));
    }
}

TEST(execute_pattern, sample_mode_returns_one_enumerated_branch) {
    auto [g, f] = brickwork({2, 3});
    Pattern p = rewrite_with_flow(g, f, brickwork_angles({2, 3}, {Angle(1), Angle(5), Angle(2), Angle(7)}));
    DensityState in = tensor(DensityState::plus("(1,1)", Angle(0)), DensityState::maximally_mixed("(2,1)"));
    auto all = execute_pattern(p, in);
    EXPECT_EQ(all.size(), 16u);
    ExecutionOptions opts;
    opts.mode = ExecutionMode::kSample;
    opts.seed = 99;
    auto one = execute_pattern(p, in, opts);
    ASSERT_EQ(one.size(), 1u);
    auto again = execute_pattern(p, in, opts);
    EXPECT_EQ(one[0].outcomes, again[0].outcomes);
    bool matched = false;
    for (const auto &b : all) {
        if (b.outcomes == one[0].outcomes) {
            matched = approx_equal(b.state.matrix(), one[0].state.matrix());
        }
    }
    EXPECT_TRUE(matched);
}

TEST(execute_pattern, observer_sees_heap_branch_ids) {
    OpenGraph g = line(3);
    Pattern p = rewrite_with_flow(g, line_flow(3), {{"v1", Angle(0)}, {"v2", Angle(0)}});
    std::set<uint64_t> ids;
    ExecutionOptions opts;
    opts.observer = [&](size_t, uint64_t id, const DensityState &) { ids.insert(id); };
    execute_pattern(p, DensityState::plus("v1", Angle(0)), opts);
    EXPECT_TRUE(ids.count(1));
    EXPECT_TRUE(ids.count(2) || ids.count(3));
    EXPECT_TRUE(ids.count(4) || ids.count(5) || ids.count(6) || ids.count(7));
}

TEST(reference_unitary, matches_circuit_oracle_on_brickwork) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> eighth(0, 7);
    for (auto spec : {BrickworkSpec{1, 5}, BrickworkSpec{2, 5}, BrickworkSpec{3, 5}, BrickworkSpec{2, 9}}) {
        auto [g, f] = brickwork(spec);
        for (int trial = 0; trial < 5; trial++) {
            std::vector<Angle> flat;
            for (int k = 0; k < spec.measured(); k++) {
                flat.push_back(Angle(eighth(rng)));
            }
            auto angles = brickwork_angles(spec, flat);
            ComplexMatrix u = reference_unitary(g, f, angles);
            EXPECT_TRUE(is_unitary(u));
            EXPECT_TRUE(oracle::equal_up_to_phase(u, oracle::brickwork_circuit(spec.width, spec.depth,
                                                                               grid(spec.width, spec.depth, angles)),
                                                  1e-9))
                << "w=" << spec.width << " d=" << spec.depth;
        }
    }
}

TEST(reference_unitary, rejects_large_graphs) {
    EXPECT_THROW(reference_unitary(line(21), line_flow(21), std::map<Tag, Angle>{}), std::length_error);
}

TEST(choi_distance, rewritten_patterns_match_reference) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> angle(0, 2 * M_PI);
    auto [g, f] = brickwork({2, 3});
    std::map<Tag, double> real;
    for (const auto &v : g.non_outputs()) {
        real[v] = angle(rng);
    }
    Pattern p = rewrite_with_flow(g, f, brickwork_angles({2, 3}, std::vector<Angle>(4)));
    EXPECT_LE(choi_distance_to_unitary(p, reference_unitary(g, f, real), real), 1e-9);
    std::map<Tag, double> zeros;
    for (const auto &v : g.non_outputs()) {
        zeros[v] = 0.0;
    }
    ComplexMatrix wrong = reference_unitary(g, f, zeros);
    EXPECT_GT(choi_distance_to_unitary(p, wrong, real), 1e-3);
}

TEST(choi, of_identity_is_bell_state) {
    DensityState c = choi_of_unitary(ComplexMatrix::Identity(2, 2), {"o"}, {"i"});
    EXPECT_EQ(c.tags(), (std::vector<Tag>{"o", reference_tag("i")}));
    EXPECT_TRUE(approx_equal(c.matrix(), DensityState::bell_pair("a", "b").matrix()));
    EXPECT_EQ(choi_input({"i"}).tags(), (std::vector<Tag>{"i", "ref:i"}));
}

TEST(strong_determinism, rewritten_patterns_pass_and_stripped_fail) {
    auto [g, f] = brickwork({2, 3});
    Pattern p = rewrite_with_flow(g, f, brickwork_angles({2, 3}, {Angle(1), Angle(3), Angle(6), Angle(2)}));
    EXPECT_TRUE(check_strong_determinism(p).ok);
    Pattern stripped = p;
    for (auto &c : stripped.commands) {
        if (auto *m = std::get_if<Measure>(&c)) {
            m->sx.clear();
            m->sz.clear();
        } else if (auto *x = std::get_if<CorrectX>(&c)) {
            x->deps.clear();
        } else if (auto *z = std::get_if<CorrectZ>(&c)) {
            z->deps.clear();
        }
    }
    DeterminismResult r = check_strong_determinism(stripped);
    EXPECT_FALSE(r.ok);
    EXPECT_GT(r.distance, 1e-9);
    EXPECT_NE(r.branch_a, r.branch_b);
}

TEST(command_str, readable_forms) {
    EXPECT_EQ(command_str(Entangle{"a", "b"}), "E(a,b)");
    EXPECT_EQ(command_str(Prepare{"a", BasisState{1}}), "N(a,|1>)");
}
