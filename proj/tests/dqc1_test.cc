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

#include "gtest/gtest.h"
#include "oracles.h"

using namespace opq;

namespace {

DensityState dqc1_input(const BrickworkSpec &spec) {
    DensityState in = DensityState::plus(vertex_tag(1, 1), Angle(0));
    for (int i = 2; i <= spec.width; i++) {
        in = tensor(in, DensityState::maximally_mixed(vertex_tag(i, 1)));
    }
    return in;
}

std::vector<std::vector<int>> grid(const BrickworkSpec &spec, const std::map<Tag, Angle> &angles) {
    std::vector<std::vector<int>> out(spec.width, std::vector<int>(spec.depth, 0));
    for (const auto &[v, a] : angles) {
        auto [i, j] = parse_vertex_tag(v);
        out[i - 1][j - 1] = a.eighths();
    }
    return out;
}

oracle::Mat gate_matrix(const Gate &g, int wires) {
    oracle::Mat h(2, 2), t = oracle::Mat::Identity(2, 2);
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    t(1, 1) = std::polar(1.0, M_PI / 4);
    if (g.kind != GateKind::kCNOT) {
        return oracle::on_wire(g.kind == GateKind::kH ? h : t, g.target - 1, wires);
    }
    // CNOT = (I (x) H) CZ (I (x) H) on the target.
    oracle::Mat ht = oracle::on_wire(h, g.target - 1, wires);
    return ht * oracle::cz(g.control - 1, g.target - 1, wires) * ht;
}

}  // namespace

TEST(vertex_tag, round_trips) {
    EXPECT_EQ(vertex_tag(2, 7), "(2,7)");
    EXPECT_EQ(parse_vertex_tag("(12,3)"), std::make_pair(12, 3));
    EXPECT_THROW(parse_vertex_tag("(1;2)"), std::invalid_argument);
    EXPECT_THROW(parse_vertex_tag("1,2"), std::invalid_argument);
}

TEST(brickwork, shape_and_edge_counts) {
    // Edges: w(d-1) horizontal plus verticals at columns 3, 5 (odd pairs) and 7, 9 (even pairs).
    struct Case {
        int w, d;
        size_t edges;
    };
    for (auto c : {Case{1, 3, 2}, Case{2, 3, 5}, Case{2, 5, 10}, Case{2, 9, 18}, Case{4, 9, 38}, Case{3, 9, 28}}) {
        auto [g, f] = brickwork({c.w, c.d});
        EXPECT_EQ(g.vertices.size(), size_t(c.w * c.d));
        EXPECT_EQ(g.edges.size(), c.edges) << c.w << "x" << c.d;
        EXPECT_EQ(g.inputs.size(), size_t(c.w));
        EXPECT_EQ(g.outputs.front(), vertex_tag(1, c.d));
        for (const auto &[a, b] : g.edges) {
            auto [ai, aj] = parse_vertex_tag(a);
            auto [bi, bj] = parse_vertex_tag(b);
            if (aj == bj) {
                EXPECT_TRUE(oracle::vertical_edge(std::min(ai, bi), aj)) << a << "-" << b;
            } else {
                EXPECT_EQ(ai, bi);
                EXPECT_EQ(std::abs(aj - bj), 1);
            }
        }
    }
}

TEST(brickwork, flow_is_valid_for_grid_of_sizes) {
    for (int w : {1, 2, 4}) {
        for (int d : {3, 5, 9}) {
            auto [g, f] = brickwork({w, d});
            EXPECT_TRUE(check_flow(g, f).empty()) << w << "x" << d;
            EXPECT_EQ(f.successor.at(vertex_tag(w, 1)), vertex_tag(w, 2));
        }
    }
}

TEST(brickwork, rejects_bad_specs) {
    EXPECT_THROW(brickwork({0, 3}), std::invalid_argument);
    EXPECT_THROW(brickwork({2, 1}), std::invalid_argument);
    EXPECT_THROW(brickwork_angles({2, 3}, {Angle(1)}), std::invalid_argument);
}

TEST(rewrite_with_flow, brickwork_2x3_command_sequence) {
    // Hand-derived from the step rule: per measured vertex prepare f(i), entangle i with its
    // unmeasured neighbours, measure; then the output-output edge; then output corrections.
    auto [g, f] = brickwork({2, 3});
    Pattern p = rewrite_with_flow(g, f, brickwork_angles({2, 3}, {Angle(1), Angle(2), Angle(3), Angle(4)}));
    std::vector<std::string> got;
    for (const auto &c : p.commands) {
        got.push_back(command_str(c));
    }
    std::vector<std::string> expected{
        command_str(Prepare{"(1,2)"}),
        command_str(Entangle{"(1,1)", "(1,2)"}),
        command_str(Measure{"(1,1)", Angle(1), {}, {}}),
        command_str(Prepare{"(2,2)"}),
        command_str(Entangle{"(2,1)", "(2,2)"}),
        command_str(Measure{"(2,1)", Angle(2), {}, {}}),
        command_str(Prepare{"(1,3)"}),
        command_str(Entangle{"(1,2)", "(1,3)"}),
        command_str(Measure{"(1,2)", Angle(3), {"(1,1)"}, {}}),
        command_str(Prepare{"(2,3)"}),
        command_str(Entangle{"(2,2)", "(2,3)"}),
        command_str(Measure{"(2,2)", Angle(4), {"(2,1)"}, {}}),
        command_str(Entangle{"(1,3)", "(2,3)"}),
        command_str(CorrectX{"(1,3)", {"(1,2)"}}),
        command_str(CorrectZ{"(1,3)", {"(1,1)", "(2,2)"}}),
        command_str(CorrectX{"(2,3)", {"(2,2)"}}),
        command_str(CorrectZ{"(2,3)", {"(1,2)", "(2,1)"}}),
    };
    EXPECT_EQ(got, expected);
    EXPECT_TRUE(check_runnable(p).empty());
}

TEST(rewrite_with_flow, matches_circuit_oracle_through_execution) {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> eighth(0, 7);
    for (auto spec : {BrickworkSpec{1, 5}, BrickworkSpec{2, 5}}) {
        auto [g, f] = brickwork(spec);
        for (int trial = 0; trial < 5; trial++) {
            std::vector<Angle> flat;
            for (int k = 0; k < spec.measured(); k++) {
                flat.push_back(Angle(eighth(rng)));
            }
            auto angles = brickwork_angles(spec, flat);
            Pattern p = rewrite_with_flow(g, f, angles);
            ComplexMatrix u = oracle::brickwork_circuit(spec.width, spec.depth, grid(spec, angles));
            EXPECT_LE(choi_distance_to_unitary(p, u), 1e-9);
        }
    }
}

TEST(upfront_preparation_variant, same_channel_different_order) {
    auto [g, f] = brickwork({2, 3});
    Pattern p = rewrite_with_flow(g, f, brickwork_angles({2, 3}, {Angle(5), Angle(2), Angle(7), Angle(1)}));
    Pattern up = upfront_preparation_variant(p);
    EXPECT_TRUE(check_runnable(up).empty());
    ASSERT_TRUE(std::holds_alternative<Prepare>(up.commands[0]));
    ASSERT_TRUE(std::holds_alternative<Prepare>(up.commands[3]));
    ASSERT_TRUE(std::holds_alternative<Entangle>(up.commands[4]));
    ComplexMatrix u = reference_unitary(g, f, p.angles);
    EXPECT_LE(choi_distance_to_unitary(up, u), 1e-9);
}

TEST(audit_purity, rewritten_brickwork_passes_and_upfront_fails) {
    BrickworkSpec spec{2, 5};
    auto [g, f] = brickwork(spec);
    std::vector<Angle> flat{Angle(1), Angle(0), Angle(3), Angle(2), Angle(7), Angle(4), Angle(6), Angle(5)};
    Pattern p = rewrite_with_flow(g, f, brickwork_angles(spec, flat));
    PurityAuditTrail t = audit_purity(p, dqc1_input(spec));
    EXPECT_NEAR(t.input_purity, 1.0, 1e-12);
    EXPECT_TRUE(t.passed);
    EXPECT_LT(t.max_excess, 2.0);
    ASSERT_FALSE(t.boundaries.empty());
    for (const auto &b : t.boundaries) {
        EXPECT_NEAR(b.purity, t.input_purity, 1e-9);
    }
    PurityAuditTrail up = audit_purity(upfront_preparation_variant(p), dqc1_input(spec));
    EXPECT_FALSE(up.passed);
    EXPECT_GE(up.max_excess, 3.0);
}

TEST(audit_purity, csv_format) {
    auto [g, f] = brickwork({1, 2});
    Pattern p = rewrite_with_flow(g, f, {{"(1,1)", Angle(0)}});
    PurityAuditTrail t = audit_purity(p, DensityState::plus("(1,1)", Angle(0)));
    std::string csv = audit_trail_csv(t);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "command_index,branch_id,purity_bits,excess_bits");
    EXPECT_NE(csv.find("0,1,2.000000000,1.000000000\n"), std::string::npos) << csv;
}

TEST(circuit_unitary, matches_oracle_gates) {
    std::vector<Gate> c{{GateKind::kH, 1}, {GateKind::kCNOT, 2, 1}, {GateKind::kT, 2}};
    oracle::Mat expect = gate_matrix(c[2], 2) * gate_matrix(c[1], 2) * gate_matrix(c[0], 2);
    EXPECT_TRUE(approx_equal(circuit_unitary(c, 2), expect, 1e-12));
}

TEST(gates_to_brick_angles, each_table_implements_its_gate) {
    BrickworkSpec spec{2, 9};
    auto [g, f] = brickwork(spec);
    std::vector<Gate> gates{{GateKind::kH, 1},       {GateKind::kH, 2},       {GateKind::kT, 1},
                            {GateKind::kT, 2},       {GateKind::kCNOT, 2, 1}, {GateKind::kCNOT, 1, 2}};
    for (const auto &gate : gates) {
        auto angles = gates_to_brick_angles({gate}, spec);
        oracle::Mat want = gate_matrix(gate, 2);
        EXPECT_TRUE(oracle::equal_up_to_phase(reference_unitary(g, f, angles), want, 1e-9));
        EXPECT_TRUE(oracle::equal_up_to_phase(oracle::brickwork_circuit(2, 9, grid(spec, angles)), want, 1e-9));
    }
}

TEST(gates_to_brick_angles, multi_layer_and_wider_circuits) {
    std::vector<Gate> c{{GateKind::kH, 1}, {GateKind::kCNOT, 2, 1}, {GateKind::kT, 2}};
    BrickworkSpec spec{2, 25};
    auto angles = gates_to_brick_angles(c, spec);
    oracle::Mat want = gate_matrix(c[2], 2) * gate_matrix(c[1], 2) * gate_matrix(c[0], 2);
    EXPECT_TRUE(oracle::equal_up_to_phase(oracle::brickwork_circuit(2, 25, grid(spec, angles)), want, 1e-9));

    // Four wires: bricks on (1,2) and (3,4); the even-row CZ pair at columns 7 and 9 cancels.
    std::vector<Gate> wide{{GateKind::kH, 3}, {GateKind::kCNOT, 4, 3}};
    BrickworkSpec spec4{4, 17};
    auto a4 = gates_to_brick_angles(wide, spec4);
    oracle::Mat want4 = gate_matrix(wide[1], 4) * gate_matrix(wide[0], 4);
    EXPECT_TRUE(oracle::equal_up_to_phase(oracle::brickwork_circuit(4, 17, grid(spec4, a4)), want4, 1e-9));
}

TEST(gates_to_brick_angles, rejects_circuits_that_do_not_fit) {
    auto fails = [](const std::vector<Gate> &c, BrickworkSpec spec) {
        try {
            gates_to_brick_angles(c, spec);
        } catch (const std::invalid_argument &e) {
            return std::string(e.what()).rfind("circuit does not fit", 0) == 0;
        }
        return false;
    };
    EXPECT_TRUE(fails({{GateKind::kH, 1}}, {2, 5}));
    EXPECT_TRUE(fails({{GateKind::kH, 1}, {GateKind::kH, 2}}, {2, 9}));
    EXPECT_TRUE(fails({{GateKind::kCNOT, 3, 2}}, {4, 9}));
    EXPECT_TRUE(fails({{GateKind::kH, 3}}, {3, 9}));
    EXPECT_TRUE(fails({{GateKind::kH, 5}}, {4, 9}));
    // The empty circuit fits anywhere.
    auto zero = gates_to_brick_angles({}, {2, 5});
    EXPECT_EQ(zero.size(), 8u);
}

TEST(search_brick_angles, recovers_hadamard_brick) {
    BrickAngles found{};
    ASSERT_TRUE(search_brick_angles(gate_matrix({GateKind::kH, 1}, 2), found));
    EXPECT_TRUE(oracle::equal_up_to_phase(brick_model_unitary(found), gate_matrix({GateKind::kH, 1}, 2), 1e-9));
    EXPECT_EQ(found[0][6], 0);
    EXPECT_EQ(found[1][7], 0);
}
