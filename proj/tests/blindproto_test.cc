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

#include "gtest/gtest.h"
#include "json.hpp"

using namespace opq;

namespace {

std::map<Tag, Angle> sample_angles(const BrickworkSpec &spec, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> eighth(0, 7);
    std::vector<Angle> flat;
    for (int k = 0; k < spec.measured(); k++) {
        flat.push_back(Angle(eighth(rng)));
    }
    return brickwork_angles(spec, flat);
}

struct Counts {
    int qubits = 0, angles = 0, outcomes = 0, final_layers = 0;
};

Counts count(const std::vector<LoggedMessage> &log) {
    Counts c;
    for (const auto &m : log) {
        if (std::holds_alternative<QubitTransfer>(m.message)) {
            EXPECT_EQ(m.from, Party::kClient);
            c.qubits++;
        } else if (std::holds_alternative<AngleMsg>(m.message)) {
            EXPECT_EQ(m.from, Party::kClient);
            c.angles++;
        } else if (std::holds_alternative<OutcomeMsg>(m.message)) {
            EXPECT_EQ(m.from, Party::kServer);
            c.outcomes++;
        } else {
            EXPECT_EQ(m.from, Party::kServer);
            c.final_layers++;
        }
    }
    return c;
}

class KeepsQubitServer : public ServerBehavior {
   public:
    int measure(ServerRegister &reg, const Tag &tag, Angle delta) override {
        (void)reg;
        (void)tag;
        (void)delta;
        return 0;
    }
};

class NonBitServer : public ServerBehavior {
   public:
    int measure(ServerRegister &reg, const Tag &tag, Angle delta) override {
        reg.measure(tag, delta);
        return 2;
    }
};

class SkipsInputServer : public ServerBehavior {
   public:
    void prepare_input(ServerRegister &reg, const Tag &tag) override {
        (void)reg;
        (void)tag;
    }
};

}  // namespace

TEST(compute_delta, follows_the_masking_rule) {
    // delta = (-1)^sx a + sz pi + theta + r pi, all in eighths mod 8.
    for (int a = 0; a < 8; a++) {
        for (int sx = 0; sx < 2; sx++) {
            for (int sz = 0; sz < 2; sz++) {
                for (int t = 0; t < 8; t++) {
                    for (int r = 0; r < 2; r++) {
                        int expect = (((sx ? -a : a) + 4 * sz + t + 4 * r) % 8 + 8) % 8;
                        EXPECT_EQ(compute_delta(Angle(a), sx, sz, Angle(t), r).eighths(), expect);
                    }
                }
            }
        }
    }
}

TEST(run_blind, message_counts_match_the_protocol) {
    for (auto spec : {BrickworkSpec{1, 3}, BrickworkSpec{2, 3}, BrickworkSpec{2, 5}}) {
        HonestServer server;
        Transcript t = run_blind(spec, sample_angles(spec, 1), server, 9);
        Counts c = count(t.messages);
        int measured = spec.measured();
        EXPECT_EQ(c.qubits, 1 + measured);
        EXPECT_EQ(c.angles, measured);
        EXPECT_EQ(c.outcomes, measured);
        EXPECT_EQ(c.final_layers, 1);
        // Angle and outcome messages alternate in measurement order.
        std::vector<Tag> order;
        for (const auto &m : t.messages) {
            if (const auto *a = std::get_if<AngleMsg>(&m.message)) {
                order.push_back(a->tag);
            }
        }
        EXPECT_EQ(order, brickwork_measured_vertices(spec));
    }
}

TEST(run_blind, literal_output_matches_expected_state) {
    BrickworkSpec spec{2, 3};
    auto angles = sample_angles(spec, 4);
    for (uint64_t seed = 0; seed < 5; seed++) {
        HonestServer server;
        Transcript t = run_blind(spec, angles, server, seed);
        EXPECT_LE(trace_distance(t.output, blind_expected_output(spec, angles)), 1e-9);
    }
}

TEST(run_blind, choi_output_matches_reference_unitary) {
    BrickworkSpec spec{2, 5};
    auto angles = sample_angles(spec, 8);
    auto [g, f] = brickwork(spec);
    DensityState choi = choi_of_unitary(reference_unitary(g, f, angles), g.outputs, g.inputs);
    BlindRunOptions opts;
    opts.choi_input = true;
    HonestServer server;
    Transcript t = run_blind(spec, angles, server, 21, opts);
    EXPECT_LE(trace_distance(t.output, choi), 1e-9);
    EXPECT_EQ(count(t.messages).qubits, spec.vertices());
}

TEST(run_blind, client_signal_is_reported_bit_xor_r) {
    BrickworkSpec spec{2, 3};
    FlipAllServer server;
    Transcript t = run_blind(spec, sample_angles(spec, 2), server, 5);
    ASSERT_EQ(t.b.size(), size_t(spec.measured()));
    for (const auto &[v, b] : t.b) {
        EXPECT_EQ(t.secrets.s.at(v), b ^ t.secrets.r.at(v)) << v;
    }
}

TEST(run_blind, honest_server_stays_within_purity_budget) {
    BrickworkSpec spec{2, 5};
    BlindRunOptions opts;
    opts.audit_server_purity = true;
    HonestServer server;
    Transcript t = run_blind(spec, sample_angles(spec, 3), server, 1, opts);
    ASSERT_FALSE(t.server_purity.empty());
    for (const auto &s : t.server_purity) {
        EXPECT_LE(s.excess, 2.0 + 1e-9);
    }
}

TEST(run_blind, misbehaving_servers_abort) {
    BrickworkSpec spec{1, 3};
    auto angles = sample_angles(spec, 0);
    KeepsQubitServer keeps;
    EXPECT_THROW(run_blind(spec, angles, keeps, 1), ProtocolAbort);
    NonBitServer nonbit;
    EXPECT_THROW(run_blind(spec, angles, nonbit, 1), ProtocolAbort);
    SkipsInputServer skips;
    EXPECT_THROW(run_blind({2, 3}, sample_angles({2, 3}, 0), skips, 1), ProtocolAbort);
}

TEST(channel, receive_checks_message_type) {
    Channel ch;
    ch.send(Party::kClient, AngleMsg{"q", Angle(1)});
    EXPECT_THROW(ch.receive<OutcomeMsg>(Party::kServer, 7), ProtocolAbort);
    EXPECT_THROW(ch.receive<AngleMsg>(Party::kServer, 8), ProtocolAbort);
    EXPECT_EQ(ch.log().size(), 1u);
}

TEST(transcript_json, lists_events_and_signals) {
    BrickworkSpec spec{1, 3};
    HonestServer server;
    Transcript t = run_blind(spec, sample_angles(spec, 6), server, 2);
    auto doc = nlohmann::json::parse(transcript_json(t, false));
    ASSERT_TRUE(doc["events"].is_array());
    EXPECT_EQ(doc["events"].size(), t.messages.size());
    EXPECT_EQ(doc["events"][0]["type"], "qubit");
    EXPECT_FALSE(doc["events"][0].contains("payload"));
    EXPECT_EQ(doc["client_signals"].size(), 2u);
    EXPECT_EQ(transcript_json(t, false), transcript_json(t, false));
}

TEST(blindness_audit, masked_views_are_identical) {
    BrickworkSpec spec{1, 3};
    auto [g, f] = brickwork(spec);
    auto a = brickwork_angles(spec, {Angle(0), Angle(0)});
    auto b = brickwork_angles(spec, {Angle(2), Angle(6)});
    BlindnessAuditResult r = blindness_audit(g, f, a, b);
    EXPECT_LE(r.distance, 1e-9);
    // 8 thetas per qubit (3 qubits), 2 r values per measurement.
    EXPECT_EQ(r.secret_terms, 8u * 8u * 8u * 4u);
    EXPECT_EQ(r.report_vectors, 4u);
}

TEST(blindness_audit, unmasked_views_leak) {
    BrickworkSpec spec{1, 3};
    auto [g, f] = brickwork(spec);
    BlindnessAuditOptions opts;
    opts.r_mask = false;
    BlindnessAuditResult r = blindness_audit(g, f, brickwork_angles(spec, {Angle(0), Angle(0)}),
                                             brickwork_angles(spec, {Angle(2), Angle(6)}), opts);
    EXPECT_GT(r.distance, 0.1);
}

TEST(blindness_audit, refuses_oversized_enumerations) {
    BrickworkSpec spec{1, 3};
    auto [g, f] = brickwork(spec);
    BlindnessAuditOptions opts;
    opts.max_terms = 100;
    EXPECT_THROW(blindness_audit(g, f, brickwork_angles(spec, {Angle(0), Angle(0)}),
                                 brickwork_angles(spec, {Angle(1), Angle(1)}), opts),
                 std::length_error);
}

TEST(mix_seed, is_deterministic_and_spreads) {
    EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
    EXPECT_NE(mix_seed(1, 2), mix_seed(1, 3));
    EXPECT_NE(mix_seed(1, 2), mix_seed(2, 2));
}
