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

#ifndef OPQ_VERIFYPROTO_H
#define OPQ_VERIFYPROTO_H

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "opq/blindproto.h"
#include "opq/dqc1.h"

namespace opq {

enum class Pauli { kI, kX, kY, kZ };

char pauli_char(Pauli p);
ComplexMatrix pauli_matrix(Pauli p);

/// Round number meaning "every round" in adversary positions.
inline constexpr int kEveryRound = 0;

struct HonestStrategy {};
/// Reports the flipped outcome at each (round, vertex).
struct OutcomeFlipStrategy {
    std::set<std::pair<int, Tag>> positions;
};
/// Applies a Pauli right before the vertex is measured, or before the final layer for outputs.
struct LabPauliStrategy {
    std::map<std::pair<int, Tag>, Pauli> paulis;
};
/// Applies a seeded random rotation by strength * pi about a random axis to every measured qubit
/// before its measurement and to every output before the final layer.
struct RandomUnitaryStrategy {
    uint64_t seed = 0;
    double strength = 0;
};
using AdversaryStrategy = std::variant<HonestStrategy, OutcomeFlipStrategy, LabPauliStrategy, RandomUnitaryStrategy>;

/// Grammar: honest | flip:all@(row,col) | flip:K@(row,col) | pauli:P@out(row) | pauli:P@K:out(row) |
/// unitary:STRENGTH. Throws std::invalid_argument with the offending text.
AdversaryStrategy parse_adversary(const std::string &text, const BrickworkSpec &spec, uint64_t seed = 0);
std::string adversary_str(const AdversaryStrategy &strategy);
/// Throws std::invalid_argument if a referenced step does not exist.
void validate_adversary(const AdversaryStrategy &strategy, const BrickworkSpec &spec, int s);

/// Server behaviour executing a strategy; `trial_seed` drives RandomUnitary.
class AdversaryServer : public ServerBehavior {
   public:
    AdversaryServer(AdversaryStrategy strategy, uint64_t trial_seed);
    void begin_round(int round) override;
    int measure(ServerRegister &reg, const Tag &tag, Angle delta) override;
    void before_final_layer(ServerRegister &reg, const std::vector<Tag> &outputs) override;

   private:
    std::optional<Pauli> lab_pauli(const Tag &tag) const;
    bool flips(const Tag &tag) const;
    void random_rotation(ServerRegister &reg, const Tag &tag);

    AdversaryStrategy strategy_;
    uint64_t trial_seed_;
    int round_ = 0;
    uint64_t step_ = 0;
};

struct TrapRound {
    int index = 0;
    bool computational = false;
    Tag trap;
    std::set<Tag> dummies;
    std::map<Tag, int> dummy_bits;
    std::map<Tag, Angle> theta;
    std::map<Tag, int> r;
    std::map<Tag, Angle> dummy_delta;
};

struct TrapConfig {
    BrickworkSpec spec;
    OpenGraph graph;
    Flow flow;
    int s = 1;
    int computational_round = 1;
    std::vector<TrapRound> rounds;
};

TrapConfig setup_rounds(const std::map<Tag, Angle> &angles, const BrickworkSpec &spec, int s, uint64_t seed);

/// How the client produces `vertex` in round k (1-based).
QubitPlan round_qubit_plan(const TrapConfig &config, int k, const Tag &vertex);
/// Single-qubit state the client sends for `vertex` in round k; purified inputs are reduced to I/2.
DensityState prepare_round_qubit(const TrapConfig &config, int k, const Tag &vertex);

struct RoundRecord {
    int index = 0;
    bool computational = false;
    Tag trap;
    bool trap_in_final_layer = false;
    bool passed = true;
    size_t server_qubits_after = 0;
    double server_max_excess = 0;
};

struct VerificationOptions {
    bool audit_server_purity = false;
    bool record_messages = false;
};

struct VerificationRun {
    bool accepted = true;
    /// Final layer of the computational round, then references for inputs (2,1)..(w,1).
    DensityState output;
    std::vector<RoundRecord> rounds;
    std::vector<LoggedMessage> messages;
    std::vector<ServerPurityStep> server_purity;
};

VerificationRun run_verification(const TrapConfig &config, const std::map<Tag, Angle> &angles,
                                 const AdversaryStrategy &adversary, uint64_t seed,
                                 const VerificationOptions &options = {});

/// (U (x) I_R)(|+> (x) |Phi>^{w-1}) with tags outputs ++ references.
DensityState correct_purified_output(const BrickworkSpec &spec, const std::map<Tag, Angle> &angles);
/// acc * Tr(P_perp rho) for P_perp = I - |psi><psi|.
double incorrect_mass(const VerificationRun &run, const DensityState &correct);

struct TrialSummary {
    bool accepted = true;
    double incorrect = 0;
    std::vector<RoundRecord> rounds;
};

using TrialObserver = std::function<void(uint64_t trial, const TrialSummary &)>;

struct EstimateOptions {
    unsigned jobs = 1;
    bool audit_server_purity = false;
    /// Called in trial order after all trials finish.
    TrialObserver observer;
};

struct VerificationReport {
    int m = 0;
    int n = 0;
    int s = 0;
    uint64_t trials = 0;
    double acc_rate = 0;
    double p_incorrect = 0;
    double sigma = 0;
    double ci_low = 0;
    double ci_high = 0;
    double epsilon_bound = 0;
    std::optional<double> analytic_bound;
    uint64_t seed = 0;
    uint64_t trap_rounds = 0;
    uint64_t trap_rounds_passed = 0;
    double max_server_excess = 0;
};

VerificationReport estimate_p_incorrect(const std::map<Tag, Angle> &angles, const BrickworkSpec &spec, int s,
                                        const AdversaryStrategy &adversary, uint64_t trials, uint64_t seed,
                                        const EstimateOptions &options = {});

/// Wilson score interval (z = 1.96) for a mean of values in [0,1].
std::pair<double, double> wilson_interval(double mean, uint64_t n);

class FrameMismatch : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Frame Paulis over m positions: the m - n measured positions first, the n outputs last.
using FrameAttack = std::vector<Pauli>;

struct FrameSets {
    std::set<size_t> a, b, c, d;
    std::set<size_t> a_out, b_out, c_out, d_out;
};

FrameSets frame_sets(const FrameAttack &attack, size_t m, size_t n);
/// (1/2m)(2|A| + |B^O| + |C^O| + 2|D \ D^O|).
double analytic_trap_pass_prob(const FrameAttack &attack, size_t m, size_t n);
/// (1/s) sum over nontrivial t_g of prod_{k != t_g} pass(k); `per_round` has s entries.
double analytic_bound(const std::vector<FrameAttack> &per_round, size_t m, size_t n);

/// Frame positions of a brickwork round: measured vertices in protocol order, then outputs.
std::vector<Tag> frame_positions(const BrickworkSpec &spec);
/// Per-round frame attacks of a strategy; throws FrameMismatch for lab Paulis on measured wires and
/// for random unitaries.
std::vector<FrameAttack> strategy_frames(const AdversaryStrategy &strategy, const BrickworkSpec &spec, int s);

/// Averaged-view distance between a width-1 trap round with the trap at `trap` and the
/// computational round with `angles` (maximum over the server's reported bits).
double trap_round_view_distance(const BrickworkSpec &spec, const Tag &trap, const std::map<Tag, Angle> &angles);

}  // namespace opq

#endif
