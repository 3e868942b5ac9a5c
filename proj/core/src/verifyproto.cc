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

#include "opq/verifyproto.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <regex>
#include <thread>

namespace opq {

namespace {

constexpr double kWilsonZ = 1.959964;

bool in_round(int key_round, int round) {
    return key_round == kEveryRound || key_round == round;
}

std::map<Tag, Angle> zero_angles(const OpenGraph &graph) {
    std::map<Tag, Angle> out;
    for (const auto &v : graph.non_outputs()) {
        out[v] = Angle(0);
    }
    return out;
}

const TrapRound &round_at(const TrapConfig &config, int k) {
    if (k < 1 || k > (int)config.rounds.size()) {
        throw std::out_of_range("round " + std::to_string(k) + " out of range");
    }
    return config.rounds[k - 1];
}

// Sum of dummy bits adjacent to v, as a Z pre-rotation.
Angle dummy_rotation(const OpenGraph &graph, const TrapRound &round, const Tag &v) {
    int bits = 0;
    for (const auto &u : graph.neighbors(v)) {
        auto it = round.dummy_bits.find(u);
        if (it != round.dummy_bits.end()) {
            bits += it->second;
        }
    }
    return (bits & 1) ? kPiAngle : Angle(0);
}

}  // namespace

char pauli_char(Pauli p) {
    switch (p) {
        case Pauli::kI:
            return 'I';
        case Pauli::kX:
            return 'X';
        case Pauli::kY:
            return 'Y';
        case Pauli::kZ:
            return 'Z';
    }
    return '?';
}

ComplexMatrix pauli_matrix(Pauli p) {
    switch (p) {
        case Pauli::kX:
            return gates::X();
        case Pauli::kY:
            return gates::Y();
        case Pauli::kZ:
            return gates::Z();
        default:
            return gates::I();
    }
}

AdversaryStrategy parse_adversary(const std::string &text, const BrickworkSpec &spec, uint64_t seed) {
    static const std::regex flip_re(R"(flip:(all|\d+)@\((\d+),(\d+)\))");
    static const std::regex pauli_re(R"(pauli:([IXYZ])@(?:(\d+):)?(?:out\((\d+)\)|\((\d+),(\d+)\)))");
    static const std::regex unitary_re(R"(unitary:([0-9]*\.?[0-9]+))");
    std::smatch m;
    AdversaryStrategy out;
    if (text == "honest") {
        out = HonestStrategy{};
    } else if (std::regex_match(text, m, flip_re)) {
        int round = m[1] == "all" ? kEveryRound : std::stoi(m[1]);
        if (round == kEveryRound && m[1] != "all") {
            throw std::invalid_argument("adversary '" + text + "': rounds are numbered from 1");
        }
        out = OutcomeFlipStrategy{{{round, vertex_tag(std::stoi(m[2]), std::stoi(m[3]))}}};
    } else if (std::regex_match(text, m, pauli_re)) {
        static const std::map<char, Pauli> names{
            {'I', Pauli::kI}, {'X', Pauli::kX}, {'Y', Pauli::kY}, {'Z', Pauli::kZ}};
        int round = m[2].matched ? std::stoi(m[2]) : kEveryRound;
        if (m[2].matched && round == kEveryRound) {
            throw std::invalid_argument("adversary '" + text + "': rounds are numbered from 1");
        }
        Tag v = m[3].matched ? vertex_tag(std::stoi(m[3]), spec.depth) : vertex_tag(std::stoi(m[4]), std::stoi(m[5]));
        out = LabPauliStrategy{{{{round, v}, names.at(m.str(1)[0])}}};
    } else if (std::regex_match(text, m, unitary_re)) {
        double strength = std::stod(m[1]);
        if (strength > 1.0) {
            throw std::invalid_argument("adversary '" + text + "': strength must lie in [0,1]");
        }
        out = RandomUnitaryStrategy{seed, strength};
    } else {
        throw std::invalid_argument("cannot parse adversary '" + text +
                                    "' (expected honest, flip:all@(r,c), flip:K@(r,c), pauli:P@out(r), "
                                    "pauli:P@K:out(r) or unitary:S)");
    }
    return out;
}

std::string adversary_str(const AdversaryStrategy &strategy) {
    auto round_prefix = [](int round) { return round == kEveryRound ? std::string("all") : std::to_string(round); };
    return std::visit(
        [&](const auto &a) -> std::string {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, HonestStrategy>) {
                return "honest";
            } else if constexpr (std::is_same_v<T, OutcomeFlipStrategy>) {
                std::string out;
                for (const auto &[round, v] : a.positions) {
                    out += (out.empty() ? "" : "+") + ("flip:" + round_prefix(round) + "@" + v);
                }
                return out.empty() ? "flip:none" : out;
            } else if constexpr (std::is_same_v<T, LabPauliStrategy>) {
                std::string out;
                for (const auto &[key, p] : a.paulis) {
                    out += (out.empty() ? "" : "+") + std::string("pauli:") + pauli_char(p) + "@" +
                           (key.first == kEveryRound ? "" : std::to_string(key.first) + ":") + key.second;
                }
                return out.empty() ? "pauli:none" : out;
            } else {
                char buf[64];
                std::snprintf(buf, sizeof buf, "unitary:%g", a.strength);
                return buf;
            }
        },
        strategy);
}

void validate_adversary(const AdversaryStrategy &strategy, const BrickworkSpec &spec, int s) {
    auto [graph, flow] = brickwork(spec);
    auto check = [&](int round, const Tag &v, bool measured_only) {
        if (round != kEveryRound && (round < 1 || round > s)) {
            throw std::invalid_argument("adversary references round " + std::to_string(round) + " but s = " +
                                        std::to_string(s));
        }
        if (!graph.has_vertex(v)) {
            throw std::invalid_argument("adversary references vertex " + v + " outside brickwork(" +
                                        std::to_string(spec.width) + "," + std::to_string(spec.depth) + ")");
        }
        if (measured_only && graph.is_output(v)) {
            throw std::invalid_argument("adversary flips outcome of output vertex " + v + ", which is never measured");
        }
    };
    if (const auto *f = std::get_if<OutcomeFlipStrategy>(&strategy)) {
        for (const auto &[round, v] : f->positions) {
            check(round, v, true);
        }
    } else if (const auto *p = std::get_if<LabPauliStrategy>(&strategy)) {
        for (const auto &[key, pauli] : p->paulis) {
            check(key.first, key.second, false);
        }
    } else if (const auto *u = std::get_if<RandomUnitaryStrategy>(&strategy)) {
        if (!(u->strength >= 0 && u->strength <= 1)) {
            throw std::invalid_argument("unitary strength must lie in [0,1]");
        }
    }
}

AdversaryServer::AdversaryServer(AdversaryStrategy strategy, uint64_t trial_seed)
    : strategy_(std::move(strategy)), trial_seed_(trial_seed) {
}

void AdversaryServer::begin_round(int round) {
    round_ = round;
}

std::optional<Pauli> AdversaryServer::lab_pauli(const Tag &tag) const {
    const auto *p = std::get_if<LabPauliStrategy>(&strategy_);
    if (!p) {
        return std::nullopt;
    }
    for (int key : {round_, kEveryRound}) {
        auto it = p->paulis.find({key, tag});
        if (it != p->paulis.end()) {
            return it->second;
        }
    }
    return std::nullopt;
}

bool AdversaryServer::flips(const Tag &tag) const {
    const auto *f = std::get_if<OutcomeFlipStrategy>(&strategy_);
    return f && (f->positions.count({round_, tag}) || f->positions.count({kEveryRound, tag}));
}

void AdversaryServer::random_rotation(ServerRegister &reg, const Tag &tag) {
    const auto *u = std::get_if<RandomUnitaryStrategy>(&strategy_);
    if (!u || u->strength == 0) {
        return;
    }
    std::mt19937_64 rng(mix_seed(mix_seed(u->seed, trial_seed_), step_++));
    std::normal_distribution<double> normal(0.0, 1.0);
    double nx = normal(rng), ny = normal(rng), nz = normal(rng);
    double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (norm == 0) {
        return;
    }
    double half = 0.5 * M_PI * u->strength;
    ComplexMatrix rot = std::cos(half) * gates::I() - Complex(0, std::sin(half)) *
                                                          ((nx / norm) * gates::X() + (ny / norm) * gates::Y() +
                                                           (nz / norm) * gates::Z());
    reg.apply(rot, {tag});
}

int AdversaryServer::measure(ServerRegister &reg, const Tag &tag, Angle delta) {
    if (auto p = lab_pauli(tag)) {
        reg.apply(pauli_matrix(*p), {tag});
    }
    random_rotation(reg, tag);
    int b = reg.measure(tag, delta);
    return flips(tag) ? 1 - b : b;
}

void AdversaryServer::before_final_layer(ServerRegister &reg, const std::vector<Tag> &outputs) {
    for (const auto &o : outputs) {
        if (auto p = lab_pauli(o)) {
            reg.apply(pauli_matrix(*p), {o});
        }
        random_rotation(reg, o);
    }
}

TrapConfig setup_rounds(const std::map<Tag, Angle> &angles, const BrickworkSpec &spec, int s, uint64_t seed) {
    if (s < 1) {
        throw std::invalid_argument("setup_rounds: s must be at least 1");
    }
    (void)angles;
    TrapConfig config;
    config.spec = spec;
    std::tie(config.graph, config.flow) = brickwork(spec);
    config.s = s;
    const OpenGraph &graph = config.graph;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> round_dist(1, s), vertex_dist(0, (int)graph.vertices.size() - 1);
    std::uniform_int_distribution<int> eighth(0, 7), bit(0, 1);
    config.computational_round = round_dist(rng);

    for (int k = 1; k <= s; k++) {
        TrapRound round;
        round.index = k;
        round.computational = k == config.computational_round;
        if (!round.computational) {
            round.trap = graph.vertices[vertex_dist(rng)];
            auto [tx, ty] = parse_vertex_tag(round.trap);
            std::set<int> rows{tx};
            for (const auto &u : graph.neighbors(round.trap)) {
                auto [ux, uy] = parse_vertex_tag(u);
                if (uy == ty) {
                    rows.insert(ux);
                }
            }
            for (const auto &v : graph.vertices) {
                if (v != round.trap && rows.count(parse_vertex_tag(v).first)) {
                    round.dummies.insert(v);
                }
            }
            for (const auto &v : round.dummies) {
                round.dummy_bits[v] = bit(rng);
            }
        }
        for (const auto &v : graph.vertices) {
            if (round.dummies.count(v)) {
                if (!graph.is_output(v)) {
                    round.dummy_delta[v] = Angle(eighth(rng));
                }
            } else {
                round.theta[v] = Angle(eighth(rng));
            }
        }
        for (const auto &v : graph.vertices) {
            if (!round.dummies.count(v) && (!graph.is_output(v) || v == round.trap)) {
                round.r[v] = bit(rng);
            }
        }
        config.rounds.push_back(std::move(round));
    }
    return config;
}

QubitPlan round_qubit_plan(const TrapConfig &config, int k, const Tag &vertex) {
    const TrapRound &round = round_at(config, k);
    const OpenGraph &graph = config.graph;
    if (!graph.has_vertex(vertex)) {
        throw std::invalid_argument("vertex " + vertex + " is not in the round graph");
    }
    if (round.computational) {
        Angle theta = round.theta.at(vertex);
        if (graph.is_input(vertex) && vertex != graph.inputs.front()) {
            return QubitPlan{QubitPlan::Kind::kMixedPurified, theta, 0};
        }
        return QubitPlan{QubitPlan::Kind::kPlus, theta, 0};
    }
    if (round.dummies.count(vertex)) {
        return QubitPlan{QubitPlan::Kind::kBasis, Angle(0), round.dummy_bits.at(vertex)};
    }
    if (graph.is_input(vertex) && vertex != round.trap) {
        return QubitPlan{QubitPlan::Kind::kMixed, Angle(0), 0};
    }
    return QubitPlan{QubitPlan::Kind::kPlus, round.theta.at(vertex) + dummy_rotation(graph, round, vertex), 0};
}

DensityState prepare_round_qubit(const TrapConfig &config, int k, const Tag &vertex) {
    QubitPlan plan = round_qubit_plan(config, k, vertex);
    switch (plan.kind) {
        case QubitPlan::Kind::kPlus:
            return DensityState::plus(vertex, plan.theta);
        case QubitPlan::Kind::kBasis:
            return DensityState::basis(vertex, plan.bit);
        default:
            return DensityState::maximally_mixed(vertex);
    }
}

VerificationRun run_verification(const TrapConfig &config, const std::map<Tag, Angle> &angles,
                                 const AdversaryStrategy &adversary, uint64_t seed,
                                 const VerificationOptions &options) {
    const OpenGraph &graph = config.graph;
    Pattern computational = rewrite_with_flow(graph, config.flow, angles);
    Pattern trap_pattern = rewrite_with_flow(graph, config.flow, zero_angles(graph));
    std::mt19937_64 client_rng(mix_seed(seed, 0));
    std::mt19937_64 server_rng(mix_seed(seed, 1));
    AdversaryServer server(adversary, seed);
    SessionOptions session;
    session.audit_server_purity = options.audit_server_purity;

    VerificationRun run;
    for (const auto &round : config.rounds) {
        RoundPlan plan;
        plan.round = round.index;
        plan.pattern = round.computational ? computational : trap_pattern;
        plan.theta = round.theta;
        plan.r = round.r;
        plan.fixed_delta = round.dummy_delta;
        plan.use_dependencies = round.computational;
        plan.correct_outputs = round.computational;
        for (const auto &v : graph.vertices) {
            plan.client_qubits[v] = round_qubit_plan(config, round.index, v);
        }

        World world;
        Channel channel;
        RoundResult result = run_round(world, plan, server, channel, server_rng, session);

        RoundRecord record;
        record.index = round.index;
        record.computational = round.computational;
        record.trap = round.trap;
        for (const auto &step : result.server_purity) {
            record.server_max_excess = std::max(record.server_max_excess, step.excess);
        }
        if (round.computational) {
            std::vector<Tag> keep = graph.outputs;
            for (size_t i = 1; i < graph.inputs.size(); i++) {
                keep.push_back(reference_tag(graph.inputs[i]));
            }
            run.output = reduce_to(world.state, keep);
        } else if (graph.is_output(round.trap)) {
            record.trap_in_final_layer = true;
            int r = round.r.at(round.trap);
            auto branches = measure_xy(reduce_to(world.state, {round.trap}), round.trap,
                                       round.theta.at(round.trap) + (r ? kPiAngle : Angle(0)));
            std::uniform_real_distribution<double> uniform(0.0, 1.0);
            int b = uniform(client_rng) < branches[0].probability ? 0 : 1;
            if (!branches[b].possible) {
                b ^= 1;
            }
            record.passed = b == r;
        } else {
            record.passed = result.b.at(round.trap) == round.r.at(round.trap);
        }
        record.server_qubits_after = world.owned_by(Party::kServer).size();
        run.accepted = run.accepted && record.passed;
        run.rounds.push_back(record);
        if (options.record_messages) {
            run.messages.insert(run.messages.end(), channel.log().begin(), channel.log().end());
        }
        run.server_purity.insert(run.server_purity.end(), result.server_purity.begin(), result.server_purity.end());
    }
    return run;
}

DensityState correct_purified_output(const BrickworkSpec &spec, const std::map<Tag, Angle> &angles) {
    auto [graph, flow] = brickwork(spec);
    ComplexMatrix u = reference_unitary(graph, flow, angles);
    DensityState in = DensityState::plus(graph.inputs.front(), Angle(0));
    std::vector<Tag> refs;
    for (size_t i = 1; i < graph.inputs.size(); i++) {
        refs.push_back(reference_tag(graph.inputs[i]));
        in = tensor(in, DensityState::bell_pair(graph.inputs[i], refs.back()));
    }
    std::vector<Tag> order = graph.inputs;
    order.insert(order.end(), refs.begin(), refs.end());
    in = reorder(in, order);
    ComplexMatrix full = kron(u, ComplexMatrix::Identity(Eigen::Index(1) << refs.size(), Eigen::Index(1) << refs.size()));
    std::vector<Tag> out_tags = graph.outputs;
    out_tags.insert(out_tags.end(), refs.begin(), refs.end());
    return DensityState(out_tags, full * in.matrix() * full.adjoint());
}

double incorrect_mass(const VerificationRun &run, const DensityState &correct) {
    if (!run.accepted) {
        return 0.0;
    }
    DensityState rho = reorder(run.output, correct.tags());
    // correct is pure: <psi|rho|psi> = Tr(rho * correct).
    double overlap = (rho.matrix() * correct.matrix()).trace().real();
    return std::clamp(1.0 - overlap, 0.0, 1.0);
}

std::pair<double, double> wilson_interval(double mean, uint64_t n) {
    if (n == 0) {
        return {0.0, 1.0};
    }
    double z2 = kWilsonZ * kWilsonZ;
    double nn = (double)n;
    double p = std::clamp(mean, 0.0, 1.0);
    double denom = 1 + z2 / nn;
    double center = (p + z2 / (2 * nn)) / denom;
    double half = kWilsonZ / denom * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
    return {std::clamp(std::min(center - half, p), 0.0, 1.0), std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

VerificationReport estimate_p_incorrect(const std::map<Tag, Angle> &angles, const BrickworkSpec &spec, int s,
                                        const AdversaryStrategy &adversary, uint64_t trials, uint64_t seed,
                                        const EstimateOptions &options) {
    if (trials < 1) {
        throw std::invalid_argument("estimate_p_incorrect: trials must be at least 1");
    }
    spec.validate();
    validate_adversary(adversary, spec, s);
    DensityState correct = correct_purified_output(spec, angles);

    std::vector<TrialSummary> results(trials);
    std::atomic<uint64_t> next{0};
    VerificationOptions run_options;
    run_options.audit_server_purity = options.audit_server_purity;
    auto worker = [&]() {
        for (uint64_t i = next++; i < trials; i = next++) {
            uint64_t trial_seed = mix_seed(seed, i);
            TrapConfig config = setup_rounds(angles, spec, s, mix_seed(trial_seed, 2));
            VerificationRun run = run_verification(config, angles, adversary, trial_seed, run_options);
            results[i] = TrialSummary{run.accepted, incorrect_mass(run, correct), std::move(run.rounds)};
        }
    };
    unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, (unsigned)std::min<uint64_t>(trials, 1024)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; j++) {
            pool.emplace_back(worker);
        }
        for (auto &t : pool) {
            t.join();
        }
    }

    VerificationReport report;
    report.m = spec.vertices();
    report.n = spec.width;
    report.s = s;
    report.trials = trials;
    report.seed = seed;
    double sum = 0, sum_sq = 0;
    uint64_t accepted = 0;
    for (uint64_t i = 0; i < trials; i++) {
        const TrialSummary &t = results[i];
        accepted += t.accepted;
        sum += t.incorrect;
        sum_sq += t.incorrect * t.incorrect;
        for (const auto &r : t.rounds) {
            report.max_server_excess = std::max(report.max_server_excess, r.server_max_excess);
            if (!r.computational) {
                report.trap_rounds++;
                report.trap_rounds_passed += r.passed;
            }
        }
        if (options.observer) {
            options.observer(i, t);
        }
    }
    double n = (double)trials;
    report.acc_rate = (double)accepted / n;
    report.p_incorrect = sum / n;
    double var = trials > 1 ? std::max(0.0, (sum_sq - n * report.p_incorrect * report.p_incorrect) / (n - 1)) : 0.0;
    report.sigma = std::sqrt(var / n);
    std::tie(report.ci_low, report.ci_high) = wilson_interval(report.p_incorrect, trials);
    report.epsilon_bound = std::min(1.0, 2.0 * report.m / s);
    try {
        report.analytic_bound = analytic_bound(strategy_frames(adversary, spec, s), report.m, report.n);
    } catch (const FrameMismatch &) {
        report.analytic_bound.reset();
    }
    return report;
}

FrameSets frame_sets(const FrameAttack &attack, size_t m, size_t n) {
    if (attack.size() != m || n > m) {
        throw std::invalid_argument("frame attack must have m = " + std::to_string(m) + " entries");
    }
    FrameSets sets;
    for (size_t i = 0; i < m; i++) {
        bool out = i >= m - n;
        std::set<size_t> *all = nullptr, *outs = nullptr;
        switch (attack[i]) {
            case Pauli::kI:
                all = &sets.a, outs = &sets.a_out;
                break;
            case Pauli::kX:
                all = &sets.b, outs = &sets.b_out;
                break;
            case Pauli::kY:
                all = &sets.c, outs = &sets.c_out;
                break;
            case Pauli::kZ:
                all = &sets.d, outs = &sets.d_out;
                break;
        }
        all->insert(i);
        if (out) {
            outs->insert(i);
        }
    }
    return sets;
}

double analytic_trap_pass_prob(const FrameAttack &attack, size_t m, size_t n) {
    FrameSets f = frame_sets(attack, m, n);
    double num = 2.0 * f.a.size() + f.b_out.size() + f.c_out.size() + 2.0 * (f.d.size() - f.d_out.size());
    return num / (2.0 * m);
}

double analytic_bound(const std::vector<FrameAttack> &per_round, size_t m, size_t n) {
    size_t s = per_round.size();
    if (s == 0) {
        throw std::invalid_argument("analytic_bound: need at least one round");
    }
    std::vector<double> pass(s);
    std::vector<bool> nontrivial(s);
    for (size_t k = 0; k < s; k++) {
        pass[k] = analytic_trap_pass_prob(per_round[k], m, n);
        FrameSets f = frame_sets(per_round[k], m, n);
        nontrivial[k] = f.b.size() + f.c.size() + f.d_out.size() >= 1;
    }
    double total = 0;
    for (size_t g = 0; g < s; g++) {
        if (!nontrivial[g]) {
            continue;
        }
        double prod = 1;
        for (size_t k = 0; k < s; k++) {
            if (k != g) {
                prod *= pass[k];
            }
        }
        total += prod;
    }
    return total / (double)s;
}

std::vector<Tag> frame_positions(const BrickworkSpec &spec) {
    std::vector<Tag> out = brickwork_measured_vertices(spec);
    for (int i = 1; i <= spec.width; i++) {
        out.push_back(vertex_tag(i, spec.depth));
    }
    return out;
}

std::vector<FrameAttack> strategy_frames(const AdversaryStrategy &strategy, const BrickworkSpec &spec, int s) {
    std::vector<Tag> positions = frame_positions(spec);
    std::map<Tag, size_t> index;
    for (size_t i = 0; i < positions.size(); i++) {
        index[positions[i]] = i;
    }
    size_t n_measured = positions.size() - (size_t)spec.width;
    std::vector<FrameAttack> frames((size_t)s, FrameAttack(positions.size(), Pauli::kI));
    auto position = [&](const Tag &v) {
        auto it = index.find(v);
        if (it == index.end()) {
            throw std::invalid_argument("vertex " + v + " is not in the brickwork graph");
        }
        return it->second;
    };
    auto rounds_of = [&](int key) {
        std::vector<size_t> out;
        for (int k = 1; k <= s; k++) {
            if (in_round(key, k)) {
                out.push_back((size_t)k - 1);
            }
        }
        return out;
    };
    if (const auto *f = std::get_if<OutcomeFlipStrategy>(&strategy)) {
        for (const auto &[round, v] : f->positions) {
            size_t p = position(v);
            if (p >= n_measured) {
                throw FrameMismatch("outcome flip on output vertex " + v);
            }
            for (size_t k : rounds_of(round)) {
                frames[k][p] = Pauli::kX;
            }
        }
    } else if (const auto *l = std::get_if<LabPauliStrategy>(&strategy)) {
        for (const auto &[key, pauli] : l->paulis) {
            size_t p = position(key.second);
            if (p < n_measured && pauli != Pauli::kI) {
                throw FrameMismatch("frame mismatch: lab Pauli on measured vertex " + key.second +
                                    " has no fixed frame Pauli");
            }
            for (size_t k : rounds_of(key.first)) {
                frames[k][p] = pauli;
            }
        }
    } else if (std::holds_alternative<RandomUnitaryStrategy>(strategy)) {
        throw FrameMismatch("frame mismatch: random unitaries are not frame Paulis");
    }
    return frames;
}

double trap_round_view_distance(const BrickworkSpec &spec, const Tag &trap, const std::map<Tag, Angle> &angles) {
    spec.validate();
    if (spec.width != 1) {
        throw std::invalid_argument("trap_round_view_distance: width must be 1");
    }
    auto [graph, flow] = brickwork(spec);
    if (!graph.has_vertex(trap)) {
        throw std::invalid_argument("trap vertex " + trap + " is not in the graph");
    }
    // Same send and measurement order as the computational round.
    Pattern pattern = rewrite_with_flow(graph, flow, zero_angles(graph));
    std::vector<Tag> sent{graph.inputs.front()};
    std::vector<Tag> measured;
    for (const auto &c : pattern.commands) {
        if (const auto *p = std::get_if<Prepare>(&c)) {
            sent.push_back(p->tag);
        } else if (const auto *m = std::get_if<Measure>(&c)) {
            measured.push_back(m->tag);
        }
    }
    std::vector<Tag> dummies;
    for (const auto &v : graph.vertices) {
        if (v != trap) {
            dummies.push_back(v);
        }
    }
    bool trap_measured = !graph.is_output(trap);
    std::vector<Tag> dummy_measured;
    for (const auto &v : measured) {
        if (v != trap) {
            dummy_measured.push_back(v);
        }
    }
    // Secrets: theta_trap, r_trap (if measured), a bit per dummy, a delta per measured dummy.
    uint64_t terms = 8 * (trap_measured ? 2 : 1) * (uint64_t{1} << dummies.size());
    for (size_t k = 0; k < dummy_measured.size(); k++) {
        terms *= 8;
    }
    if (terms > (uint64_t{1} << 24)) {
        throw std::length_error("trap_round_view_distance: instance too large");
    }
    AveragedView trap_view;
    double weight = 1.0 / (double)terms;
    std::map<Tag, int> bits, delta;
    std::vector<ComplexVector> factors(sent.size());
    std::vector<int> classical(measured.size());
    for (uint64_t term = 0; term < terms; term++) {
        uint64_t x = term;
        int theta = (int)(x % 8);
        x /= 8;
        int r = 0;
        if (trap_measured) {
            r = (int)(x % 2);
            x /= 2;
        }
        for (const auto &v : dummies) {
            bits[v] = (int)(x % 2);
            x /= 2;
        }
        for (const auto &v : dummy_measured) {
            delta[v] = (int)(x % 8);
            x /= 8;
        }
        int rot = 0;
        for (const auto &u : graph.neighbors(trap)) {
            rot ^= bits[u];
        }
        for (size_t k = 0; k < sent.size(); k++) {
            if (sent[k] == trap) {
                factors[k] = plus_vector(theta + 4 * rot);
            } else {
                factors[k] = ComplexVector::Zero(2);
                factors[k](bits[sent[k]]) = 1.0;
            }
        }
        for (size_t k = 0; k < measured.size(); k++) {
            classical[k] = measured[k] == trap ? (Angle(theta) + (r ? kPiAngle : Angle(0))).eighths()
                                               : delta[measured[k]];
        }
        trap_view.add(classical, product_vector(factors), weight);
    }

    double worst = 0;
    for (uint64_t rep = 0; rep < (uint64_t{1} << measured.size()); rep++) {
        std::vector<int> reports(measured.size());
        for (size_t k = 0; k < measured.size(); k++) {
            reports[k] = (int)((rep >> k) & 1);
        }
        worst = std::max(worst, averaged_round_view(graph, flow, angles, reports).distance(trap_view));
    }
    return worst;
}

}  // namespace opq
