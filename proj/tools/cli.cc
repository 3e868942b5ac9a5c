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

#include "cli.h"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "opq/blindproto.h"
#include "opq/dqc1.h"
#include "opq/mbqc.h"
#include "opq/pattern_io.h"
#include "opq/verifyproto.h"
#include "opq/version.h"

namespace opq::cli {

namespace {

using nlohmann::ordered_json;

constexpr double kDistanceTolerance = 1e-9;

[[noreturn]] void usage(const std::string &message) {
    throw UsageError{message};
}

ordered_json matrix_json(const ComplexMatrix &m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); r++) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); c++) {
            row.push_back({m(r, c).real(), m(r, c).imag()});
        }
        rows.push_back(row);
    }
    return rows;
}

ordered_json config_json(const RunConfig &c) {
    ordered_json j;
    j["subcommand"] = c.subcommand;
    if (!c.pattern_path.empty()) {
        j["pattern"] = c.pattern_path;
    }
    if (c.width) {
        j["width"] = c.width;
        j["depth"] = c.depth;
    }
    if (!c.angles.empty()) {
        j["angles"] = c.angles;
    }
    if (!c.angles_b.empty()) {
        j["angles_b"] = c.angles_b;
    }
    if (!c.s.empty()) {
        j["s"] = c.s;
    }
    if (!c.adversaries.empty()) {
        j["adversary"] = c.adversaries;
    }
    if (c.trials) {
        j["trials"] = c.trials;
    }
    j["seed"] = c.seed ? ordered_json(*c.seed) : ordered_json(nullptr);
    j["format"] = c.format;
    j["jobs"] = c.jobs;
    if (c.subcommand == "purity audit") {
        j["c"] = c.purity_constant;
        j["upfront"] = c.upfront;
    }
    if (c.subcommand == "pattern run") {
        j["sample"] = c.sample;
    }
    if (c.subcommand == "blind run") {
        j["choi"] = c.choi;
        j["payloads"] = c.payloads;
    }
    if (c.subcommand == "blind audit") {
        j["exhaustive"] = c.exhaustive;
        j["r_mask"] = !c.no_mask;
    }
    if (c.subcommand.rfind("verify", 0) == 0) {
        j["audit_server_purity"] = c.audit_server;
    }
    return j;
}

ordered_json report_header(const RunConfig &c) {
    ordered_json j;
    j["version"] = OPQ_VERSION_STRING;
    j["config"] = config_json(c);
    return j;
}

void emit(const RunConfig &c, const std::string &text, std::ostream &out) {
    if (c.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(c.out_path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot write '" + c.out_path + "'");
    }
    file << text;
}

void emit(const RunConfig &c, const ordered_json &report, std::ostream &out) {
    emit(c, report.dump(2) + "\n", out);
}

// --- validation, all before any computation ---

uint64_t require_seed(const RunConfig &c) {
    if (!c.seed) {
        usage(c.subcommand + " is stochastic: pass --seed or set OPQ_SEED");
    }
    return *c.seed;
}

void require_format(const RunConfig &c, std::initializer_list<const char *> allowed) {
    for (const char *f : allowed) {
        if (c.format == f) {
            return;
        }
    }
    usage("--format " + c.format + " is not available for " + c.subcommand);
}

BrickworkSpec require_spec(const RunConfig &c) {
    BrickworkSpec spec{c.width, c.depth};
    try {
        spec.validate();
    } catch (const std::invalid_argument &e) {
        usage(std::string("--width/--depth: ") + e.what());
    }
    return spec;
}

std::map<Tag, Angle> require_angles(const BrickworkSpec &spec, const std::vector<int> &raw, const char *flag) {
    std::vector<Angle> flat;
    if (raw.empty()) {
        flat.assign((size_t)spec.measured(), Angle(0));
    } else {
        if ((int)raw.size() != spec.measured()) {
            usage(std::string(flag) + " needs " + std::to_string(spec.measured()) + " angles for brickwork(" +
                  std::to_string(spec.width) + "," + std::to_string(spec.depth) + "), got " +
                  std::to_string(raw.size()));
        }
        for (int a : raw) {
            if (a < 0 || a > 7) {
                usage(std::string(flag) + ": angle " + std::to_string(a) + " outside 0..7");
            }
            flat.push_back(Angle(a));
        }
    }
    return brickwork_angles(spec, flat);
}

PatternDocument require_document(const RunConfig &c) {
    if (c.pattern_path.empty()) {
        usage(c.subcommand + " needs --pattern");
    }
    try {
        return load_pattern_document(c.pattern_path);
    } catch (const PatternParseError &e) {
        usage(c.pattern_path + ": " + e.what());
    }
}

Pattern require_pattern(const RunConfig &c, const PatternDocument &doc) {
    try {
        return pattern_from_document(doc);
    } catch (const PatternParseError &e) {
        usage(c.pattern_path + ": " + e.what());
    }
}

AdversaryStrategy require_adversary(const std::string &text, const BrickworkSpec &spec, int s, uint64_t seed) {
    try {
        AdversaryStrategy a = parse_adversary(text, spec, seed);
        validate_adversary(a, spec, s);
        return a;
    } catch (const std::invalid_argument &e) {
        usage(std::string("--adversary: ") + e.what());
    }
}

void require_s(const RunConfig &c, bool single) {
    if (c.s.empty() || (single && c.s.size() != 1)) {
        usage(single ? "--s takes exactly one value" : "--s needs at least one value");
    }
    for (int s : c.s) {
        if (s < 1) {
            usage("--s values must be at least 1");
        }
    }
}

DensityState plus_inputs(const OpenGraph &g) {
    if (g.inputs.empty()) {
        usage("pattern has no input vertices");
    }
    DensityState in = DensityState::plus(g.inputs[0], Angle(0));
    for (size_t i = 1; i < g.inputs.size(); i++) {
        in = tensor(in, DensityState::plus(g.inputs[i], Angle(0)));
    }
    return in;
}

// One pure qubit on the first input, every other input maximally mixed.
DensityState one_pure_input(const OpenGraph &g) {
    if (g.inputs.empty()) {
        usage("pattern has no input vertices");
    }
    DensityState in = DensityState::plus(g.inputs[0], Angle(0));
    for (size_t i = 1; i < g.inputs.size(); i++) {
        in = tensor(in, DensityState::maximally_mixed(g.inputs[i]));
    }
    return in;
}

ordered_json violations_json(const std::vector<Violation> &vs) {
    ordered_json out = ordered_json::array();
    for (const auto &v : vs) {
        ordered_json j;
        j["rule"] = v.rule;
        j["message"] = v.message;
        if (v.command_index) {
            j["command_index"] = *v.command_index;
        }
        if (v.vertex) {
            j["vertex"] = *v.vertex;
        }
        out.push_back(j);
    }
    return out;
}

// --- subcommands ---

int pattern_run(const RunConfig &c, std::ostream &out) {
    require_format(c, {"json"});
    PatternDocument doc = require_document(c);
    Pattern p = require_pattern(c, doc);
    ExecutionOptions opts;
    if (c.sample) {
        opts.mode = ExecutionMode::kSample;
        opts.seed = require_seed(c);
    } else if (p.num_measurements() > kMaxEnumeratedMeasurements) {
        usage("pattern has " + std::to_string(p.num_measurements()) + " measurements; enumeration is limited to " +
              std::to_string(kMaxEnumeratedMeasurements) + " (use --sample)");
    }
    DensityState in = plus_inputs(p.graph);

    auto branches = execute_pattern(p, in, opts);
    ordered_json rep = report_header(c);
    rep["measurements"] = p.num_measurements();
    ordered_json list = ordered_json::array();
    ComplexMatrix average = ComplexMatrix::Zero(branches.front().state.matrix().rows(),
                                                branches.front().state.matrix().cols());
    double total = 0;
    for (const auto &b : branches) {
        ordered_json j;
        ordered_json outcomes = ordered_json::object();
        for (const auto &v : p.graph.vertices) {
            auto it = b.outcomes.find(v);
            if (it != b.outcomes.end()) {
                outcomes[v] = it->second;
            }
        }
        j["outcomes"] = outcomes;
        j["probability"] = b.probability;
        list.push_back(j);
        average += b.probability * b.state.matrix();
        total += b.probability;
    }
    rep["branches"] = list;
    rep["output_tags"] = branches.front().state.tags();
    rep["output"] = matrix_json(average / total);
    emit(c, rep, out);
    return kExitPass;
}

int pattern_check(const RunConfig &c, std::ostream &out) {
    require_format(c, {"json"});
    PatternDocument doc = require_document(c);
    Pattern p = require_pattern(c, doc);
    ordered_json rep = report_header(c);
    auto runnable = check_runnable(p);
    rep["runnable"] = violations_json(runnable);
    auto flow = check_flow(p.graph, *p.flow);
    rep["flow_given"] = doc.flow.has_value();
    rep["flow"] = violations_json(flow);
    bool ok = runnable.empty() && flow.empty();
    if (p.num_measurements() <= kMaxEnumeratedMeasurements) {
        DeterminismResult d = check_strong_determinism(p);
        rep["strongly_deterministic"] = d.ok;
        rep["branch_distance"] = d.distance;
        ok = ok && d.ok;
    } else {
        rep["strongly_deterministic"] = nullptr;
    }
    rep["passed"] = ok;
    emit(c, rep, out);
    return ok ? kExitPass : kExitPropertyFailure;
}

int purity_audit(const RunConfig &c, std::ostream &out) {
    require_format(c, {"json", "csv"});
    if (!(c.purity_constant > 0)) {
        usage("--c must be positive");
    }
    Pattern p;
    if (!c.pattern_path.empty()) {
        p = require_pattern(c, require_document(c));
    } else {
        BrickworkSpec spec = require_spec(c);
        auto [g, f] = brickwork(spec);
        p = rewrite_with_flow(g, f, require_angles(spec, c.angles, "--angles"));
    }
    if (p.num_measurements() > kMaxEnumeratedMeasurements) {
        usage("audit enumerates every branch; at most " + std::to_string(kMaxEnumeratedMeasurements) +
              " measurements");
    }
    DensityState in = one_pure_input(p.graph);
    if (c.upfront) {
        p = upfront_preparation_variant(p);
    }

    PurityAuditTrail t = audit_purity(p, in, c.purity_constant);
    if (c.format == "csv") {
        emit(c, audit_trail_csv(t), out);
    } else {
        ordered_json rep = report_header(c);
        rep["input_purity"] = t.input_purity;
        rep["max_excess"] = t.max_excess;
        rep["c"] = t.c;
        rep["passed"] = t.passed;
        double drift = 0;
        for (const auto &b : t.boundaries) {
            drift = std::max(drift, std::abs(b.purity - t.input_purity));
        }
        rep["boundary_drift"] = drift;
        rep["steps"] = t.steps.size();
        rep["boundaries"] = t.boundaries.size();
        emit(c, rep, out);
    }
    return t.passed ? kExitPass : kExitPropertyFailure;
}

int brickwork_gen(const RunConfig &c, std::ostream &out) {
    require_format(c, {"json"});
    BrickworkSpec spec = require_spec(c);
    auto angles = require_angles(spec, c.angles, "--angles");
    emit(c, pattern_document_json(brickwork_document(spec, angles)), out);
    return kExitPass;
}

int blind_run(const RunConfig &c, std::ostream &out) {
    require_format(c, {"json"});
    BrickworkSpec spec = require_spec(c);
    auto angles = require_angles(spec, c.angles, "--angles");
    uint64_t seed = require_seed(c);

    BlindRunOptions opts;
    opts.choi_input = c.choi;
    opts.record_payloads = c.payloads;
    opts.audit_server_purity = true;
    HonestServer server;
    Transcript t = run_blind(spec, angles, server, seed, opts);
    double distance;
    if (c.choi) {
        auto [g, f] = brickwork(spec);
        distance = trace_distance(t.output, choi_of_unitary(reference_unitary(g, f, angles), g.outputs, g.inputs));
    } else {
        distance = trace_distance(t.output, blind_expected_output(spec, angles));
    }
    double excess = 0;
    for (const auto &s : t.server_purity) {
        excess = std::max(excess, s.excess);
    }
    ordered_json rep = report_header(c);
    rep["output_distance"] = distance;
    rep["server_max_excess"] = excess;
    rep["passed"] = distance <= kDistanceTolerance;
    rep["transcript"] = ordered_json::parse(transcript_json(t, c.payloads));
    emit(c, rep, out);
    return distance <= kDistanceTolerance ? kExitPass : kExitPropertyFailure;
}

int blind_audit(const RunConfig &c, std::ostream &out) {
    require_format(c, {"json"});
    BrickworkSpec spec = require_spec(c);
    if (c.angles.empty() || c.angles_b.empty()) {
        usage("blind audit needs --angles-a and --angles-b");
    }
    auto a = require_angles(spec, c.angles, "--angles-a");
    auto b = require_angles(spec, c.angles_b, "--angles-b");
    auto [g, f] = brickwork(spec);
    BlindnessAuditOptions opts;
    opts.r_mask = !c.no_mask;
    BlindnessAuditResult r;
    try {
        r = blindness_audit(g, f, a, b, opts);
    } catch (const std::length_error &e) {
        usage(e.what());
    }
    ordered_json rep = report_header(c);
    rep["distance"] = r.distance;
    rep["secret_terms"] = r.secret_terms;
    rep["report_vectors"] = r.report_vectors;
    rep["worst_reports"] = r.worst_reports;
    rep["passed"] = r.distance <= kDistanceTolerance;
    emit(c, rep, out);
    return r.distance <= kDistanceTolerance ? kExitPass : kExitPropertyFailure;
}

struct Cell {
    int s;
    std::string adversary;
    VerificationReport report;
    bool passed;
    bool audited;
};

Cell run_cell(const RunConfig &c, const BrickworkSpec &spec, const std::map<Tag, Angle> &angles, int s,
              const std::string &adversary, uint64_t seed) {
    AdversaryStrategy a = require_adversary(adversary, spec, s, seed);
    EstimateOptions opts;
    opts.jobs = c.jobs;
    opts.audit_server_purity = c.audit_server;
    VerificationReport r = estimate_p_incorrect(angles, spec, s, a, c.trials, seed, opts);
    bool passed = r.p_incorrect - 3 * r.sigma <= r.epsilon_bound;
    if (std::holds_alternative<HonestStrategy>(a)) {
        passed = passed && r.acc_rate == 1.0;
    }
    return {s, adversary, r, passed, c.audit_server};
}

ordered_json cell_json(const Cell &cell) {
    const VerificationReport &r = cell.report;
    ordered_json j;
    j["m"] = r.m;
    j["n"] = r.n;
    j["s"] = r.s;
    j["trials"] = r.trials;
    j["acc_rate"] = r.acc_rate;
    j["p_incorrect"] = r.p_incorrect;
    j["ci95"] = {r.ci_low, r.ci_high};
    j["epsilon_bound"] = r.epsilon_bound;
    j["analytic_bound"] = r.analytic_bound ? ordered_json(*r.analytic_bound) : ordered_json(nullptr);
    j["seed"] = r.seed;
    j["adversary"] = cell.adversary;
    j["sigma"] = r.sigma;
    j["trap_rounds"] = r.trap_rounds;
    j["trap_rounds_passed"] = r.trap_rounds_passed;
    j["max_server_excess"] = cell.audited ? ordered_json(r.max_server_excess) : ordered_json(nullptr);
    j["passed"] = cell.passed;
    return j;
}

std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void validate_verify(const RunConfig &c, const BrickworkSpec &spec, uint64_t seed, bool single) {
    require_s(c, single);
    if (c.adversaries.empty()) {
        usage("--adversary is required");
    }
    if (single && c.adversaries.size() != 1) {
        usage("verify run takes exactly one --adversary");
    }
    if (c.trials == 0) {
        usage("--trials must be at least 1");
    }
    if (c.jobs == 0) {
        usage("--jobs must be at least 1");
    }
    for (int s : c.s) {
        for (const auto &a : c.adversaries) {
            require_adversary(a, spec, s, seed);
        }
    }
}

int verify_run(const RunConfig &c, std::ostream &out) {
    require_format(c, {"json"});
    BrickworkSpec spec = require_spec(c);
    auto angles = require_angles(spec, c.angles, "--angles");
    uint64_t seed = require_seed(c);
    validate_verify(c, spec, seed, true);

    Cell cell = run_cell(c, spec, angles, c.s[0], c.adversaries[0], seed);
    ordered_json rep = report_header(c);
    ordered_json fields = cell_json(cell);
    for (const auto &[k, v] : fields.items()) {
        rep[k] = v;
    }
    emit(c, rep, out);
    return cell.passed ? kExitPass : kExitPropertyFailure;
}

int verify_sweep(const RunConfig &c, std::ostream &out) {
    require_format(c, {"csv", "json"});
    BrickworkSpec spec = require_spec(c);
    auto angles = require_angles(spec, c.angles, "--angles");
    uint64_t seed = require_seed(c);
    validate_verify(c, spec, seed, false);

    std::vector<Cell> cells;
    for (const auto &a : c.adversaries) {
        for (int s : c.s) {
            cells.push_back(run_cell(c, spec, angles, s, a, seed));
        }
    }
    bool passed = true;
    for (const auto &cell : cells) {
        passed = passed && cell.passed;
    }
    if (c.format == "csv") {
        std::ostringstream csv;
        csv << "s,adversary,m,n,trials,acc_rate,p_incorrect,sigma,ci_low,ci_high,epsilon_bound,analytic_bound,"
               "trap_pass_rate,seed,passed\n";
        for (const auto &cell : cells) {
            const VerificationReport &r = cell.report;
            double pass_rate = r.trap_rounds ? double(r.trap_rounds_passed) / double(r.trap_rounds) : 1.0;
            csv << cell.s << ",\"" << cell.adversary << "\"," << r.m << "," << r.n << "," << r.trials << ","
                << csv_number(r.acc_rate) << "," << csv_number(r.p_incorrect) << "," << csv_number(r.sigma) << ","
                << csv_number(r.ci_low) << "," << csv_number(r.ci_high) << "," << csv_number(r.epsilon_bound) << ","
                << (r.analytic_bound ? csv_number(*r.analytic_bound) : "") << "," << csv_number(pass_rate) << ","
                << r.seed << "," << (cell.passed ? 1 : 0) << "\n";
        }
        emit(c, csv.str(), out);
    } else {
        ordered_json rep = report_header(c);
        ordered_json list = ordered_json::array();
        for (const auto &cell : cells) {
            list.push_back(cell_json(cell));
        }
        rep["cells"] = list;
        rep["passed"] = passed;
        emit(c, rep, out);
    }
    return passed ? kExitPass : kExitPropertyFailure;
}

std::optional<uint64_t> env_seed() {
    const char *raw = std::getenv("OPQ_SEED");
    if (!raw || !*raw) {
        return std::nullopt;
    }
    char *end = nullptr;
    errno = 0;
    unsigned long long v = std::strtoull(raw, &end, 10);
    if (errno || *end || raw[0] == '-') {
        usage(std::string("OPQ_SEED='") + raw + "' is not an unsigned integer");
    }
    return v;
}

}  // namespace

int dispatch(const RunConfig &config, std::ostream &out, std::ostream &err) {
    try {
        const std::string &sub = config.subcommand;
        if (sub == "pattern run") {
            return pattern_run(config, out);
        } else if (sub == "pattern check") {
            return pattern_check(config, out);
        } else if (sub == "purity audit") {
            return purity_audit(config, out);
        } else if (sub == "brickwork gen") {
            return brickwork_gen(config, out);
        } else if (sub == "blind run") {
            return blind_run(config, out);
        } else if (sub == "blind audit") {
            return blind_audit(config, out);
        } else if (sub == "verify run") {
            return verify_run(config, out);
        } else if (sub == "verify sweep") {
            return verify_sweep(config, out);
        }
        usage("unknown subcommand '" + sub + "'");
    } catch (const UsageError &e) {
        err << "opq: " << e.message << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        err << "opq: error: " << e.what() << "\n";
        return kExitPropertyFailure;
    }
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Measurement-based, blind and verifiable delegated quantum computation toolkit", "opq"};
    app.set_version_flag("--version", std::string(OPQ_VERSION_STRING));
    app.require_subcommand(1);
    RunConfig c;

    auto add_out = [&](CLI::App *sub, const char *formats) {
        sub->add_option("--out,-o", c.out_path, "Write the report here instead of stdout");
        sub->add_option("--format", c.format, std::string("Report format (") + formats + ")");
    };
    auto add_seed = [&](CLI::App *sub) {
        sub->add_option("--seed", c.seed, "Seed; falls back to OPQ_SEED");
    };
    auto add_spec = [&](CLI::App *sub, bool required) {
        auto *w = sub->add_option("--width,-w", c.width, "Brickwork width (rows)");
        auto *d = sub->add_option("--depth,-d", c.depth, "Brickwork depth (columns)");
        if (required) {
            w->required();
            d->required();
        }
    };
    auto add_angles = [&](CLI::App *sub, const char *name, std::vector<int> &target, const char *help) {
        return sub->add_option(name, target, help)->delimiter(',');
    };
    auto add_verify = [&](CLI::App *sub) {
        add_spec(sub, true);
        add_angles(sub, "--angles", c.angles, "Measurement angles in eighths of pi/4 steps, column-major");
        sub->add_option("--s", c.s, "Number of rounds (comma separated for a sweep)")->delimiter(',')->required();
        sub->add_option("--adversary", c.adversaries,
                        "honest | flip:all@(r,c) | flip:K@(r,c) | pauli:P@[K:]out(r) | pauli:P@[K:](r,c) | "
                        "unitary:S (repeatable)")
            ->required();
        sub->add_option("--trials", c.trials, "Monte Carlo trials")->required();
        sub->add_option("--jobs,-j", c.jobs, "Worker threads for trials");
        sub->add_flag("--audit-server-purity", c.audit_server, "Record the server's purity at every step");
        add_seed(sub);
    };

    auto *pattern = app.add_subcommand("pattern", "Pattern files: execute or check");
    pattern->require_subcommand(1);
    auto *pattern_run_cmd = pattern->add_subcommand("run", "Execute a pattern on |+> inputs");
    pattern_run_cmd->add_option("--pattern,-p", c.pattern_path, "Pattern JSON file")->required();
    pattern_run_cmd->add_flag("--sample", c.sample, "Sample one branch instead of enumerating");
    add_seed(pattern_run_cmd);
    add_out(pattern_run_cmd, "json");
    auto *pattern_check_cmd = pattern->add_subcommand("check", "Check runnability, flow and determinism");
    pattern_check_cmd->add_option("--pattern,-p", c.pattern_path, "Pattern JSON file")->required();
    add_out(pattern_check_cmd, "json");

    auto *purity = app.add_subcommand("purity", "Purity parameter audits");
    purity->require_subcommand(1);
    auto *purity_audit_cmd = purity->add_subcommand("audit", "Audit purity over every branch and command");
    purity_audit_cmd->add_option("--pattern,-p", c.pattern_path, "Pattern JSON file (otherwise a brickwork)");
    add_spec(purity_audit_cmd, false);
    add_angles(purity_audit_cmd, "--angles", c.angles, "Brickwork angles, column-major");
    purity_audit_cmd->add_option("--c", c.purity_constant, "Allowed excess over the input purity, in bits");
    purity_audit_cmd->add_flag("--upfront", c.upfront, "Audit the prepare-everything-first ordering instead");
    add_out(purity_audit_cmd, "json|csv");

    auto *brick = app.add_subcommand("brickwork", "Brickwork patterns");
    brick->require_subcommand(1);
    auto *brick_gen_cmd = brick->add_subcommand("gen", "Write a brickwork pattern file");
    add_spec(brick_gen_cmd, true);
    add_angles(brick_gen_cmd, "--angles", c.angles, "Angles, column-major; default all zero");
    add_out(brick_gen_cmd, "json");

    auto *blind = app.add_subcommand("blind", "Blind delegated computation");
    blind->require_subcommand(1);
    auto *blind_run_cmd = blind->add_subcommand("run", "Run the blind protocol against an honest server");
    add_spec(blind_run_cmd, true);
    add_angles(blind_run_cmd, "--angles", c.angles, "Angles, column-major");
    blind_run_cmd->add_flag("--choi", c.choi, "Feed halves of maximally entangled pairs as inputs");
    blind_run_cmd->add_flag("--payloads", c.payloads, "Record quantum payloads in the transcript");
    add_seed(blind_run_cmd);
    add_out(blind_run_cmd, "json");
    auto *blind_audit_cmd = blind->add_subcommand("audit", "Compare averaged server views of two angle vectors");
    add_spec(blind_audit_cmd, true);
    add_angles(blind_audit_cmd, "--angles-a", c.angles, "First angle vector")->required();
    add_angles(blind_audit_cmd, "--angles-b", c.angles_b, "Second angle vector")->required();
    blind_audit_cmd->add_flag("--exhaustive", c.exhaustive, "Exact sum over every secret (the only mode)");
    blind_audit_cmd->add_flag("--no-mask", c.no_mask, "Disable the r one-time pad");
    add_out(blind_audit_cmd, "json");

    auto *verify = app.add_subcommand("verify", "Trap-based verification");
    verify->require_subcommand(1);
    auto *verify_run_cmd = verify->add_subcommand("run", "Estimate p_incorrect for one strategy");
    add_verify(verify_run_cmd);
    add_out(verify_run_cmd, "json");
    auto *verify_sweep_cmd = verify->add_subcommand("sweep", "Estimate over several s and strategies");
    add_verify(verify_sweep_cmd);
    add_out(verify_sweep_cmd, "csv|json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        const CLI::App *shown = &app;
        while (!shown->get_subcommands().empty()) {
            shown = shown->get_subcommands().front();
        }
        out << shown->help();
        return kExitPass;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitPass;
    } catch (const CLI::CallForVersion &) {
        out << OPQ_VERSION_STRING << "\n";
        return kExitPass;
    } catch (const CLI::ParseError &e) {
        const CLI::App *shown = &app;
        while (!shown->get_subcommands().empty()) {
            shown = shown->get_subcommands().front();
        }
        err << "opq: " << e.what() << "\n\n" << shown->help();
        return kExitUsage;
    }

    const CLI::App *group = app.get_subcommands().front();
    c.subcommand = group->get_name() + " " + group->get_subcommands().front()->get_name();
    if (c.subcommand == "verify sweep" && !verify_sweep_cmd->count("--format")) {
        c.format = "csv";
    }
    try {
        if (!c.seed) {
            c.seed = env_seed();
        }
    } catch (const UsageError &e) {
        err << "opq: " << e.message << "\n";
        return kExitUsage;
    }
    return dispatch(c, out, err);
}

}  // namespace opq::cli
