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

#include <benchmark/benchmark.h>

#include "opq/blindproto.h"
#include "opq/dqc1.h"
#include "opq/mbqc.h"
#include "opq/verifyproto.h"

using namespace opq;

namespace {

std::map<Tag, Angle> angles_for(const BrickworkSpec &spec) {
    std::vector<Angle> flat;
    for (int k = 0; k < spec.measured(); k++) {
        flat.push_back(Angle(k % 8));
    }
    return brickwork_angles(spec, flat);
}

DensityState random_state(int qubits, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Tag> tags;
    for (int q = 0; q < qubits; q++) {
        tags.push_back("q" + std::to_string(q));
    }
    return DensityState(tags, random_density_matrix(size_t(1) << qubits, rng));
}

void BM_apply_gate_single(benchmark::State &state) {
    int n = (int)state.range(0);
    DensityState s = random_state(n, 1);
    ComplexMatrix h = gates::H();
    for (auto _ : state) {
        s = apply_gate(s, h, {"q" + std::to_string(n / 2)});
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_apply_gate_single)->DenseRange(2, 8, 2);

void BM_apply_gate_cz(benchmark::State &state) {
    int n = (int)state.range(0);
    DensityState s = random_state(n, 2);
    ComplexMatrix cz = gates::CZ();
    for (auto _ : state) {
        s = apply_gate(s, cz, {"q0", "q" + std::to_string(n - 1)});
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_apply_gate_cz)->DenseRange(2, 8, 2);

void BM_partial_trace(benchmark::State &state) {
    int n = (int)state.range(0);
    DensityState s = random_state(n, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(partial_trace(s, "q0"));
    }
}
BENCHMARK(BM_partial_trace)->DenseRange(2, 8, 2);

void BM_execute_brickwork_enumerate(benchmark::State &state) {
    BrickworkSpec spec{(int)state.range(0), (int)state.range(1)};
    auto [g, f] = brickwork(spec);
    Pattern p = rewrite_with_flow(g, f, angles_for(spec));
    DensityState in = DensityState::plus("(1,1)", Angle(0));
    for (int i = 2; i <= spec.width; i++) {
        in = tensor(in, DensityState::maximally_mixed(vertex_tag(i, 1)));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(execute_pattern(p, in));
    }
}
BENCHMARK(BM_execute_brickwork_enumerate)->Args({1, 5})->Args({2, 3})->Args({2, 5})->Unit(benchmark::kMillisecond);

void BM_blind_run(benchmark::State &state) {
    BrickworkSpec spec{(int)state.range(0), (int)state.range(1)};
    auto angles = angles_for(spec);
    uint64_t seed = 0;
    for (auto _ : state) {
        HonestServer server;
        benchmark::DoNotOptimize(run_blind(spec, angles, server, seed++));
    }
}
BENCHMARK(BM_blind_run)->Args({2, 3})->Args({2, 5})->Unit(benchmark::kMicrosecond);

void BM_verification_trial(benchmark::State &state) {
    BrickworkSpec spec{2, 3};
    int s = (int)state.range(0);
    auto angles = angles_for(spec);
    AdversaryStrategy adv = parse_adversary("flip:all@(1,2)", spec);
    uint64_t seed = 0;
    for (auto _ : state) {
        TrapConfig config = setup_rounds(angles, spec, s, seed);
        benchmark::DoNotOptimize(run_verification(config, angles, adv, seed++));
    }
}
BENCHMARK(BM_verification_trial)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_blindness_audit_line(benchmark::State &state) {
    BrickworkSpec spec{1, 3};
    auto [g, f] = brickwork(spec);
    auto a = brickwork_angles(spec, {Angle(0), Angle(0)});
    auto b = brickwork_angles(spec, {Angle(2), Angle(6)});
    for (auto _ : state) {
        benchmark::DoNotOptimize(blindness_audit(g, f, a, b));
    }
}
BENCHMARK(BM_blindness_audit_line)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
