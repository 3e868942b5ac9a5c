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

// Regenerates the frozen brick tables by exhaustive search. Prints C++ initializers.

#include <chrono>
#include <cstdio>

#include "opq/dqc1.h"

using namespace opq;

int main() {
    struct Target {
        const char *name;
        ComplexMatrix unitary;
    };
    const Target targets[] = {
        {"kHadamardUpper", kron(gates::H(), gates::I())},
        {"kHadamardLower", kron(gates::I(), gates::H())},
        {"kTUpper", kron(gates::T(), gates::I())},
        {"kTLower", kron(gates::I(), gates::T())},
        {"kCnotUpperControl", circuit_unitary({{GateKind::kCNOT, 2, 1}}, 2)},
        {"kCnotLowerControl", circuit_unitary({{GateKind::kCNOT, 1, 2}}, 2)},
    };
    int missing = 0;
    for (const auto &t : targets) {
        auto start = std::chrono::steady_clock::now();
        BrickAngles a{};
        bool found = search_brick_angles(t.unitary, a);
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!found) {
            std::printf("// %s: no brick found (%.1f s)\n", t.name, seconds);
            missing++;
            continue;
        }
        std::printf("// %.1f s\nconstexpr BrickAngles %s = {{{", seconds, t.name);
        for (int w = 0; w < 2; w++) {
            std::printf(w ? "}, {" : "");
            for (int c = 0; c < kBrickColumns; c++) {
                std::printf("%s%d", c ? ", " : "", a[w][c]);
            }
        }
        std::printf("}}};\n");
        std::fflush(stdout);
    }
    return missing;
}
