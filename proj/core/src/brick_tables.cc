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

#include <stdexcept>

#include "opq/dqc1.h"

namespace opq {

namespace {

// Found by search_brick_angles (tools/brick_search) and checked against reference_unitary.
constexpr BrickAngles kHadamardUpper = {{{0, 2, 0, 0, 2, 2, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0}}};
constexpr BrickAngles kHadamardLower = {{{0, 0, 0, 0, 0, 0, 0, 0}, {0, 2, 0, 0, 2, 2, 0, 0}}};
constexpr BrickAngles kTUpper = {{{0, 0, 0, 0, 7, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0}}};
constexpr BrickAngles kTLower = {{{0, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 7, 0, 0, 0}}};
constexpr BrickAngles kCnotUpperControl = {{{0, 0, 0, 0, 6, 0, 0, 0}, {0, 0, 0, 2, 0, 6, 0, 0}}};
constexpr BrickAngles kCnotLowerControl = {{{0, 0, 0, 2, 0, 6, 0, 0}, {0, 0, 0, 0, 6, 0, 0, 0}}};

}  // namespace

const BrickAngles &brick_table(GateKind kind, bool lower) {
    switch (kind) {
        case GateKind::kH:
            return lower ? kHadamardLower : kHadamardUpper;
        case GateKind::kT:
            return lower ? kTLower : kTUpper;
        case GateKind::kCNOT:
            return lower ? kCnotLowerControl : kCnotUpperControl;
    }
    throw std::invalid_argument("unknown gate kind");
}

}  // namespace opq
