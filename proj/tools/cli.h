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

#ifndef OPQ_TOOLS_CLI_H
#define OPQ_TOOLS_CLI_H

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace opq::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitPropertyFailure = 1;
inline constexpr int kExitUsage = 2;

/// Fully resolved command line. Exactly one subcommand is set.
struct RunConfig {
    std::string subcommand;
    std::string pattern_path;
    int width = 0;
    int depth = 0;
    std::vector<int> angles;
    std::vector<int> angles_b;
    std::vector<int> s;
    std::vector<std::string> adversaries;
    uint64_t trials = 0;
    std::optional<uint64_t> seed;
    std::string out_path;
    std::string format = "json";
    unsigned jobs = 1;
    double purity_constant = 2.0;
    bool upfront = false;
    bool sample = false;
    bool choi = false;
    bool payloads = false;
    bool exhaustive = false;
    bool no_mask = false;
    bool audit_server = false;
};

/// Thrown for configurations rejected before any computation; maps to exit code 2.
struct UsageError {
    std::string message;
};

/// Runs a resolved configuration. Reports go to the output file or `out`; diagnostics to `err`.
int dispatch(const RunConfig &config, std::ostream &out, std::ostream &err);

/// Parses argv (falling back to OPQ_SEED for the seed) and dispatches.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace opq::cli

#endif
