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

#ifndef OPQ_BLINDPROTO_H
#define OPQ_BLINDPROTO_H

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "opq/dqc1.h"
#include "opq/mbqc.h"
#include "opq/qmat.h"

namespace opq {

/// ((-1)^sx a + sz pi + theta + r pi) mod 8, in eighths of a turn of pi/4.
Angle compute_delta(Angle a, int sx, int sz, Angle theta, int r);

struct QubitTransfer {
    Tag tag;
    std::optional<DensityState> payload;
};
struct AngleMsg {
    Tag tag;
    Angle delta;
};
struct OutcomeMsg {
    Tag tag;
    int b;
};
struct FinalLayer {
    std::vector<Tag> tags;
    std::optional<DensityState> payload;
};
using Message = std::variant<QubitTransfer, AngleMsg, OutcomeMsg, FinalLayer>;

enum class Party { kClient, kServer, kHarness };

struct LoggedMessage {
    Party from;
    int round;
    Message message;
};

class ProtocolAbort : public std::runtime_error {
   public:
    ProtocolAbort(size_t step, const std::string &what);
    size_t step() const {
        return step_;
    }

   private:
    size_t step_;
};

/// In-process duplex queue. Every message is logged; receiving checks the expected variant.
class Channel {
   public:
    void send(Party from, Message message);
    template <class T>
    T receive(Party to, size_t step) {
        Message m = pop(to, step);
        if (auto *t = std::get_if<T>(&m)) {
            return std::move(*t);
        }
        throw ProtocolAbort(step, "unexpected message type");
    }
    const std::vector<LoggedMessage> &log() const {
        return log_;
    }
    void set_round(int round) {
        round_ = round;
    }
    bool idle() const {
        return to_client_.empty() && to_server_.empty();
    }

   private:
    Message pop(Party to, size_t step);

    std::vector<Message> to_client_, to_server_;
    std::vector<LoggedMessage> log_;
    int round_ = 0;
};

/// Joint state of a session with an owner per qubit.
struct World {
    DensityState state;
    std::map<Tag, Party> owner;

    void add(const DensityState &qubits, Party party);
    std::vector<Tag> owned_by(Party party) const;
    void discard(const std::vector<Tag> &tags);
};

/// The server's handle onto the qubits it holds.
class ServerRegister {
   public:
    ServerRegister(World &world, std::mt19937_64 &rng);

    bool holds(const Tag &tag) const;
    std::vector<Tag> held() const;
    void apply(const ComplexMatrix &gate, const std::vector<Tag> &targets);
    void entangle(const Tag &a, const Tag &b);
    /// Samples an outcome at angle delta, removes the qubit and returns the bit.
    int measure(const Tag &tag, Angle delta);
    void prepare_mixed(const Tag &tag);
    std::mt19937_64 &rng() {
        return rng_;
    }

   private:
    void require(const Tag &tag) const;

    World &world_;
    std::mt19937_64 &rng_;
};

/// Server callbacks for each protocol step. The defaults are honest.
class ServerBehavior {
   public:
    virtual ~ServerBehavior() = default;
    virtual void begin_round(int round) {
        (void)round;
    }
    virtual void prepare_input(ServerRegister &reg, const Tag &tag) {
        reg.prepare_mixed(tag);
    }
    virtual void on_receive(ServerRegister &reg, const Tag &tag) {
        (void)reg;
        (void)tag;
    }
    virtual void entangle(ServerRegister &reg, const Tag &a, const Tag &b) {
        reg.entangle(a, b);
    }
    virtual int measure(ServerRegister &reg, const Tag &tag, Angle delta) {
        return reg.measure(tag, delta);
    }
    virtual void before_final_layer(ServerRegister &reg, const std::vector<Tag> &outputs) {
        (void)reg;
        (void)outputs;
    }
};

class HonestServer : public ServerBehavior {};

/// Reports 1 - b for every measurement.
class FlipAllServer : public ServerBehavior {
   public:
    int measure(ServerRegister &reg, const Tag &tag, Angle delta) override {
        return 1 - reg.measure(tag, delta);
    }
};

/// How the client produces a qubit it sends.
struct QubitPlan {
    enum class Kind { kPlus, kBasis, kMixed, kMixedPurified };
    Kind kind = Kind::kPlus;
    /// Rotation for kPlus (|+_theta>) and kMixedPurified (R_z(theta) on the sent half).
    Angle theta;
    int bit = 0;
};

/// Everything one blind round needs: the rewritten pattern fixes the step order and dependency
/// sets; the maps carry the client's secrets.
struct RoundPlan {
    int round = 1;
    Pattern pattern;
    std::map<Tag, QubitPlan> client_qubits;
    std::set<Tag> server_inputs;
    std::map<Tag, Angle> theta;
    std::map<Tag, int> r;
    /// Measurement angles sent verbatim (dummies).
    std::map<Tag, Angle> fixed_delta;
    bool use_dependencies = true;
    /// Undo R_z(theta) on the final layer and apply the Pauli corrections.
    bool correct_outputs = true;
};

struct ServerPurityStep {
    int round;
    size_t step;
    double purity;
    double excess;
};

struct SessionOptions {
    bool record_payloads = false;
    bool audit_server_purity = false;
};

struct RoundResult {
    std::map<Tag, int> b;
    std::map<Tag, int> s;
    std::vector<Tag> final_layer;
    double server_input_purity = 0;
    std::vector<ServerPurityStep> server_purity;
};

/// Runs one round between the client (the plan) and `server`. On return the final layer is client
/// owned inside `world`.
RoundResult run_round(World &world, const RoundPlan &plan, ServerBehavior &server, Channel &channel,
                      std::mt19937_64 &rng, const SessionOptions &options = {});

struct ClientSecrets {
    std::map<Tag, Angle> theta;
    std::map<Tag, int> r;
    std::map<Tag, int> s;
};

struct BlindRunOptions {
    /// Client supplies every input as half of a maximally entangled pair (Choi mode); otherwise
    /// (1,1) is |+_theta> and the server prepares the other inputs as I/2.
    bool choi_input = false;
    bool audit_server_purity = false;
    bool record_payloads = false;
};

struct Transcript {
    std::vector<LoggedMessage> messages;
    /// Final layer in output order, then reference tags (Choi mode).
    DensityState output;
    ClientSecrets secrets;
    std::map<Tag, int> b;
    double server_input_purity = 0;
    std::vector<ServerPurityStep> server_purity;
};

Transcript run_blind(const BrickworkSpec &spec, const std::map<Tag, Angle> &angles, ServerBehavior &server,
                     uint64_t seed, const BlindRunOptions &options = {});

/// State the honest protocol should deliver in literal mode: U (|+><+| (x) I/2^{w-1}) U^dagger.
DensityState blind_expected_output(const BrickworkSpec &spec, const std::map<Tag, Angle> &angles);

std::string transcript_json(const Transcript &transcript, bool include_payloads);

/// Averaged server view: classical register contents -> accumulated matrix over received qubits.
class AveragedView {
   public:
    void add(const std::vector<int> &classical, const ComplexVector &quantum, double weight);
    double distance(const AveragedView &other) const;

   private:
    std::map<std::vector<int>, ComplexMatrix> blocks_;
};

/// |+_theta> as a 2-vector.
ComplexVector plus_vector(int eighths);
/// Kronecker product of state vectors, first factor most significant.
ComplexVector product_vector(const std::vector<ComplexVector> &factors);

/// Server view of one blind run on a flowed graph, averaged uniformly over every theta and r (r
/// fixed to 0 when `r_mask` is false), with the server's reported bits fixed to `reports` (one per
/// measurement, in measurement order).
AveragedView averaged_round_view(const OpenGraph &graph, const Flow &flow, const std::map<Tag, Angle> &angles,
                                 const std::vector<int> &reports, bool r_mask = true);

struct BlindnessAuditOptions {
    bool r_mask = true;
    uint64_t max_terms = uint64_t{1} << 24;
};

struct BlindnessAuditResult {
    double distance = 0;
    /// Secret assignments averaged per view.
    uint64_t secret_terms = 0;
    uint64_t report_vectors = 0;
    std::vector<int> worst_reports;
};

/// Exhaustive averaged-view comparison for two angle vectors on a small flowed graph. The first
/// input is the client's pure qubit, other inputs are server-prepared.
BlindnessAuditResult blindness_audit(const OpenGraph &graph, const Flow &flow, const std::map<Tag, Angle> &angles_a,
                                     const std::map<Tag, Angle> &angles_b, const BlindnessAuditOptions &options = {});

/// splitmix64 finalizer; used to derive independent per-trial seeds.
uint64_t mix_seed(uint64_t seed, uint64_t index);

}  // namespace opq

#endif
